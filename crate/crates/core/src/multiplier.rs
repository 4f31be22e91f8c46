//! Stationary phase layer: the critical point `t_c` of `φ_{ξ,η}(t) = −(ξ/2^j)t + ηγ(t/2^j)`, the
//! phase `Ψ = −φ(t_c)`, and the profiles `R(s) = ∫₁ˢ r` and
//! `ϑ_{p₀}(y) = p₀∫₀^{r^{-1}(y)} t r′(t) dt`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::{Curve, CurveDescriptor, Regime};
use crate::error::{LabError, Result};
use crate::quad::adaptive_simpson;

pub const BISECTION_TOL: f64 = 1e-12;
pub const NEWTON_STEPS: usize = 8;
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct CriticalPointQuery<'a> {
    pub curve: &'a Curve,
    pub xi: f64,
    pub eta: f64,
    pub j: i32,
}

impl<'a> CriticalPointQuery<'a> {
    pub fn new(curve: &'a Curve, xi: f64, eta: f64, j: i32) -> Self {
        CriticalPointQuery { curve, xi, eta, j }
    }

    fn scale(&self) -> f64 {
        2f64.powi(self.j)
    }

    /// `φ_{ξ,η}(t) = −(ξ/2^j)t + ηγ(t/2^j)`.
    pub fn phase(&self, t: f64) -> f64 {
        let s = self.scale();
        -(self.xi / s) * t + self.eta * self.curve.eval(t / s)
    }

    /// `φ′_{ξ,η}(t) = −ξ/2^j + (η/2^j)γ′(t/2^j)`.
    pub fn phase_derivative(&self, t: f64) -> f64 {
        let s = self.scale();
        (-self.xi + self.eta * self.curve.d1(t / s)) / s
    }

    fn phase_second(&self, t: f64) -> f64 {
        let s = self.scale();
        self.eta * self.curve.d2(t / s) / (s * s)
    }

    /// The critical point window `±[2^{-k}, 2^k]`, clipped to where γ′ is
    /// monotone, for the given side.
    pub fn window(&self, side: f64) -> (f64, f64) {
        let k = self.curve.k_gamma as i32;
        let radius = if side > 0.0 { self.curve.radius().0 } else { self.curve.radius().1 };
        (2f64.powi(-k), 2f64.powi(k).min(radius * self.scale()))
    }
}

fn bisect(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    let (ga, gb) = (g(a), g(b));
    if ga == 0.0 {
        return Some(a);
    }
    if gb == 0.0 {
        return Some(b);
    }
    if !(ga.is_finite() && gb.is_finite()) || ga.signum() == gb.signum() {
        return None;
    }
    let a_neg = ga < 0.0;
    while b - a > BISECTION_TOL * a.abs().max(1.0) {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return Some(m);
        }
        if (gm < 0.0) == a_neg {
            a = m;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// The unique `t_c` in the window with `φ′(t_c) = 0`: bisection on the
/// monotone map `t ↦ γ′(t/2^j)`, polished by Newton. The positive window is
/// tried first, then its mirror image.
pub fn critical_point(q: &CriticalPointQuery) -> Result<f64> {
    if q.eta == 0.0 || !q.eta.is_finite() || !q.xi.is_finite() {
        return Err(LabError::NoCriticalPoint { ratio: q.xi / q.eta });
    }
    let ratio = q.xi / q.eta;
    let s = q.scale();
    let g = |t: f64| q.curve.d1(t / s) - ratio;
    let found = [1.0, -1.0].into_iter().find_map(|side| {
        let (lo, hi) = q.window(side);
        if lo >= hi {
            return None;
        }
        if side > 0.0 {
            bisect(&g, lo, hi)
        } else {
            bisect(&|u: f64| g(-u), lo, hi).map(|u| -u)
        }
    });
    let mut t = found.ok_or(LabError::NoCriticalPoint { ratio })?;
    let mut best = q.phase_derivative(t).abs();
    for _ in 0..NEWTON_STEPS {
        let d2 = q.phase_second(t);
        if d2 == 0.0 || !d2.is_finite() {
            break;
        }
        let next = t - q.phase_derivative(t) / d2;
        let res = q.phase_derivative(next).abs();
        if !(res < best) {
            break;
        }
        t = next;
        best = res;
    }
    Ok(t)
}

/// `Ψ_η(ξ) = −φ_{ξ,η}(t_c)`.
pub fn phase_at_critical(q: &CriticalPointQuery) -> Result<f64> {
    let t = critical_point(q)?;
    Ok(-q.phase(t))
}

/// `|∂Ψ/∂ξ − t_c/2^j|` with `∂Ψ/∂ξ` from a centred difference.
pub fn envelope_defect(q: &CriticalPointQuery) -> Result<f64> {
    let t = critical_point(q)?;
    if q.xi == 0.0 {
        return Err(LabError::Domain { what: "envelope check needs ξ ≠ 0; ξ", value: 0.0 });
    }
    let h = 1e-5 * q.xi.abs();
    let plus = phase_at_critical(&CriticalPointQuery { xi: q.xi + h, ..*q })?;
    let minus = phase_at_critical(&CriticalPointQuery { xi: q.xi - h, ..*q })?;
    Ok(((plus - minus) / (2.0 * h) - t / q.scale()).abs())
}

/// Random queries with a critical point inside the window: `j` in
/// `[j₀, j_max]` with `2^{-j₀} ≤ δ`, `|η| ∈ [1/2, 50]`, and `ξ = ηγ′(t/2^j)`
/// for `t` log-uniform in `[2^{1-k}, 2^{k-1}]`.
pub fn sample_admissible_queries(curve: &Curve, seed: u64, count: usize, j_max: i32) -> Vec<(f64, f64, i32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j0 = ((-curve.delta.log2()).ceil() as i32).clamp(0, j_max);
    let k = curve.k_gamma as f64;
    (0..count)
        .map(|_| {
            let j = rng.random_range(j0..=j_max);
            let mag = rng.random_range(0.5f64.ln()..50f64.ln()).exp();
            let eta = if rng.random_bool(0.5) { mag } else { -mag };
            let t = rng.random_range((1.0 - k)..(k - 1.0)).exp2();
            let xi = eta * curve.d1(t / 2f64.powi(j));
            (xi, eta, j)
        })
        .collect()
}

/// Closed-form `Q` for pure power profiles `Q(t) = σ(t)|t|^a/a`.
#[derive(Debug, Clone, Copy)]
struct PowerProfile {
    a: f64,
    /// `Q′` is odd (so `r` is defined for negative arguments).
    odd_derivative: bool,
}

impl PowerProfile {
    fn of(curve: &Curve) -> Option<PowerProfile> {
        match curve.descriptor()? {
            CurveDescriptor::Poly(terms) if terms.len() == 1 => Some(PowerProfile {
                a: terms[0].1 as f64,
                odd_derivative: terms[0].1 % 2 == 0,
            }),
            &CurveDescriptor::Pow { alpha, odd } => Some(PowerProfile {
                a: alpha,
                odd_derivative: !odd,
            }),
            _ => None,
        }
    }

    fn q(&self, y: f64) -> f64 {
        let v = y.abs().powf(self.a) / self.a;
        if self.odd_derivative || y >= 0.0 {
            v
        } else {
            -v
        }
    }

    fn r(&self, s: f64) -> Option<f64> {
        if s == 0.0 && self.a < 1.0 {
            return None;
        }
        if s < 0.0 && !self.odd_derivative {
            return None;
        }
        Some(s.signum() * s.abs().powf(1.0 / (self.a - 1.0)))
    }

    /// `R(s) = (a−1)/a (|s|^{a/(a−1)} − 1)`.
    fn big_r(&self, s: f64) -> Option<f64> {
        self.r(s)?;
        Some((self.a - 1.0) / self.a * (s.abs().powf(self.a / (self.a - 1.0)) - 1.0))
    }
}

/// Fast evaluators for `R`, `ϑ` and `r^{-1}` of one curve.
///
/// `R` is evaluated through the Legendre form
/// `R(s) = s·r(s) − Q(r(s)) − (1 − Q(1))`, which equals `∫₁ˢ r` whenever
/// the path stays inside the domain of `r`, and closed forms are used for
/// pure powers. [`r_eval`] and [`theta_eval`] are the quadrature versions.
#[derive(Debug, Clone)]
pub struct PhaseProfile {
    curve: Curve,
    power: Option<PowerProfile>,
    legendre_constant: f64,
    theta_offset: f64,
}

impl PhaseProfile {
    pub fn new(curve: &Curve) -> PhaseProfile {
        let power = PowerProfile::of(curve);
        let q1 = power.map(|p| p.q(1.0)).unwrap_or_else(|| curve.q(1.0));
        // r(0) = 0 and Q(0) = 0 when γ′ vanishes at 0; otherwise r(0) is undefined.
        let theta_offset = match curve.regime {
            Regime::DerivativeVanishesAtZero => 0.0,
            Regime::DerivativeBlowsUpAtZero => f64::NAN,
        };
        PhaseProfile {
            curve: curve.clone(),
            power,
            legendre_constant: 1.0 - q1,
            theta_offset,
        }
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    /// `1 − Q(1)`: the value `s r(s) − Q(r(s))` takes at `s = 1`.
    pub fn legendre_constant(&self) -> f64 {
        self.legendre_constant
    }

    pub fn q(&self, y: f64) -> f64 {
        match self.power {
            Some(p) => p.q(y),
            None => self.curve.q(y),
        }
    }

    pub fn r(&self, s: f64) -> Result<f64> {
        let err = LabError::Domain { what: "r argument", value: s };
        match self.power {
            Some(p) => p.r(s).ok_or(err),
            None => self.curve.r(s).map_err(|_| err),
        }
    }

    /// `r^{-1}(y) = Q′(y)`.
    pub fn r_inverse(&self, y: f64) -> f64 {
        match self.power {
            Some(p) => {
                let v = y.abs().powf(p.a - 1.0);
                if p.odd_derivative && y < 0.0 {
                    -v
                } else {
                    v
                }
            }
            None => self.curve.q1(y),
        }
    }

    /// `R(s)`.
    pub fn big_r(&self, s: f64) -> Result<f64> {
        if let Some(p) = self.power {
            return p.big_r(s).ok_or(LabError::Domain { what: "R argument", value: s });
        }
        let r = self.r(s)?;
        Ok(s * r - self.curve.q(r) - self.legendre_constant)
    }

    /// `ϑ_{p₀}(y) = p₀(Q(y) − Q(r(0)))`.
    pub fn theta(&self, p0: f64, y: f64) -> Result<f64> {
        if !self.theta_offset.is_finite() {
            return Err(LabError::Domain { what: "theta: r(0) undefined for", value: y });
        }
        Ok(p0 * (self.q(y) - self.theta_offset))
    }

    /// Sup over `grid` of `|2^jΨ_{1/γ′(2^{-j})}(s) − (R(s) + 1 − Q(1))|`.
    pub fn rj_error(&self, j: i32, grid: &[f64]) -> Result<f64> {
        grid.iter()
            .map(|&s| scaling_identity_residual(self, s, 1.0, j))
            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
    }
}

/// `|2^jΨ_{η/γ′(2^{-j})}(ξ) − η(R(ξ/η) + 1 − Q(1))|`.
///
/// The additive `η(1 − Q(1))` is the value of the Legendre transform of
/// `Q` at `s = 1`; it is linear in `η` and so only translates the form.
pub fn scaling_identity_residual(profile: &PhaseProfile, xi: f64, eta: f64, j: i32) -> Result<f64> {
    let c = profile.curve();
    let eta_scaled = eta / c.d1(2f64.powi(-j));
    let psi = phase_at_critical(&CriticalPointQuery::new(c, xi, eta_scaled, j))?;
    let s = xi / eta;
    let target = eta * (profile.big_r(s)? + profile.legendre_constant());
    Ok((2f64.powi(j) * psi - target).abs())
}

/// `R(s) = ∫₁ˢ r(u) du` by adaptive Simpson; the path must lie in the domain of `r`.
pub fn r_eval(c: &Curve, s: f64) -> Result<f64> {
    if s == 1.0 {
        return Ok(0.0);
    }
    let (lo, hi) = if s < 1.0 { (s, 1.0) } else { (1.0, s) };
    if lo <= 0.0 && c.regime == Regime::DerivativeBlowsUpAtZero {
        return Err(LabError::Domain { what: "R path crosses 0 where r is undefined; s", value: s });
    }
    c.r(lo)?;
    c.r(hi)?;
    let v = adaptive_simpson(&|u| c.r(u).unwrap_or(f64::NAN), 1.0, s, QUAD_TOL);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LabError::Domain { what: "R argument", value: s })
    }
}

/// `ϑ_{p₀}(y) = p₀∫₀^{r^{-1}(y)} t r′(t) dt` by adaptive Simpson.
pub fn theta_eval(c: &Curve, p0: f64, y: f64) -> Result<f64> {
    let x = c.q1(y);
    if !x.is_finite() {
        return Err(LabError::Domain { what: "theta argument", value: y });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let eps = 1e-12 * x.abs();
    let start = eps.copysign(x);
    c.r1(start).map_err(|_| LabError::Domain { what: "theta argument", value: y })?;
    let v = adaptive_simpson(&|t| t * c.r1(t).unwrap_or(f64::NAN), start, x, QUAD_TOL);
    if v.is_finite() {
        Ok(p0 * v)
    } else {
        Err(LabError::Domain { what: "theta argument", value: y })
    }
}

/// One row of the `phase` table.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRow {
    pub xi: f64,
    pub eta: f64,
    pub j: i32,
    pub t_c: f64,
    pub psi: f64,
    /// `|φ′(t_c)|`.
    pub residual: f64,
}

pub fn phase_row(c: &Curve, xi: f64, eta: f64, j: i32) -> Result<PhaseRow> {
    let q = CriticalPointQuery::new(c, xi, eta, j);
    let t_c = critical_point(&q)?;
    Ok(PhaseRow {
        xi,
        eta,
        j,
        t_c,
        psi: -q.phase(t_c),
        residual: q.phase_derivative(t_c).abs(),
    })
}
