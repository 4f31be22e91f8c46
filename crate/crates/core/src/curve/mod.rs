//! Curves `γ` near the origin and the numerical form of the non-flat class
//! axioms: no critical points, bounded dyadic variation, convergent
//! rescaled profiles `Q` and `r`, and uniform non-flatness of both.

mod descriptor;
mod profile;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use descriptor::{CurveDescriptor, GRAMMAR};
pub use profile::{
    asymptotic_profile, growth_dichotomy, nonflatness_report, r_profile, sample_i, AsymptoticProfile, GrowthFit,
    NonflatnessReport, ProfileSlice,
};

use crate::error::{LabError, Result};

/// Scale at which the limit profiles `Q` and `r` are read off.
pub const LIMIT_J: i32 = 30;
/// Smoothness order of the class.
pub const SMOOTHNESS_N: u32 = 4;
/// Ratios `ρ = (ξ/η)/γ′(2^{-j})` probed when measuring `k(γ)`.
pub const K_PROBE_RATIOS: (f64, f64) = (1e-2, 1e2);
/// Upper bound on `k(γ)`.
pub const K_CAP: u32 = 60;
/// Number of dyadic scales probed by [`variation_count`] in the diagnostics.
pub const VARIATION_J_MAX: u32 = 40;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type InverseFn = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    DerivativeVanishesAtZero,
    DerivativeBlowsUpAtZero,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::DerivativeVanishesAtZero => "derivative_vanishes_at_zero",
            Regime::DerivativeBlowsUpAtZero => "derivative_blows_up_at_zero",
        })
    }
}

/// One line of a curve diagnostic report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// A curve with its derivatives and the measured class constants.
#[derive(Clone)]
pub struct Curve {
    name: String,
    descriptor: Option<CurveDescriptor>,
    eval: RealFn,
    deriv: RealFn,
    deriv2: Option<RealFn>,
    inverse: Option<InverseFn>,
    /// Per side (positive, negative): the largest `|t|` up to which `γ′`
    /// keeps its sign and `|γ′|` stays monotone.
    radius: (f64, f64),
    pub delta: f64,
    pub c_gamma: f64,
    pub k_gamma: u32,
    pub regime: Regime,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Curve")
            .field("name", &self.name)
            .field("delta", &self.delta)
            .field("c_gamma", &self.c_gamma)
            .field("k_gamma", &self.k_gamma)
            .field("regime", &self.regime)
            .finish()
    }
}

const SCAN_LO: f64 = 1.0 / (1u64 << 60) as f64;
const SCAN_HI: f64 = 1e6;
/// Lower end of the bracket used when inverting γ′ numerically.
const INVERSE_LO: f64 = 1e-300;
const SCAN_STEPS_PER_OCTAVE: usize = 16;

fn sgn(t: f64) -> f64 {
    if t < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Parse a descriptor and build the curve.
pub fn builtin_curve(spec: &str) -> Result<Curve> {
    Curve::from_descriptor(spec.parse()?)
}

impl Curve {
    pub fn from_descriptor(d: CurveDescriptor) -> Result<Curve> {
        let name = d.to_string();
        let (eval, deriv, deriv2, inverse): (RealFn, RealFn, RealFn, Option<InverseFn>) = match &d {
            CurveDescriptor::Poly(terms) => {
                let t0 = terms.clone();
                let t1 = terms.clone();
                let t2 = terms.clone();
                let inverse: Option<InverseFn> = if let [(c, k)] = terms[..] {
                    Some(Arc::new(move |v: f64| monomial_inverse(c, k, v)))
                } else {
                    None
                };
                (
                    Arc::new(move |t: f64| t0.iter().map(|&(c, k)| c * t.powi(k as i32)).sum()),
                    Arc::new(move |t: f64| t1.iter().map(|&(c, k)| c * k as f64 * t.powi(k as i32 - 1)).sum()),
                    Arc::new(move |t: f64| {
                        t2.iter()
                            .map(|&(c, k)| c * (k * (k - 1)) as f64 * t.powi(k as i32 - 2))
                            .sum()
                    }),
                    inverse,
                )
            }
            &CurveDescriptor::Pow { alpha, odd } => {
                let inverse: InverseFn = Arc::new(move |v: f64| {
                    // γ′(t) = α σ(t) |t|^{α-1}, σ = 1 (odd curve) or sign(t) (even curve).
                    let u = (v.abs() / alpha).powf(1.0 / (alpha - 1.0));
                    if !u.is_finite() || u == 0.0 || v == 0.0 {
                        return None;
                    }
                    if v > 0.0 {
                        Some(u)
                    } else if odd {
                        None
                    } else {
                        Some(-u)
                    }
                });
                let side = move |t: f64| if odd { 1.0 } else { sgn(t) };
                (
                    Arc::new(move |t: f64| if odd { sgn(t) } else { 1.0 } * t.abs().powf(alpha)),
                    Arc::new(move |t: f64| alpha * side(t) * t.abs().powf(alpha - 1.0)),
                    Arc::new(move |t: f64| {
                        let s = if odd { sgn(t) } else { 1.0 };
                        alpha * (alpha - 1.0) * s * t.abs().powf(alpha - 2.0)
                    }),
                    Some(inverse),
                )
            }
            &CurveDescriptor::PowLog { alpha, beta } => {
                // With L = |ln|t||, for 0<|t|<1: γ′ = t^{α-1} L^{β-1} (αL − β) on t>0, odd extension.
                let lg = |t: f64| t.abs().ln().abs();
                (
                    Arc::new(move |t: f64| t.abs().powf(alpha) * lg(t).powf(beta)),
                    Arc::new(move |t: f64| {
                        let u = t.abs();
                        let l = lg(t);
                        let dl = if u < 1.0 { -1.0 } else { 1.0 };
                        sgn(t) * u.powf(alpha - 1.0) * l.powf(beta - 1.0) * (alpha * l + beta * dl)
                    }),
                    Arc::new(move |t: f64| {
                        let u = t.abs();
                        let l = lg(t);
                        let dl = if u < 1.0 { -1.0 } else { 1.0 };
                        let w = alpha * l + beta * dl;
                        u.powf(alpha - 2.0)
                            * l.powf(beta - 2.0)
                            * ((alpha - 1.0) * l * w + (beta - 1.0) * dl * w + alpha * dl * l)
                    }),
                    None,
                )
            }
        };
        Curve::assemble(name, Some(d), eval, deriv, Some(deriv2), inverse)
    }

    /// A curve given by user closures. `deriv2` falls back to Richardson
    /// differences of `deriv` when absent.
    pub fn from_closures(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv2: Option<RealFn>,
    ) -> Result<Curve> {
        Curve::assemble(name.into(), None, Arc::new(eval), Arc::new(deriv), deriv2, None)
    }

    fn assemble(
        name: String,
        descriptor: Option<CurveDescriptor>,
        eval: RealFn,
        deriv: RealFn,
        deriv2: Option<RealFn>,
        inverse: Option<InverseFn>,
    ) -> Result<Curve> {
        let mut curve = Curve {
            name,
            descriptor,
            eval,
            deriv,
            deriv2,
            inverse,
            radius: (0.0, 0.0),
            delta: 0.0,
            c_gamma: 0.0,
            k_gamma: 0,
            regime: Regime::DerivativeVanishesAtZero,
        };
        curve.radius = (curve.scan_radius(1.0), curve.scan_radius(-1.0));
        let r = curve.radius.0.min(curve.radius.1);
        if r < 1e-3 {
            return Err(LabError::NotNonFlat(format!(
                "{}: γ′ vanishes or loses monotonicity within |t| < {r:.3e}",
                curve.name
            )));
        }
        curve.delta = (0.5 * r).min(0.5);
        let near = curve.d1(curve.delta * 2f64.powi(-40)).abs();
        let far = curve.d1(0.5 * curve.delta).abs();
        curve.regime = if near < far {
            Regime::DerivativeVanishesAtZero
        } else {
            Regime::DerivativeBlowsUpAtZero
        };
        curve.k_gamma = curve.measure_k()?;
        let report = nonflatness_report(&curve, None)?;
        let floor = report.inf_q2.min(report.inf_r1).min(report.inf_dual);
        if !(floor > 0.0) || !floor.is_finite() {
            return Err(LabError::NotNonFlat(format!("{}: measured non-flatness floor {floor:e}", curve.name)));
        }
        curve.c_gamma = 0.5 * floor;
        Ok(curve)
    }

    /// Largest |t| (from a geometric scan) on side `side` over which γ′ keeps
    /// one sign and |γ′| is strictly monotone.
    fn scan_radius(&self, side: f64) -> f64 {
        let octaves = (SCAN_HI / SCAN_LO).log2().ceil() as usize;
        let steps = octaves * SCAN_STEPS_PER_OCTAVE;
        let ratio = 2f64.powf(1.0 / SCAN_STEPS_PER_OCTAVE as f64);
        let mut u = SCAN_LO;
        let first = self.d1(side * u);
        if !first.is_finite() || first == 0.0 {
            return 0.0;
        }
        let sign = first.signum();
        let mut prev = first.abs();
        let mut direction = 0.0;
        for _ in 0..steps {
            let next_u = u * ratio;
            let v = self.d1(side * next_u);
            if !v.is_finite() || v == 0.0 || v.signum() != sign {
                return u;
            }
            let step = v.abs() - prev;
            if step == 0.0 || (direction != 0.0 && step.signum() != direction) {
                return u;
            }
            direction = step.signum();
            prev = v.abs();
            u = next_u;
        }
        u
    }

    /// Smallest k such that the critical point window `[2^{-k}, 2^k]` holds
    /// every `t_c = 2^j (γ′)^{-1}(ρ γ′(2^{-j}))` for the probe ratios and all
    /// in-domain `j ≤ LIMIT_J`. Probes whose target value `ργ′(2^{-j})` lies
    /// outside the monotone range of `γ′` are skipped; if none succeed the
    /// result is [`K_CAP`].
    fn measure_k(&self) -> Result<u32> {
        let mut extreme: f64 = 1.0;
        let mut hits = 0;
        let j0 = (-self.delta.log2()).ceil().max(0.0) as i32;
        for j in j0..=LIMIT_J {
            let s = 2f64.powi(-j);
            let base = self.d1(s);
            for rho in [K_PROBE_RATIOS.0, K_PROBE_RATIOS.1] {
                let Some(t) = self.deriv_inverse(rho * base) else { continue };
                let t = (t / s).abs();
                if t.is_finite() && t > 0.0 {
                    extreme = extreme.max(t).max(1.0 / t);
                    hits += 1;
                }
            }
        }
        if hits == 0 {
            return Ok(K_CAP);
        }
        Ok((extreme.log2().ceil().max(1.0) as u32).min(K_CAP))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn descriptor(&self) -> Option<&CurveDescriptor> {
        self.descriptor.as_ref()
    }

    /// `γ(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    /// `γ′(t)`.
    pub fn d1(&self, t: f64) -> f64 {
        (self.deriv)(t)
    }

    /// `γ″(t)`, analytic when available.
    pub fn d2(&self, t: f64) -> f64 {
        match &self.deriv2 {
            Some(f) => f(t),
            None => {
                let h = 1e-5 * t.abs().max(f64::MIN_POSITIVE);
                crate::quad::richardson_derivative(&|x| (self.deriv)(x), t, h)
            }
        }
    }

    pub fn has_analytic_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// Monotonicity radius of γ′ on the positive and negative side.
    pub fn radius(&self) -> (f64, f64) {
        self.radius
    }

    /// Solve `γ′(t) = v`, preferring `t > 0` and falling back to the negative side.
    pub fn deriv_inverse(&self, v: f64) -> Option<f64> {
        if let Some(inv) = &self.inverse {
            return inv(v);
        }
        if !v.is_finite() || v == 0.0 {
            return None;
        }
        [1.0, -1.0].into_iter().find_map(|side| self.bisect_side(side, v))
    }

    fn bisect_side(&self, side: f64, v: f64) -> Option<f64> {
        let hi_u = if side > 0.0 { self.radius.0 } else { self.radius.1 };
        let f = |lu: f64| self.d1(side * lu.exp()) - v;
        let (mut a, mut b) = (INVERSE_LO.ln(), hi_u.ln());
        let (fa, fb) = (f(a), f(b));
        if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
            if fa == 0.0 {
                return Some(side * a.exp());
            }
            if fb == 0.0 {
                return Some(side * b.exp());
            }
            return None;
        }
        let neg_at_a = fa < 0.0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = f(m);
            if fm == 0.0 {
                return Some(side * m.exp());
            }
            if (fm < 0.0) == neg_at_a {
                a = m;
            } else {
                b = m;
            }
        }
        Some(side * (0.5 * (a + b)).exp())
    }

    /// `c·γ` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Curve> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(LabError::Invalid(format!("scale factor must be positive, got {c}")));
        }
        if let Some(CurveDescriptor::Poly(terms)) = &self.descriptor {
            let terms = terms.iter().map(|&(a, k)| (c * a, k)).collect();
            return Curve::from_descriptor(CurveDescriptor::Poly(terms));
        }
        let (e, d) = (self.eval.clone(), self.deriv.clone());
        let d2 = self.deriv2.clone();
        let inverse = self.inverse.clone().map(|inv| -> InverseFn { Arc::new(move |v: f64| inv(v / c)) });
        Curve::assemble(
            format!("{c}*({})", self.name),
            None,
            Arc::new(move |t| c * e(t)),
            Arc::new(move |t| c * d(t)),
            d2.map(|g| -> RealFn { Arc::new(move |t| c * g(t)) }),
            inverse,
        )
    }

    /// `Q_j` level: `γ(2^{-j}t) / (2^{-j} γ′(2^{-j}))`.
    pub fn q_level(&self, j: i32, t: f64) -> Result<f64> {
        let s = 2f64.powi(-j);
        let denom = s * self.d1(s);
        if denom == 0.0 || !denom.is_finite() {
            return Err(LabError::CorruptCurve(format!("{}: γ′(2^-{j}) = {}", self.name, self.d1(s))));
        }
        Ok(self.eval(s * t) / denom)
    }

    /// `Q′` at level j: `γ′(2^{-j}t)/γ′(2^{-j})`.
    pub fn q1_level(&self, j: i32, t: f64) -> f64 {
        let s = 2f64.powi(-j);
        self.d1(s * t) / self.d1(s)
    }

    /// `Q″` at level j: `2^{-j}γ″(2^{-j}t)/γ′(2^{-j})`.
    pub fn q2_level(&self, j: i32, t: f64) -> f64 {
        let s = 2f64.powi(-j);
        s * self.d2(s * t) / self.d1(s)
    }

    /// `r_j(s) = (γ′)^{-1}(s γ′(2^{-j})) / 2^{-j}`.
    pub fn r_level(&self, j: i32, s: f64) -> Result<f64> {
        let scale = 2f64.powi(-j);
        let v = s * self.d1(scale);
        self.deriv_inverse(v)
            .map(|t| t / scale)
            .ok_or(LabError::Domain { what: "r profile argument s", value: s })
    }

    /// `r_j′(s) = γ′(2^{-j}) / (2^{-j} γ″(2^{-j} r_j(s)))`.
    pub fn r1_level(&self, j: i32, s: f64) -> Result<f64> {
        let scale = 2f64.powi(-j);
        let r = self.r_level(j, s)?;
        Ok(self.d1(scale) / (scale * self.d2(scale * r)))
    }

    /// Limit profile `Q`, read at [`LIMIT_J`].
    pub fn q(&self, t: f64) -> f64 {
        self.q_level(LIMIT_J, t).unwrap_or(f64::NAN)
    }

    pub fn q1(&self, t: f64) -> f64 {
        self.q1_level(LIMIT_J, t)
    }

    pub fn q2(&self, t: f64) -> f64 {
        self.q2_level(LIMIT_J, t)
    }

    /// Limit profile `r`.
    pub fn r(&self, s: f64) -> Result<f64> {
        self.r_level(LIMIT_J, s)
    }

    pub fn r1(&self, s: f64) -> Result<f64> {
        self.r1_level(LIMIT_J, s)
    }

    /// `Q′(1)` range components `J = Q′(I)`, one interval per component of `I`
    /// (merged when they overlap).
    pub fn j_components(&self) -> Vec<(f64, f64)> {
        let mut parts: Vec<(f64, f64)> = [1.0, -1.0]
            .iter()
            .map(|&side| {
                let vals: Vec<f64> = sample_i(512)
                    .into_iter()
                    .filter(|t| t.signum() == side)
                    .map(|t| self.q1(t))
                    .collect();
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect();
        parts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if parts[1].0 <= parts[0].1 {
            vec![(parts[0].0, parts[0].1.max(parts[1].1))]
        } else {
            parts
        }
    }

    /// Class diagnostics as `{axiom, value, threshold, pass}` lines.
    pub fn diagnostics(&self) -> Result<Vec<AxiomCheck>> {
        let mut out = Vec::new();
        let mut min_abs = f64::INFINITY;
        let mut violations = 0usize;
        for side in [1.0, -1.0] {
            let mut prev: Option<f64> = None;
            let mut dir = 0.0;
            for k in (1..=40 * SCAN_STEPS_PER_OCTAVE).rev() {
                let t = side * self.delta * 2f64.powf(-(k as f64) / SCAN_STEPS_PER_OCTAVE as f64);
                let v = self.d1(t).abs();
                min_abs = min_abs.min(v);
                if let Some(p) = prev {
                    let step = (v - p).signum();
                    if v == p || (dir != 0.0 && step != dir) {
                        violations += 1;
                    }
                    dir = step;
                }
                prev = Some(v);
            }
        }
        out.push(AxiomCheck {
            axiom: "no_critical_points".into(),
            value: min_abs,
            threshold: 0.0,
            pass: min_abs > 0.0,
        });
        out.push(AxiomCheck {
            axiom: "monotone_derivative".into(),
            value: violations as f64,
            threshold: 0.0,
            pass: violations == 0,
        });
        let count = variation_count(self, VARIATION_J_MAX);
        out.push(AxiomCheck {
            axiom: "variation".into(),
            value: count as f64,
            threshold: 3.0,
            pass: count <= 3,
        });
        let profile = AsymptoticProfile::estimate(self, 24, 512)?;
        let a_last = profile.qj_error.last().copied().unwrap_or(f64::NAN);
        out.push(AxiomCheck {
            axiom: "profile_convergence".into(),
            value: a_last,
            threshold: 1e-4,
            pass: a_last < 1e-4,
        });
        let report = nonflatness_report(self, None)?;
        for (axiom, value) in [
            ("nonflat_q2", report.inf_q2),
            ("nonflat_r1", report.inf_r1),
            ("nonflat_dual", report.inf_dual),
        ] {
            out.push(AxiomCheck {
                axiom: axiom.into(),
                value,
                threshold: self.c_gamma,
                pass: value > self.c_gamma,
            });
        }
        Ok(out)
    }
}

fn monomial_inverse(c: f64, k: u32, v: f64) -> Option<f64> {
    // γ′(t) = c k t^{k-1}
    let ck = c * k as f64;
    let u = (v.abs() / ck.abs()).powf(1.0 / (k as f64 - 1.0));
    if v == 0.0 || !u.is_finite() || u == 0.0 {
        return None;
    }
    if v.signum() == ck.signum() {
        Some(u)
    } else if (k - 1) % 2 == 1 {
        Some(-u)
    } else {
        None
    }
}

/// Largest number of `j ∈ [0, j_max]` whose values `|2^{-j}γ′(2^{-j})|` share
/// one window `[α, 2α]`.
pub fn variation_count(c: &Curve, j_max: u32) -> usize {
    let mut v: Vec<f64> = (0..=j_max)
        .map(|j| {
            let s = 2f64.powi(-(j as i32));
            (s * c.d1(s)).abs()
        })
        .collect();
    v.sort_by(f64::total_cmp);
    let mut best = 0;
    let mut hi = 0;
    for lo in 0..v.len() {
        if hi < lo {
            hi = lo;
        }
        while hi + 1 < v.len() && v[hi + 1] <= 2.0 * v[lo] {
            hi += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_examples() {
        let c = builtin_curve("t^2").unwrap();
        assert_eq!(c.d1(3.0), 6.0);
        assert_eq!(c.regime, Regime::DerivativeVanishesAtZero);
        let c = builtin_curve("t^2+t^3").unwrap();
        assert_eq!(c.d1(1.0), 5.0);
        assert!(builtin_curve("t^1").is_err());
        let c = builtin_curve("pow: 0.5 odd").unwrap();
        assert_eq!(c.regime, Regime::DerivativeBlowsUpAtZero);
    }

    #[test]
    fn measured_window_exponents() {
        assert_eq!(builtin_curve("t^2").unwrap().k_gamma, 7);
        assert_eq!(builtin_curve("t^3").unwrap().k_gamma, 4);
    }

    #[test]
    fn inverse_matches_bisection() {
        for d in ["t^2", "t^3", "t^4", "pow: 1.5", "pow: 2.5 odd", "pow: 0.5"] {
            let c = builtin_curve(d).unwrap();
            let bare = Curve {
                inverse: None,
                ..c.clone()
            };
            for v in [1e-6, 0.3, 2.0, -0.7] {
                match (c.deriv_inverse(v), bare.deriv_inverse(v)) {
                    (Some(a), Some(b)) => assert_relative_eq!(a, b, max_relative = 1e-12),
                    (Some(a), None) => assert!(a.abs() > bare.radius.0.min(bare.radius.1), "{d} at {v}"),
                    (a, b) => assert_eq!(a.is_some(), b.is_some(), "{d} at {v}"),
                }
            }
        }
    }

    #[test]
    fn powlog_derivatives_are_consistent() {
        let c = builtin_curve("powlog: a=2 b=1").unwrap();
        for t in [0.01, 0.1, -0.2, 0.25] {
            let fd = crate::quad::richardson_derivative(&|x| c.eval(x), t, 1e-4 * t.abs());
            assert_relative_eq!(c.d1(t), fd, max_relative = 1e-8);
            let fd2 = crate::quad::richardson_derivative(&|x| c.d1(x), t, 1e-4 * t.abs());
            assert_relative_eq!(c.d2(t), fd2, max_relative = 1e-7);
        }
        assert!(c.delta < (-0.5f64).exp());
    }

    #[test]
    fn fallback_second_derivative() {
        let c = Curve::from_closures("cubic", |t| t * t * t, |t| 3.0 * t * t, None).unwrap();
        assert_relative_eq!(c.d2(0.5), 3.0, max_relative = 1e-9);
        assert_eq!(c.k_gamma, 4);
    }

    #[test]
    fn variation_examples() {
        assert_eq!(variation_count(&builtin_curve("t^2").unwrap(), 40), 1);
        assert_eq!(variation_count(&builtin_curve("t^3").unwrap(), 40), 1);
        assert!(variation_count(&builtin_curve("t^2+t^3").unwrap(), 40) <= 2);
    }

    #[test]
    fn diagnostics_pass_for_builtins() {
        for d in ["t^2", "t^3", "t^2+t^3", "pow: 1.5", "pow: 0.5 odd"] {
            let c = builtin_curve(d).unwrap();
            for check in c.diagnostics().unwrap() {
                assert!(check.pass, "{d}: {check:?}");
            }
        }
    }
}
