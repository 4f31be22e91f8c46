//! The interaction kernel `E_{p₀,q₀}` between two chirp packets and its decay in `|p₀ − q₀|`.

use serde::Serialize;

use crate::curve::Curve;
use crate::error::{LabError, Result};
use crate::multiplier::PhaseProfile;
use crate::quad::{fit_line, CompositeGauss, LineFit};
use crate::signal::{bump_phi, Annulus, C64};

/// `C_γ = 2^{k(γ)}`.
pub fn c_gamma_outer(curve: &Curve) -> f64 {
    2f64.powi(curve.k_gamma as i32)
}

/// `μ`: one-sided, 1 on `[1/C_γ, C_γ]`, supported in `[1/(2C_γ), 2C_γ]`.
pub fn mu_cutoff(curve: &Curve) -> Annulus {
    let c = c_gamma_outer(curve);
    Annulus::new(0.5 / c, 1.0 / c, c, 2.0 * c).one_sided()
}

/// `ν`: the even version of [`mu_cutoff`].
pub fn nu_cutoff(curve: &Curve) -> Annulus {
    let c = c_gamma_outer(curve);
    Annulus::new(0.5 / c, 1.0 / c, c, 2.0 * c)
}

const GAUSS_ORDER: usize = 16;
const SUPPORT_SCAN: usize = 4096;
const MIN_PANELS: usize = 256;

/// `E_{p₀,q₀} = ∫ e^{i(p₀−q₀)ϑ(y)} φ(p₀r^{-1}(y)/2^m) φ(q₀r^{-1}(y)/2^m) μ(y)² dy`
/// with `ϑ = Q` and `r^{-1} = Q′`. An additive constant in `ϑ` only rotates `E`.
pub fn interaction_kernel(curve: &Curve, m: u32, p0: u64, q0: u64) -> Result<C64> {
    let profile = PhaseProfile::new(curve);
    interaction_kernel_with(&profile, m, p0, q0)
}

fn interaction_kernel_with(profile: &PhaseProfile, m: u32, p0: u64, q0: u64) -> Result<C64> {
    let scale = 2f64.powi(m as i32);
    for p in [p0, q0] {
        let p = p as f64;
        if !(p > scale / 1024.0 && p < scale * 1024.0) {
            return Err(LabError::Domain { what: "p0 or q0 outside (2^{m-10}, 2^{m+10})", value: p });
        }
    }
    let phi = bump_phi();
    let mu = mu_cutoff(profile.curve());
    let (a, b) = (mu.inner0, mu.outer0);
    let (p, q) = (p0 as f64, q0 as f64);
    let amp = |y: f64| {
        let u = profile.r_inverse(y);
        let w = mu.value(y);
        phi.value(p * u / scale) * phi.value(q * u / scale) * w * w
    };
    // Integrate in s = ln y over the part of supp μ where the amplitude lives.
    let (la, lb) = (a.ln(), b.ln());
    let step = (lb - la) / SUPPORT_SCAN as f64;
    let nonzero: Vec<usize> = (0..=SUPPORT_SCAN).filter(|&i| amp((la + i as f64 * step).exp()) != 0.0).collect();
    let (first, last) = match (nonzero.first(), nonzero.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Ok(C64::new(0.0, 0.0)),
    };
    let s0 = la + first.saturating_sub(1) as f64 * step;
    let s1 = la + (last + 1).min(SUPPORT_SCAN) as f64 * step;
    let delta = p - q;
    let variation = delta.abs() * (profile.q(s1.exp()) - profile.q(s0.exp())).abs();
    let panels = MIN_PANELS.max((variation / 2.0).ceil() as usize);
    let rule = CompositeGauss::new(GAUSS_ORDER);
    let v = rule.integrate(
        |s| {
            let y = s.exp();
            let w = amp(y);
            if w == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(w * y, delta * profile.q(y))
            }
        },
        s0,
        s1,
        panels,
    );
    Ok(v)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub m: u32,
    pub p0: u64,
    /// `(|p₀ − q₀|, |E_{p₀,q₀}|)`.
    pub rows: Vec<(u64, f64)>,
    /// `log|E|` against `log(1 + |p₀ − q₀|)`.
    pub fit: LineFit,
}

impl DecayFit {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }
}

/// Separations `|p₀ − q₀|` in `[4, 2^{m−1}]`, four per octave.
pub fn decay_separations(m: u32) -> Vec<u64> {
    let top = 1u64 << m.saturating_sub(1);
    let mut out: Vec<u64> = (0..)
        .map(|i| (4.0 * 2f64.powf(i as f64 / 4.0)).round() as u64)
        .take_while(|&d| d <= top)
        .collect();
    out.dedup();
    out
}

/// Fits the decay of `|E_{2^m, 2^m+Δ}|` over [`decay_separations`].
pub fn interaction_decay_fit(curve: &Curve, m: u32) -> Result<DecayFit> {
    interaction_decay_fit_over(curve, m, &decay_separations(m))
}

/// Like [`interaction_decay_fit`] over the given separations.
pub fn interaction_decay_fit_over(curve: &Curve, m: u32, deltas: &[u64]) -> Result<DecayFit> {
    if deltas.len() < 3 {
        return Err(LabError::FitRefused(format!("{} separations; need at least three", deltas.len())));
    }
    let profile = PhaseProfile::new(curve);
    let p0 = 1u64 << m;
    let rows: Vec<(u64, f64)> = deltas
        .iter()
        .map(|&d| Ok((d, interaction_kernel_with(&profile, m, p0, p0 + d)?.norm())))
        .collect::<Result<_>>()?;
    if rows.iter().any(|r| r.1 <= 0.0) {
        return Err(LabError::FitRefused("an interaction vanishes identically".into()));
    }
    let x: Vec<f64> = rows.iter().map(|(d, _)| (1.0 + *d as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|(_, e)| e.ln()).collect();
    Ok(DecayFit {
        m,
        p0,
        rows,
        fit: fit_line(&x, &y)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::builtin_curve;

    /// `E_{p₀,p₀}` on a fine trapezoid grid in `y`.
    fn diagonal_mass_trapezoid(curve: &Curve, m: u32, p0: u64, nodes: usize) -> f64 {
        let profile = PhaseProfile::new(curve);
        let phi = bump_phi();
        let mu = mu_cutoff(curve);
        let scale = 2f64.powi(m as i32);
        let (a, b) = (mu.inner0, mu.outer0);
        let h = (b - a) / nodes as f64;
        (0..=nodes)
            .map(|i| {
                let y = a + i as f64 * h;
                let w = phi.value(p0 as f64 * profile.r_inverse(y) / scale) * mu.value(y);
                let edge = if i == 0 || i == nodes { 0.5 } else { 1.0 };
                edge * w * w * h
            })
            .sum()
    }

    #[test]
    fn diagonal_is_positive_mass() {
        let c = builtin_curve("t^2").unwrap();
        let e = interaction_kernel(&c, 6, 80, 80).unwrap();
        assert!(e.im.abs() < 1e-14 && e.re > 0.0);
        let t = diagonal_mass_trapezoid(&c, 6, 80, 400_000);
        assert!((e.re - t).abs() < 1e-6 * t, "{} vs {t}", e.re);
    }

    #[test]
    fn swapping_conjugates() {
        for name in ["t^2", "t^3"] {
            let c = builtin_curve(name).unwrap();
            let a = interaction_kernel(&c, 6, 70, 90).unwrap();
            let b = interaction_kernel(&c, 6, 90, 70).unwrap();
            assert!((a - b.conj()).norm() < 1e-13 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn out_of_range_frequencies_are_refused() {
        let c = builtin_curve("t^2").unwrap();
        assert!(interaction_kernel(&c, 12, 1, 4096).is_err());
    }

    #[test]
    fn tail_decays_faster_than_quadratically() {
        // The inner edge of φ puts the amplitude near y = 0 where ϑ′ vanishes,
        // so quadratic decay only sets in for large separations.
        for name in ["t^2", "t^3"] {
            let c = builtin_curve(name).unwrap();
            let fit = interaction_decay_fit_over(&c, 12, &[1024, 1218, 1448, 1722, 2048]).unwrap();
            assert!(fit.slope() <= -2.0, "{name}: {:?}", fit);
            let early = interaction_decay_fit(&c, 6).unwrap();
            assert!(early.slope() < 0.0);
        }
    }
}
