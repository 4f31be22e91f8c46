//! Pointwise inequality checks: the phase cancellation bound, the windowed
//! energy bound, the dual `L²–L∞` bound and the Rubio de Francia ratio.

use serde::Serialize;

use crate::curve::Curve;
use crate::decomposition::FilterBank;
use crate::error::{LabError, Result};
use crate::signal::{apply_symbol_raw, bump_phi, dft, idft, lp_norm_values, Annulus, Grid, SampledFunction, C64};

use super::interaction::nu_cutoff;
use super::maximal::hardy_littlewood_max;

/// Points where the right side is below this fraction of its maximum are
/// left out of the pointwise ratio.
pub const RATIO_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs_sup: f64,
    pub rhs_sup: f64,
    /// `sup lhs/rhs` over points with `rhs ≥` [`RATIO_FLOOR`]`·sup rhs`.
    pub ratio: f64,
    pub constant: f64,
    pub pass: bool,
}

impl InequalityCheck {
    pub fn from_sides(lhs: &[f64], rhs: &[f64], constant: f64) -> InequalityCheck {
        let lhs_sup = lhs.iter().copied().fold(0.0, f64::max);
        let rhs_sup = rhs.iter().copied().fold(0.0, f64::max);
        let floor = RATIO_FLOOR * rhs_sup;
        let ratio = if lhs_sup == 0.0 {
            0.0
        } else if rhs_sup == 0.0 {
            f64::INFINITY
        } else {
            lhs.iter()
                .zip(rhs)
                .filter(|(_, &r)| r >= floor)
                .map(|(&l, &r)| l / r)
                .fold(0.0, f64::max)
        };
        InequalityCheck {
            lhs_sup,
            rhs_sup,
            ratio,
            constant,
            pass: ratio <= constant,
        }
    }
}

/// Ratios over an `(m, j)` matrix judged against the ratio at the smallest `(m, j)`.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<(u32, i32, f64)>,
    pub calibration: f64,
    pub max_ratio: f64,
    /// `max_ratio / calibration`.
    pub growth: f64,
    pub pass: bool,
}

/// Allowed growth of a calibrated ratio across a check matrix.
pub const STABILITY_FACTOR: f64 = 2.0;

impl StabilityReport {
    pub fn new(mut rows: Vec<(u32, i32, f64)>) -> Result<StabilityReport> {
        if rows.is_empty() {
            return Err(LabError::Invalid("empty check matrix".into()));
        }
        rows.sort_by_key(|r| (r.0, r.1));
        let calibration = rows[0].2;
        let max_ratio = rows.iter().map(|r| r.2).fold(0.0, f64::max);
        let growth = if calibration > 0.0 { max_ratio / calibration } else { f64::INFINITY };
        Ok(StabilityReport {
            pass: growth <= STABILITY_FACTOR,
            rows,
            calibration,
            max_ratio,
            growth,
        })
    }
}

/// Periodic convolution `dx Σ_k a_k K(x_i − x_k)` with `K` sampled at signed offsets.
fn convolve_kernel(grid: Grid, a: &[f64], kernel: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = grid.len;
    let k: Vec<C64> = (0..n)
        .map(|i| {
            let off = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            C64::new(kernel(off * grid.dx) * grid.dx, 0.0)
        })
        .collect();
    let kf = dft(&SampledFunction::from_parts(grid, k));
    let af = dft(&SampledFunction::from_parts(grid, a.iter().map(|&v| C64::new(v, 0.0)).collect()));
    let prod = af.iter().zip(&kf).map(|(x, y)| x * y).collect();
    idft(grid, prod).values().iter().map(|v| v.re.max(0.0)).collect()
}

/// `f * φ̌_{m+j}` with the bank's bump.
fn band(f: &SampledFunction, k: i32) -> SampledFunction {
    let grid = f.grid();
    let phi = bump_phi();
    let s = 2f64.powi(k);
    let symbol: Vec<C64> = (0..grid.len).map(|i| C64::new(phi.value(grid.xi(i) / s), 0.0)).collect();
    apply_symbol_raw(grid, &dft(f), &symbol)
}

fn energy_window(grid: Grid, u: &SampledFunction, j: i32, nu: Annulus) -> Vec<f64> {
    let sq: Vec<f64> = u.values().iter().map(|v| v.norm_sqr()).collect();
    let s = 2f64.powi(j);
    convolve_kernel(grid, &sq, |z| s * nu.value(s * z))
}

/// `Σ_{p₀}|f * φ̌_{m+j} * ψ̌_{m,p₀,j}(x)|²` against `∫|(f * φ̌_{m+j})(y)|² 2^jν(2^j(x−y))dy`.
pub fn cancellation_bound_check(curve: &Curve, m: u32, j: i32, f: &SampledFunction, constant: f64) -> Result<InequalityCheck> {
    let bank = FilterBank::new(curve, m, j, j)?;
    let grid = f.grid();
    let u = band(f, m as i32 + j);
    let ur = dft(&u);
    let tables = bank.tables(j, grid);
    let mut lhs = vec![0.0; grid.len];
    for psi in &tables.psi {
        if psi.bins.is_empty() {
            continue;
        }
        let mut raw = vec![C64::new(0.0, 0.0); grid.len];
        for (&k, &v) in psi.bins.iter().zip(&psi.values) {
            raw[k] = ur[k] * v;
        }
        for (l, v) in lhs.iter_mut().zip(idft(grid, raw).values()) {
            *l += v.norm_sqr();
        }
    }
    let rhs = energy_window(grid, &u, j, nu_cutoff(curve));
    Ok(InequalityCheck::from_sides(&lhs, &rhs, constant))
}

/// The `ν` of the windowed energy bound: one-sided, 1 on `[0.6, 1.8]`,
/// supported in `[1/2, 2]`, matching the shifts `l/2^{m+j}`, `2^{m−1} ≤ l ≤ 2^{m+1}`.
pub fn window_nu() -> Annulus {
    Annulus::new(0.5, 0.6, 1.8, 2.0).one_sided()
}

/// Linear interpolation of periodic samples at `x`.
fn interpolate(grid: Grid, values: &[f64], x: f64) -> f64 {
    let n = grid.len as i64;
    let t = (x - grid.x0) / grid.dx;
    let i = t.floor();
    let w = t - i;
    let a = (i as i64).rem_euclid(n) as usize;
    let b = (i as i64 + 1).rem_euclid(n) as usize;
    (1.0 - w) * values[a] + w * values[b]
}

/// `I_{m,j}(u)(x) = ∫|(u * φ̌_{j+m})(y)|² 2^jν(2^j(x−y))dy` against
/// `2^{-m} Σ_{l=2^{m−1}}^{2^{m+1}} |Mu(x − l/2^{m+j})|²`.
pub fn windowed_energy_check(u: &SampledFunction, m: u32, j: i32, constant: f64) -> Result<InequalityCheck> {
    let grid = u.grid();
    let filtered = band(u, m as i32 + j);
    let lhs = energy_window(grid, &filtered, j, window_nu());
    let mu: Vec<f64> = hardy_littlewood_max(u).values().iter().map(|v| v.re).collect();
    let step = 2f64.powi(-(m as i32 + j));
    let (l0, l1) = (1u64 << m.saturating_sub(1), 1u64 << (m + 1));
    let norm = 2f64.powi(-(m as i32));
    let rhs: Vec<f64> = (0..grid.len)
        .map(|i| {
            let x = grid.x(i);
            norm * (l0..=l1)
                .map(|l| {
                    let v = interpolate(grid, &mu, x - l as f64 * step);
                    v * v
                })
                .sum::<f64>()
        })
        .collect();
    Ok(InequalityCheck::from_sides(&lhs, &rhs, constant))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DualCheck {
    /// `Σ_{p₀}|g_{p₀}h_{p₀}|²` against `‖g‖_∞² M(h * φ̌_{γ,m,j})²`.
    pub pointwise: InequalityCheck,
    /// `Σ_{p₀}|g_{p₀}|²` against `‖g‖_∞²`.
    pub linf: InequalityCheck,
}

/// Band outputs `u * φ̌_{j,p₀}` for every `p₀`.
fn p0_bands(bank: &FilterBank, u: &SampledFunction, j: i32) -> Vec<SampledFunction> {
    let grid = u.grid();
    let ur = dft(u);
    let tables = bank.tables(j, grid);
    tables
        .g
        .iter()
        .map(|g| {
            let mut raw = vec![C64::new(0.0, 0.0); grid.len];
            for (&k, &v) in g.bins.iter().zip(&g.values) {
                raw[k] = ur[k] * v;
            }
            idft(grid, raw)
        })
        .collect()
}

pub fn dual_pointwise_check(
    g: &SampledFunction,
    h: &SampledFunction,
    curve: &Curve,
    m: u32,
    j: i32,
    constant: f64,
) -> Result<DualCheck> {
    if g.grid() != h.grid() {
        return Err(LabError::InvalidGrid("g and h live on different grids".into()));
    }
    let grid = g.grid();
    let bank = FilterBank::new(curve, m, j, j)?;
    let gb = p0_bands(&bank, g, j);
    let hb = p0_bands(&bank, h, j);
    let mut lhs = vec![0.0; grid.len];
    let mut gsq = vec![0.0; grid.len];
    for (a, b) in gb.iter().zip(&hb) {
        for (i, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
            lhs[i] += (x * y).norm_sqr();
            gsq[i] += x.norm_sqr();
        }
    }
    let ginf = g.max_abs();
    let d = bank.d(j);
    let scale = 2f64.powi(m as i32);
    let phi = bump_phi();
    let symbol: Vec<C64> = (0..grid.len).map(|k| C64::new(phi.value(d * grid.xi(k) / scale), 0.0)).collect();
    let hg = apply_symbol_raw(grid, &dft(h), &symbol);
    let mh = hardy_littlewood_max(&hg);
    let rhs: Vec<f64> = mh.values().iter().map(|v| ginf * ginf * v.re * v.re).collect();
    let linf_rhs = vec![ginf * ginf; grid.len];
    Ok(DualCheck {
        pointwise: InequalityCheck::from_sides(&lhs, &rhs, constant),
        linf: InequalityCheck::from_sides(&gsq, &linf_rhs, constant),
    })
}

/// `‖(Σ_j Σ_{p₀}|h * φ̌_{j,p₀}|²)^{1/2}‖_{p′} / ‖h‖_{p′}` over the bank's scales.
pub fn rubio_de_francia_ratio(bank: &FilterBank, h: &SampledFunction, p_dual: f64) -> Result<f64> {
    let grid = h.grid();
    let mut acc = vec![0.0; grid.len];
    for j in bank.j_range() {
        for b in p0_bands(bank, h, j) {
            for (a, v) in acc.iter_mut().zip(b.values()) {
                *a += v.norm_sqr();
            }
        }
    }
    let num = lp_norm_values(acc.into_iter().map(f64::sqrt), grid.dx, p_dual)?;
    let den = lp_norm_values(h.values().iter().map(|v| v.norm()), grid.dx, p_dual)?;
    if den == 0.0 {
        return Err(LabError::Invalid("‖h‖ = 0".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::builtin_curve;
    use crate::signal::{make_ensemble, EnsembleShape};

    fn member(grid: Grid, seed: u64) -> SampledFunction {
        let shape = EnsembleShape::gaussian(grid).with_components(6);
        make_ensemble(seed, 1, &shape).unwrap().remove(0).function
    }

    #[test]
    fn zero_input_gives_zero_sides() {
        let c = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&c, 4, 2, 2).unwrap();
        let grid = bank.grid_for(2, 1 << 12).unwrap();
        let zero = SampledFunction::zeros(grid);
        let r = cancellation_bound_check(&c, 4, 2, &zero, 1.0).unwrap();
        assert_eq!((r.lhs_sup, r.rhs_sup, r.ratio), (0.0, 0.0, 0.0));
        let w = windowed_energy_check(&zero, 4, 2, 1.0).unwrap();
        assert_eq!((w.lhs_sup, w.rhs_sup), (0.0, 0.0));
        let d = dual_pointwise_check(&member(grid, 1), &zero, &c, 4, 2, 1.0).unwrap();
        assert_eq!((d.pointwise.lhs_sup, d.pointwise.rhs_sup), (0.0, 0.0));
    }

    #[test]
    fn cancellation_sides_are_homogeneous_of_degree_two() {
        let c = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&c, 4, 2, 2).unwrap();
        let grid = bank.grid_for(2, 1 << 12).unwrap();
        let f = member(grid, 3);
        let a = cancellation_bound_check(&c, 4, 2, &f, 1e3).unwrap();
        let b = cancellation_bound_check(&c, 4, 2, &f.scaled(C64::new(0.0, 3.0)), 1e3).unwrap();
        assert!((b.lhs_sup / a.lhs_sup - 9.0).abs() < 1e-9);
        assert!((b.rhs_sup / a.rhs_sup - 9.0).abs() < 1e-9);
        assert!((b.ratio - a.ratio).abs() < 1e-9 * a.ratio);
    }

    #[test]
    fn cancellation_ratio_is_reported_across_m() {
        let c = builtin_curve("t^2").unwrap();
        let mut rows = Vec::new();
        for m in [4u32, 6, 8] {
            let bank = FilterBank::new(&c, m, 2, 2).unwrap();
            let grid = bank.grid_for(2, 1 << 13).unwrap();
            let r = cancellation_bound_check(&c, m, 2, &member(grid, 11), f64::INFINITY).unwrap();
            assert!(r.ratio.is_finite() && r.ratio > 0.0);
            rows.push((m, 2, r.ratio));
        }
        let s = StabilityReport::new(rows).unwrap();
        assert!(s.growth.is_finite() && s.growth >= 1.0);
        assert_eq!(s.pass, s.growth <= STABILITY_FACTOR);
    }

    #[test]
    fn windowed_energy_is_translation_covariant_and_stable() {
        let grid = Grid::symmetric(64.0, 1 << 13).unwrap();
        let u = SampledFunction::from_real_fn(grid, |x| (-x * x).exp()).unwrap();
        let a = windowed_energy_check(&u, 4, 1, f64::INFINITY).unwrap();
        let b = windowed_energy_check(&u.shift_samples(37), 4, 1, f64::INFINITY).unwrap();
        assert!((a.lhs_sup - b.lhs_sup).abs() < 1e-12 * a.lhs_sup);
        assert!((a.rhs_sup - b.rhs_sup).abs() < 1e-12 * a.rhs_sup);
        let rows: Vec<(u32, i32, f64)> = (4..=8)
            .map(|m| (m, 1, windowed_energy_check(&u, m, 1, f64::INFINITY).unwrap().ratio))
            .collect();
        assert!(rows.iter().all(|r| r.2.is_finite()));
        let s = StabilityReport::new(rows).unwrap();
        assert!(s.pass, "{s:?}");
    }

    #[test]
    fn dual_bounds_hold_on_random_pairs() {
        let c = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&c, 4, 1, 1).unwrap();
        let grid = bank.grid_for(1, 1 << 12).unwrap();
        for seed in 0..4 {
            let d = dual_pointwise_check(&member(grid, 2 * seed), &member(grid, 2 * seed + 1), &c, 4, 1, 100.0).unwrap();
            assert!(d.pointwise.pass && d.linf.pass, "{d:?}");
        }
        // g ≡ 1: each band sees only the zero frequency, which φ_{j,p₀} removes.
        let one = SampledFunction::constant(grid, C64::new(1.0, 0.0));
        let d = dual_pointwise_check(&one, &member(grid, 9), &c, 4, 1, 100.0).unwrap();
        assert!(d.linf.lhs_sup < 1e-20 && d.pointwise.pass);
    }

    #[test]
    fn rubio_ratio_is_finite() {
        let c = builtin_curve("t^3").unwrap();
        let bank = FilterBank::new(&c, 4, 0, 2).unwrap();
        let grid = bank.grid_for(2, 1 << 12).unwrap();
        let r = rubio_de_francia_ratio(&bank, &member(grid, 4), 4.0).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }
}
