use serde::Serialize;

use super::{Curve, Regime, LIMIT_J};
use crate::error::{LabError, Result};
use crate::quad::fit_line;

/// `n` points on `I = [-4,-1/4] ∪ [1/4,4]`, half on each component.
pub fn sample_i(n: usize) -> Vec<f64> {
    let half = (n / 2).max(2);
    let pos: Vec<f64> = (0..half).map(|i| 0.25 + 3.75 * i as f64 / (half - 1) as f64).collect();
    pos.iter().rev().map(|t| -t).chain(pos.iter().copied()).collect()
}

fn sample_components(parts: &[(f64, f64)], n: usize) -> Vec<f64> {
    let per = (n / parts.len()).max(2);
    parts
        .iter()
        .flat_map(|&(lo, hi)| (0..per).map(move |i| lo + (hi - lo) * i as f64 / (per - 1) as f64))
        .collect()
}

/// One level `j` of a rescaled profile against its limit.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileSlice {
    pub j: i32,
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: Vec<f64>,
    /// Sup over the points of `|values − limit|`.
    pub sup_error: f64,
}

fn slice(j: i32, points: &[f64], level: impl Fn(f64) -> Result<f64>, limit: impl Fn(f64) -> Result<f64>) -> Result<ProfileSlice> {
    let values = points.iter().map(|&t| level(t)).collect::<Result<Vec<_>>>()?;
    let limit = points.iter().map(|&t| limit(t)).collect::<Result<Vec<_>>>()?;
    let sup_error = values.iter().zip(&limit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ProfileSlice {
        j,
        points: points.to_vec(),
        values,
        limit,
        sup_error,
    })
}

fn check_in_i(grid: &[f64]) -> Result<()> {
    match grid.iter().find(|t| !(0.25..=4.0).contains(&t.abs())) {
        Some(&t) => Err(LabError::Domain { what: "profile grid point outside I", value: t }),
        None => Ok(()),
    }
}

/// `γ(2^{-j}t)/(2^{-j}γ′(2^{-j}))` on `grid ⊂ I` against the limit `Q`.
pub fn asymptotic_profile(c: &Curve, j: i32, grid: &[f64]) -> Result<ProfileSlice> {
    if j < 0 {
        return Err(LabError::Domain { what: "scale j", value: j as f64 });
    }
    check_in_i(grid)?;
    slice(j, grid, |t| c.q_level(j, t), |t| c.q_level(LIMIT_J, t))
}

/// `(γ′)^{-1}(sγ′(2^{-j}))/2^{-j}` on `grid` against the limit `r`.
pub fn r_profile(c: &Curve, j: i32, grid: &[f64]) -> Result<ProfileSlice> {
    if j < 0 {
        return Err(LabError::Domain { what: "scale j", value: j as f64 });
    }
    slice(j, grid, |s| c.r_level(j, s), |s| c.r(s))
}

/// Sampled limit profiles with the per-level sup errors `a_j`.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticProfile {
    pub q_grid: Vec<f64>,
    pub q_values: Vec<f64>,
    /// Components of `J = Q′(I)`.
    pub j_components: Vec<(f64, f64)>,
    pub r_grid: Vec<f64>,
    pub r_values: Vec<f64>,
    /// `a_j` for `j = 0..=j_max`.
    pub qj_error: Vec<f64>,
    /// Sup error of `r_j`; `None` where `r_j` is undefined on part of `J`.
    pub rj_error: Vec<Option<f64>>,
}

impl AsymptoticProfile {
    pub fn estimate(c: &Curve, j_max: i32, n: usize) -> Result<AsymptoticProfile> {
        let q_grid = sample_i(n);
        let q_values = q_grid.iter().map(|&t| c.q(t)).collect();
        let j_components = c.j_components();
        let r_grid = sample_components(&j_components, n);
        let r_values = r_grid.iter().map(|&s| c.r(s)).collect::<Result<Vec<_>>>()?;
        let mut qj_error = Vec::new();
        let mut rj_error = Vec::new();
        for j in 0..=j_max {
            qj_error.push(asymptotic_profile(c, j, &q_grid)?.sup_error);
            rj_error.push(r_profile(c, j, &r_grid).ok().map(|s| s.sup_error));
        }
        Ok(AsymptoticProfile {
            q_grid,
            q_values,
            j_components,
            r_grid,
            r_values,
            qj_error,
            rj_error,
        })
    }
}

/// Infima of `|Q″|` over I, `|r′|` over J and the dual quotient
/// `|s₁r′(s₁) − s₂r′(s₂)|/|s₁ − s₂|` over distinct pairs in J.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonflatnessReport {
    pub inf_q2: f64,
    pub inf_r1: f64,
    pub inf_dual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl NonflatnessReport {
    pub fn passes(&self, threshold: f64) -> bool {
        self.inf_q2 > threshold && self.inf_r1 > threshold && self.inf_dual > threshold
    }
}

/// Non-flatness infima on `n` points (512 by default). The pass flag uses
/// the curve's own `c_γ`; compare against another floor with
/// [`NonflatnessReport::passes`].
pub fn nonflatness_report(c: &Curve, n: Option<usize>) -> Result<NonflatnessReport> {
    let n = n.unwrap_or(512);
    let inf_q2 = sample_i(n).into_iter().map(|t| c.q2(t).abs()).fold(f64::INFINITY, f64::min);
    let r_grid = sample_components(&c.j_components(), n);
    let r1 = r_grid.iter().map(|&s| c.r1(s)).collect::<Result<Vec<_>>>()?;
    let inf_r1 = r1.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = r_grid.iter().zip(&r1).map(|(s, d)| s * d).collect();
    let mut inf_dual = f64::INFINITY;
    for a in 0..r_grid.len() {
        for b in a + 1..r_grid.len() {
            let ds = r_grid[a] - r_grid[b];
            if ds != 0.0 {
                inf_dual = inf_dual.min(((w[a] - w[b]) / ds).abs());
            }
        }
    }
    let mut report = NonflatnessReport {
        inf_q2,
        inf_r1,
        inf_dual,
        threshold: c.c_gamma,
        pass: false,
    };
    report.pass = report.passes(c.c_gamma);
    Ok(report)
}

/// Power-law envelope `K₂^{-1}|t|^{C₂} < |γ′(t)| < K₁^{-1}|t|^{C₁}` fitted near 0.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub regime: Regime,
    /// Least-squares exponent of `|γ′|` against `|t|`.
    pub exponent: f64,
    pub c1: f64,
    pub c2: f64,
    pub k1: f64,
    pub k2: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub member: bool,
}

/// Log-log residual above which a curve is flagged as a non-member.
pub const GROWTH_RESIDUAL_TOL: f64 = 0.5;

/// Fit `log|γ′|` against `log t` over `grid ⊂ (0, δ)`; the default grid is
/// `δ·2^{-k}`, `k = 1..=40`.
pub fn growth_dichotomy(c: &Curve, grid: Option<&[f64]>) -> Result<GrowthFit> {
    let default: Vec<f64>;
    let grid = match grid {
        Some(g) => g,
        None => {
            default = (1..=40).map(|k| c.delta * 2f64.powi(-k)).collect();
            &default
        }
    };
    if let Some(&t) = grid.iter().find(|&&t| !(t > 0.0 && t < c.delta)) {
        return Err(LabError::Domain { what: "growth grid point outside (0, δ)", value: t });
    }
    let mut pts: Vec<f64> = grid.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let lx: Vec<f64> = pts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|&t| c.d1(t).abs().ln()).collect();
    let fit = fit_line(&lx, &ly)?;
    let local: Vec<f64> = lx.windows(2).zip(ly.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect();
    let c1 = local.iter().cloned().fold(f64::INFINITY, f64::min);
    let c2 = local.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // |t| < 1: the smaller exponent gives the upper envelope.
    let upper = lx.iter().zip(&ly).map(|(x, y)| y - c1 * x).fold(f64::NEG_INFINITY, f64::max);
    let lower = lx.iter().zip(&ly).map(|(x, y)| y - c2 * x).fold(f64::INFINITY, f64::min);
    let regime = if fit.slope > 0.0 {
        Regime::DerivativeVanishesAtZero
    } else {
        Regime::DerivativeBlowsUpAtZero
    };
    let same_sign = local.iter().all(|e| e.signum() == fit.slope.signum() && *e != 0.0);
    Ok(GrowthFit {
        regime,
        exponent: fit.slope,
        c1,
        c2,
        k1: (-upper).exp() / 1.01,
        k2: lower.exp().recip() * 1.01,
        residual: fit.residual,
        member: fit.residual <= GROWTH_RESIDUAL_TOL && same_sign && regime == c.regime,
    })
}
