//! Ensemble sup-ratio scans of `Λ_m⁺` along the edges and at the L² point.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::decomposition::{lambda_m_plus_dual_tables, FilterBank};
use crate::error::{LabError, Result};
use crate::holder::HolderTriple;
use crate::quad::{fit_line, LineFit};
use crate::signal::{dual_exponent, lp_norm, make_ensemble, EnsembleShape, SampledFunction, C64};
use crate::squarefuncs::STABILITY_FACTOR;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    /// `(p, ∞, p′)`.
    AC,
    /// `(p, p′, ∞)`.
    AB,
}

impl Edge {
    pub fn triple(self, p: f64) -> Result<HolderTriple> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(LabError::InvalidExponent(p));
        }
        let pd = dual_exponent(p);
        match self {
            Edge::AC => HolderTriple::new(p, f64::INFINITY, pd),
            Edge::AB => HolderTriple::new(p, pd, f64::INFINITY),
        }
    }
}

impl std::str::FromStr for Edge {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Edge> {
        match s.to_ascii_uppercase().as_str() {
            "AC" => Ok(Edge::AC),
            "AB" => Ok(Edge::AB),
            _ => Err(LabError::Invalid(format!("unknown edge {s:?}; expected AC or AB"))),
        }
    }
}

/// How the triples of a scan are drawn and resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSetup {
    pub ensemble_size: usize,
    pub seed: u64,
    /// Grid length; the grid is [`FilterBank::grid_for`] at `j_max`.
    pub grid_len: usize,
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for ScanSetup {
    fn default() -> Self {
        ScanSetup {
            ensemble_size: 32,
            seed: 0,
            grid_len: 1 << 12,
            j_min: 0,
            j_max: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub triple: HolderTriple,
    pub m: u32,
    /// Ensemble sup of `|Λ_m⁺(f,g,h)| / (‖f‖_p ‖g‖_q ‖h‖_{r′})` with `h` extremal.
    pub sup_ratio: f64,
    pub ensemble_size: usize,
    pub seed: u64,
    pub fitted_alpha: Option<f64>,
    pub residual: Option<f64>,
}

/// Seeded pairs `(f, g)` at scale `m` with their dual functions `B_m(f, g)`.
/// Each pair is completed to a triple by the `h` that maximizes
/// `|Λ_m⁺(f, g, h)| / ‖h‖_{r′}`, so the ratio of a triple is
/// `‖B_m(f, g)‖_r / (‖f‖_p ‖g‖_q)` with `r = (r′)′`.
pub struct EnsembleForms {
    pub m: u32,
    pub pairs: Vec<[SampledFunction; 2]>,
    pub duals: Vec<SampledFunction>,
}

impl EnsembleForms {
    pub fn ratio(&self, i: usize, t: &HolderTriple) -> Result<f64> {
        let [f, g] = &self.pairs[i];
        let d = lp_norm(f, t.p)? * lp_norm(g, t.q)?;
        Ok(if d > 0.0 {
            lp_norm(&self.duals[i], dual_exponent(t.r_dual))? / d
        } else {
            0.0
        })
    }

    pub fn sup_ratio(&self, t: &HolderTriple) -> Result<f64> {
        (0..self.pairs.len()).try_fold(0.0f64, |acc, i| Ok(acc.max(self.ratio(i, t)?)))
    }

    /// The maximizing `h` of pair `i`: `conj(B)|B|^{r−2}`, or `conj(B)/|B|` when `r′ = ∞`.
    pub fn extremal_h(&self, i: usize, t: &HolderTriple) -> SampledFunction {
        let r = dual_exponent(t.r_dual);
        self.duals[i].map(|b| {
            let a = b.norm();
            if a == 0.0 {
                C64::new(0.0, 0.0)
            } else if r == 1.0 {
                b.conj() / a
            } else {
                b.conj() * a.powf(r - 2.0)
            }
        })
    }
}

/// Draws `ensemble_size` pairs of Gaussian-packet functions on the grid of
/// scale `m` (members `2i` and `2i+1` form pair `i`) and evaluates
/// `B_m = Σ_{j_min ≤ j ≤ j_max} B_{j,m}` on each.
pub fn ensemble_forms(curve: &Curve, m: u32, setup: &ScanSetup) -> Result<EnsembleForms> {
    if setup.ensemble_size == 0 {
        return Err(LabError::Invalid("ensemble size must be positive".into()));
    }
    let bank = FilterBank::new(curve, m, setup.j_min, setup.j_max)?;
    let grid = bank.grid_for(setup.j_max, setup.grid_len)?;
    let shape = EnsembleShape::gaussian(grid);
    let mut members = make_ensemble(setup.seed, 2 * setup.ensemble_size, &shape)?.into_iter().map(|e| e.function);
    let mut pairs = Vec::with_capacity(setup.ensemble_size);
    for _ in 0..setup.ensemble_size {
        pairs.push([members.next().unwrap(), members.next().unwrap()]);
    }
    let tables: Vec<_> = bank.j_range().map(|j| bank.tables(j, grid)).filter(|t| t.is_active()).collect();
    let duals = pairs.iter().map(|[f, g]| lambda_m_plus_dual_tables(&tables, f, g)).collect::<Result<_>>()?;
    Ok(EnsembleForms { m, pairs, duals })
}

/// Growth check of one edge exponent against `C·(1 + m^{2/p′−1})`.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeCheck {
    pub p: f64,
    pub exponent: f64,
    /// Largest `ratio/(1 + m^e)` over the two smallest `m`.
    pub calibration: f64,
    /// Largest `ratio / (C(1 + m^e))` over all `m`.
    pub max_excess: f64,
    /// `max ratio / min ratio` over `m`.
    pub spread: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeScan {
    pub edge: Edge,
    pub results: Vec<ScanResult>,
    pub envelopes: Vec<EnvelopeCheck>,
}

/// Columns `p, q, r_dual, m, sup_ratio, alpha_hat, residual`; an empty fit cell means no fit.
pub fn scan_table(rows: &[ScanResult]) -> Table {
    let mut t = Table::new(["p", "q", "r_dual", "m", "sup_ratio", "alpha_hat", "residual"]);
    for r in rows {
        t.push(vec![
            r.triple.p.into(),
            r.triple.q.into(),
            r.triple.r_dual.into(),
            r.m.into(),
            r.sup_ratio.into(),
            r.fitted_alpha.into(),
            r.residual.into(),
        ]);
    }
    t
}

fn envelope(p: f64, rows: &[(u32, f64)]) -> EnvelopeCheck {
    let e = 2.0 / dual_exponent(p) - 1.0;
    let shape = |m: u32| 1.0 + (m as f64).powf(e);
    let mut sorted = rows.to_vec();
    sorted.sort_by_key(|r| r.0);
    let calibration = sorted.iter().take(2).map(|&(m, r)| r / shape(m)).fold(0.0, f64::max);
    let max_excess = if calibration > 0.0 {
        sorted.iter().map(|&(m, r)| r / (calibration * shape(m))).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let hi = sorted.iter().map(|r| r.1).fold(0.0, f64::max);
    let lo = sorted.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    EnvelopeCheck {
        p,
        exponent: e,
        calibration,
        max_excess,
        spread,
        pass: max_excess <= STABILITY_FACTOR,
    }
}

/// Sup ratios on `edge` for every `(p, m)`. The dual functions are evaluated
/// once per `m`; only the exponents depend on `p` and the edge. Each `p` with
/// at least three `m` values also gets a decay fit.
pub fn scan_edge(curve: &Curve, edge: Edge, p_list: &[f64], m_list: &[u32], setup: &ScanSetup) -> Result<EdgeScan> {
    let triples: Vec<HolderTriple> = p_list.iter().map(|&p| edge.triple(p)).collect::<Result<_>>()?;
    let forms: Vec<EnsembleForms> = m_list.iter().map(|&m| ensemble_forms(curve, m, setup)).collect::<Result<_>>()?;
    let mut results = Vec::new();
    let mut envelopes = Vec::new();
    for (t, &p) in triples.iter().zip(p_list) {
        let mut rows: Vec<ScanResult> = forms
            .iter()
            .map(|fm| {
                Ok(ScanResult {
                    triple: *t,
                    m: fm.m,
                    sup_ratio: fm.sup_ratio(t)?,
                    ensemble_size: setup.ensemble_size,
                    seed: setup.seed,
                    fitted_alpha: None,
                    residual: None,
                })
            })
            .collect::<Result<_>>()?;
        if let Ok(fit) = fit_alpha(&rows) {
            for r in &mut rows {
                r.fitted_alpha = Some(-fit.slope);
                r.residual = Some(fit.residual);
            }
        }
        envelopes.push(envelope(p, &rows.iter().map(|r| (r.m, r.sup_ratio)).collect::<Vec<_>>()));
        results.extend(rows);
    }
    Ok(EdgeScan { edge, results, envelopes })
}

/// Least-squares line of `log₂ sup_ratio` against `m`; `α̂` is minus its slope.
pub fn fit_alpha(rows: &[ScanResult]) -> Result<LineFit> {
    if rows.len() < 3 {
        return Err(LabError::FitRefused(format!("{} values of m; need at least three", rows.len())));
    }
    if rows.iter().any(|r| !(r.sup_ratio > 0.0 && r.sup_ratio.is_finite())) {
        return Err(LabError::FitRefused("degenerate ensemble: a sup ratio is zero or not finite".into()));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.sup_ratio.log2()).collect();
    fit_line(&x, &y)
}

/// Reference decay exponent at the L² points.
pub const REFERENCE_ALPHA_L2: f64 = 1.0 / 16.0;

#[derive(Debug, Clone, Serialize)]
pub struct L2Decay {
    pub rows: Vec<ScanResult>,
    pub alpha_hat: f64,
    pub residual: f64,
    pub slope_stderr: f64,
    /// Reference exponent, recorded and not enforced.
    pub reference_alpha: f64,
}

/// Decay in `m` of the sup ratio at `C₁ = (1/2, 1/2, 0)`, i.e. `(p,q,r′) = (2,2,∞)`.
pub fn fit_decay_at_l2_point(curve: &Curve, m_list: &[u32], setup: &ScanSetup) -> Result<L2Decay> {
    if m_list.len() < 3 {
        return Err(LabError::FitRefused(format!("{} values of m; need at least three", m_list.len())));
    }
    if let Some(m) = m_list.iter().find(|m| !(2..=8).contains(*m)) {
        return Err(LabError::Invalid(format!("m = {m} outside [2, 8]")));
    }
    let t = HolderTriple::l2_point();
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let forms = ensemble_forms(curve, m, setup)?;
        rows.push(ScanResult {
            triple: t,
            m,
            sup_ratio: forms.sup_ratio(&t)?,
            ensemble_size: setup.ensemble_size,
            seed: setup.seed,
            fitted_alpha: None,
            residual: None,
        });
    }
    let fit = fit_alpha(&rows)?;
    for r in &mut rows {
        r.fitted_alpha = Some(-fit.slope);
        r.residual = Some(fit.residual);
    }
    Ok(L2Decay {
        rows,
        alpha_hat: -fit.slope,
        residual: fit.residual,
        slope_stderr: fit.slope_stderr,
        reference_alpha: REFERENCE_ALPHA_L2,
    })
}
