//! Filter banks `φ_k`, `φ_{j,p₀}`, `ψ_{m,p₀,j}`, the main pieces `T_{j,m}`
//! and the trilinear forms `Λ_{j,m}`, `Λ_m⁺`, each computed along a spatial
//! (filter, multiply, integrate) and a spectral (double frequency sum) route.

use std::f64::consts::PI;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{LabError, Result};
use crate::holder::HolderTriple;
use crate::multiplier::PhaseProfile;
use crate::signal::{bump_phi, dft, idft, lp_norm, Annulus, Grid, Plateau, SampledFunction, C64};

/// Largest `j` used by acceptance runs.
pub const DEFAULT_J_MAX: i32 = 24;
/// Dilation factor of the `h` localization.
pub const H_WIDENING: f64 = 2.0;
/// Nyquist frequency of [`FilterBank::grid_for`] relative to the largest band frequency.
pub const GRID_HEADROOM: f64 = 1.25;

/// How `h` is localized in the spatial form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HLocalization {
    /// Smooth plateau equal to 1 on `−(supp ψ + A_{j,p₀})`, supported on its
    /// dilation by [`H_WIDENING`] about the centre `−p₀/D`.
    Hull,
    /// The same filter `φ_{j,p₀}` as `g`.
    SameAsG,
    /// No filter on `h`.
    Unfiltered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spatial,
    Spectral,
}

/// `A_{j,p₀} = [(p₀−10)/D, (p₀−1/10)/D] ∪ [(p₀+1/10)/D, (p₀+10)/D]`, endpoints ordered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportInterval {
    pub j: i32,
    pub p0: u64,
    pub lo: (f64, f64),
    pub hi: (f64, f64),
}

impl SupportInterval {
    pub fn contains(&self, eta: f64) -> bool {
        (self.lo.0..=self.lo.1).contains(&eta) || (self.hi.0..=self.hi.1).contains(&eta)
    }
}

/// The three multiplier families for one curve and one `m`.
#[derive(Debug, Clone)]
pub struct FilterBank {
    profile: PhaseProfile,
    pub m: u32,
    pub j_min: i32,
    pub j_max: i32,
    pub h_mode: HLocalization,
    phi: Annulus,
    prefilter: Annulus,
}

/// A multiplier restricted to the bins where it is nonzero.
#[derive(Debug, Clone, Default)]
pub struct SparseSymbol {
    pub bins: Vec<usize>,
    pub values: Vec<C64>,
}

impl SparseSymbol {
    fn from_fn(grid: Grid, candidates: impl Iterator<Item = usize>, f: impl Fn(f64) -> C64) -> SparseSymbol {
        let mut s = SparseSymbol::default();
        let mut candidates: Vec<usize> = candidates.collect();
        candidates.sort_unstable();
        candidates.dedup();
        for k in candidates {
            let v = f(grid.xi(k));
            if v != C64::new(0.0, 0.0) {
                s.bins.push(k);
                s.values.push(v);
            }
        }
        s
    }

    fn apply(&self, raw: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); raw.len()];
        for (&k, &v) in self.bins.iter().zip(&self.values) {
            out[k] = raw[k] * v;
        }
        out
    }

    pub fn energy_weight(&self, raw: &[C64]) -> f64 {
        self.bins.iter().zip(&self.values).map(|(&k, v)| (raw[k] * v).norm_sqr()).sum()
    }
}

/// Sampled multipliers of one `(m, j)` level on one grid.
#[derive(Debug, Clone)]
pub struct BandTables {
    pub grid: Grid,
    pub j: i32,
    pub p0: Range<u64>,
    /// `φ̃(ξ/2^{m+j})`, the reproducing prefilter for `f`.
    pub prefilter: SparseSymbol,
    /// `ψ_{m,p₀,j}` per `p₀`.
    pub psi: Vec<SparseSymbol>,
    /// `φ_{j,p₀}` per `p₀`.
    pub g: Vec<SparseSymbol>,
    /// `h` localization per `p₀` (empty when unfiltered).
    pub h: Vec<SparseSymbol>,
    pub h_mode: HLocalization,
}

impl BandTables {
    pub fn is_active(&self) -> bool {
        self.psi.iter().any(|s| !s.bins.is_empty()) && self.g.iter().any(|s| !s.bins.is_empty())
    }
}

/// Bins whose frequency lies in `[lo, hi]`, FFT ordered.
fn bins_in(grid: Grid, lo: f64, hi: f64) -> Vec<usize> {
    let dxi = grid.dxi();
    let n = grid.len as i64;
    let a = (lo / dxi).floor() as i64;
    let b = (hi / dxi).ceil() as i64;
    let a = a.max(-(n / 2));
    let b = b.min(n / 2 - 1);
    (a..=b).map(|k| k.rem_euclid(n) as usize).collect()
}

impl FilterBank {
    pub fn new(curve: &Curve, m: u32, j_min: i32, j_max: i32) -> Result<FilterBank> {
        if m > 20 {
            return Err(LabError::Invalid(format!("m = {m} is too large")));
        }
        if j_min < 0 || j_max < j_min {
            return Err(LabError::Invalid(format!("bad j range [{j_min}, {j_max}]")));
        }
        Ok(FilterBank {
            profile: PhaseProfile::new(curve),
            m,
            j_min,
            j_max,
            h_mode: HLocalization::Hull,
            phi: bump_phi(),
            prefilter: Annulus::new(0.05, 0.1, 10.0, 20.0),
        })
    }

    pub fn with_h_mode(mut self, mode: HLocalization) -> FilterBank {
        self.h_mode = mode;
        self
    }

    pub fn curve(&self) -> &Curve {
        self.profile.curve()
    }

    pub fn profile(&self) -> &PhaseProfile {
        &self.profile
    }

    /// `D = 2^{-j}γ′(2^{-j})`.
    pub fn d(&self, j: i32) -> f64 {
        let s = 2f64.powi(-j);
        s * self.curve().d1(s)
    }

    /// `p₀ ∈ [2^m, 2^{m+1})`.
    pub fn p0_range(&self) -> Range<u64> {
        (1u64 << self.m)..(1u64 << (self.m + 1))
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// `φ_k(ξ) = φ(ξ/2^k)`.
    pub fn phi_k(&self, k: i32, xi: f64) -> f64 {
        self.phi.value(xi / 2f64.powi(k))
    }

    /// `φ_{j,p₀}(η) = φ(Dη − p₀)`.
    pub fn phi_jp0(&self, j: i32, p0: u64, eta: f64) -> f64 {
        self.phi.value(self.d(j) * eta - p0 as f64)
    }

    /// `ψ_{m,p₀,j}(ξ) = 2^{-m/2} e^{-ip₀R(ξ/(2^j p₀))} φ(ξ/2^{m+j})`, zero where `R` is undefined.
    pub fn psi(&self, j: i32, p0: u64, xi: f64) -> C64 {
        let band = self.phi_k(self.m as i32 + j, xi);
        if band == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let p = p0 as f64;
        match self.profile.big_r(xi / (2f64.powi(j) * p)) {
            Ok(r) => C64::from_polar(2f64.powf(-(self.m as f64) / 2.0) * band, -p * r),
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `φ̃(ξ/2^{m+j})`: 1 on the support of `ψ_{m,·,j}`.
    pub fn prefilter(&self, j: i32, xi: f64) -> f64 {
        self.prefilter.value(xi / 2f64.powi(self.m as i32 + j))
    }

    fn hull(&self, j: i32, p0: u64) -> (f64, f64) {
        let d = self.d(j);
        let centre = -(p0 as f64) / d;
        let half = 10.0 / d.abs() + 10.0 * 2f64.powi(self.m as i32 + j);
        (centre, half)
    }

    /// The `h` localization at frequency `ζ`.
    pub fn h_filter(&self, j: i32, p0: u64, zeta: f64) -> f64 {
        match self.h_mode {
            HLocalization::Hull => {
                let (c, w) = self.hull(j, p0);
                Plateau::new(w, H_WIDENING * w).value(zeta - c)
            }
            HLocalization::SameAsG => self.phi_jp0(j, p0, zeta),
            HLocalization::Unfiltered => 1.0,
        }
    }

    pub fn support_interval(&self, j: i32, p0: u64) -> SupportInterval {
        let d = self.d(j);
        let p = p0 as f64;
        let order = |a: f64, b: f64| if a <= b { (a, b) } else { (b, a) };
        let left = order((p - 10.0) / d, (p - 0.1) / d);
        let right = order((p + 0.1) / d, (p + 10.0) / d);
        let (lo, hi) = if left.0 <= right.0 { (left, right) } else { (right, left) };
        SupportInterval { j, p0, lo, hi }
    }

    /// Largest `|ξ| + |η|` reached by the level-`j` bands.
    pub fn max_frequency(&self, j: i32) -> f64 {
        10.0 * 2f64.powi(self.m as i32 + j) + (2f64.powi(self.m as i32 + 1) + 10.0) / self.d(j).abs()
    }

    /// Symmetric grid of `len` nodes whose Nyquist frequency is
    /// [`GRID_HEADROOM`] times [`Self::max_frequency`].
    pub fn grid_for(&self, j: i32, len: usize) -> Result<Grid> {
        Grid::with_nyquist(GRID_HEADROOM * self.max_frequency(j), len)
    }

    pub fn tables(&self, j: i32, grid: Grid) -> BandTables {
        let band = 2f64.powi(self.m as i32 + j);
        let psi_bins: Vec<usize> = bins_in(grid, -10.0 * band, -0.1 * band)
            .into_iter()
            .chain(bins_in(grid, 0.1 * band, 10.0 * band))
            .collect();
        let pre_bins: Vec<usize> = bins_in(grid, -20.0 * band, -0.05 * band)
            .into_iter()
            .chain(bins_in(grid, 0.05 * band, 20.0 * band))
            .collect();
        let prefilter = SparseSymbol::from_fn(grid, pre_bins.into_iter(), |xi| C64::new(self.prefilter(j, xi), 0.0));
        let p0s: Vec<u64> = self.p0_range().collect();
        let psi = p0s
            .par_iter()
            .map(|&p0| SparseSymbol::from_fn(grid, psi_bins.iter().copied(), |xi| self.psi(j, p0, xi)))
            .collect();
        let g = p0s
            .iter()
            .map(|&p0| {
                let a = self.support_interval(j, p0);
                let bins = bins_in(grid, a.lo.0, a.lo.1).into_iter().chain(bins_in(grid, a.hi.0, a.hi.1));
                SparseSymbol::from_fn(grid, bins, |eta| C64::new(self.phi_jp0(j, p0, eta), 0.0))
            })
            .collect();
        let h = p0s
            .iter()
            .map(|&p0| match self.h_mode {
                HLocalization::Hull => {
                    let (c, w) = self.hull(j, p0);
                    let bins = bins_in(grid, c - H_WIDENING * w, c + H_WIDENING * w);
                    SparseSymbol::from_fn(grid, bins.into_iter(), |z| C64::new(self.h_filter(j, p0, z), 0.0))
                }
                HLocalization::SameAsG => {
                    let a = self.support_interval(j, p0);
                    let bins = bins_in(grid, a.lo.0, a.lo.1).into_iter().chain(bins_in(grid, a.hi.0, a.hi.1));
                    SparseSymbol::from_fn(grid, bins, |z| C64::new(self.h_filter(j, p0, z), 0.0))
                }
                HLocalization::Unfiltered => SparseSymbol::default(),
            })
            .collect();
        BandTables {
            grid,
            j,
            p0: self.p0_range(),
            prefilter,
            psi,
            g,
            h,
            h_mode: self.h_mode,
        }
    }
}

fn same_grid(a: &SampledFunction, b: &SampledFunction) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(LabError::InvalidGrid("inputs live on different grids".into()));
    }
    Ok(())
}

fn p0_indices(t: &BandTables, p0_range: Option<Range<u64>>) -> Result<Range<usize>> {
    let full = t.p0.clone();
    let r = p0_range.unwrap_or(full.clone());
    if r.start < full.start || r.end > full.end {
        return Err(LabError::Domain {
            what: "p0 outside [2^m, 2^{m+1}); start",
            value: r.start as f64,
        });
    }
    Ok((r.start - full.start) as usize..(r.end - full.start) as usize)
}

/// `Σ_{p₀} (f filtered by ψ_{m,p₀,j})·(g filtered by φ_{j,p₀})`.
pub fn apply_tjm(
    bank: &FilterBank,
    f: &SampledFunction,
    g: &SampledFunction,
    j: i32,
    p0_range: Option<Range<u64>>,
) -> Result<SampledFunction> {
    same_grid(f, g)?;
    let grid = f.grid();
    let t = bank.tables(j, grid);
    let idx = p0_indices(&t, p0_range)?;
    let fr = dft(f);
    let gr = dft(g);
    let mut out = vec![C64::new(0.0, 0.0); grid.len];
    for i in idx {
        if t.psi[i].bins.is_empty() || t.g[i].bins.is_empty() {
            continue;
        }
        let fp = idft(grid, t.psi[i].apply(&fr));
        let gp = idft(grid, t.g[i].apply(&gr));
        for ((o, a), b) in out.iter_mut().zip(fp.values()).zip(gp.values()) {
            *o += a * b;
        }
    }
    SampledFunction::on_grid(grid, out)
}

/// Raw DFTs of a triple, shared between the `Λ` evaluations of one level.
#[derive(Debug, Clone)]
pub struct TripleSpectra {
    grid: Grid,
    f: Vec<C64>,
    g: Vec<C64>,
    h: Vec<C64>,
}

impl TripleSpectra {
    pub fn new(f: &SampledFunction, g: &SampledFunction, h: &SampledFunction) -> Result<TripleSpectra> {
        same_grid(f, g)?;
        same_grid(f, h)?;
        Ok(TripleSpectra {
            grid: f.grid(),
            f: dft(f),
            g: dft(g),
            h: dft(h),
        })
    }
}

/// `Σ_{p₀} ∫ (f * φ̌̃_{m+j} * ψ̌)(g * φ̌_{j,p₀})(h localized)` on the grid.
pub fn lambda_jm_spatial_tables(t: &BandTables, s: &TripleSpectra) -> C64 {
    let grid = s.grid;
    let f_pre = t.prefilter.apply(&s.f);
    let terms: Vec<C64> = (0..t.psi.len())
        .into_par_iter()
        .map(|i| {
            if t.psi[i].bins.is_empty() || t.g[i].bins.is_empty() {
                return C64::new(0.0, 0.0);
            }
            let fp = idft(grid, t.psi[i].apply(&f_pre));
            let gp = idft(grid, t.g[i].apply(&s.g));
            let hp = if t.h_mode == HLocalization::Unfiltered {
                idft(grid, s.h.clone())
            } else {
                idft(grid, t.h[i].apply(&s.h))
            };
            let sum: C64 = fp
                .values()
                .iter()
                .zip(gp.values())
                .zip(hp.values())
                .map(|((a, b), c)| a * (b * c))
                .sum();
            sum * grid.dx
        })
        .collect();
    terms.into_iter().sum()
}

/// `Σ_{p₀} (dx/N²) Σ_{k₁,k₂} f̂ψ(k₁) ĝφ_{j,p₀}(k₂) ĥ(−k₁−k₂)`: the discrete
/// form of `2π ∫∫ f̂(ξ)ψ(ξ) ĝ(η)φ_{j,p₀}(η) ĥ(−ξ−η) dξ dη`. In `Hull` mode
/// the `h` localization equals 1 on every reachable `−k₁−k₂` and is omitted.
pub fn lambda_jm_spectral_tables(t: &BandTables, s: &TripleSpectra, mode: HLocalization) -> C64 {
    let n = s.grid.len;
    let scale = s.grid.dx / (n as f64 * n as f64);
    let terms: Vec<C64> = (0..t.psi.len())
        .into_par_iter()
        .map(|i| {
            let psi = &t.psi[i];
            let g = &t.g[i];
            if psi.bins.is_empty() || g.bins.is_empty() {
                return C64::new(0.0, 0.0);
            }
            let h_weight: Option<Vec<f64>> = match mode {
                HLocalization::SameAsG => {
                    let mut w = vec![0.0; n];
                    for (&k, v) in t.h[i].bins.iter().zip(&t.h[i].values) {
                        w[k] = v.re;
                    }
                    Some(w)
                }
                _ => None,
            };
            let fpsi: Vec<(usize, C64)> = psi.bins.iter().zip(&psi.values).map(|(&k, &v)| (k, s.f[k] * v)).collect();
            let mut acc = C64::new(0.0, 0.0);
            for (&k2, &gv) in g.bins.iter().zip(&g.values) {
                let gk = s.g[k2] * gv;
                let mut inner = C64::new(0.0, 0.0);
                for &(k1, fv) in &fpsi {
                    let k3 = (2 * n - k1 - k2) % n;
                    let hv = match &h_weight {
                        Some(w) => s.h[k3] * w[k3],
                        None => s.h[k3],
                    };
                    inner += fv * hv;
                }
                acc += gk * inner;
            }
            acc * scale
        })
        .collect();
    terms.into_iter().sum()
}

pub fn lambda_jm_spatial(bank: &FilterBank, f: &SampledFunction, g: &SampledFunction, h: &SampledFunction, j: i32) -> Result<C64> {
    let s = TripleSpectra::new(f, g, h)?;
    Ok(lambda_jm_spatial_tables(&bank.tables(j, f.grid()), &s))
}

pub fn lambda_jm_spectral(bank: &FilterBank, f: &SampledFunction, g: &SampledFunction, h: &SampledFunction, j: i32) -> Result<C64> {
    let s = TripleSpectra::new(f, g, h)?;
    Ok(lambda_jm_spectral_tables(&bank.tables(j, f.grid()), &s, bank.h_mode))
}

/// `Λ_m⁺ = Σ_j Λ_{j,m}` over the levels whose bands reach the grid.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaPlus {
    #[serde(serialize_with = "ser_c64")]
    pub value: C64,
    /// `(j, Λ_{j,m})` for the active levels.
    #[serde(serialize_with = "ser_terms")]
    pub terms: Vec<(i32, C64)>,
    /// `Σ_j |Λ_{j,m}|`.
    pub abs_sum: f64,
}

fn ser_c64<S: serde::Serializer>(v: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&v.re)?;
    t.serialize_element(&v.im)?;
    t.end()
}

fn ser_terms<S: serde::Serializer>(v: &[(i32, C64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let flat: Vec<(i32, f64, f64)> = v.iter().map(|(j, c)| (*j, c.re, c.im)).collect();
    flat.serialize(s)
}

pub fn lambda_m_plus(bank: &FilterBank, f: &SampledFunction, g: &SampledFunction, h: &SampledFunction) -> Result<LambdaPlus> {
    let s = TripleSpectra::new(f, g, h)?;
    let mut terms = Vec::new();
    for j in bank.j_range() {
        let t = bank.tables(j, f.grid());
        if !t.is_active() {
            continue;
        }
        terms.push((j, lambda_jm_spatial_tables(&t, &s)));
    }
    let value = terms.iter().map(|(_, v)| *v).sum();
    let abs_sum = terms.iter().map(|(_, v)| v.norm()).sum();
    Ok(LambdaPlus { value, terms, abs_sum })
}

/// `B_m(f, g) = Σ_j Σ_{p₀} (f * φ̌̃_{m+j} * ψ̌)(g * φ̌_{j,p₀})`. With `Hull`
/// localization `Λ_m⁺(f, g, h) = ∫ B_m(f, g)·h` for every `h`.
pub fn lambda_m_plus_dual(bank: &FilterBank, f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    let tables: Vec<BandTables> = bank.j_range().map(|j| bank.tables(j, f.grid())).filter(|t| t.is_active()).collect();
    lambda_m_plus_dual_tables(&tables, f, g)
}

/// [`lambda_m_plus_dual`] over precomputed tables.
pub fn lambda_m_plus_dual_tables(tables: &[BandTables], f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction> {
    same_grid(f, g)?;
    let grid = f.grid();
    if tables.iter().any(|t| t.h_mode != HLocalization::Hull) {
        return Err(LabError::Invalid("the dual function needs Hull localization of h".into()));
    }
    let (fh, gh) = (dft(f), dft(g));
    let mut acc = vec![C64::new(0.0, 0.0); grid.len];
    for t in tables {
        let f_pre = t.prefilter.apply(&fh);
        let parts: Vec<Vec<C64>> = (0..t.psi.len())
            .into_par_iter()
            .map(|i| {
                if t.psi[i].bins.is_empty() || t.g[i].bins.is_empty() {
                    return Vec::new();
                }
                let fp = idft(grid, t.psi[i].apply(&f_pre));
                let gp = idft(grid, t.g[i].apply(&gh));
                fp.values().iter().zip(gp.values()).map(|(a, b)| a * b).collect()
            })
            .collect();
        for part in parts {
            for (a, v) in acc.iter_mut().zip(part) {
                *a += v;
            }
        }
    }
    Ok(SampledFunction::from_parts(grid, acc))
}

/// One evaluation of `Λ_{j,m}` with its Hölder normalization.
#[derive(Debug, Clone, Serialize)]
pub struct TrilinearRecord {
    pub j: i32,
    pub m: u32,
    #[serde(serialize_with = "ser_c64")]
    pub value: C64,
    pub method: Method,
    pub triple: HolderTriple,
    /// `|Λ| / (‖f‖_p ‖g‖_q ‖h‖_{r′})`.
    pub ratio: f64,
}

impl TrilinearRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        j: i32,
        m: u32,
        value: C64,
        method: Method,
        triple: HolderTriple,
        f: &SampledFunction,
        g: &SampledFunction,
        h: &SampledFunction,
    ) -> Result<TrilinearRecord> {
        let denom = lp_norm(f, triple.p)? * lp_norm(g, triple.q)? * lp_norm(h, triple.r_dual)?;
        let ratio = if denom > 0.0 { value.norm() / denom } else { 0.0 };
        Ok(TrilinearRecord {
            j,
            m,
            value,
            method,
            triple,
            ratio,
        })
    }
}

/// Per `(j, p₀)` energies `‖f filtered by ψ‖₂²` and `‖g filtered by φ_{j,p₀}‖₂²`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandEnergy {
    pub j: i32,
    pub p0: u64,
    pub f_energy: f64,
    pub g_energy: f64,
}

pub fn band_energies(bank: &FilterBank, f: &SampledFunction, g: &SampledFunction, j: i32) -> Result<Vec<BandEnergy>> {
    same_grid(f, g)?;
    let grid = f.grid();
    let t = bank.tables(j, grid);
    let (fr, gr) = (dft(f), dft(g));
    // Parseval for the raw DFT: ‖u‖₂² = dx/N Σ|U_k|².
    let w = grid.dx / grid.len as f64;
    Ok(bank
        .p0_range()
        .zip(t.psi.iter().zip(&t.g))
        .map(|(p0, (ps, gs))| BandEnergy {
            j,
            p0,
            f_energy: w * ps.energy_weight(&fr),
            g_energy: w * gs.energy_weight(&gr),
        })
        .collect())
}

/// Largest number of intervals `A_{j,p₀}` (`0 ≤ j ≤ j_max`, `p₀ ∈ [2^m, 2^{m+1})`)
/// containing a common frequency, from an exact sweep over the endpoints.
pub fn overlap_count(curve: &Curve, m: u32, j_max: i32) -> Result<usize> {
    let bank = FilterBank::new(curve, m, 0, j_max)?;
    let mut events: Vec<(f64, i32)> = Vec::new();
    for j in 0..=j_max {
        for p0 in bank.p0_range() {
            let a = bank.support_interval(j, p0);
            for (lo, hi) in [a.lo, a.hi] {
                events.push((lo, 1));
                events.push((hi, -1));
            }
        }
    }
    Ok(sweep(events))
}

/// Like [`overlap_count`] but counts the scales `j` meeting a frequency,
/// each scale once however many `p₀` it contributes.
pub fn scale_overlap_count(curve: &Curve, m: u32, j_max: i32) -> Result<usize> {
    let bank = FilterBank::new(curve, m, 0, j_max)?;
    let mut events: Vec<(f64, i32)> = Vec::new();
    for j in 0..=j_max {
        // Union of the level-j intervals as disjoint pieces.
        let mut pieces: Vec<(f64, f64)> = bank
            .p0_range()
            .flat_map(|p0| {
                let a = bank.support_interval(j, p0);
                [a.lo, a.hi]
            })
            .collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in pieces {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        for (lo, hi) in merged {
            events.push((lo, 1));
            events.push((hi, -1));
        }
    }
    Ok(sweep(events))
}

/// Maximum depth of closed intervals given as `(endpoint, ±1)` events.
fn sweep(mut events: Vec<(f64, i32)>) -> usize {
    // Openings sort before closings at equal positions, so touching closed
    // intervals count as overlapping.
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut depth = 0i64;
    let mut best = 0i64;
    for (_, e) in events {
        depth += e as i64;
        best = best.max(depth);
    }
    best as usize
}

/// Numerical inverse transform of `ψ_{m,p₀,j}` next to its stationary-phase form.
#[derive(Debug, Clone)]
pub struct ChirpKernel {
    pub numeric: SampledFunction,
    pub closed_form: SampledFunction,
    /// `‖numeric − closed_form‖₂ / ‖numeric‖₂`.
    pub l2_deviation: f64,
    pub max_deviation: f64,
}

/// `ψ̌(x) = ∫ψ_{m,p₀,j}(ξ)e^{iξx}dξ` on `grid`, compared with
/// `2^{-m/2}·2^j√(2πp₀/|r′(u)|)·e^{-iπ/4·sgn r′(u)}·e^{ip₀(uy−R(u))}·φ(p₀u/2^m)`,
/// `y = 2^j x`, `u = r^{-1}(y)`.
pub fn chirp_kernel(bank: &FilterBank, p0: u64, j: i32, grid: Grid, conjugate: bool) -> Result<ChirpKernel> {
    if !bank.p0_range().contains(&p0) {
        return Err(LabError::Domain { what: "p0", value: p0 as f64 });
    }
    let n = grid.len;
    let dxi = grid.dxi();
    let raw: Vec<C64> = (0..n)
        .map(|k| {
            let xi = grid.xi(k);
            let v = bank.psi(j, p0, xi);
            let v = if conjugate { v.conj() } else { v };
            v * C64::from_polar(dxi * n as f64, xi * grid.x0)
        })
        .collect();
    let numeric = idft(grid, raw);
    let prof = bank.profile();
    let m = bank.m as i32;
    let p = p0 as f64;
    let closed: Vec<C64> = (0..n)
        .map(|i| {
            let y = 2f64.powi(j) * grid.x(i);
            let u = prof.r_inverse(y);
            let band = bank.phi.value(p * u / 2f64.powi(m));
            if band == 0.0 || !u.is_finite() {
                return C64::new(0.0, 0.0);
            }
            // u must map back to y through r.
            match (prof.r(u), prof.big_r(u), bank.curve().r1(u)) {
                (Ok(ry), Ok(big_r), Ok(r1)) if ry.signum() == y.signum() && r1 != 0.0 => {
                    let amp = 2f64.powf(-m as f64 / 2.0) * 2f64.powi(j) * (2.0 * PI * p / r1.abs()).sqrt() * band;
                    let mut phase = p * (u * y - big_r) - PI / 4.0 * r1.signum();
                    if conjugate {
                        phase = -phase;
                    }
                    C64::from_polar(amp, phase)
                }
                _ => C64::new(0.0, 0.0),
            }
        })
        .collect();
    let closed_form = SampledFunction::on_grid(grid, closed)?;
    let diff = numeric.sub(&closed_form)?;
    let base = lp_norm(&numeric, 2.0)?;
    Ok(ChirpKernel {
        l2_deviation: lp_norm(&diff, 2.0)? / base,
        max_deviation: diff.max_abs(),
        numeric,
        closed_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::builtin_curve;
    use crate::signal::{make_ensemble, EnsembleShape};

    fn broadband(grid: Grid, seed: u64) -> Vec<SampledFunction> {
        let shape = EnsembleShape::gaussian(grid)
            .with_components(6)
            .with_width_range(2.0 * grid.dx, 8.0 * grid.dx)
            .with_freq_range(0.0, 0.8 * grid.nyquist());
        make_ensemble(seed, 3, &shape).unwrap().into_iter().map(|m| m.function).collect()
    }

    #[test]
    fn psi_is_a_unimodular_chirp_on_the_band() {
        let bank = FilterBank::new(&builtin_curve("t^2").unwrap(), 4, 0, 4).unwrap();
        for j in [0, 2] {
            for xi in [-50.0, -3.0, 2.0, 17.0, 100.0, 150.0] {
                let v = bank.psi(j, 20, xi);
                let expected = 0.25 * bank.phi_k(4 + j, xi);
                assert!((v.norm() - expected).abs() < 1e-14);
            }
        }
        let t3 = FilterBank::new(&builtin_curve("t^3").unwrap(), 4, 0, 4).unwrap();
        assert_eq!(t3.psi(0, 20, -10.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn phi_jp0_support_lies_in_a() {
        let bank = FilterBank::new(&builtin_curve("t^3").unwrap(), 3, 0, 6).unwrap();
        for j in [0, 3, 6] {
            for p0 in bank.p0_range() {
                let a = bank.support_interval(j, p0);
                assert!(a.lo.0 <= a.lo.1 && a.lo.1 < a.hi.0 && a.hi.0 <= a.hi.1);
                let span = a.hi.1 - a.lo.0;
                for i in 0..=2000 {
                    let eta = a.lo.0 - 0.1 * span + 1.2 * span * i as f64 / 2000.0;
                    if bank.phi_jp0(j, p0, eta) != 0.0 {
                        assert!(a.contains(eta));
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_single_interval_midpoint() {
        let bank = FilterBank::new(&builtin_curve("t^2").unwrap(), 4, 0, 0).unwrap();
        let a = bank.support_interval(0, 20);
        let events = vec![(a.lo.0, 1), (a.lo.1, -1)];
        assert_eq!(sweep(events), 1);
        assert_eq!(sweep(vec![(0.0, 1), (1.0, -1), (1.0, 1), (2.0, -1)]), 2);
        assert_eq!(sweep(vec![(0.0, 1), (1.0, -1), (1.5, 1), (2.0, -1)]), 1);
    }

    #[test]
    fn two_point_spectral_oracle() {
        let curve = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&curve, 3, 0, 2).unwrap();
        let grid = bank.grid_for(1, 1024).unwrap();
        let k_xi = 40;
        let xi0 = grid.xi(k_xi);
        let p0 = 10u64;
        let d = bank.d(1);
        let k_eta = ((p0 as f64 + 1.0) / d / grid.dxi()).round() as usize;
        let eta0 = grid.xi(k_eta);
        let f = SampledFunction::from_fn(grid, |x| C64::from_polar(1.0, xi0 * x)).unwrap();
        let g = SampledFunction::from_fn(grid, |x| C64::from_polar(1.0, eta0 * x)).unwrap();
        let out = apply_tjm(&bank, &f, &g, 1, Some(p0..p0 + 1)).unwrap();
        let amp = bank.psi(1, p0, xi0) * bank.phi_jp0(1, p0, eta0);
        assert!(amp.norm() > 0.1);
        for i in 0..grid.len {
            let x = grid.x(i);
            let exact = amp * C64::from_polar(1.0, (xi0 + eta0) * x);
            assert!((out.values()[i] - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn tjm_is_linear_and_vanishes_off_support() {
        let curve = builtin_curve("t^3").unwrap();
        let bank = FilterBank::new(&curve, 4, 0, 2).unwrap();
        let grid = bank.grid_for(1, 1024).unwrap();
        let fs = broadband(grid, 3);
        let out12 = apply_tjm(&bank, &fs[0].add(&fs[1]).unwrap(), &fs[2], 1, None).unwrap();
        let sum = apply_tjm(&bank, &fs[0], &fs[2], 1, None)
            .unwrap()
            .add(&apply_tjm(&bank, &fs[1], &fs[2], 1, None).unwrap())
            .unwrap();
        assert!(out12.sub(&sum).unwrap().max_abs() < 1e-10 * sum.max_abs().max(1.0));
        // A pure tone far below every A_{1,p0}.
        let low = SampledFunction::from_fn(grid, |x| C64::from_polar(1.0, grid.dxi() * x)).unwrap();
        let zero = apply_tjm(&bank, &fs[0], &low, 1, None).unwrap();
        assert!(zero.max_abs() < 1e-12 * fs[0].max_abs());
    }

    #[test]
    fn spatial_matches_spectral() {
        for d in ["t^2", "t^3"] {
            let curve = builtin_curve(d).unwrap();
            for (m, j) in [(3, 0), (4, 2)] {
                let bank = FilterBank::new(&curve, m, 0, 4).unwrap();
                let grid = bank.grid_for(j, 1024).unwrap();
                let fs = broadband(grid, 11);
                let a = lambda_jm_spatial(&bank, &fs[0], &fs[1], &fs[2], j).unwrap();
                let b = lambda_jm_spectral(&bank, &fs[0], &fs[1], &fs[2], j).unwrap();
                assert!(b.norm() > 0.0);
                assert!((a - b).norm() / b.norm() < 1e-9, "{d} m={m} j={j}: {a} vs {b}");
                let c = lambda_jm_spatial(&bank.clone().with_h_mode(HLocalization::Unfiltered), &fs[0], &fs[1], &fs[2], j).unwrap();
                assert!((a - c).norm() / b.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn same_as_g_is_symmetric_and_matches_spectral() {
        let curve = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&curve, 3, 0, 2).unwrap().with_h_mode(HLocalization::SameAsG);
        let grid = bank.grid_for(1, 1024).unwrap();
        let fs = broadband(grid, 5);
        let a = lambda_jm_spatial(&bank, &fs[0], &fs[1], &fs[2], 1).unwrap();
        let b = lambda_jm_spatial(&bank, &fs[0], &fs[2], &fs[1], 1).unwrap();
        assert_eq!(a, b);
        let c = lambda_jm_spectral(&bank, &fs[0], &fs[1], &fs[2], 1).unwrap();
        assert!((a - c).norm() <= 1e-9 * c.norm().max(1e-300));
    }

    #[test]
    fn dual_function_pairs_to_the_form() {
        for name in ["t^2", "t^3"] {
            let curve = builtin_curve(name).unwrap();
            let bank = FilterBank::new(&curve, 3, 0, 2).unwrap();
            let grid = bank.grid_for(2, 1024).unwrap();
            let fs = broadband(grid, 4);
            let b = lambda_m_plus_dual(&bank, &fs[0], &fs[1]).unwrap();
            let want = lambda_m_plus(&bank, &fs[0], &fs[1], &fs[2]).unwrap().value;
            let got = b.pairing(&fs[2]).unwrap();
            assert!((got - want).norm() < 1e-10 * want.norm(), "{name}: {got} vs {want}");
        }
        let curve = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&curve, 3, 0, 2).unwrap().with_h_mode(HLocalization::SameAsG);
        let grid = bank.grid_for(2, 1024).unwrap();
        let fs = broadband(grid, 4);
        assert!(lambda_m_plus_dual(&bank, &fs[0], &fs[1]).is_err());
    }

    #[test]
    fn lambda_plus_basics() {
        let curve = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&curve, 3, 0, 6).unwrap();
        let grid = bank.grid_for(2, 1024).unwrap();
        let fs = broadband(grid, 9);
        let zero = SampledFunction::zeros(grid);
        assert_eq!(lambda_m_plus(&bank, &zero, &zero, &zero).unwrap().value, C64::new(0.0, 0.0));
        let lp = lambda_m_plus(&bank, &fs[0], &fs[1], &fs[2]).unwrap();
        assert!(lp.value.norm() <= lp.abs_sum * (1.0 + 1e-12));
        assert!(lp.value.re.is_finite());
        assert_eq!(lambda_jm_spatial(&bank, &fs[0], &fs[1], &zero, 2).unwrap(), C64::new(0.0, 0.0));
        // Real inputs: replacing every multiplier m by conj(m(−·)) conjugates the
        // form. For t² and even φ this conjugates the chirps of ψ.
        let real: Vec<SampledFunction> = fs.iter().map(|f| f.map(|v| C64::new(v.re, 0.0))).collect();
        let t = bank.tables(2, grid);
        let n = grid.len;
        let reflect = |s: &SparseSymbol| SparseSymbol {
            bins: s.bins.iter().map(|&k| (n - k) % n).collect(),
            values: s.values.iter().map(|v| v.conj()).collect(),
        };
        let mut tc = t.clone();
        tc.prefilter = reflect(&t.prefilter);
        tc.g = t.g.iter().map(reflect).collect();
        tc.h = t.h.iter().map(reflect).collect();
        tc.psi = t.psi.iter().map(reflect).collect();
        for (a, b) in t.psi.iter().zip(&tc.psi) {
            for (&k, v) in b.bins.iter().zip(&b.values) {
                let i = a.bins.iter().position(|&q| q == k).unwrap();
                assert!((a.values[i].conj() - v).norm() < 1e-12);
            }
        }
        let spectra = TripleSpectra::new(&real[0], &real[1], &real[2]).unwrap();
        let a = lambda_jm_spatial_tables(&t, &spectra);
        let b = lambda_jm_spatial_tables(&tc, &spectra);
        assert!((a - b.conj()).norm() <= 1e-9 * a.norm().max(1e-300), "{a} {b}");
    }

    #[test]
    fn single_level_input_gives_that_level() {
        // For t² and m = 4, A_{j,p₀} ⊂ 4^j·[3, 21], so frequencies in (336, 768) meet only j = 3.
        let curve = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&curve, 4, 0, 6).unwrap();
        let grid = bank.grid_for(3, 2048).unwrap();
        let fs = broadband(grid, 1);
        let g = crate::signal::multiply_spectrum(&fs[1], &Annulus::new(380.0, 420.0, 650.0, 700.0)).unwrap();
        let lp = lambda_m_plus(&bank, &fs[0], &g, &fs[2]).unwrap();
        let single = lambda_jm_spatial(&bank, &fs[0], &g, &fs[2], 3).unwrap();
        assert!(single.norm() > 0.0);
        for (j, v) in &lp.terms {
            if *j != 3 {
                assert!(v.norm() < 1e-12 * single.norm(), "j = {j}");
            }
        }
        assert!((lp.value - single).norm() < 1e-12 * single.norm());
    }

    #[test]
    fn band_energy_support_discipline() {
        let curve = builtin_curve("t^2").unwrap();
        let bank = FilterBank::new(&curve, 3, 0, 2).unwrap();
        let grid = bank.grid_for(1, 1024).unwrap();
        let fs = broadband(grid, 2);
        let t = bank.tables(1, grid);
        for (i, p0) in bank.p0_range().enumerate() {
            let a = bank.support_interval(1, p0);
            let (c0, c1) = ((a.lo.0 + a.lo.1) / 2.0, (a.hi.0 + a.hi.1) / 2.0);
            let inside = |eta: f64| {
                (eta - c0).abs() <= (a.lo.1 - a.lo.0) || (eta - c1).abs() <= (a.hi.1 - a.hi.0)
            };
            for &k in &t.g[i].bins {
                assert!(inside(grid.xi(k)));
            }
        }
        let e = band_energies(&bank, &fs[0], &fs[1], 1).unwrap();
        assert_eq!(e.len(), 8);
        assert!(e.iter().all(|b| b.f_energy >= 0.0 && b.g_energy >= 0.0));
    }

    #[test]
    fn chirp_kernel_approaches_stationary_phase() {
        let curve = builtin_curve("t^2").unwrap();
        let grid = Grid::symmetric(20.0, 1 << 14).unwrap();
        let mut devs = Vec::new();
        for m in [2u32, 4, 6] {
            let bank = FilterBank::new(&curve, m, 0, 0).unwrap();
            let k = chirp_kernel(&bank, 1 << m, 0, grid, false).unwrap();
            devs.push(k.l2_deviation);
            let kc = chirp_kernel(&bank, 1 << m, 0, grid, true).unwrap();
            let a: f64 = k.numeric.values().iter().map(|v| v.norm()).sum();
            let b: f64 = kc.numeric.values().iter().map(|v| v.norm()).sum();
            assert!((a - b).abs() < 1e-9 * a);
        }
        assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
        let b4 = FilterBank::new(&curve, 4, 0, 0).unwrap();
        let b6 = FilterBank::new(&curve, 6, 0, 0).unwrap();
        assert!((b6.psi(0, 64, 64.0).norm() / b4.psi(0, 16, 16.0).norm() - 0.5).abs() < 1e-14);
    }
}
