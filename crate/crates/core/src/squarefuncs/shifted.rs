//! Littlewood–Paley bands, the `l`-shifted square function `S_l` and the
//! randomized operators `Λ_{l,ω}`.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::quad::{fit_line, LineFit};
use crate::signal::{apply_symbol_raw, dft, dual_exponent, lp_norm, lp_norm_values, Annulus, Grid, SampledFunction, C64};

/// Band profile of the square function: 1 on `[0.8, 1.25]`, supported in
/// `(0.6, 1.6)`, so bands `j` and `j + 2` are disjoint.
pub fn lp_band() -> Annulus {
    Annulus::new(0.6, 0.8, 1.25, 1.6)
}

/// Scales `j` whose band `2^j·(0.6, 1.6)` meets `(0, nyquist]`.
pub fn lp_j_range(grid: Grid) -> RangeInclusive<i32> {
    let lo = (grid.dxi() / 1.6).log2().floor() as i32;
    let hi = (grid.nyquist() / 0.6).log2().ceil() as i32;
    lo..=hi
}

/// `(f * φ̌_j)(x − l/2^j)` for every `j` and the pointwise `ℓ²` aggregate.
#[derive(Debug, Clone)]
pub struct ShiftedSquareData {
    pub l: i64,
    pub j_range: RangeInclusive<i32>,
    pub per_j: Vec<SampledFunction>,
    pub sl: Vec<f64>,
    grid: Grid,
}

impl ShiftedSquareData {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn as_function(&self) -> SampledFunction {
        SampledFunction::from_parts(self.grid, self.sl.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn norm(&self, q: f64) -> Result<f64> {
        lp_norm_values(self.sl.iter().copied(), self.grid.dx, q)
    }

    /// `Σ_j ω_j (f * φ̌_j)(x − l/2^j)`.
    pub fn signed_sum(&self, signs: &[i8]) -> Result<SampledFunction> {
        if signs.len() < self.per_j.len() {
            return Err(LabError::Invalid(format!(
                "{} signs for {} scales",
                signs.len(),
                self.per_j.len()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.grid.len];
        for (band, &s) in self.per_j.iter().zip(signs) {
            let s = f64::from(s);
            for (o, v) in out.iter_mut().zip(band.values()) {
                *o += v * s;
            }
        }
        Ok(SampledFunction::from_parts(self.grid, out))
    }

    /// Exact mean of `‖Λ_{l,ω}f‖₄⁴` over independent uniform signs:
    /// `∫ 2(Σ|a_j|²)² + |Σa_j²|² − 2Σ|a_j|⁴`.
    pub fn khintchine_fourth_moment(&self) -> f64 {
        let n = self.grid.len;
        let mut total = 0.0;
        for i in 0..n {
            let (mut s2, mut s4) = (0.0, 0.0);
            let mut sq = C64::new(0.0, 0.0);
            for band in &self.per_j {
                let a = band.values()[i];
                let m = a.norm_sqr();
                s2 += m;
                s4 += m * m;
                sq += a * a;
            }
            total += 2.0 * s2 * s2 + sq.norm_sqr() - 2.0 * s4;
        }
        total * self.grid.dx
    }
}

/// `S_l f(x) = (Σ_j |(f * φ̌_j)(x − l/2^j)|²)^{1/2}`, the translations done
/// by the exact modulation `e^{−iξl/2^j}` of each band.
pub fn shifted_square_function(f: &SampledFunction, l: i64, j_range: RangeInclusive<i32>) -> ShiftedSquareData {
    let grid = f.grid();
    let raw = dft(f);
    let band = lp_band();
    let js: Vec<i32> = j_range.clone().collect();
    let per_j: Vec<SampledFunction> = js
        .par_iter()
        .map(|&j| {
            let scale = 2f64.powi(j);
            let shift = l as f64 / scale;
            let symbol: Vec<C64> = (0..grid.len)
                .map(|k| {
                    let xi = grid.xi(k);
                    let b = band.value(xi / scale);
                    if b == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        C64::from_polar(b, -xi * shift)
                    }
                })
                .collect();
            apply_symbol_raw(grid, &raw, &symbol)
        })
        .collect();
    let mut sl = vec![0.0; grid.len];
    for b in &per_j {
        for (s, v) in sl.iter_mut().zip(b.values()) {
            *s += v.norm_sqr();
        }
    }
    for s in &mut sl {
        *s = s.sqrt();
    }
    ShiftedSquareData {
        l,
        j_range,
        per_j,
        sl,
        grid,
    }
}

/// `Λ_{l,ω} f`, one sign per scale of `j_range`.
pub fn randomized_operator(f: &SampledFunction, l: i64, j_range: RangeInclusive<i32>, signs: &[i8]) -> Result<SampledFunction> {
    shifted_square_function(f, l, j_range).signed_sum(signs)
}

/// Independent uniform signs for `draw` of the stream keyed by `seed`.
pub fn sign_draw(seed: u64, draw: u64, count: usize) -> Vec<i8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    (0..count).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()
}

/// Monte Carlo average of `‖Λ_{l,ω}f‖₄⁴` against its exact expectation and `‖S_l f‖₄⁴`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KhintchineReport {
    pub l: i64,
    pub draws: usize,
    pub monte_carlo: f64,
    pub exact: f64,
    pub square_function: f64,
}

impl KhintchineReport {
    pub fn relative_error(&self) -> f64 {
        (self.monte_carlo - self.exact).abs() / self.exact
    }
}

pub fn khintchine_check(f: &SampledFunction, l: i64, j_range: RangeInclusive<i32>, draws: usize, seed: u64) -> Result<KhintchineReport> {
    let data = shifted_square_function(f, l, j_range);
    let k = data.per_j.len();
    let samples: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|d| {
            let lam = data.signed_sum(&sign_draw(seed, d, k))?;
            Ok(lp_norm(&lam, 4.0)?.powi(4))
        })
        .collect::<Result<_>>()?;
    Ok(KhintchineReport {
        l,
        draws,
        monte_carlo: samples.iter().sum::<f64>() / draws as f64,
        exact: data.khintchine_fourth_moment(),
        square_function: data.norm(4.0)?.powi(4),
    })
}

/// `min(q, q′)`.
pub fn q_star(q: f64) -> f64 {
    q.min(dual_exponent(q))
}

#[derive(Debug, Clone, Serialize)]
pub struct NormGrowth {
    pub q: f64,
    /// `2/q* − 1`.
    pub predicted: f64,
    /// `(l, sup over the ensemble of ‖S_l f‖_q / ‖f‖_q)`.
    pub rows: Vec<(i64, f64)>,
    /// `log(sup ratio)` against `log log(|l| + 10)`; the slope is the growth exponent.
    pub fit: LineFit,
}

impl NormGrowth {
    pub fn exponent(&self) -> f64 {
        self.fit.slope
    }
}

pub fn norm_growth_in_shift(ensemble: &[SampledFunction], q: f64, l_list: &[i64]) -> Result<NormGrowth> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(LabError::InvalidExponent(q));
    }
    if ensemble.is_empty() {
        return Err(LabError::Invalid("empty ensemble".into()));
    }
    let norms: Vec<f64> = ensemble.iter().map(|f| lp_norm(f, q)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(l_list.len());
    for &l in l_list {
        let ratios: Vec<f64> = ensemble
            .par_iter()
            .zip(&norms)
            .map(|(f, &n)| {
                let data = shifted_square_function(f, l, lp_j_range(f.grid()));
                Ok(if n > 0.0 { data.norm(q)? / n } else { 0.0 })
            })
            .collect::<Result<_>>()?;
        rows.push((l, ratios.into_iter().fold(0.0, f64::max)));
    }
    if rows.iter().any(|r| r.1 <= 0.0) {
        return Err(LabError::FitRefused("an ensemble sup ratio is zero".into()));
    }
    let x: Vec<f64> = rows.iter().map(|(l, _)| ((l.unsigned_abs() as f64) + 10.0).ln().ln()).collect();
    let y: Vec<f64> = rows.iter().map(|(_, r)| r.ln()).collect();
    Ok(NormGrowth {
        q,
        predicted: 2.0 / q_star(q) - 1.0,
        rows,
        fit: fit_line(&x, &y)?,
    })
}

/// `|{S_l f > λ}|·λ / (log(|l| + 10)·‖f‖₁)` for each level.
pub fn weak_type_profile(f: &SampledFunction, l: i64, lambdas: &[f64]) -> Result<Vec<f64>> {
    let data = shifted_square_function(f, l, lp_j_range(f.grid()));
    let l1 = lp_norm(f, 1.0)?;
    if l1 == 0.0 {
        return Err(LabError::Invalid("‖f‖₁ = 0".into()));
    }
    let log = ((l.unsigned_abs() as f64) + 10.0).ln();
    Ok(lambdas
        .iter()
        .map(|&lam| {
            let measure = data.sl.iter().filter(|&&v| v > lam).count() as f64 * f.dx();
            measure * lam / (log * l1)
        })
        .collect())
}
