//! Uniform-grid functions, their discrete Fourier data and L^p norms.
//!
//! Fourier convention: `f(x) = ∫ f̂(ξ) e^{iξx} dξ` and
//! `f̂(ξ) = (1/2π) ∫ f(x) e^{-iξx} dx`, discretised with the trapezoid rule on
//! a periodic grid. With this normalisation the inverse transform of a
//! multiplier `m` is `m̌(x) = ∫ m(ξ) e^{iξx} dξ` and convolution reads
//! `(f * m̌)^ = 2π f̂ m`; [`multiply_spectrum`] implements `f ↦ (m f̂)^∨`.

mod bump;
mod ensemble;
mod fft;
pub mod io;

pub use bump::{bump_phi, Annulus, Plateau};
pub use ensemble::{make_ensemble, EnsembleKind, EnsembleMember, EnsembleShape, PacketParams};

use crate::error::{LabError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type C64 = Complex64;

/// Smallest admissible grid length.
pub const MIN_GRID_LEN: usize = 16;

/// A uniform periodic grid `x_n = x0 + n·dx`, `n = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, len: usize) -> Result<Self> {
        if len < MIN_GRID_LEN || !len.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "length {len} must be a power of two >= {MIN_GRID_LEN}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) || !x0.is_finite() {
            return Err(LabError::InvalidGrid(format!("x0 = {x0}, dx = {dx}")));
        }
        Ok(Grid { x0, dx, len })
    }

    /// The grid `[-half_width, half_width)` with `len` nodes.
    pub fn symmetric(half_width: f64, len: usize) -> Result<Self> {
        Grid::new(-half_width, 2.0 * half_width / len as f64, len)
    }

    /// Symmetric grid of `len` nodes whose Nyquist frequency is `nyquist`.
    pub fn with_nyquist(nyquist: f64, len: usize) -> Result<Self> {
        let dx = PI / nyquist;
        Grid::symmetric(0.5 * dx * len as f64, len)
    }

    #[inline]
    pub fn x(&self, n: usize) -> f64 {
        self.x0 + n as f64 * self.dx
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.dx * self.len as f64
    }

    /// Frequency step `2π / (N dx)`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / (self.len as f64 * self.dx)
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dx
    }

    /// Frequency of FFT-ordered bin `k`. The Nyquist bin is taken as negative.
    #[inline]
    pub fn xi(&self, k: usize) -> f64 {
        let n = self.len as isize;
        let k = k as isize;
        let signed = if k < n / 2 { k } else { k - n };
        signed as f64 * self.dxi()
    }

    /// All bin frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.xi(k)).collect()
    }

    /// FFT index holding frequency `-xi(k)`.
    #[inline]
    pub fn negated_bin(&self, k: usize) -> usize {
        (self.len - k) % self.len
    }
}

/// Function values on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<C64>,
}

impl SampledFunction {
    pub fn new(x0: f64, dx: f64, values: Vec<C64>) -> Result<Self> {
        let grid = Grid::new(x0, dx, values.len())?;
        Self::on_grid(grid, values)
    }

    pub fn on_grid(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len {
            return Err(LabError::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len
            )));
        }
        if let Some((index, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.re.is_finite() && v.im.is_finite()))
        {
            let value = if v.re.is_finite() { v.im } else { v.re };
            return Err(LabError::NonFinite { index, value });
        }
        Ok(SampledFunction { grid, values })
    }

    /// Values are trusted to be finite; used internally after transforms of
    /// finite data.
    pub(crate) fn from_parts(grid: Grid, values: Vec<C64>) -> Self {
        debug_assert_eq!(grid.len, values.len());
        SampledFunction { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = (0..grid.len).map(|n| f(grid.x(n))).collect();
        Self::on_grid(grid, values)
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len],
        }
    }

    pub fn constant(grid: Grid, c: C64) -> Self {
        SampledFunction {
            grid,
            values: vec![c; grid.len],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn x0(&self) -> f64 {
        self.grid.x0
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn x(&self, n: usize) -> f64 {
        self.grid.x(n)
    }

    pub fn scaled(&self, c: C64) -> SampledFunction {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> SampledFunction {
        SampledFunction::from_parts(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn conj(&self) -> SampledFunction {
        self.map(|v| v.conj())
    }

    fn zip_with(&self, other: &SampledFunction, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(LabError::InvalidGrid("operands live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(SampledFunction::from_parts(self.grid, values))
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &SampledFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Circular shift by whole samples: `out[n] = in[n - k]`, i.e. `f(x - k·dx)`.
    pub fn shift_samples(&self, k: isize) -> SampledFunction {
        let n = self.len() as isize;
        let values = (0..n)
            .map(|i| self.values[(i - k).rem_euclid(n) as usize])
            .collect();
        SampledFunction::from_parts(self.grid, values)
    }

    /// Riemann sum `Σ f(x_n) dx`.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.grid.dx
    }

    /// `∫ f·g dx` on the common grid (no conjugation).
    pub fn pairing(&self, other: &SampledFunction) -> Result<C64> {
        if self.grid != other.grid {
            return Err(LabError::InvalidGrid("operands live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<C64>()
            * self.grid.dx)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus among the `edge` outermost samples on either side.
    pub fn edge_magnitude(&self, edge: usize) -> f64 {
        let n = self.len();
        let edge = edge.min(n / 2);
        self.values[..edge]
            .iter()
            .chain(&self.values[n - edge..])
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Discrete Fourier data of a [`SampledFunction`], stored in centred order:
/// `coeffs[i]` is `f̂(xi0 + i·dxi)` with `xi0 = -(N/2)·dxi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub x0: f64,
    pub xi0: f64,
    pub dxi: f64,
    pub coeffs: Vec<C64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.xi0 + i as f64 * self.dxi
    }

    /// Spectral value at the node nearest to `xi`, if inside the window.
    pub fn at(&self, xi: f64) -> Option<C64> {
        let i = ((xi - self.xi0) / self.dxi).round();
        if i < 0.0 || i as usize >= self.coeffs.len() {
            None
        } else {
            Some(self.coeffs[i as usize])
        }
    }

    /// `2π Σ |f̂|² dξ`, equal to `‖f‖₂²` by Parseval.
    pub fn energy(&self) -> f64 {
        2.0 * PI * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dxi
    }

    pub fn grid(&self) -> Result<Grid> {
        let n = self.coeffs.len();
        Grid::new(self.x0, 2.0 * PI / (n as f64 * self.dxi), n)
    }
}

/// A frequency-domain multiplier.
pub trait Multiplier: Sync {
    fn eval(&self, xi: f64) -> C64;
}

impl<F> Multiplier for F
where
    F: Fn(f64) -> C64 + Sync,
{
    fn eval(&self, xi: f64) -> C64 {
        self(xi)
    }
}

/// FFT-ordered raw coefficients `F_k = Σ f_n e^{-2πikn/N}`.
pub(crate) fn dft(f: &SampledFunction) -> Vec<C64> {
    let mut buf = f.values.clone();
    fft::forward(&mut buf);
    buf
}

/// Inverse of [`dft`] including the `1/N` factor.
pub(crate) fn idft(grid: Grid, mut coeffs: Vec<C64>) -> SampledFunction {
    fft::inverse(&mut coeffs);
    let scale = 1.0 / grid.len as f64;
    for c in coeffs.iter_mut() {
        *c *= scale;
    }
    SampledFunction::from_parts(grid, coeffs)
}

pub fn forward_transform(f: &SampledFunction) -> Spectrum {
    let grid = f.grid;
    let n = grid.len;
    let raw = dft(f);
    let dxi = grid.dxi();
    let xi0 = -((n / 2) as f64) * dxi;
    let factor = grid.dx / (2.0 * PI);
    let mut coeffs = vec![C64::new(0.0, 0.0); n];
    for (k, &c) in raw.iter().enumerate() {
        let xi = grid.xi(k);
        let centred = (k + n / 2) % n;
        coeffs[centred] = c * factor * C64::from_polar(1.0, -xi * grid.x0);
    }
    Spectrum {
        x0: grid.x0,
        xi0,
        dxi,
        coeffs,
    }
}

pub fn inverse_transform(s: &Spectrum) -> Result<SampledFunction> {
    let grid = s.grid()?;
    let n = grid.len;
    let factor = 2.0 * PI / grid.dx;
    let mut raw = vec![C64::new(0.0, 0.0); n];
    for (k, slot) in raw.iter_mut().enumerate() {
        let xi = grid.xi(k);
        let centred = (k + n / 2) % n;
        *slot = s.coeffs[centred] * factor * C64::from_polar(1.0, xi * grid.x0);
    }
    Ok(idft(grid, raw))
}

/// Multiplier sampled at the FFT-ordered frequencies of `grid`.
pub fn sample_multiplier(grid: Grid, m: &dyn Multiplier) -> Result<Vec<C64>> {
    (0..grid.len)
        .map(|k| {
            let xi = grid.xi(k);
            let v = m.eval(xi);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(LabError::NonFinite {
                    index: k,
                    value: xi,
                })
            }
        })
        .collect()
}

/// `(m f̂)^∨`, i.e. convolution of `f` with the inverse transform of `m`.
pub fn multiply_spectrum(f: &SampledFunction, m: &dyn Multiplier) -> Result<SampledFunction> {
    let symbol = sample_multiplier(f.grid, m)?;
    Ok(apply_symbol(f, &symbol))
}

/// Like [`multiply_spectrum`] with the multiplier already sampled in FFT order.
pub fn apply_symbol(f: &SampledFunction, symbol: &[C64]) -> SampledFunction {
    let mut raw = dft(f);
    for (c, s) in raw.iter_mut().zip(symbol) {
        *c *= s;
    }
    idft(f.grid, raw)
}

/// Applies a sampled symbol to precomputed raw DFT data.
pub(crate) fn apply_symbol_raw(grid: Grid, raw: &[C64], symbol: &[C64]) -> SampledFunction {
    let prod = raw.iter().zip(symbol).map(|(a, b)| a * b).collect();
    idft(grid, prod)
}

/// Riemann-sum `L^p` norm; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm(f: &SampledFunction, p: f64) -> Result<f64> {
    lp_norm_values(f.values.iter().map(|v| v.norm()), f.grid.dx, p)
}

/// `L^p` norm of nonnegative samples with step `dx`.
pub fn lp_norm_values(values: impl Iterator<Item = f64>, dx: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(LabError::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(values.fold(0.0, f64::max));
    }
    if p == 1.0 {
        return Ok(values.sum::<f64>() * dx);
    }
    if p == 2.0 {
        return Ok((values.map(|v| v * v).sum::<f64>() * dx).sqrt());
    }
    // Scale by the maximum to keep v^p representable for large p.
    let v: Vec<f64> = values.collect();
    let peak = v.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = v.iter().map(|&x| (x / peak).powf(p)).sum();
    Ok(peak * (s * dx).powf(1.0 / p))
}

/// Dual exponent `p' = p/(p-1)`.
pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss_grid() -> Grid {
        Grid::symmetric(20.0, 1 << 12).unwrap()
    }

    #[test]
    fn grid_rejects_bad_lengths() {
        assert!(Grid::new(0.0, 0.1, 8).is_err());
        assert!(Grid::new(0.0, 0.1, 24).is_err());
        assert!(Grid::new(0.0, -0.1, 32).is_err());
        assert!(Grid::new(0.0, 0.1, 32).is_ok());
    }

    #[test]
    fn non_finite_values_rejected() {
        let mut v = vec![C64::new(0.0, 0.0); 16];
        v[3] = C64::new(f64::NAN, 0.0);
        assert!(matches!(
            SampledFunction::new(0.0, 1.0, v),
            Err(LabError::NonFinite { index: 3, .. })
        ));
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let grid = gauss_grid();
        let f = SampledFunction::from_real_fn(grid, |x| (-x * x / 2.0).exp()).unwrap();
        let s = forward_transform(&f);
        let norm = 1.0 / (2.0 * PI).sqrt();
        for (i, c) in s.coeffs.iter().enumerate() {
            let xi = s.xi(i);
            let exact = norm * (-xi * xi / 2.0).exp();
            assert!((c - exact).norm() < 1e-8, "xi = {xi}: {c} vs {exact}");
        }
    }

    #[test]
    fn zero_has_zero_spectrum() {
        let f = SampledFunction::zeros(gauss_grid());
        assert!(forward_transform(&f).coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn modulation_shifts_spectrum() {
        let grid = gauss_grid();
        let dxi = grid.dxi();
        let w0 = 40.0 * dxi;
        let bump = SampledFunction::from_real_fn(grid, |x| (-x * x).exp()).unwrap();
        let modulated = bump.mul(&SampledFunction::from_fn(grid, |x| C64::from_polar(1.0, w0 * x)).unwrap()).unwrap();
        let a = forward_transform(&bump);
        let b = forward_transform(&modulated);
        for i in 100..a.len() - 100 {
            assert!((b.coeffs[i + 40] - a.coeffs[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let grid = gauss_grid();
        let f = SampledFunction::from_fn(grid, |x| C64::new((-x * x).exp(), (x * 3.0).sin() * (-x * x / 4.0).exp())).unwrap();
        let back = inverse_transform(&forward_transform(&f)).unwrap();
        let err = f.sub(&back).unwrap().max_abs() / f.max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn identity_and_support_multipliers() {
        let grid = gauss_grid();
        let f = SampledFunction::from_real_fn(grid, |x| (-x * x).exp() * (5.0 * x).cos()).unwrap();
        let same = multiply_spectrum(&f, &|_xi: f64| C64::new(1.0, 0.0)).unwrap();
        assert!(f.sub(&same).unwrap().max_abs() < 1e-14);
        // f̂ is negligible beyond |ξ| = 30
        let ind = multiply_spectrum(&f, &|xi: f64| C64::new(if xi.abs() < 30.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        assert!(f.sub(&ind).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn disjoint_band_gives_zero() {
        let grid = gauss_grid();
        let f = SampledFunction::from_real_fn(grid, |x| (-x * x).exp()).unwrap();
        // f̂ lives (to machine precision) in |ξ| < 20; φ_k for k = 8 lives in |ξ| > 25.6
        let phi = bump_phi();
        let out = multiply_spectrum(&f, &|xi: f64| C64::new(phi.value(xi / 256.0), 0.0)).unwrap();
        assert!(out.max_abs() < 1e-14);
    }

    #[test]
    fn non_finite_multiplier_is_an_error() {
        let f = SampledFunction::zeros(gauss_grid());
        let r = multiply_spectrum(&f, &|xi: f64| C64::new(1.0 / xi, 0.0));
        assert!(r.is_err());
    }

    #[test]
    fn lp_norm_basics() {
        let grid = Grid::new(-2.0, 1.0 / 1024.0, 4096).unwrap();
        let chi = SampledFunction::from_real_fn(grid, |x| if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }).unwrap();
        assert_relative_eq!(lp_norm(&chi, 2.0).unwrap(), 1.0, epsilon = 1e-12);
        let g = SampledFunction::from_real_fn(gauss_grid(), |x| (-x * x).exp()).unwrap();
        assert_relative_eq!(lp_norm(&g, 1.0).unwrap(), PI.sqrt(), epsilon = 1e-6);
        for p in [1.0, 1.5, 2.0, 3.7, f64::INFINITY] {
            let a = lp_norm(&g, p).unwrap();
            let b = lp_norm(&g.scaled(C64::new(-3.0, 4.0)), p).unwrap();
            assert_relative_eq!(b, 5.0 * a, max_relative = 1e-13);
        }
        assert!(matches!(lp_norm(&g, 0.5), Err(LabError::InvalidExponent(_))));
    }

    #[test]
    fn dual_exponents() {
        assert_eq!(dual_exponent(2.0), 2.0);
        assert_eq!(dual_exponent(1.0), f64::INFINITY);
        assert_eq!(dual_exponent(f64::INFINITY), 1.0);
        assert_relative_eq!(dual_exponent(4.0 / 3.0), 4.0, epsilon = 1e-12);
    }
}
