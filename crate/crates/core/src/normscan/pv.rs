//! Direct principal-value evaluation of `H_Γ(f, g)(x) = p.v.∫ f(x−t) g(x+γ(t)) dt/t`.

use rayon::prelude::*;
use serde::Serialize;

use crate::curve::Curve;
use crate::error::{LabError, Result};
use crate::quad::gauss_legendre;
use crate::signal::{dft, idft, Grid, SampledFunction, C64};

/// Second argument of the bilinear operator.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Sampled(&'a SampledFunction),
    /// `g ≡ c` on the whole line.
    Constant(C64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PvParams {
    /// Smallest inner cutoff; the cutoffs run through `ε_k = 2^{-k}` down to here.
    pub eps_min: f64,
    /// Outer cutoff; `None` means the grid length, so every node sees all of `f`.
    pub t_max: Option<f64>,
    /// Stop once successive extrapolated values differ by less than this.
    pub tolerance: f64,
    /// Spectral oversampling factor used for off-grid values.
    pub upsample: usize,
}

impl Default for PvParams {
    fn default() -> Self {
        PvParams {
            eps_min: 2f64.powi(-20),
            t_max: None,
            tolerance: 1e-10,
            upsample: 8,
        }
    }
}

pub const MAX_HALVINGS: u32 = 20;
const PANEL_ORDER: usize = 4;
const ROMBERG_DEPTH: usize = 4;

/// A node whose cutoff sequence did not settle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PvFlag {
    pub index: usize,
    /// Last difference of successive estimates.
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct BhtOutput {
    pub values: SampledFunction,
    pub flagged: Vec<PvFlag>,
    /// Largest number of halvings any node needed.
    pub halvings: u32,
}

/// Band-limited interpolant of samples, zero outside the grid interval.
struct Interpolant {
    lo: f64,
    hi: f64,
    h: f64,
    values: Vec<C64>,
}

impl Interpolant {
    fn new(f: &SampledFunction, upsample: usize) -> Interpolant {
        let grid = f.grid();
        let n = grid.len;
        let big = n * upsample;
        let raw = dft(f);
        let mut padded = vec![C64::new(0.0, 0.0); big];
        padded[..n / 2].copy_from_slice(&raw[..n / 2]);
        for k in n / 2 + 1..n {
            padded[big - (n - k)] = raw[k];
        }
        padded[n / 2] = raw[n / 2] * 0.5;
        padded[big - n / 2] = raw[n / 2] * 0.5;
        let fine = Grid {
            x0: grid.x0,
            dx: grid.dx / upsample as f64,
            len: big,
        };
        let values = idft(fine, padded).into_values().into_iter().map(|v| v * upsample as f64).collect();
        Interpolant {
            lo: grid.x0,
            hi: grid.x0 + n as f64 * grid.dx,
            h: fine.dx,
            values,
        }
    }

    /// Six-point Lagrange interpolation of the oversampled values.
    fn value(&self, x: f64) -> C64 {
        if !(x >= self.lo && x < self.hi) {
            return C64::new(0.0, 0.0);
        }
        let pos = (x - self.lo) / self.h;
        let i = pos.floor();
        let tau = pos - i;
        let i = i as isize;
        let len = self.values.len() as isize;
        let mut acc = C64::new(0.0, 0.0);
        for s in -2..=3isize {
            let mut w = 1.0;
            for r in -2..=3isize {
                if r != s {
                    w *= (tau - r as f64) / (s - r) as f64;
                }
            }
            if w != 0.0 {
                acc += self.values[(i + s).rem_euclid(len) as usize] * w;
            }
        }
        acc
    }
}

enum Second {
    Sampled(Interpolant),
    Constant(C64),
}

impl Second {
    fn value(&self, x: f64) -> C64 {
        match self {
            Second::Sampled(i) => i.value(x),
            Second::Constant(c) => *c,
        }
    }
}

/// Gauss nodes and weights on `[a, b]`, with panel breaks on multiples of `h`
/// and further splits where `γ` moves the argument of `g` quickly.
fn panel_nodes(a: f64, b: f64, h: f64, speed: &dyn Fn(f64) -> f64, keep: &dyn Fn(f64, f64) -> bool) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(PANEL_ORDER);
    let mut breaks = vec![a];
    let mut k = (a / h).floor() + 1.0;
    while k * h < b {
        breaks.push(k * h);
        k += 1.0;
    }
    breaks.push(b);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo || !keep(lo, hi) {
            continue;
        }
        let pieces = (speed(hi).max(speed(lo)).max(1.0)).ceil() as usize;
        let step = (hi - lo) / pieces as f64;
        for p in 0..pieces {
            let s = lo + p as f64 * step;
            for (x, wt) in gx.iter().zip(&gw) {
                out.push((s + 0.5 * step * (x + 1.0), 0.5 * step * wt));
            }
        }
    }
    out
}

/// `H_Γ(f, g)` at every node of `f`'s grid by the paired integrand
/// `[f(x−t)g(x+γ(t)) − f(x+t)g(x+γ(−t))]/t` on `t > 0`, with Romberg
/// extrapolation over the cutoffs `ε_k = 2^{-k}`.
pub fn bht_direct(curve: &Curve, f: &SampledFunction, g: Operand<'_>, params: &PvParams) -> Result<BhtOutput> {
    let grid = f.grid();
    if let Operand::Sampled(g) = g {
        if g.grid() != grid {
            return Err(LabError::InvalidGrid("f and g live on different grids".into()));
        }
    }
    if !(params.tolerance > 0.0) || !(params.eps_min > 0.0) || params.upsample == 0 {
        return Err(LabError::Invalid(format!("bad PV parameters {params:?}")));
    }
    let width = grid.len as f64 * grid.dx;
    let t_max = params.t_max.unwrap_or(width);
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(LabError::Invalid(format!("T_max = {t_max}")));
    }
    let fi = Interpolant::new(f, params.upsample);
    let gi = match g {
        Operand::Sampled(g) => Second::Sampled(Interpolant::new(g, params.upsample)),
        Operand::Constant(c) => Second::Constant(c),
    };
    let h = fi.h;
    let sampled_g = matches!(gi, Second::Sampled(_));
    let speed = |t: f64| {
        if sampled_g {
            curve.d1(t).abs().max(curve.d1(-t).abs())
        } else {
            1.0
        }
    };
    // Past this both g factors sit off the grid for every node.
    let keep = |lo: f64, _hi: f64| !sampled_g || curve.eval(lo).abs().min(curve.eval(-lo).abs()) <= width;

    let halvings = MAX_HALVINGS.min((1.0 / params.eps_min).log2().ceil().max(1.0) as u32);
    let eps0 = t_max.min(1.0);
    let base = panel_nodes(eps0, t_max, h, &speed, &keep);
    let shells: Vec<Vec<(f64, f64)>> = (1..=halvings)
        .map(|k| {
            let e = eps0 * 2f64.powi(-(k as i32));
            panel_nodes(e, 2.0 * e, h, &speed, &keep)
        })
        .collect();

    let integrand = |x: f64, t: f64| -> C64 {
        let a = fi.value(x - t) * gi.value(x + curve.eval(t));
        let b = fi.value(x + t) * gi.value(x + curve.eval(-t));
        (a - b) / t
    };
    let sum = |x: f64, nodes: &[(f64, f64)]| nodes.iter().map(|&(t, w)| integrand(x, t) * w).sum::<C64>();

    let per_node: Vec<(C64, u32, Option<f64>)> = (0..grid.len)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let mut partial = sum(x, &base);
            let mut prev_row = vec![partial];
            let mut prev_est = partial;
            let mut delta = f64::INFINITY;
            for (k, shell) in shells.iter().enumerate() {
                partial += sum(x, shell);
                let mut row = vec![partial];
                for d in 1..=ROMBERG_DEPTH.min(k + 1) {
                    let c = 2f64.powi(d as i32);
                    row.push(row[d - 1] + (row[d - 1] - prev_row[d - 1]) / (c - 1.0));
                }
                let est = *row.last().unwrap();
                delta = (est - prev_est).norm();
                if k >= 1 && delta < params.tolerance {
                    return (est, k as u32 + 1, None);
                }
                prev_est = est;
                prev_row = row;
            }
            (prev_est, halvings, Some(delta))
        })
        .collect();

    let flagged = per_node
        .iter()
        .enumerate()
        .filter_map(|(index, r)| r.2.map(|delta| PvFlag { index, delta }))
        .collect();
    let used = per_node.iter().map(|r| r.1).max().unwrap_or(0);
    Ok(BhtOutput {
        values: SampledFunction::on_grid(grid, per_node.into_iter().map(|r| r.0).collect())?,
        flagged,
        halvings: used,
    })
}

/// `Λ(f, g, h) = ∫ H_Γ(f, g)·h` on the common grid.
pub fn trilinear_direct(curve: &Curve, f: &SampledFunction, g: Operand<'_>, h: &SampledFunction, params: &PvParams) -> Result<C64> {
    let out = bht_direct(curve, f, g, params)?;
    out.values.pairing(h)
}

/// `p.v.∫ f(x−t) dt/t` through the multiplier `−iπ·sign(ξ)`, on a copy of
/// `f` zero-padded to `pad` times its length.
pub fn hilbert_fft(f: &SampledFunction, pad: usize) -> Result<SampledFunction> {
    if pad == 0 || !pad.is_power_of_two() {
        return Err(LabError::Invalid(format!("padding factor {pad} must be a power of two")));
    }
    let grid = f.grid();
    let big = Grid {
        x0: grid.x0,
        dx: grid.dx,
        len: grid.len * pad,
    };
    let mut values = f.values().to_vec();
    values.resize(big.len, C64::new(0.0, 0.0));
    let mut raw = dft(&SampledFunction::on_grid(big, values)?);
    let n = big.len;
    for (k, c) in raw.iter_mut().enumerate() {
        let sign = if k == 0 || k == n / 2 {
            0.0
        } else if k < n / 2 {
            1.0
        } else {
            -1.0
        };
        *c *= C64::new(0.0, -std::f64::consts::PI * sign);
    }
    let mut out = idft(big, raw).into_values();
    out.truncate(grid.len);
    SampledFunction::on_grid(grid, out)
}

/// `‖a − b‖₂ / ‖b‖₂` on a common grid.
pub fn relative_l2(a: &SampledFunction, b: &SampledFunction) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(LabError::InvalidGrid("operands live on different grids".into()));
    }
    let num: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.values().iter().map(|y| y.norm_sqr()).sum();
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}
