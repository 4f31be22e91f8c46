//! Seeded test-function ensembles: modulated Gaussian packets and lacunary sums.

use super::{Grid, SampledFunction, C64};
use crate::error::{LabError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// `Σ a_i exp(-(x-x_i)²/σ_i²) e^{iω_i x}` with independent packets.
    Gaussian,
    /// One Gaussian envelope carrying frequencies `ω_0·2^k`.
    Lacunary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleShape {
    pub kind: EnsembleKind,
    pub grid: Grid,
    pub components: usize,
    /// Range of `|ω|`; sampled log-uniformly when the lower end is positive.
    pub freq_range: (f64, f64),
    /// Range of the packet widths `σ`.
    pub width_range: (f64, f64),
    /// Centres are drawn from `[-spread, spread]·half_width` around the grid centre.
    pub center_spread: f64,
    /// Real-valued members use `cos(ωx + θ)` carriers.
    pub real: bool,
}

impl EnsembleShape {
    /// Broadband packets resolved on `grid` and decayed at its edges.
    pub fn gaussian(grid: Grid) -> Self {
        let hw = grid.half_width();
        EnsembleShape {
            kind: EnsembleKind::Gaussian,
            grid,
            components: 4,
            freq_range: (0.0, 0.5 * grid.nyquist()),
            width_range: (hw / 40.0, hw / 12.0),
            center_spread: 0.35,
            real: false,
        }
    }

    pub fn lacunary(grid: Grid) -> Self {
        EnsembleShape {
            kind: EnsembleKind::Lacunary,
            components: 8,
            freq_range: (grid.nyquist() / 512.0, 0.5 * grid.nyquist()),
            ..EnsembleShape::gaussian(grid)
        }
    }

    pub fn with_components(mut self, components: usize) -> Self {
        self.components = components;
        self
    }

    pub fn with_freq_range(mut self, lo: f64, hi: f64) -> Self {
        self.freq_range = (lo, hi);
        self
    }

    pub fn with_width_range(mut self, lo: f64, hi: f64) -> Self {
        self.width_range = (lo, hi);
        self
    }

    pub fn with_center_spread(mut self, spread: f64) -> Self {
        self.center_spread = spread;
        self
    }

    pub fn real(mut self, real: bool) -> Self {
        self.real = real;
        self
    }
}

/// Parameters of one packet `a·exp(-(x-center)²/width²)·carrier(freq·x + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketParams {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub freq: f64,
    pub phase: f64,
}

#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub seed: u64,
    pub index: usize,
    pub params: Vec<PacketParams>,
    pub function: SampledFunction,
}

fn sample_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn sample_log_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo > 0.0 && hi > lo {
        (rng.random_range(lo.ln()..hi.ln())).exp()
    } else {
        sample_range(rng, (lo, hi))
    }
}

fn member_params(shape: &EnsembleShape, rng: &mut ChaCha8Rng) -> Vec<PacketParams> {
    let hw = shape.grid.half_width();
    let mid = shape.grid.x0 + hw;
    let spread = shape.center_spread * hw;
    let tau = std::f64::consts::TAU;
    match shape.kind {
        EnsembleKind::Gaussian => (0..shape.components)
            .map(|_| {
                let amplitude = rng.random_range(0.25..1.0);
                let center = mid + rng.random_range(-spread..=spread);
                let width = sample_range(rng, shape.width_range);
                let mut freq = sample_log_range(rng, shape.freq_range);
                if !shape.real && rng.random_bool(0.5) {
                    freq = -freq;
                }
                let phase = rng.random_range(0.0..tau);
                PacketParams {
                    amplitude,
                    center,
                    width,
                    freq,
                    phase,
                }
            })
            .collect(),
        EnsembleKind::Lacunary => {
            let center = mid + rng.random_range(-spread..=spread);
            let width = shape.width_range.1;
            let (lo, hi) = shape.freq_range;
            let base = lo.max(shape.grid.dxi()) * rng.random_range(1.0..2.0);
            let mut params = Vec::new();
            let mut freq = base;
            while freq <= hi && params.len() < shape.components {
                let amplitude = rng.random_range(0.25..1.0);
                let phase = rng.random_range(0.0..tau);
                let sign = if !shape.real && rng.random_bool(0.5) { -1.0 } else { 1.0 };
                params.push(PacketParams {
                    amplitude,
                    center,
                    width,
                    freq: sign * freq,
                    phase,
                });
                freq *= 2.0;
            }
            params
        }
    }
}

fn synthesize(grid: Grid, params: &[PacketParams], real: bool) -> Result<SampledFunction> {
    SampledFunction::from_fn(grid, |x| {
        params
            .iter()
            .map(|p| {
                let u = (x - p.center) / p.width;
                let env = p.amplitude * (-u * u).exp();
                let arg = p.freq * x + p.phase;
                if real {
                    C64::new(env * arg.cos(), 0.0)
                } else {
                    C64::from_polar(env, arg)
                }
            })
            .sum()
    })
}

/// Deterministic ensemble of `count` members; member `i` draws from stream `i`
/// of a ChaCha8 generator keyed by `seed`.
pub fn make_ensemble(seed: u64, count: usize, shape: &EnsembleShape) -> Result<Vec<EnsembleMember>> {
    if count == 0 {
        return Err(LabError::Invalid("ensemble count must be at least 1".into()));
    }
    if shape.components == 0 {
        return Err(LabError::Invalid("ensemble members need at least one component".into()));
    }
    (0..count)
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let params = member_params(shape, &mut rng);
            let function = synthesize(shape.grid, &params, shape.real)?;
            Ok(EnsembleMember {
                seed,
                index,
                params,
                function,
            })
        })
        .collect()
}
