//! Calderón–Zygmund decomposition on dyadic grid blocks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::signal::{Grid, SampledFunction, C64};

/// A dyadic block of `len` samples starting at index `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CzInterval {
    pub start: usize,
    pub len: usize,
    /// Left endpoint `x0 + start·dx`.
    pub lo: f64,
    /// Right endpoint `x0 + (start + len)·dx`.
    pub hi: f64,
    /// Sample average of `|f|` over the block.
    pub average: f64,
}

impl CzInterval {
    fn new(grid: Grid, start: usize, len: usize, average: f64) -> Self {
        CzInterval {
            start,
            len,
            lo: grid.x(start),
            hi: grid.x0 + (start + len) as f64 * grid.dx,
            average,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains_index(&self, n: usize) -> bool {
        (self.start..self.start + self.len).contains(&n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Maximal block with average above the level.
    Selected,
    /// Block holding no selected descendant.
    Good,
    /// Block split because some descendant is selected.
    Split,
}

/// The examined part of the dyadic tree; `Good` subtrees are collapsed.
#[derive(Debug, Clone, Serialize)]
pub struct CzTree {
    pub start: usize,
    pub len: usize,
    pub average: f64,
    pub kind: NodeKind,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CzTree>,
}

#[derive(Debug, Clone)]
pub struct CzDecomposition {
    pub lambda: f64,
    pub good: SampledFunction,
    /// `(J, b_J)` with `b_J = (f − avg_J f)·χ_J`.
    pub bad_parts: Vec<(CzInterval, SampledFunction)>,
    pub intervals: Vec<CzInterval>,
    pub tree: CzTree,
}

/// Measured deviations of the four decomposition properties.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CzInvariants {
    /// `max |f − g − Σ b_J|`.
    pub reconstruction: f64,
    /// `max_J |∫ b_J|`.
    pub mean_zero: f64,
    /// `max_J` of `|b_J|` outside `J`.
    pub support_leak: f64,
    pub good_sup: f64,
    pub two_lambda: f64,
    pub total_length: f64,
    pub l1_over_lambda: f64,
}

/// Tolerance of the reconstruction and mean-zero properties.
pub const CZ_TOL: f64 = 1e-12;

impl CzInvariants {
    pub fn pass(&self) -> bool {
        self.reconstruction <= CZ_TOL
            && self.mean_zero <= CZ_TOL
            && self.support_leak == 0.0
            && self.good_sup <= self.two_lambda * (1.0 + 1e-12)
            && self.total_length <= self.l1_over_lambda * (1.0 + 1e-12)
    }
}

struct Builder<'a> {
    values: &'a [C64],
    prefix: Vec<f64>,
    lambda: f64,
    grid: Grid,
    selected: Vec<CzInterval>,
}

impl Builder<'_> {
    fn average(&self, start: usize, len: usize) -> f64 {
        (self.prefix[start + len] - self.prefix[start]) / len as f64
    }

    /// Visits a block whose average is at most λ.
    fn descend(&mut self, start: usize, len: usize) -> CzTree {
        let average = self.average(start, len);
        if len == 1 {
            return CzTree {
                start,
                len,
                average,
                kind: NodeKind::Good,
                children: Vec::new(),
            };
        }
        let half = len / 2;
        let mut children = Vec::with_capacity(2);
        for s in [start, start + half] {
            let a = self.average(s, half);
            if a > self.lambda {
                self.selected.push(CzInterval::new(self.grid, s, half, a));
                children.push(CzTree {
                    start: s,
                    len: half,
                    average: a,
                    kind: NodeKind::Selected,
                    children: Vec::new(),
                });
            } else {
                children.push(self.descend(s, half));
            }
        }
        if children.iter().all(|c| c.kind == NodeKind::Good) {
            children.clear();
            CzTree {
                start,
                len,
                average,
                kind: NodeKind::Good,
                children,
            }
        } else {
            CzTree {
                start,
                len,
                average,
                kind: NodeKind::Split,
                children,
            }
        }
    }
}

/// Decomposes `f = g + Σ_J b_J` at level `λ` along the dyadic blocks of the
/// grid. The whole grid is the top block, so `λ` must be at least the grid
/// average of `|f|`.
pub fn cz_decompose(f: &SampledFunction, lambda: f64) -> Result<CzDecomposition> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(LabError::Invalid(format!("CZ level must be positive, got {lambda}")));
    }
    let n = f.len();
    if !n.is_power_of_two() {
        return Err(LabError::InvalidGrid(format!("CZ needs a power-of-two length, got {n}")));
    }
    let grid = f.grid();
    let values = f.values();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut s = 0.0;
    for v in values {
        s += v.norm();
        prefix.push(s);
    }
    let top = s / n as f64;
    if top > lambda {
        return Err(LabError::LevelTooLow { lambda, average: top });
    }
    let mut b = Builder {
        values,
        prefix,
        lambda,
        grid,
        selected: Vec::new(),
    };
    let tree = b.descend(0, n);
    let mut intervals = b.selected;
    intervals.sort_by_key(|j| j.start);

    let mut good = values.to_vec();
    let mut bad_parts = Vec::with_capacity(intervals.len());
    for j in &intervals {
        let block = &b.values[j.start..j.start + j.len];
        let mean = block.iter().sum::<C64>() / j.len as f64;
        let mut bj = vec![C64::new(0.0, 0.0); n];
        for (k, v) in block.iter().enumerate() {
            bj[j.start + k] = v - mean;
            good[j.start + k] = mean;
        }
        bad_parts.push((*j, SampledFunction::from_parts(grid, bj)));
    }
    let out = CzDecomposition {
        lambda,
        good: SampledFunction::from_parts(grid, good),
        bad_parts,
        intervals,
        tree,
    };
    debug_assert!(out.invariants(f).pass(), "{:?}", out.invariants(f));
    Ok(out)
}

impl CzDecomposition {
    pub fn invariants(&self, f: &SampledFunction) -> CzInvariants {
        let dx = f.dx();
        let mut sum = self.good.values().to_vec();
        let mut mean_zero = 0.0f64;
        let mut support_leak = 0.0f64;
        for (j, b) in &self.bad_parts {
            for (i, (s, v)) in sum.iter_mut().zip(b.values()).enumerate() {
                *s += v;
                if !j.contains_index(i) {
                    support_leak = support_leak.max(v.norm());
                }
            }
            mean_zero = mean_zero.max((b.values().iter().sum::<C64>() * dx).norm());
        }
        let reconstruction = sum.iter().zip(f.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let l1: f64 = f.values().iter().map(|v| v.norm()).sum::<f64>() * dx;
        CzInvariants {
            reconstruction,
            mean_zero,
            support_leak,
            good_sup: self.good.max_abs(),
            two_lambda: 2.0 * self.lambda,
            total_length: self.intervals.iter().map(|j| j.len).sum::<usize>() as f64 * dx,
            l1_over_lambda: l1 / self.lambda,
        }
    }
}

/// Seeded random function constant on the pieces of a random dyadic
/// partition of the grid, with heavy-tailed piece values of random sign.
pub fn dyadic_step_function(grid: Grid, seed: u64, stream: u64) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = grid.len;
    let mut values = vec![C64::new(0.0, 0.0); n];
    let mut stack = vec![(0usize, n)];
    while let Some((start, len)) = stack.pop() {
        if len > 1 && rng.random_bool(0.7) {
            stack.push((start, len / 2));
            stack.push((start + len / 2, len / 2));
            continue;
        }
        // Log-uniform magnitudes over four decades, a fifth of pieces zero.
        let v = if rng.random_bool(0.2) {
            0.0
        } else {
            let mag = 10f64.powf(rng.random_range(-2.0..2.0));
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        };
        for x in &mut values[start..start + len] {
            *x = C64::new(v, 0.0);
        }
    }
    SampledFunction::from_parts(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid() -> Grid {
        Grid::new(0.0, 1.0 / 64.0, 64).unwrap()
    }

    #[test]
    fn level_above_maximal_function_is_trivial() {
        let f = SampledFunction::from_real_fn(unit_grid(), |x| if x < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let cz = cz_decompose(&f, 2.0).unwrap();
        assert!(cz.intervals.is_empty() && cz.bad_parts.is_empty());
        assert_eq!(cz.good, f);
        assert_eq!(cz.tree.kind, NodeKind::Good);
    }

    #[test]
    fn hand_recursion_example() {
        let f = SampledFunction::from_real_fn(unit_grid(), |x| {
            if x < 1.0 / 16.0 {
                6.0
            } else if x < 1.0 / 8.0 {
                2.0
            } else {
                0.0
            }
        })
        .unwrap();
        let cz = cz_decompose(&f, 3.0).unwrap();
        assert_eq!(cz.intervals.len(), 1);
        let j = cz.intervals[0];
        assert_eq!((j.start, j.len, j.lo, j.hi, j.average), (0, 8, 0.0, 0.125, 4.0));
        let b = &cz.bad_parts[0].1;
        for (i, v) in b.values().iter().enumerate() {
            let want = match i {
                0..4 => 2.0,
                4..8 => -2.0,
                _ => 0.0,
            };
            assert_eq!(v.re, want, "i = {i}");
        }
        assert!(cz.good.values()[..8].iter().all(|v| v.re == 4.0));
        assert!(cz.invariants(&f).pass());
    }

    #[test]
    fn invariants_on_random_step_functions() {
        let grid = Grid::symmetric(4.0, 256).unwrap();
        for stream in 0..20 {
            let f = dyadic_step_function(grid, 5, stream);
            let avg = f.values().iter().map(|v| v.norm()).sum::<f64>() / grid.len as f64;
            if avg == 0.0 {
                continue;
            }
            for factor in [1.0, 1.5, 3.0, 10.0, 100.0] {
                let cz = cz_decompose(&f, factor * avg).unwrap();
                let inv = cz.invariants(&f);
                assert!(inv.pass(), "{inv:?}");
            }
        }
    }

    #[test]
    fn low_level_is_refused() {
        let f = SampledFunction::constant(unit_grid(), C64::new(1.0, 0.0));
        assert!(matches!(cz_decompose(&f, 0.5), Err(LabError::LevelTooLow { .. })));
        assert!(cz_decompose(&f, -1.0).is_err());
    }
}
