//! Uncentered Hardy–Littlewood and dyadic maximal functions on grids.

use crate::error::{LabError, Result};
use crate::signal::{SampledFunction, C64};

type Point = (f64, f64);

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Upper convex hull of points sorted by increasing abscissa.
fn upper_hull(points: impl Iterator<Item = Point>) -> Vec<Point> {
    let mut hull: Vec<Point> = Vec::new();
    for p in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Largest slope from `e` to a hull vertex; `e` lies left of every vertex.
fn max_slope_from(e: Point, hull: &[Point]) -> f64 {
    // The slope from e along a concave chain increases, then decreases.
    let (mut lo, mut hi) = (0usize, hull.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if cross(e, hull[mid], hull[mid + 1]) > 0.0 {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let v = hull[lo];
    (v.1 - e.1) / (v.0 - e.0)
}

/// `max_{a ≤ n < c} (P_c − P_a)/(c − a)` for every sample `n`, by divide and
/// conquer over the prefix points `lo..=hi`.
fn crossing_max(prefix: &[f64], lo: usize, hi: usize, out: &mut [f64]) {
    if hi - lo == 1 {
        out[lo] = out[lo].max(prefix[hi] - prefix[lo]);
        return;
    }
    let mid = (lo + hi) / 2;
    crossing_max(prefix, lo, mid, out);
    crossing_max(prefix, mid, hi, out);
    let pt = |i: usize| (i as f64, prefix[i]);
    // Pairs a < mid < c. Samples left of mid need a ≤ n.
    let right = upper_hull((mid + 1..=hi).map(pt));
    let mut best = f64::NEG_INFINITY;
    for a in lo..mid {
        best = best.max(max_slope_from(pt(a), &right));
        out[a] = out[a].max(best);
    }
    // Samples from mid on need c > n; reflect through the origin so the
    // left points become a right-hand upper hull.
    let refl = |i: usize| (-(i as f64), -prefix[i]);
    let left = upper_hull((lo..mid).rev().map(refl));
    let mut best = f64::NEG_INFINITY;
    for c in (mid + 1..=hi).rev() {
        best = best.max(max_slope_from(refl(c), &left));
        out[c - 1] = out[c - 1].max(best);
    }
}

/// Uncentered maximal averages of nonnegative samples over all windows of
/// consecutive samples containing each index.
pub fn uncentered_max(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut s = 0.0;
    for &v in values {
        s += v;
        prefix.push(s);
    }
    let mut out = vec![0.0; n];
    crossing_max(&prefix, 0, n, &mut out);
    out
}

/// Uncentered Hardy–Littlewood maximal function of `|f|`: the largest
/// sample average over grid windows containing each node.
pub fn hardy_littlewood_max(f: &SampledFunction) -> SampledFunction {
    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let m = uncentered_max(&abs);
    SampledFunction::from_parts(f.grid(), m.into_iter().map(|v| C64::new(v, 0.0)).collect())
}

/// Dyadic maximal function over the blocks `[k·2^s, (k+1)·2^s)` of sample
/// indices counted from the grid origin.
pub fn dyadic_max(f: &SampledFunction) -> Result<SampledFunction> {
    let n = f.len();
    if !n.is_power_of_two() {
        return Err(LabError::InvalidGrid(format!("dyadic maximal function needs a power-of-two length, got {n}")));
    }
    let mut level: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let mut out = level.clone();
    let mut size = 1;
    while size < n {
        level = level.chunks(2).map(|c| c[0] + c[1]).collect();
        size *= 2;
        for (i, o) in out.iter_mut().enumerate() {
            *o = o.max(level[i / size] / size as f64);
        }
    }
    Ok(SampledFunction::from_parts(f.grid(), out.into_iter().map(|v| C64::new(v, 0.0)).collect()))
}
