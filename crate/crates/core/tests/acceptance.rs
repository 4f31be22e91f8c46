//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! numbers and the runtime against its budget. Criteria that fail are
//! reported, not asserted, so the target always exits 0.

use std::time::{Duration, Instant};

use bhtlab::curve::{asymptotic_profile, nonflatness_report, r_profile, sample_i};
use bhtlab::decomposition::{lambda_jm_spatial, lambda_jm_spectral, overlap_count, FilterBank};
use bhtlab::multiplier::{critical_point, phase_at_critical, sample_admissible_queries, CriticalPointQuery};
use bhtlab::normscan::{
    bht_direct, fit_decay_at_l2_point, hilbert_fft, relative_l2, scan_edge, scan_table, Edge, Operand, PvParams, ScanSetup,
    REFERENCE_ALPHA_L2,
};
use bhtlab::signal::{lp_norm, make_ensemble, EnsembleShape, Grid, SampledFunction};
use bhtlab::squarefuncs::{cz_decompose, dyadic_step_function, lp_j_range, norm_growth_in_shift, shifted_square_function};
use bhtlab::table::content_hash;
use bhtlab::{builtin_curve, Curve, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(n: u32, name: &str, budget: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("aborted: {msg}"))
        }
    };
    let in_budget = elapsed <= budget;
    let ok = pass && in_budget;
    println!(
        "criterion {n:>2} {}: {name}: {detail} [{:.1} s of {} s{}]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_budget { "" } else { ", over budget" }
    );
    ok
}

fn curve(s: &str) -> Curve {
    builtin_curve(s).unwrap()
}

/// `t^d/d` and `s^{1/(d−1)}` (odd root kept real) for monomials.
fn curve_exactness() -> Outcome {
    let pts = sample_i(64);
    let mut worst_q = 0.0f64;
    let mut worst_r = 0.0f64;
    for d in 2..=5i32 {
        let c = curve(&format!("t^{d}"));
        for j in [0, 3, 10, 20, 30] {
            let slice = asymptotic_profile(&c, j, &pts).unwrap();
            for (&t, &v) in pts.iter().zip(&slice.values) {
                let want = t.powi(d) / d as f64;
                worst_q = worst_q.max((v - want).abs() / want.abs().max(1.0));
            }
            let top = 4f64.powi(d - 1);
            let mut s_grid: Vec<f64> = (0..64).map(|i| top.recip() * top.powf(2.0 * i as f64 / 63.0)).collect();
            if d % 2 == 0 {
                let neg: Vec<f64> = s_grid.iter().map(|s| -s).collect();
                s_grid.extend(neg);
            }
            let slice = r_profile(&c, j, &s_grid).unwrap();
            for (&s, &v) in s_grid.iter().zip(&slice.values) {
                let want = s.signum() * s.abs().powf(1.0 / (d - 1) as f64);
                worst_r = worst_r.max((v - want).abs() / want.abs().max(1.0));
            }
        }
    }
    let nf = nonflatness_report(&curve("t^2"), None).unwrap();
    let nf_err = [nf.inf_q2, nf.inf_r1, nf.inf_dual].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let pass = worst_q <= 1e-9 && worst_r <= 1e-9 && nf_err <= 1e-9;
    outcome(
        pass,
        format!("Q error {worst_q:.1e}, r error {worst_r:.1e}, t^2 non-flatness ({}, {}, {}) off by {nf_err:.1e}", nf.inf_q2, nf.inf_r1, nf.inf_dual),
    )
}

type Derivative = fn(f64) -> f64;

/// Hand-written γ′ for the builtin curves used below.
fn builtin_family() -> Vec<(&'static str, Derivative)> {
    vec![
        ("t^2", |t| 2.0 * t),
        ("t^3", |t| 3.0 * t * t),
        ("t^2 + t^3", |t| 2.0 * t + 3.0 * t * t),
        ("pow: 1.5", |t| 1.5 * t.signum() * t.abs().sqrt()),
        ("pow: 2.5 odd", |t| 2.5 * t.abs().powf(1.5)),
    ]
}

fn critical_points() -> Outcome {
    let mut worst_res = 0.0f64;
    let mut worst_env = 0.0f64;
    let mut failures = 0usize;
    let mut total = 0usize;
    for (name, d1) in builtin_family() {
        let c = curve(name);
        for (xi, eta, j) in sample_admissible_queries(&c, 2024, 1000, 20) {
            total += 1;
            let q = CriticalPointQuery::new(&c, xi, eta, j);
            let s = 2f64.powi(j);
            let Ok(t) = critical_point(&q) else {
                failures += 1;
                continue;
            };
            let residual = ((-xi + eta * d1(t / s)) / s).abs();
            let h = 1e-5 * xi.abs();
            let psi = |x: f64| phase_at_critical(&CriticalPointQuery::new(&c, x, eta, j));
            let env = match (psi(xi + h), psi(xi - h)) {
                (Ok(p), Ok(m)) => ((p - m) / (2.0 * h) - t / s).abs(),
                _ => f64::INFINITY,
            };
            worst_res = worst_res.max(residual);
            worst_env = worst_env.max(env);
        }
    }
    let pass = failures == 0 && worst_res < 1e-10 && worst_env < 1e-6;
    outcome(
        pass,
        format!("{total} queries over 5 curves, {failures} without a root, max |phi'(t_c)| {worst_res:.1e}, max envelope defect {worst_env:.1e}"),
    )
}

/// For `t^d` the rescaled phase is `η(d−1)/d·s^{d/(d−1)}` with `s = ξ/η`;
/// `t² + t³` has the `t²` limit.
fn scaling_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(313);
    let queries: Vec<(f64, f64)> = (0..40)
        .map(|_| {
            let eta = rng.random_range(0.5f64.ln()..50f64.ln()).exp();
            let s = rng.random_range(0.5..2.0);
            (s * eta, eta)
        })
        .collect();
    let target = |d: i32, xi: f64, eta: f64| {
        let s = xi / eta;
        eta * (d - 1) as f64 / d as f64 * s.powf(d as f64 / (d - 1) as f64)
    };
    let residual = |c: &Curve, d: i32, j: i32, xi: f64, eta: f64| {
        let eta_j = eta / c.d1(2f64.powi(-j));
        let psi = phase_at_critical(&CriticalPointQuery::new(c, xi, eta_j, j)).unwrap();
        (2f64.powi(j) * psi - target(d, xi, eta)).abs()
    };
    let mut mono = 0.0f64;
    for (name, d) in [("t^2", 2), ("t^3", 3)] {
        let c = curve(name);
        for j in 0..=20 {
            for &(xi, eta) in &queries {
                mono = mono.max(residual(&c, d, j, xi, eta));
            }
        }
    }
    let mixed = curve("t^2 + t^3");
    let sups: Vec<f64> = (0..=20)
        .step_by(2)
        .map(|j| queries.iter().map(|&(xi, eta)| residual(&mixed, 2, j, xi, eta)).fold(0.0, f64::max))
        .collect();
    let decreasing = sups.windows(2).all(|w| w[1] < w[0]);
    let last = *sups.last().unwrap();
    let pass = mono < 1e-8 && decreasing && last < 1e-4;
    outcome(
        pass,
        format!("monomial residual {mono:.1e}; t^2+t^3 residual {:.1e} (j=0) to {last:.1e} (j=20), decreasing: {decreasing}", sups[0]),
    )
}

/// Narrow packets, so every band of the grid carries energy.
fn broadband(grid: Grid) -> EnsembleShape {
    EnsembleShape::gaussian(grid)
        .with_components(6)
        .with_width_range(2.0 * grid.dx, 8.0 * grid.dx)
        .with_freq_range(0.0, 0.8 * grid.nyquist())
}

fn lambda_equivalence() -> Outcome {
    let c = curve("t^2");
    let mut worst = 0.0f64;
    let mut smallest = f64::INFINITY;
    for m in [4u32, 6, 8] {
        let bank = FilterBank::new(&c, m, 0, 4).unwrap();
        for j in [0, 2, 4] {
            let grid = bank.grid_for(j, 1 << 12).unwrap();
            let fs: Vec<SampledFunction> = make_ensemble(100 + m as u64, 60, &broadband(grid)).unwrap().into_iter().map(|e| e.function).collect();
            for t in fs.chunks(3) {
                let a = lambda_jm_spatial(&bank, &t[0], &t[1], &t[2], j).unwrap();
                let b = lambda_jm_spectral(&bank, &t[0], &t[1], &t[2], j).unwrap();
                let scale = t.iter().map(|f| lp_norm(f, 2.0).unwrap()).product::<f64>();
                smallest = smallest.min(b.norm() / scale);
                worst = worst.max((a - b).norm() / b.norm());
            }
        }
    }
    outcome(
        worst < 1e-6,
        format!("180 evaluations on t^2, max relative error {worst:.1e} (smallest |Lambda|/product of L2 norms {smallest:.1e})"),
    )
}

/// Depth at every left endpoint: `#{lo ≤ x} − #{hi < x}` by binary search.
fn max_depth(intervals: &[(f64, f64)]) -> usize {
    let mut los: Vec<f64> = intervals.iter().map(|i| i.0).collect();
    let mut his: Vec<f64> = intervals.iter().map(|i| i.1).collect();
    los.sort_by(f64::total_cmp);
    his.sort_by(f64::total_cmp);
    los.iter()
        .map(|&x| los.partition_point(|&v| v <= x) - his.partition_point(|&v| v < x))
        .max()
        .unwrap_or(0)
}

fn overlaps() -> Outcome {
    let mut worst = 0usize;
    let mut agree = true;
    let mut per_curve = Vec::new();
    for (name, d1) in [("t^2", (|t: f64| 2.0 * t) as Derivative), ("t^3", |t| 3.0 * t * t)] {
        let c = curve(name);
        let mut counts = Vec::new();
        for m in 1..=8u32 {
            let mut intervals = Vec::new();
            for j in 0..=40 {
                let s = 2f64.powi(-j);
                let d = s * d1(s);
                for p0 in (1u64 << m)..(1u64 << (m + 1)) {
                    let p = p0 as f64;
                    intervals.push(((p - 10.0) / d, (p - 0.1) / d));
                    intervals.push(((p + 0.1) / d, (p + 10.0) / d));
                }
            }
            let oracle = max_depth(&intervals);
            let lib = overlap_count(&c, m, 40).unwrap();
            agree &= oracle == lib;
            worst = worst.max(lib);
            counts.push(lib);
        }
        per_curve.push(format!("{name} m=1..8 {counts:?}"));
    }
    outcome(
        agree && worst <= 3,
        format!("max overlap {worst} (bound 3), sweep agrees with oracle: {agree}; {}", per_curve.join("; ")),
    )
}

fn oscillatory_decay() -> Outcome {
    let mut slopes = Vec::new();
    for name in ["t^2", "t^3"] {
        let fit = bhtlab::squarefuncs::interaction_decay_fit(&curve(name), 8).unwrap();
        slopes.push((name, fit.slope()));
    }
    let pass = slopes.iter().all(|s| s.1 <= -1.8);
    let text: Vec<String> = slopes.iter().map(|(n, s)| format!("{n} slope {s:.3}")).collect();
    outcome(pass, format!("{} (bound -1.8 at m=8)", text.join(", ")))
}

fn shifted_square_functions() -> Outcome {
    let grid = Grid::symmetric(64.0, 1 << 12).unwrap();
    let fs: Vec<SampledFunction> = make_ensemble(77, 8, &EnsembleShape::gaussian(grid)).unwrap().into_iter().map(|e| e.function).collect();
    let mut worst = 0.0f64;
    for f in &fs {
        let base = shifted_square_function(f, 0, lp_j_range(grid)).norm(2.0).unwrap();
        for l in [1i64, -1, 3, 4, 16, -64, 100, 256, 1000, 1024] {
            let n = shifted_square_function(f, l, lp_j_range(grid)).norm(2.0).unwrap();
            worst = worst.max((n - base).abs() / base);
        }
    }
    let growth = norm_growth_in_shift(&fs, 4.0 / 3.0, &[1, 4, 16, 64, 256, 1024]).unwrap();
    let e = growth.exponent();
    let pass = worst < 1e-10 && e <= growth.predicted + 0.15;
    outcome(pass, format!("L2 shift invariance {worst:.1e}; q=4/3 growth exponent {e:.3} (limit {} + 0.15)", growth.predicted))
}

fn cz_invariants() -> Outcome {
    let grid = Grid::symmetric(4.0, 256).unwrap();
    let mut checked = 0usize;
    let mut bad = 0usize;
    let mut worst_rec = 0.0f64;
    let mut stream = 0u64;
    let dx = grid.dx;
    while checked < 100 {
        let f = dyadic_step_function(grid, 8, stream);
        stream += 1;
        let l1: f64 = f.values().iter().map(|v| v.norm()).sum::<f64>() * dx;
        let avg = l1 / (grid.len as f64 * dx);
        if avg == 0.0 {
            continue;
        }
        checked += 1;
        for factor in [1.25, 2.0, 4.0, 16.0, 256.0] {
            let lambda = factor * avg;
            let cz = cz_decompose(&f, lambda).unwrap();
            let mut sum: Vec<C64> = cz.good.values().to_vec();
            let mut ok = true;
            for (iv, b) in &cz.bad_parts {
                let mut integral = C64::new(0.0, 0.0);
                for (k, v) in b.values().iter().enumerate() {
                    sum[k] += v;
                    integral += v * dx;
                    if (k < iv.start || k >= iv.start + iv.len) && *v != C64::new(0.0, 0.0) {
                        ok = false;
                    }
                }
                ok &= integral.norm() <= 1e-12;
            }
            let rec = f.values().iter().zip(&sum).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst_rec = worst_rec.max(rec);
            ok &= rec <= 1e-12;
            ok &= cz.good.max_abs() <= 2.0 * lambda;
            let length: f64 = cz.bad_parts.iter().map(|(iv, _)| iv.len as f64 * dx).sum();
            ok &= length <= l1 / lambda * (1.0 + 1e-12);
            if !ok {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{checked} step functions x 5 levels, {bad} violations, max reconstruction error {worst_rec:.1e}"))
}

fn hilbert_reduction() -> Outcome {
    let c = curve("t^2");
    let grid = Grid::symmetric(32.0, 1024).unwrap();
    let members = make_ensemble(9, 10, &EnsembleShape::gaussian(grid)).unwrap();
    let one = Operand::Constant(C64::new(1.0, 0.0));
    let mut worst = 0.0f64;
    let mut flagged = 0usize;
    for m in &members {
        let out = bht_direct(&c, &m.function, one, &PvParams::default()).unwrap();
        flagged += out.flagged.len();
        let reference = hilbert_fft(&m.function, 256).unwrap();
        worst = worst.max(relative_l2(&out.values, &reference).unwrap());
    }
    outcome(worst < 1e-4 && flagged == 0, format!("10 functions, max relative L2 error {worst:.1e}, {flagged} unconverged points"))
}

fn setup(seed: u64) -> ScanSetup {
    ScanSetup {
        seed,
        ..ScanSetup::default()
    }
}

fn decay_at_l2_point() -> Outcome {
    let ms: Vec<u32> = (2..=8).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["t^2", "t^3"] {
        let c = curve(name);
        let a = fit_decay_at_l2_point(&c, &ms, &setup(1)).unwrap().alpha_hat;
        let b = fit_decay_at_l2_point(&c, &ms, &setup(2)).unwrap().alpha_hat;
        let stable = (a / b - 1.0).abs() <= 0.5 && (b / a - 1.0).abs() <= 0.5;
        pass &= a > 0.0 && b > 0.0 && stable;
        parts.push(format!("{name} alpha {a:.3} / {b:.3}"));
    }
    outcome(pass, format!("{} (seeds 1 / 2, 32 pairs; reference {REFERENCE_ALPHA_L2})", parts.join(", ")))
}

fn edge_envelopes() -> Outcome {
    let ms: Vec<u32> = (2..=8).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["t^2", "t^3"] {
        let c = curve(name);
        for edge in [Edge::AC, Edge::AB] {
            let s = scan_edge(&c, edge, &[2.0], &ms, &setup(7)).unwrap();
            let spread = s.envelopes[0].spread;
            pass &= spread < 2.0;
            parts.push(format!("{name} {edge:?} spread {spread:.1}"));
        }
    }
    outcome(pass, format!("{} (bound 2)", parts.join(", ")))
}

fn determinism() -> Outcome {
    let c = curve("t^3");
    let small = ScanSetup {
        ensemble_size: 8,
        seed: 5,
        grid_len: 1024,
        ..ScanSetup::default()
    };
    let once = || {
        let s = scan_edge(&c, Edge::AB, &[2.0, 4.0], &[2, 3, 4], &small).unwrap();
        scan_table(&s.results).to_csv()
    };
    let (a, b) = (once(), once());
    let (ha, hb) = (content_hash(a.as_bytes()), content_hash(b.as_bytes()));
    let g = Grid::symmetric(64.0, 1 << 10).unwrap();
    let ens = |seed| -> Vec<SampledFunction> { make_ensemble(seed, 4, &EnsembleShape::gaussian(g)).unwrap().into_iter().map(|e| e.function).collect() };
    let same_ensemble = ens(3).iter().zip(&ens(3)).all(|(x, y)| x.values() == y.values());
    outcome(
        a == b && ha == hb && same_ensemble,
        format!("scan CSV {} bytes, hash {}.., identical: {}", a.len(), &ha[..12], a == b && same_ensemble),
    )
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

const CRITERIA: [Criterion; 12] = [
    (1, "curve-class exactness", 10, curve_exactness),
    (2, "critical-point solver", 30, critical_points),
    (3, "scaling identity", 10, scaling_identity),
    (4, "spatial against spectral Lambda_{j,m}", 300, lambda_equivalence),
    (5, "finite intersection", 5, overlaps),
    (6, "oscillatory decay", 60, oscillatory_decay),
    (7, "shifted square function", 120, shifted_square_functions),
    (8, "CZ decomposition", 30, cz_invariants),
    (9, "Hilbert-transform reduction", 60, hilbert_reduction),
    (10, "decay in m at the L2 point", 600, decay_at_l2_point),
    (11, "edge growth envelopes", 600, edge_envelopes),
    (12, "determinism", 60, determinism),
];

/// Numeric arguments select criteria (`cargo test --test acceptance -- 4 9`); none runs all.
fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let only: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut ran = 0;
    let mut passed = 0;
    for (n, name, budget, body) in CRITERIA {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        ran += 1;
        if run(n, name, Duration::from_secs(budget), body) {
            passed += 1;
        }
    }
    println!("acceptance: {passed}/{ran} criteria pass");
}
