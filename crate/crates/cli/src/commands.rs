//! One workflow per subcommand. Each builds its artifacts in memory, then
//! hands them to [`write_run`] in a fixed order.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use bhtlab::decomposition::{band_energies, lambda_jm_spatial, lambda_jm_spectral, FilterBank, Method, TrilinearRecord};
use bhtlab::holder::HolderTriple;
use bhtlab::multiplier::{phase_row, sample_admissible_queries};
use bhtlab::normscan::{bht_direct, hilbert_fft, relative_l2, scan_edge, scan_table, Edge, Operand, PvParams, ScanSetup};
use bhtlab::signal::io::read_csv;
use bhtlab::signal::{make_ensemble, EnsembleShape, Grid, SampledFunction};
use bhtlab::squarefuncs::{cz_decompose, dyadic_step_function, norm_growth_in_shift};
use bhtlab::table::{Cell, Table};
use bhtlab::{builtin_curve, Curve, C64};
use clap::Args;
use serde_json::{json, Value};

use crate::output::{write_run, Artifact, Format};
use crate::parse;
use crate::{CliError, Common};

pub struct Run {
    pub manifest: PathBuf,
    pub pass: bool,
    pub summary: Vec<String>,
}

type CmdResult = Result<Run, CliError>;

/// Tolerance for spatial against spectral `Λ_{j,m}`.
const LAMBDA_REL_TOL: f64 = 1e-6;
/// Critical-point residual `|φ′(t_c)|`.
const PHASE_TOL: f64 = 1e-10;
/// Relative L² gap allowed between `bht --g const1` and the FFT Hilbert transform.
const HILBERT_TOL: f64 = 1e-4;
/// Slack on the predicted growth exponent of shifted square functions.
const GROWTH_SLACK: f64 = 0.15;

fn curve(common: &Common) -> Result<Curve, CliError> {
    Ok(builtin_curve(&common.curve)?)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn grid(common: &Common, half_width: f64, n: usize) -> Result<Grid, CliError> {
    Ok(Grid::symmetric(common.half_width.unwrap_or(half_width), common.n.unwrap_or(n))?)
}

fn config(name: &str, common: &Common, format: Format, grid: Value, params: Value) -> Value {
    json!({
        "subcommand": name,
        "curve": common.curve,
        "grid": grid,
        "seed": common.seed,
        "out": common.out.display().to_string(),
        "format": format.as_str(),
        "params": params,
    })
}

fn grid_echo(g: Grid) -> Value {
    json!({"half_width": g.half_width(), "n": g.len, "x0": g.x0, "dx": g.dx})
}

fn finish(name: &str, common: &Common, cfg: Value, artifacts: Vec<Artifact>, pass: bool, summary: Vec<String>) -> CmdResult {
    let manifest = write_run(&common.out, name, cfg, &artifacts, pass)?;
    Ok(Run { manifest, pass, summary })
}

#[derive(Debug, Args)]
pub struct CurveCheckArgs {
    #[command(flatten)]
    pub common: Common,
}

/// Columns `axiom, value, threshold, pass`.
pub fn curve_check(a: CurveCheckArgs) -> CmdResult {
    let c = curve(&a.common)?;
    let format = a.common.format.unwrap_or(Format::Json);
    let checks = c.diagnostics()?;
    let mut t = Table::new(["axiom", "value", "threshold", "pass"]);
    for ch in &checks {
        t.push(vec![ch.axiom.as_str().into(), ch.value.into(), ch.threshold.into(), ch.pass.into()]);
    }
    let pass = checks.iter().all(|ch| ch.pass);
    let summary = checks
        .iter()
        .filter(|ch| !ch.pass)
        .map(|ch| format!("{}: {} against {}", ch.axiom, ch.value, ch.threshold))
        .collect();
    let cfg = config("curve-check", &a.common, format, Value::Null, json!({}));
    finish("curve-check", &a.common, cfg, vec![Artifact::table("curve-check", &t, format)], pass, summary)
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of random admissible queries.
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value_t = 20)]
    pub j_max: i32,
    /// Explicit query; needs --eta and --j as well.
    #[arg(long, requires_all = ["eta", "j"], allow_hyphen_values = true)]
    pub xi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<i32>,
}

/// Columns `xi, eta, j, t_c, psi, residual`. A query without a critical
/// point gives empty cells and fails the run.
pub fn phase(a: PhaseArgs) -> CmdResult {
    let c = curve(&a.common)?;
    let format = a.common.format.unwrap_or(Format::Csv);
    let queries = match (a.xi, a.eta, a.j) {
        (Some(xi), Some(eta), Some(j)) => vec![(xi, eta, j)],
        _ => sample_admissible_queries(&c, a.common.seed, a.count, a.j_max),
    };
    let mut t = Table::new(["xi", "eta", "j", "t_c", "psi", "residual"]);
    let mut pass = true;
    let mut summary = Vec::new();
    for (xi, eta, j) in queries {
        match phase_row(&c, xi, eta, j) {
            Ok(r) => {
                pass &= r.residual < PHASE_TOL;
                t.push(vec![r.xi.into(), r.eta.into(), r.j.into(), r.t_c.into(), r.psi.into(), r.residual.into()]);
            }
            Err(e) => {
                pass = false;
                summary.push(format!("xi = {xi}, eta = {eta}, j = {j}: {e}"));
                t.push(vec![xi.into(), eta.into(), j.into(), Cell::Empty, Cell::Empty, Cell::Empty]);
            }
        }
    }
    let params = json!({"count": a.count, "j_max": a.j_max, "xi": a.xi, "eta": a.eta, "j": a.j});
    let cfg = config("phase", &a.common, format, Value::Null, params);
    finish("phase", &a.common, cfg, vec![Artifact::table("phase", &t, format)], pass, summary)
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 4)]
    pub m: u32,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub j_min: i32,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    pub j_max: i32,
    /// Hölder exponents p and q of the normalization; r′ follows.
    #[arg(long, default_value = "2", value_parser = parse::exponent)]
    pub p: f64,
    #[arg(long, default_value = "2", value_parser = parse::exponent)]
    pub q: f64,
}

/// `decompose.*`: columns `j, m, method, re, im, ratio, rel_diff`.
/// `decompose-energies.*`: columns `j, p0, f_energy, g_energy`.
/// Each `j` gets the filter bank's grid for that level with `--n` samples
/// and its own seeded triple of narrow (broadband) packets; `--half-width`
/// is ignored.
pub fn decompose(a: DecomposeArgs) -> CmdResult {
    let c = curve(&a.common)?;
    let format = a.common.format.unwrap_or(Format::Csv);
    if a.j_max < a.j_min {
        return Err(usage("--j-max is below --j-min"));
    }
    let r_inv = 1.0 - 1.0 / a.p - 1.0 / a.q;
    if r_inv < 0.0 {
        return Err(usage(format!("1/p + 1/q = {} exceeds 1", 1.0 - r_inv)));
    }
    let triple = HolderTriple::new(a.p, a.q, 1.0 / r_inv)?;
    let bank = FilterBank::new(&c, a.m, a.j_min, a.j_max)?;
    let n = a.common.n.unwrap_or(4096);
    let mut records = Table::new(["j", "m", "method", "re", "im", "ratio", "rel_diff"]);
    let mut energies = Table::new(["j", "p0", "f_energy", "g_energy"]);
    let mut grids = Vec::new();
    let mut pass = true;
    let mut summary = Vec::new();
    for j in a.j_min..=a.j_max {
        let g = bank.grid_for(j, n)?;
        grids.push(grid_echo(g));
        let shape = EnsembleShape::gaussian(g)
            .with_components(6)
            .with_width_range(2.0 * g.dx, 8.0 * g.dx)
            .with_freq_range(0.0, 0.8 * g.nyquist());
        let members = make_ensemble(a.common.seed, 3, &shape)?;
        let [f, gg, h] = [&members[0].function, &members[1].function, &members[2].function];
        let spatial = lambda_jm_spatial(&bank, f, gg, h, j)?;
        let spectral = lambda_jm_spectral(&bank, f, gg, h, j)?;
        let scale = spectral.norm().max(f64::MIN_POSITIVE);
        let rel = (spatial - spectral).norm() / scale;
        if !(rel < LAMBDA_REL_TOL) {
            pass = false;
            summary.push(format!("j = {j}: spatial and spectral differ by {rel:e}"));
        }
        for (value, method, name) in [(spatial, Method::Spatial, "spatial"), (spectral, Method::Spectral, "spectral")] {
            let rec = TrilinearRecord::new(j, a.m, value, method, triple, f, gg, h)?;
            records.push(vec![
                j.into(),
                a.m.into(),
                name.into(),
                rec.value.re.into(),
                rec.value.im.into(),
                rec.ratio.into(),
                rel.into(),
            ]);
        }
        for e in band_energies(&bank, f, gg, j)? {
            energies.push(vec![e.j.into(), e.p0.into(), e.f_energy.into(), e.g_energy.into()]);
        }
    }
    let params = json!({"m": a.m, "j_min": a.j_min, "j_max": a.j_max, "p": a.p, "q": a.q, "r_dual": triple.r_dual});
    let cfg = config("decompose", &a.common, format, Value::Array(grids), params);
    let artifacts = vec![
        Artifact::table("decompose", &records, format),
        Artifact::table("decompose-energies", &energies, format),
    ];
    finish("decompose", &a.common, cfg, artifacts, pass, summary)
}

#[derive(Debug, Args)]
pub struct SqfnArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "4/3,2,4", value_parser = parse::exponent_list)]
    pub q_list: Vec<Vec<f64>>,
    #[arg(long, default_value = "1,4,16,64,256,1024", value_parser = parse::int_list::<i64>, allow_hyphen_values = true)]
    pub l_list: Vec<Vec<i64>>,
    #[arg(long, default_value_t = 4)]
    pub ensemble_size: usize,
}

/// `sqfn.*`: columns `q, l, sup_ratio`.
/// `sqfn-fit.*`: columns `q, exponent, predicted, residual, pass`; a fit
/// passes when its exponent is at most `predicted + 0.15`.
pub fn sqfn(a: SqfnArgs) -> CmdResult {
    let format = a.common.format.unwrap_or(Format::Csv);
    let g = grid(&a.common, 64.0, 1 << 12)?;
    let ensemble: Vec<SampledFunction> = make_ensemble(a.common.seed, a.ensemble_size, &EnsembleShape::gaussian(g))?
        .into_iter()
        .map(|m| m.function)
        .collect();
    let q_list = a.q_list.concat();
    let l_list = a.l_list.concat();
    let mut norms = Table::new(["q", "l", "sup_ratio"]);
    let mut fits = Table::new(["q", "exponent", "predicted", "residual", "pass"]);
    let mut pass = true;
    let mut summary = Vec::new();
    for &q in &q_list {
        let growth = norm_growth_in_shift(&ensemble, q, &l_list)?;
        for &(l, r) in &growth.rows {
            norms.push(vec![q.into(), l.into(), r.into()]);
        }
        let ok = growth.exponent() <= growth.predicted + GROWTH_SLACK;
        if !ok {
            summary.push(format!("q = {q}: exponent {} above {}", growth.exponent(), growth.predicted));
        }
        pass &= ok;
        fits.push(vec![q.into(), growth.exponent().into(), growth.predicted.into(), growth.fit.residual.into(), ok.into()]);
    }
    let params = json!({"q_list": q_list, "l_list": l_list, "ensemble_size": a.ensemble_size});
    let cfg = config("sqfn", &a.common, format, grid_echo(g), params);
    let artifacts = vec![Artifact::table("sqfn", &norms, format), Artifact::table("sqfn-fit", &fits, format)];
    finish("sqfn", &a.common, cfg, artifacts, pass, summary)
}

#[derive(Debug, Args)]
pub struct CzArgs {
    #[command(flatten)]
    pub common: Common,
    /// Levels as multiples of the grid average of |f|.
    #[arg(long, default_value = "1.5,3,10", value_parser = parse::exponent_list)]
    pub levels: Vec<Vec<f64>>,
    /// Read f from a CSV file (columns x, re, im) instead of drawing a step function.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// JSON: one record per level with the invariants and the interval tree.
/// CSV: columns `level, lambda, start, len, lo, hi, average` for the selected intervals.
pub fn cz(a: CzArgs) -> CmdResult {
    let format = a.common.format.unwrap_or(Format::Json);
    let f = match &a.input {
        Some(path) => read_csv(BufReader::new(File::open(path)?))?,
        None => dyadic_step_function(grid(&a.common, 4.0, 256)?, a.common.seed, 0),
    };
    let g = f.grid();
    let avg = f.values().iter().map(|v| v.norm()).sum::<f64>() / g.len as f64;
    let levels = a.levels.concat();
    let mut records = Vec::new();
    let mut t = Table::new(["level", "lambda", "start", "len", "lo", "hi", "average"]);
    let mut pass = true;
    let mut summary = Vec::new();
    for &level in &levels {
        let lambda = level * avg;
        let d = cz_decompose(&f, lambda)?;
        let inv = d.invariants(&f);
        if !inv.pass() {
            pass = false;
            summary.push(format!("level {level}: {inv:?}"));
        }
        for iv in &d.intervals {
            t.push(vec![level.into(), lambda.into(), iv.start.into(), iv.len.into(), iv.lo.into(), iv.hi.into(), iv.average.into()]);
        }
        records.push(json!({
            "level": level,
            "lambda": lambda,
            "pass": inv.pass(),
            "invariants": inv,
            "intervals": d.intervals,
            "tree": d.tree,
        }));
    }
    let artifact = match format {
        Format::Json => Artifact::json("cz", &Value::Array(records)),
        Format::Csv => Artifact::table("cz", &t, format),
    };
    let input = a.input.as_ref().map(|p| p.display().to_string());
    let params = json!({"levels": levels, "input": input});
    let cfg = config("cz", &a.common, format, grid_echo(g), params);
    finish("cz", &a.common, cfg, vec![artifact], pass, summary)
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// AC (q = ∞) or AB (r′ = ∞).
    #[arg(long, default_value = "AC")]
    pub edge: Edge,
    #[arg(long = "p-list", alias = "p", default_value = "2", value_parser = parse::exponent_list)]
    pub p_list: Vec<Vec<f64>>,
    #[arg(long = "m-list", alias = "m", default_value = "2..8", value_parser = parse::int_list::<u32>)]
    pub m_list: Vec<Vec<u32>>,
    #[arg(long, default_value_t = 32)]
    pub ensemble_size: usize,
    #[arg(long, default_value_t = 2)]
    pub j_max: i32,
    /// Also write scan.dat, one gnuplot block of `m sup_ratio` per p.
    #[arg(long)]
    pub dat: bool,
}

/// `scan.*`: columns `p, q, r_dual, m, sup_ratio, alpha_hat, residual`.
/// `scan-envelope.*`: columns `p, exponent, calibration, max_excess, spread, pass`.
/// The run fails when an envelope check fails.
pub fn scan(a: ScanArgs) -> CmdResult {
    let c = curve(&a.common)?;
    let format = a.common.format.unwrap_or(Format::Csv);
    let p_list = a.p_list.concat();
    let m_list = a.m_list.concat();
    let setup = ScanSetup {
        ensemble_size: a.ensemble_size,
        seed: a.common.seed,
        grid_len: a.common.n.unwrap_or(4096),
        j_min: 0,
        j_max: a.j_max,
    };
    let s = scan_edge(&c, a.edge, &p_list, &m_list, &setup)?;
    let mut env = Table::new(["p", "exponent", "calibration", "max_excess", "spread", "pass"]);
    let mut summary = Vec::new();
    for e in &s.envelopes {
        if !e.pass {
            summary.push(format!("p = {}: envelope exceeded by {}", e.p, e.max_excess));
        }
        env.push(vec![e.p.into(), e.exponent.into(), e.calibration.into(), e.max_excess.into(), e.spread.into(), e.pass.into()]);
    }
    let pass = s.envelopes.iter().all(|e| e.pass);
    let mut artifacts = vec![
        Artifact::table("scan", &scan_table(&s.results), format),
        Artifact::table("scan-envelope", &env, format),
    ];
    if a.dat {
        let mut dat = String::new();
        for &p in &p_list {
            dat.push_str(&format!("# edge {:?} p = {p}\n# m sup_ratio\n", a.edge));
            for r in s.results.iter().filter(|r| r.triple.p == p) {
                dat.push_str(&format!("{} {}\n", r.m, r.sup_ratio));
            }
            dat.push_str("\n\n");
        }
        artifacts.push(Artifact::raw("scan", "dat", dat));
    }
    let params = json!({
        "edge": a.edge,
        "p_list": p_list,
        "m_list": m_list,
        "ensemble_size": a.ensemble_size,
        "j_min": 0,
        "j_max": a.j_max,
        "grid_len": setup.grid_len,
    });
    let cfg = config("scan", &a.common, format, Value::Null, params);
    finish("scan", &a.common, cfg, artifacts, pass, summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GChoice {
    /// g ≡ 1: the transform reduces to the Hilbert transform of f.
    Const1,
    /// g is the next ensemble member after f.
    Ensemble,
}

#[derive(Debug, Args)]
pub struct BhtArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "const1")]
    pub g: GChoice,
    /// Number of ensemble functions f.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Zero-padding factor of the FFT Hilbert transform.
    #[arg(long, default_value_t = 256)]
    pub pad: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

/// With `--g const1`, columns `member, rel_l2, halvings, flagged`: the
/// relative L² gap to the FFT Hilbert transform, failing above 1e-4.
/// With `--g ensemble`, columns `member, x, re, im` for pairs `(2i, 2i+1)`;
/// the run fails if any point did not converge.
pub fn bht(a: BhtArgs) -> CmdResult {
    let c = curve(&a.common)?;
    let format = a.common.format.unwrap_or(Format::Csv);
    let g = grid(&a.common, 32.0, 1024)?;
    let params = PvParams {
        tolerance: a.tolerance,
        ..PvParams::default()
    };
    let n_members = match a.g {
        GChoice::Const1 => a.count,
        GChoice::Ensemble => 2 * a.count,
    };
    let members = make_ensemble(a.common.seed, n_members, &EnsembleShape::gaussian(g))?;
    let mut pass = true;
    let mut summary = Vec::new();
    let table = match a.g {
        GChoice::Const1 => {
            let mut t = Table::new(["member", "rel_l2", "halvings", "flagged"]);
            for m in &members {
                let out = bht_direct(&c, &m.function, Operand::Constant(C64::new(1.0, 0.0)), &params)?;
                let reference = hilbert_fft(&m.function, a.pad)?;
                let err = relative_l2(&out.values, &reference)?;
                if !(err < HILBERT_TOL) || !out.flagged.is_empty() {
                    pass = false;
                    summary.push(format!("member {}: relative L2 {err:e}, {} flagged", m.index, out.flagged.len()));
                }
                t.push(vec![m.index.into(), err.into(), out.halvings.into(), out.flagged.len().into()]);
            }
            t
        }
        GChoice::Ensemble => {
            let mut t = Table::new(["member", "x", "re", "im"]);
            for pair in members.chunks(2) {
                let out = bht_direct(&c, &pair[0].function, Operand::Sampled(&pair[1].function), &params)?;
                if !out.flagged.is_empty() {
                    pass = false;
                    summary.push(format!("member {}: {} points did not converge", pair[0].index, out.flagged.len()));
                }
                for (i, v) in out.values.values().iter().enumerate() {
                    t.push(vec![pair[0].index.into(), g.x(i).into(), v.re.into(), v.im.into()]);
                }
            }
            t
        }
    };
    let g_name = match a.g {
        GChoice::Const1 => "const1",
        GChoice::Ensemble => "ensemble",
    };
    let echo = json!({"g": g_name, "count": a.count, "pad": a.pad, "tolerance": a.tolerance, "eps_min": params.eps_min, "upsample": params.upsample});
    let cfg = config("bht", &a.common, format, grid_echo(g), echo);
    finish("bht", &a.common, cfg, vec![Artifact::table("bht", &table, format)], pass, summary)
}
