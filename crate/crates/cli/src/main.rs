//! cramer-depth: Cramér transforms, half-space depth and random polytope
//! thresholds from the command line.
//!
//! Exit status: 0 success, 1 a check failed or a computation broke down,
//! 2 usage error (bad flags, malformed distribution spec).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cramer_depth::cramer::CramerEvaluator;
use cramer_depth::depth::{ln_depth_1d, ln_depth_radial_norm};
use cramer_depth::dist::spec::{BuildContext, DistSpec, FamilyRegistry};
use cramer_depth::dist::Law;
use cramer_depth::funcstats::{
    beta_digamma_check, conjecture_table, kappa_note, stat_report, verify_battery, BatteryConfig, CheckStatus,
    Method,
};
use cramer_depth::polytope::{expected_measure_mc, threshold_scan, write_csv, SimConfig, ThresholdReport};
use cramer_depth::{real17, Error};

#[derive(Parser, Debug)]
#[command(name = "cramer-depth", version, about = "Cramér transform, half-space depth and random polytope tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Λ*(x) and the maximising tilt on a grid
    Conjugate(Common),
    /// q(x) and ω(x) on a grid (radial laws: points of norm x)
    Depth(Common),
    /// E Λ*, Var Λ*, E e^{-Λ*}, E ω, Var ω
    Stats(Common),
    /// run the inequality battery
    Verify(Common),
    /// digamma formulas for the Beta ball law against Monte Carlo
    Betadist(Common),
    /// Monte Carlo E μ(K_N) over an explicit N list
    Simulate(Common),
    /// threshold scan with ρ̂₁, ρ̂₂
    Scan(Common),
    /// exploratory table (E e^{-Λ*})^{1/n} for the exponential law, n = 1..K
    Report(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// distribution spec: JSON file path or inline JSON
    #[arg(long)]
    dist: Option<String>,
    /// simulation config (SimConfig JSON) for simulate/scan
    #[arg(long)]
    config: Option<String>,
    /// output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    seed: Option<u64>,
    /// "start:stop:count"
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    probes: Option<usize>,
    /// "logspace:a:b:count" (a, b natural logs of N) or "N1,N2,..."
    #[arg(long = "N")]
    big_n: Option<String>,
    /// Monte Carlo sample count (stats, betadist)
    #[arg(long)]
    samples: Option<usize>,
    /// force Monte Carlo in stats
    #[arg(long)]
    mc: bool,
    /// rows in the report table
    #[arg(long, default_value_t = 10)]
    k: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

/// Failure classes mapped to exit codes.
enum Fail {
    Usage(String),
    Check(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec(_) | Error::Domain(_) | Error::Json(_) | Error::Io(_) => Fail::Usage(e.to_string()),
            _ => Fail::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(v) = std::env::var("CRAMER_DEPTH_THREADS") {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: CRAMER_DEPTH_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

/// Ok(false) means the command ran but a check failed.
fn run(cmd: Cmd) -> Res<bool> {
    match cmd {
        Cmd::Conjugate(c) => conjugate(&c),
        Cmd::Depth(c) => depth(&c),
        Cmd::Stats(c) => stats(&c),
        Cmd::Verify(c) => verify(&c),
        Cmd::Betadist(c) => betadist(&c),
        Cmd::Simulate(c) => simulate(&c, false),
        Cmd::Scan(c) => simulate(&c, true),
        Cmd::Report(c) => report(&c),
    }
}

// ---- input helpers

fn read_json_arg(arg: &str) -> Res<(String, Option<PathBuf>)> {
    if arg.trim_start().starts_with('{') {
        return Ok((arg.to_string(), None));
    }
    let p = Path::new(arg);
    let text = fs::read_to_string(p).map_err(|e| Fail::Usage(format!("cannot read '{arg}': {e}")))?;
    Ok((text, p.parent().map(|d| d.to_path_buf())))
}

fn load_spec(c: &Common) -> Res<(DistSpec, BuildContext)> {
    let arg = c.dist.as_deref().ok_or_else(|| Fail::Usage("--dist is required".into()))?;
    let (text, base) = read_json_arg(arg)?;
    let spec = DistSpec::parse(&text).map_err(|e| Fail::Usage(format!("--dist: {e}")))?;
    Ok((spec, BuildContext { base_dir: base }))
}

fn load_law(c: &Common) -> Res<Law> {
    let (spec, ctx) = load_spec(c)?;
    Ok(FamilyRegistry::default().build(&spec, &ctx)?)
}

fn parse_grid(s: &str) -> Res<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Fail::Usage(format!("--grid expects start:stop:count, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let k: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if k == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    Ok((0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect())
}

fn parse_n_list(s: &str) -> Res<Vec<u64>> {
    let bad = || Fail::Usage(format!("--N expects logspace:a:b:count or a comma list, got '{s}'"));
    if let Some(rest) = s.strip_prefix("logspace:") {
        let p: Vec<&str> = rest.split(':').collect();
        if p.len() != 3 {
            return Err(bad());
        }
        let a: f64 = p[0].trim().parse().map_err(|_| bad())?;
        let b: f64 = p[1].trim().parse().map_err(|_| bad())?;
        let k: usize = p[2].trim().parse().map_err(|_| bad())?;
        if k < 1 || !(a.is_finite() && b.is_finite()) {
            return Err(bad());
        }
        let mut v: Vec<u64> = (0..k)
            .map(|i| {
                let e = if k == 1 { a } else { a + (b - a) * i as f64 / (k - 1) as f64 };
                e.exp().round() as u64
            })
            .collect();
        v.dedup();
        return Ok(v);
    }
    s.split(',').map(|t| t.trim().parse::<u64>().map_err(|_| bad())).collect()
}

fn default_grid(law: &Law) -> Vec<f64> {
    let (lo, hi) = match law {
        Law::Scalar(s) => {
            let (a, b) = s.support();
            let sd = s.variance().sqrt();
            ((s.mean() - 4.0 * sd).max(a), (s.mean() + 4.0 * sd).min(b))
        }
        Law::Radial(r) => (0.0, (4.0 * (r.second_moment() / r.dim() as f64).sqrt()).min(r.r_max())),
        Law::Product(_) => (0.0, 4.0),
    };
    (0..=40).map(|i| lo + (hi - lo) * i as f64 / 40.0).collect()
}

// ---- output helpers

fn sink(c: &Common) -> Res<Box<dyn Write>> {
    Ok(match &c.out {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).map_err(|e| Fail::Usage(format!("cannot create '{}': {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(c: &Common, v: &T) -> Res<()> {
    let mut w = sink(c)?;
    let s = serde_json::to_string_pretty(v).map_err(|e| Fail::Check(e.to_string()))?;
    writeln!(w, "{s}")?;
    w.flush()?;
    Ok(())
}

fn emit_rows(c: &Common, header: &[&str], rows: &[Vec<f64>]) -> Res<()> {
    let mut wr = csv::Writer::from_writer(sink(c)?);
    let map = |e: csv::Error| Fail::Check(e.to_string());
    wr.write_record(header).map_err(map)?;
    for r in rows {
        wr.write_record(r.iter().map(|v| real17(*v))).map_err(map)?;
    }
    wr.flush()?;
    Ok(())
}

fn emit_table(c: &Common, header: &[&str], rows: Vec<Vec<f64>>) -> Res<()> {
    match c.format {
        Format::Csv => emit_rows(c, header, &rows),
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), serde_json::json!(finite_or_null(*v))))
                        .collect()
                })
                .collect();
            emit_json(c, &objs)
        }
    }
}

/// JSON has no infinities; they become strings so nothing is silently lost.
fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::json!(v.to_string())
    }
}

// ---- subcommands

fn conjugate(c: &Common) -> Res<bool> {
    let law = load_law(c)?;
    let ev = match &law {
        Law::Scalar(s) => CramerEvaluator::scalar(s),
        Law::Radial(r) => CramerEvaluator::radial(r),
        Law::Product(_) => {
            return Err(Fail::Usage("conjugate needs a 1-D or rotation-invariant law".into()));
        }
    };
    let mut xs = match &c.grid {
        Some(g) => parse_grid(g)?,
        None => default_grid(&law),
    };
    xs.sort_by(f64::total_cmp);
    let vals = ev.conjugate_grid(&xs)?;
    let rows = xs.iter().zip(&vals).map(|(x, v)| vec![*x, v.value, v.tilt]).collect();
    emit_table(c, &["x", "cramer", "tilt"], rows)?;
    Ok(true)
}

fn depth(c: &Common) -> Res<bool> {
    let law = load_law(c)?;
    let xs = match &c.grid {
        Some(g) => parse_grid(g)?,
        None => default_grid(&law),
    };
    let mut rows = Vec::with_capacity(xs.len());
    for x in xs {
        let lq = match &law {
            Law::Scalar(s) => ln_depth_1d(s, x),
            Law::Radial(r) => ln_depth_radial_norm(r, x)?,
            Law::Product(_) => {
                return Err(Fail::Usage("depth has no closed form for product laws".into()));
            }
        };
        rows.push(vec![x, lq.exp(), -lq]);
    }
    emit_table(c, &["x", "q", "omega"], rows)?;
    Ok(true)
}

fn stats(c: &Common) -> Res<bool> {
    let law = load_law(c)?;
    let mc = c.mc || matches!(law, Law::Product(_));
    let method = if mc {
        Method::MonteCarlo {
            samples: c.samples.unwrap_or(Method::DEFAULT_SAMPLES),
            seed: c.seed.unwrap_or(0),
        }
    } else {
        Method::Quadrature
    };
    let rep = stat_report(&law, method)?;
    match c.format {
        Format::Json => emit_json(c, &rep)?,
        Format::Csv => {
            let h = ["e_cramer", "var_cramer", "exp_neg_cramer", "e_omega", "var_omega", "beta_param", "tau_param"];
            let r = vec![
                rep.e_cramer,
                rep.var_cramer,
                rep.exp_neg_cramer,
                rep.e_omega,
                rep.var_omega,
                rep.beta_param,
                rep.tau_param,
            ];
            emit_rows(c, &h, &[r])?;
        }
    }
    Ok(true)
}

fn verify(c: &Common) -> Res<bool> {
    let law = load_law(c)?;
    let rep = verify_battery(&law, &BatteryConfig::default());
    match c.format {
        Format::Json => emit_json(c, &rep)?,
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(sink(c)?);
            let map = |e: csv::Error| Fail::Check(e.to_string());
            wr.write_record(["name", "status", "worst_margin", "tolerance", "location", "note"])
                .map_err(map)?;
            for r in &rep.records {
                wr.write_record([
                    r.name.clone(),
                    format!("{:?}", r.status).to_lowercase(),
                    r.worst_margin.map(real17).unwrap_or_default(),
                    r.tolerance.map(real17).unwrap_or_default(),
                    r.location.clone().unwrap_or_default(),
                    r.note.clone().unwrap_or_default(),
                ])
                .map_err(map)?;
            }
            wr.flush()?;
        }
    }
    for r in &rep.records {
        if matches!(r.status, CheckStatus::Fail | CheckStatus::Error) {
            eprintln!("{}: {:?} {}", r.name, r.status, r.note.clone().unwrap_or_default());
        }
    }
    Ok(rep.passed())
}

fn betadist(c: &Common) -> Res<bool> {
    let n = c.n.ok_or_else(|| Fail::Usage("betadist needs --n".into()))?;
    let beta = c.beta.unwrap_or(0.0);
    let chk = beta_digamma_check(n, beta, c.samples.unwrap_or(200_000), c.seed.unwrap_or(0))?;
    match c.format {
        Format::Json => emit_json(c, &chk)?,
        Format::Csv => emit_rows(
            c,
            &["n", "beta", "e_omega_formula", "e_omega_mc", "e_omega_se", "e_omega2_formula", "e_omega2_mc", "slack"],
            &[vec![
                n as f64,
                beta,
                chk.e_omega_formula,
                chk.e_omega_mc,
                chk.e_omega_se,
                chk.e_omega2_formula,
                chk.e_omega2_mc,
                chk.slack,
            ]],
        )?,
    }
    Ok(chk.within_slack)
}

fn sim_config(c: &Common, scan: bool) -> Res<SimConfig> {
    let mut cfg = if let Some(arg) = &c.config {
        let (text, _) = read_json_arg(arg)?;
        serde_json::from_str::<SimConfig>(&text).map_err(|e| Fail::Usage(format!("--config: {e}")))?
    } else {
        let (spec, _) = load_spec(c)?;
        let dim = spec.dim;
        SimConfig {
            dist: spec,
            n: dim,
            n_list: Vec::new(),
            trials: 100,
            probe_count: 100,
            delta: 0.2,
            seed: 0,
        }
    };
    if let Some(v) = c.n {
        cfg.n = v;
    }
    if let Some(v) = c.trials {
        cfg.trials = v;
    }
    if let Some(v) = c.probes {
        cfg.probe_count = v;
    }
    if let Some(v) = c.delta {
        cfg.delta = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(s) = &c.big_n {
        cfg.n_list = parse_n_list(s)?;
    }
    if !scan && cfg.n_list.is_empty() {
        return Err(Fail::Usage("simulate needs --N or an N_list in the config".into()));
    }
    Ok(cfg)
}

fn simulate(c: &Common, scan: bool) -> Res<bool> {
    let cfg = sim_config(c, scan)?;
    let rep = if scan { threshold_scan(&cfg)? } else { expected_measure_mc(&cfg)? };
    write_threshold(c, &rep)?;
    if rep.flagged {
        eprintln!("warning: indeterminate membership rate {:.3e}", rep.indeterminate_rate);
    }
    Ok(!rep.flagged)
}

/// JSON and the per-N CSV. With --out both files are written, the CSV next
/// to the JSON; without it the chosen format goes to stdout.
fn write_threshold(c: &Common, rep: &ThresholdReport) -> Res<()> {
    match &c.out {
        Some(p) => {
            let (json_path, csv_path) = match c.format {
                Format::Json => (p.clone(), p.with_extension("csv")),
                Format::Csv => (p.with_extension("json"), p.clone()),
            };
            let s = serde_json::to_string_pretty(rep).map_err(|e| Fail::Check(e.to_string()))?;
            fs::write(&json_path, s + "\n")?;
            let f = fs::File::create(&csv_path)?;
            write_csv(rep, io::BufWriter::new(f))?;
        }
        None => match c.format {
            Format::Json => emit_json(c, rep)?,
            Format::Csv => write_csv(rep, io::stdout().lock())?,
        },
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportOut {
    exploratory: bool,
    label: &'static str,
    rows: Vec<cramer_depth::funcstats::ConjectureRow>,
    kappa: cramer_depth::funcstats::KappaNote,
}

fn report(c: &Common) -> Res<bool> {
    if c.k == 0 {
        return Err(Fail::Usage("--k must be at least 1".into()));
    }
    let rows = conjecture_table(c.k)?;
    let out = ReportOut {
        exploratory: true,
        label: "exploratory: (E exp(-L*))^(1/n) for the exponential radial law; monotonicity is conjectured",
        rows,
        kappa: kappa_note()?,
    };
    match c.format {
        Format::Json => emit_json(c, &out)?,
        Format::Csv => {
            let rows: Vec<Vec<f64>> = out
                .rows
                .iter()
                .map(|r| vec![r.n as f64, r.exp_neg_cramer, r.root, if r.nonincreasing { 1.0 } else { 0.0 }])
                .collect();
            emit_rows(c, &["n", "exp_neg_cramer", "root", "nonincreasing"], &rows)?;
        }
    }
    Ok(true)
}
