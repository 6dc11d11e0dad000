//! Command-line front end.
//!
//! Every subcommand writes JSON lines (one object per grid cell, then a
//! summary object) to `--out` or stdout. Exit codes: `0` all checks pass,
//! `1` an inequality or invariant fails, `2` input error, `3` a theorem
//! hypothesis is violated.

use crate::dgg::{
    check_imp_monotonicity, distance_weight, sweep_sets, zeta, zeta_variational, DggChecker,
    DggReport, ZetaParams, DEFAULT_IMP_TOL, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::graph::{
    complete_graph, path_graph, star_graph, truncate_lattice, MeasurePolicy, VertexFunction,
    VertexSet, WeightedGraph,
};
use crate::heat::{operator_kernel, HeatMethod};
use crate::io::{read_edge_csv, read_graph_json, read_metric_csv};
use crate::metric::{certify_intrinsic, default_intrinsic_metric, PseudoMetric, DEFAULT_CERT_TOL};
use crate::operators::{dirichlet_laplacian, laplacian, spectral_bottom, Operator};
use crate::oracles::{decay_slope, envelope_ratio_scan, log_grid, ScanGrid};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "heatdgg",
    version,
    about = "Heat kernels on weighted graphs and numerical checks of Davies-Gaffney-Grigor'yan bounds",
    after_help = "Examples:\n  \
        heatdgg validate --generator lattice-window-20\n  \
        heatdgg dgg --generator lattice-window-40 --set-a 0 --set-b 10 --t-grid log:0.01:100:20\n  \
        heatdgg imp --generator lattice-window-20 --omega=-10..10 --set-a 0 --kappa 0.5,1,2\n  \
        heatdgg pang --t-points 41\n  \
        heatdgg zeta-table --s 1 --t-grid 1,2,4 --r-grid 0,1,2\n  \
        heatdgg spectrum --generator path-2 --measure physical"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check graph axioms and certify the metric as intrinsic.
    Validate(CommonArgs),
    /// Sweep the set (and optionally functional) DGG bound over sets and times.
    Dgg(DggArgs),
    /// Check the integral maximum principle on a Dirichlet domain.
    Imp(ImpArgs),
    /// Compare the lattice kernel with its Bessel closed form and envelope.
    Pang(PangArgs),
    /// Tabulate ζ_s(t, r) with its variational value.
    ZetaTable(ZetaArgs),
    /// Spectrum, exhaustion eigenvalues and long-time decay slope.
    Spectrum(SpectrumArgs),
    /// Dump the heat kernel at one time as CSV with a JSON sidecar.
    Kernel(KernelArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Graph file: `.json` (graph format) or `.csv` (u,v,mu edge list).
    #[arg(long, conflicts_with = "generator")]
    pub graph: Option<PathBuf>,
    /// Builtin graph: path-N, lattice-window-N, star-K, complete-K.
    #[arg(long)]
    pub generator: Option<String>,
    /// Measure for generators and CSV input: physical or normalized.
    #[arg(long, default_value = "normalized")]
    pub measure: String,
    /// combinatorial | default-intrinsic | explicit:PATH (CSV matrix).
    #[arg(long, default_value = "combinatorial")]
    pub metric: String,
    /// Relative tolerance of the checks.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for randomized campaigns.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file for JSON lines (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DggArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Set A: comma-separated ids, an integer range `lo..hi`, or `all`.
    /// Repeatable; every A is paired with every B. Without sets all
    /// singleton pairs are checked.
    #[arg(long = "set-a", allow_hyphen_values = true)]
    pub set_a: Vec<String>,
    #[arg(long = "set-b", allow_hyphen_values = true)]
    pub set_b: Vec<String>,
    /// Time grid: `log:a:b:n`, `lin:a:b:n` or a comma list.
    #[arg(long = "t-grid", default_value = "log:0.01:100:20")]
    pub t_grid: String,
    /// computed | zero | explicit number.
    #[arg(long, default_value = "computed", allow_hyphen_values = true)]
    pub lambda: String,
    /// Dirichlet domain; sets must lie inside it.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Additional random (A, B) pairs.
    #[arg(long, default_value_t = 0)]
    pub random_sets: usize,
    /// Random signed (f, g, A, B, t) trials of the functional bound.
    #[arg(long, default_value_t = 0)]
    pub functional_trials: usize,
}

#[derive(Debug, Args)]
pub struct ImpArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dirichlet domain Ω (default: all vertices).
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Set A in the weight ω = κ ρ(·, A).
    #[arg(long = "set-a", allow_hyphen_values = true)]
    pub set_a: String,
    /// Comma-separated κ values.
    #[arg(long, default_value = "0.5,1,2")]
    pub kappa: String,
    /// Initial datum support (default: indicator of A ∩ Ω).
    #[arg(long, allow_hyphen_values = true)]
    pub f0: Option<String>,
    #[arg(long = "t-grid", default_value = "lin:0:20:50")]
    pub t_grid: String,
}

#[derive(Debug, Args)]
pub struct PangArgs {
    #[arg(long, default_value_t = 1)]
    pub d_min: usize,
    #[arg(long, default_value_t = 60)]
    pub d_max: usize,
    #[arg(long, default_value_t = 0.25)]
    pub t_min: f64,
    #[arg(long, default_value_t = 256.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 41)]
    pub t_points: usize,
    /// Scan CSV: d,t,p,oracle_p,envelope_ratio,regime.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Largest accepted |window/oracle − 1|.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ZetaArgs {
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long = "t-grid", default_value = "log:0.01:1000:11")]
    pub t_grid: String,
    #[arg(long = "r-grid", default_value = "0,0.5,1,2,5,10,100")]
    pub r_grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dirichlet domain (default: all vertices).
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Lattice windows: comma-separated half widths k, reporting λ₁([−k, k]).
    #[arg(long)]
    pub exhaust: Option<String>,
    /// Vertex whose on-diagonal kernel is fitted for the decay slope.
    #[arg(long, allow_hyphen_values = true)]
    pub vertex: Option<String>,
    /// Grid for the decay fit (default: log-spaced up to 50/λ).
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// spectral | series
    #[arg(long, default_value = "series")]
    pub method: String,
    /// Kernel CSV (x,y,t,p); the sidecar goes to `--out`.
    #[arg(long)]
    pub csv: PathBuf,
}

/// Parses `args` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let workers = match &cli.command {
        Command::Validate(c) => c.workers,
        Command::Dgg(a) => a.common.workers,
        Command::Imp(a) => a.common.workers,
        Command::Spectrum(a) => a.common.workers,
        Command::Kernel(a) => a.common.workers,
        Command::Pang(a) => a.workers,
        Command::ZetaTable(_) => None,
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Validate(a) => cmd_validate(&a),
        Command::Dgg(a) => cmd_dgg(&a),
        Command::Imp(a) => cmd_imp(&a),
        Command::Pang(a) => cmd_pang(&a),
        Command::ZetaTable(a) => cmd_zeta_table(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Kernel(a) => cmd_kernel(&a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_hypothesis() {
                EXIT_HYPOTHESIS
            } else {
                EXIT_INPUT
            }
        }
    }
}

struct Output(Box<dyn Write>);

impl Output {
    fn open(path: &Option<PathBuf>) -> Result<Self> {
        Ok(Output(match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        }))
    }

    fn line<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.0, value)?;
        self.0.write_all(b"\n")?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.0.flush()?;
        Ok(())
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("expected a number, got `{s}`")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("expected a nonnegative integer, got `{s}`")))
}

fn tolerance(given: Option<f64>, default: f64) -> Result<f64> {
    match given {
        Some(t) if !(t > 0.0) || !t.is_finite() => {
            Err(Error::Parse(format!("tolerance must be positive, got {t}")))
        }
        Some(t) => Ok(t),
        None => Ok(default),
    }
}

/// `log:a:b:n`, `lin:a:b:n` or `x1,x2,...`; must be nonempty and strictly
/// increasing.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        ["log", a, b, n] => {
            let (a, b, n) = (parse_f64(a)?, parse_f64(b)?, parse_usize(n)?);
            if !(a > 0.0) || b < a || n == 0 {
                return Err(Error::Parse(format!("bad log grid `{spec}`")));
            }
            log_grid(a, b, n)
        }
        ["lin", a, b, n] => {
            let (a, b, n) = (parse_f64(a)?, parse_f64(b)?, parse_usize(n)?);
            if b < a || n == 0 {
                return Err(Error::Parse(format!("bad linear grid `{spec}`")));
            }
            if n == 1 {
                vec![a]
            } else {
                (0..n)
                    .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                    .collect()
            }
        }
        [list] => list.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Parse(format!("bad grid `{spec}`"))),
    };
    if grid.is_empty()
        || grid.windows(2).any(|w| w[1] <= w[0])
        || grid.iter().any(|x| !x.is_finite())
    {
        return Err(Error::Parse(format!(
            "grid `{spec}` must be nonempty and strictly increasing"
        )));
    }
    Ok(grid)
}

/// `all`, `lo..hi` (inclusive integer ids) or comma-separated ids.
pub fn parse_set(g: &WeightedGraph, spec: &str) -> Result<VertexSet> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok(g.all_vertices());
    }
    if let Some((lo, hi)) = spec.split_once("..") {
        if let (Ok(lo), Ok(hi)) = (lo.parse::<i64>(), hi.parse::<i64>()) {
            let ids: Vec<String> = (lo..=hi).map(|i| i.to_string()).collect();
            let set = g.vertex_set(&ids)?;
            return non_empty(set);
        }
    }
    let ids: Vec<&str> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    non_empty(g.vertex_set(&ids)?)
}

fn non_empty(set: VertexSet) -> Result<VertexSet> {
    if set.is_empty() {
        Err(Error::EmptySet)
    } else {
        Ok(set)
    }
}

/// Builtin generator by name.
pub fn generate(spec: &str, policy: MeasurePolicy) -> Result<WeightedGraph> {
    let (name, size) = spec
        .rsplit_once('-')
        .ok_or_else(|| Error::Parse(format!("bad generator `{spec}`")))?;
    let size = parse_usize(size)?;
    match name {
        "path" => path_graph(size, policy),
        "lattice-window" => truncate_lattice(size, policy),
        "star" => star_graph(size, policy),
        "complete" => complete_graph(size, policy),
        _ => Err(Error::Parse(format!("unknown generator `{name}`"))),
    }
}

fn load_graph(c: &CommonArgs) -> Result<WeightedGraph> {
    let policy: MeasurePolicy = c.measure.parse()?;
    match (&c.graph, &c.generator) {
        (Some(path), _) => {
            let file = File::open(path)?;
            match path.extension().and_then(|e| e.to_str()) {
                Some("csv") => read_edge_csv(file, policy),
                _ => read_graph_json(file),
            }
        }
        (None, Some(spec)) => generate(spec, policy),
        (None, None) => Err(Error::Parse(
            "either --graph or --generator is required".into(),
        )),
    }
}

fn load_metric(c: &CommonArgs, g: &WeightedGraph) -> Result<PseudoMetric> {
    match c.metric.as_str() {
        "combinatorial" => Ok(PseudoMetric::combinatorial(g)),
        "default-intrinsic" => default_intrinsic_metric(g),
        other => match other.strip_prefix("explicit:") {
            Some(path) => read_metric_csv(File::open(path)?, g),
            None => Err(Error::Parse(format!("unknown metric `{other}`"))),
        },
    }
}

fn domain_operator(g: &WeightedGraph, omega: &Option<String>) -> Result<Operator> {
    match omega {
        Some(spec) => dirichlet_laplacian(g, &parse_set(g, spec)?),
        None => Ok(laplacian(g)),
    }
}

fn resolve_lambda(policy: &str, op: &Operator) -> Result<f64> {
    match policy {
        "computed" => Ok(spectral_bottom(op)?.lambda()),
        "zero" => Ok(0.0),
        other => parse_f64(other.strip_prefix("explicit:").unwrap_or(other)),
    }
}

pub fn cmd_validate(c: &CommonArgs) -> Result<u8> {
    let g = load_graph(c)?;
    let rho = load_metric(c, &g)?;
    let tol = tolerance(c.tol, DEFAULT_CERT_TOL)?;
    let cert = certify_intrinsic(&g, &rho, tol)?;
    let op = laplacian(&g);
    let symmetric = g.edges().all(|(i, j, w)| g.weight(j, i) == w);
    let positive_measure = g.measure().iter().all(|&m| m > 0.0 && m.is_finite());
    let self_adjoint = op.self_adjointness_defect() <= 1e-12;
    let ok = cert.is_intrinsic && symmetric && positive_measure && self_adjoint;
    let mut out = Output::open(&c.out)?;
    out.line(&json!({
        "vertices": g.len(),
        "edges": g.edges().count(),
        "connected": g.is_connected(),
        "measure_policy": g.policy(),
        "metric": rho.kind(),
        "weights_symmetric": symmetric,
        "measure_positive": positive_measure,
        "laplacian_self_adjoint": self_adjoint,
        "certificate": cert,
        "pass": ok,
    }))?;
    out.finish()?;
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> VertexSet {
    let k = rng.gen_range(1..=n.clamp(1, 6));
    let idx: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
    VertexSet::from_indices(idx, n).expect("indices in range")
}

fn random_function_on(rng: &mut ChaCha8Rng, set: &VertexSet, n: usize) -> VertexFunction {
    let mut f = vec![0.0; n];
    for i in set.iter() {
        f[i] = rng.gen_range(-1.0..1.0);
    }
    VertexFunction(f)
}

#[derive(Serialize)]
struct SweepSummary {
    summary: bool,
    checks: usize,
    failures: usize,
    min_slack: f64,
    min_relative_slack: f64,
    lambda: f64,
    pass: bool,
}

fn summarize(reports: &[DggReport], lambda: f64) -> SweepSummary {
    let failures = reports.iter().filter(|r| !r.holds).count();
    SweepSummary {
        summary: true,
        checks: reports.len(),
        failures,
        min_slack: reports
            .iter()
            .map(|r| r.slack)
            .fold(f64::INFINITY, f64::min),
        min_relative_slack: reports
            .iter()
            .filter(|r| r.rhs > 0.0)
            .map(|r| r.slack / r.rhs)
            .fold(f64::INFINITY, f64::min),
        lambda,
        pass: failures == 0,
    }
}

pub fn cmd_dgg(a: &DggArgs) -> Result<u8> {
    let g = load_graph(&a.common)?;
    let rho = load_metric(&a.common, &g)?;
    let times = parse_grid(&a.t_grid)?;
    let mut checker = match &a.omega {
        Some(spec) => DggChecker::dirichlet(&g, &rho, &parse_set(&g, spec)?)?,
        None => DggChecker::new(&g, &rho)?,
    };
    checker.tol = tolerance(a.common.tol, DEFAULT_TOL)?;
    let lambda = resolve_lambda(&a.lambda, checker.operator())?;
    let domain = checker.operator().domain().to_vec();
    let singletons = || -> Vec<VertexSet> {
        domain
            .iter()
            .map(|&x| VertexSet::from_indices(vec![x], g.len()).expect("in range"))
            .collect()
    };
    let sets_a = if a.set_a.is_empty() {
        singletons()
    } else {
        a.set_a
            .iter()
            .map(|s| parse_set(&g, s))
            .collect::<Result<Vec<_>>>()?
    };
    let sets_b = if a.set_b.is_empty() {
        singletons()
    } else {
        a.set_b
            .iter()
            .map(|s| parse_set(&g, s))
            .collect::<Result<Vec<_>>>()?
    };
    let mut reports = sweep_sets(&checker, &sets_a, &sets_b, &times, lambda)?;

    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    let pick = |rng: &mut ChaCha8Rng| -> VertexSet {
        let local = random_subset(rng, domain.len());
        VertexSet::from_indices(local.iter().map(|k| domain[k]).collect(), g.len())
            .expect("in range")
    };
    for _ in 0..a.random_sets {
        let (sa, sb) = (pick(&mut rng), pick(&mut rng));
        let t = times[rng.gen_range(0..times.len())];
        reports.push(checker.check_sets(&sa, &sb, t, lambda)?);
    }
    for _ in 0..a.functional_trials {
        let (sa, sb) = (pick(&mut rng), pick(&mut rng));
        let f = random_function_on(&mut rng, &sa, g.len());
        let h = random_function_on(&mut rng, &sb, g.len());
        let t = times[rng.gen_range(0..times.len())];
        reports.push(checker.check_functional(&f, &h, &sa, &sb, t, lambda)?);
    }

    let mut out = Output::open(&a.common.out)?;
    for r in &reports {
        out.line(r)?;
    }
    let summary = summarize(&reports, lambda);
    out.line(&summary)?;
    out.finish()?;
    Ok(if summary.pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_imp(a: &ImpArgs) -> Result<u8> {
    let g = load_graph(&a.common)?;
    let rho = load_metric(&a.common, &g)?;
    let omega = match &a.omega {
        Some(spec) => parse_set(&g, spec)?,
        None => g.all_vertices(),
    };
    let set_a = parse_set(&g, &a.set_a)?;
    let f0 = match &a.f0 {
        Some(spec) => g.indicator(&parse_set(&g, spec)?),
        None => {
            let inside: Vec<usize> = set_a.iter().filter(|&x| omega.contains(x)).collect();
            g.indicator(&non_empty(VertexSet::from_indices(inside, g.len())?)?)
        }
    };
    let grid = parse_grid(&a.t_grid)?;
    let tol = tolerance(a.common.tol, DEFAULT_IMP_TOL)?;
    let kappas = a
        .kappa
        .split(',')
        .map(parse_f64)
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::open(&a.common.out)?;
    let mut all_pass = true;
    let mut worst = 0.0f64;
    for &kappa in &kappas {
        let w = distance_weight(&rho, &set_a, kappa)?;
        let mut rep = check_imp_monotonicity(&g, &rho, &omega, &f0, &w, kappa, &grid, tol)?;
        rep.omega = format!("{kappa} * rho(., {})", a.set_a);
        all_pass &= rep.passes;
        worst = worst.max(rep.max_relative_increase);
        out.line(&rep)?;
    }
    out.line(&json!({
        "summary": true,
        "runs": kappas.len(),
        "max_relative_increase": worst,
        "pass": all_pass,
    }))?;
    out.finish()?;
    Ok(if all_pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_pang(a: &PangArgs) -> Result<u8> {
    let grid = ScanGrid {
        d_min: a.d_min,
        d_max: a.d_max,
        t_min: a.t_min,
        t_max: a.t_max,
        t_points: a.t_points,
    };
    let (cells, summary) = envelope_ratio_scan(&grid)?;
    let (_, refined) = envelope_ratio_scan(&grid.refined())?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["d", "t", "p", "oracle_p", "envelope_ratio", "regime"])?;
        for c in &cells {
            w.write_record([
                c.d.to_string(),
                c.t.to_string(),
                c.window.to_string(),
                c.oracle.to_string(),
                c.envelope_ratio.to_string(),
                serde_json::to_value(c.regime)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string(),
            ])?;
        }
        w.flush()?;
    }
    let change = (refined.measured_c / summary.measured_c - 1.0).abs();
    let pass = summary.max_window_deviation <= tolerance(Some(a.tol), 0.0)?
        && summary.measured_c.is_finite()
        && change < 0.05;
    let mut out = Output::open(&a.out)?;
    out.line(&json!({
        "summary": true,
        "scan": summary,
        "refined_measured_c": refined.measured_c,
        "relative_change_under_refinement": change,
        "pass": pass,
    }))?;
    out.finish()?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_zeta_table(a: &ZetaArgs) -> Result<u8> {
    let ts = parse_grid(&a.t_grid)?;
    let rs = a
        .r_grid
        .split(',')
        .map(parse_f64)
        .collect::<Result<Vec<_>>>()?;
    let mut out = Output::open(&a.out)?;
    let mut worst = 0.0f64;
    for &t in &ts {
        for &r in &rs {
            let p = ZetaParams::new(a.s, t, Ext::Finite(r))?;
            let closed = zeta(p).to_f64();
            let var = zeta_variational(p);
            let rel = if closed == 0.0 {
                var.value.to_f64().abs()
            } else {
                (var.value.to_f64() / closed - 1.0).abs()
            };
            worst = worst.max(rel);
            out.line(&json!({
                "s": a.s, "t": t, "r": r,
                "zeta": closed,
                "zeta_variational": var.value,
                "kappa": var.kappa,
                "relative_difference": rel,
            }))?;
        }
    }
    let pass = worst <= 1e-9;
    out.line(&json!({"summary": true, "max_relative_difference": worst, "pass": pass}))?;
    out.finish()?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<u8> {
    let g = load_graph(&a.common)?;
    let op = domain_operator(&g, &a.omega)?;
    let sd = spectral_bottom(&op)?;
    let mut out = Output::open(&a.common.out)?;
    out.line(&sd.report())?;

    if let Some(spec) = &a.exhaust {
        let widths = spec
            .split(',')
            .map(parse_usize)
            .collect::<Result<Vec<_>>>()?;
        let mut seq = Vec::new();
        for k in widths {
            let ids: Vec<String> = (-(k as i64)..=k as i64).map(|i| i.to_string()).collect();
            let omega = g.vertex_set(&ids)?;
            seq.push(spectral_bottom(&dirichlet_laplacian(&g, &omega)?)?.lambda());
        }
        let decreasing = seq.windows(2).all(|w| w[1] <= w[0] + 1e-14);
        out.line(&json!({"exhaustion_lambda1": seq, "nonincreasing": decreasing}))?;
    }

    let mut pass = true;
    if let Some(v) = &a.vertex {
        let x = g.index_of(v)?;
        let xi = op
            .domain()
            .binary_search(&x)
            .map_err(|_| Error::SupportViolation(v.clone()))?;
        let lambda = sd.lambda();
        let times = match &a.t_grid {
            Some(spec) => parse_grid(spec)?,
            None => {
                let t_max = if lambda > 1e-8 { 50.0 / lambda } else { 200.0 };
                log_grid(t_max / 100.0, t_max, 40)
            }
        };
        let values = times
            .iter()
            .map(|&t| Ok(operator_kernel(&op, t, HeatMethod::Spectral)?.get(xi, xi)))
            .collect::<Result<Vec<f64>>>()?;
        let slope = decay_slope(&times, &values)?;
        let rel = if lambda > 1e-8 {
            (slope / -lambda - 1.0).abs()
        } else {
            slope.abs()
        };
        pass = if lambda > 1e-8 {
            rel <= 0.01
        } else {
            rel < 1e-3
        };
        out.line(&json!({
            "vertex": v,
            "decay_slope": slope,
            "minus_lambda": -lambda,
            "deviation": rel,
            "pass": pass,
        }))?;
    }
    out.finish()?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

pub fn cmd_kernel(a: &KernelArgs) -> Result<u8> {
    let g = load_graph(&a.common)?;
    let op = domain_operator(&g, &a.omega)?;
    let method = match a.method.as_str() {
        "spectral" => HeatMethod::Spectral,
        "series" => HeatMethod::Series,
        other => return Err(Error::Parse(format!("unknown method `{other}`"))),
    };
    let k = operator_kernel(&op, a.t, method)?;
    k.write_csv(File::create(&a.csv)?)?;
    let inv = k.invariants();
    let ok = inv.symmetric && inv.nonnegative && inv.conservative.unwrap_or(true);
    let mut out = Output::open(&a.common.out)?;
    out.line(&json!({"kernel_csv": a.csv, "invariants": inv, "pass": ok}))?;
    out.finish()?;
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(parse_grid("lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("log:0.01:100:20").unwrap().len(), 20);
        assert!(parse_grid("2,1").is_err());
        assert!(parse_grid("log:0:1:3").is_err());
        assert!(parse_grid("").is_err());
    }

    #[test]
    fn sets() {
        let g = truncate_lattice(5, MeasurePolicy::Normalized).unwrap();
        assert_eq!(parse_set(&g, "all").unwrap().len(), 11);
        assert_eq!(parse_set(&g, "-2..2").unwrap().len(), 5);
        assert_eq!(parse_set(&g, "0, 3").unwrap().len(), 2);
        assert!(parse_set(&g, "7").is_err());
    }

    #[test]
    fn generators() {
        assert_eq!(
            generate("lattice-window-3", MeasurePolicy::Normalized)
                .unwrap()
                .len(),
            7
        );
        assert_eq!(
            generate("star-3", MeasurePolicy::Physical).unwrap().len(),
            4
        );
        assert_eq!(
            generate("complete-4", MeasurePolicy::Physical)
                .unwrap()
                .edges()
                .count(),
            6
        );
        assert!(generate("wheel-3", MeasurePolicy::Physical).is_err());
    }
}
