//! Batch front end: body inspection, transform evaluation, verification
//! suites, discrepancy runs, and scaling experiments. Data-only output
//! (JSON/CSV); exit code 0 = all checks pass, 1 = a check failed (reports
//! are still written), 2 = usage or configuration error.

use clap::{Args, Parser, Subcommand};
use disclab::bodies::BodySpec;
use disclab::bounds::{
    check_bnw_upper, check_brunn, check_concave_lemma, check_corollary_rho_d,
    check_double_cone_failure, check_lower_average, check_single_scale_lower,
    check_uniform_ball, direction_grid, log_grid, CheckReport, RatioScan,
};
use disclab::discrepancy::{
    cassels_montgomery, generate_points, l2_discrepancy_mc, l2_discrepancy_parseval,
    scaling_experiment, Generator, LatticeShell, DEFAULT_CM_FLOOR,
};
use disclab::fourier::{
    ft_closed_form, ft_via_section, ft_via_surface, herz_leading_term, FourierQuery,
};
use disclab::report::{write_atomic, OutputFormat, Report};
use disclab::{DiscLabError, Result};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "disclab",
    about = "Fourier transforms of convex bodies and L2 geometric discrepancy",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a body: volume, radii, smoothness, curvature.
    Body(BodyCmd),
    /// Evaluate the indicator transform along direction/frequency grids.
    Fourier(FourierCmd),
    /// Run decay-inequality certification checks.
    Verify(VerifyCmd),
    /// L2 discrepancy of a point set against a body, by lattice series
    /// and/or Monte-Carlo, optionally with a Cassels-Montgomery shell sum.
    Discrepancy(DiscrepancyCmd),
    /// D^2(N) scaling experiment across generators.
    Experiment(ExperimentCmd),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (defaults to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, default_value = "json")]
    format: String,
    /// Omit the timestamp so identical configs give byte-identical files
    #[arg(long)]
    no_timestamp: bool,
    /// Cap worker threads
    #[arg(long)]
    threads: Option<usize>,
}

impl OutputArgs {
    fn emit(&self, report: Report) -> Result<()> {
        let report = if self.no_timestamp {
            report
        } else {
            report.with_timestamp()
        };
        let format = OutputFormat::from_str(&self.format)?;
        let text = report.render(format)?;
        match &self.out {
            Some(path) => write_atomic(path, &text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn init_threads(&self) {
        if let Some(t) = self.threads {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build_global();
        }
    }
}

#[derive(Args)]
struct BodyCmd {
    /// Body spec: path to a JSON file, or inline JSON starting with '{'
    #[arg(long)]
    body: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 64)]
    theta_count: usize,
    #[arg(long, default_value_t = 8.0)]
    rho_min: f64,
    #[arg(long, default_value_t = 256.0)]
    rho_max: f64,
    #[arg(long, default_value_t = 48)]
    rho_steps: usize,
}

#[derive(Args)]
struct FourierCmd {
    #[arg(long)]
    body: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Relative tolerance for the quadrature routes
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyCmd {
    #[arg(long)]
    body: String,
    /// One of: bnw-upper, double-cone, lower-average, single-scale-lower,
    /// corollary-rho-d, brunn, concave-lemma, uniform-ball; or --all
    #[arg(long)]
    check: Option<String>,
    /// Run every check applicable to the body
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    #[arg(long, default_value_t = 4.0)]
    beta: f64,
    /// Defaults to alpha/beta
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 8.0)]
    kappa: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DiscrepancyCmd {
    #[arg(long)]
    body: String,
    #[arg(long, default_value = "uniform-random")]
    gen: String,
    #[arg(long, short = 'N', default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// parseval | mc | both
    #[arg(long, default_value = "both")]
    method: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Lattice truncation start (0 = automatic 4 N^{1/d})
    #[arg(long, short = 'M', default_value_t = 0.0)]
    m: f64,
    /// Inner shell radius: when set, also reports the Cassels-Montgomery
    /// shell sum over H < |n| <= max(M, 4 N^{1/d})
    #[arg(long, short = 'H')]
    h: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ExperimentCmd {
    #[arg(long)]
    body: String,
    /// Comma-separated generators
    #[arg(long, default_value = "grid,hammersley")]
    gen: String,
    /// Comma-separated N values, increasing
    #[arg(long, short = 'N', default_value = "16,64,256,1024")]
    n: String,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

fn load_body(arg: &str) -> Result<BodySpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)?
    };
    let body: BodySpec = serde_json::from_str(&text)?;
    body.validate()?;
    Ok(body)
}

fn effective_seed(flag: u64) -> u64 {
    match std::env::var("DISCLAB_SEED") {
        Ok(v) => v.parse().unwrap_or(flag),
        Err(_) => flag,
    }
}

fn run_body(cmd: &BodyCmd) -> Result<i32> {
    let body = load_body(&cmd.body)?;
    let min_curv = body.min_curvature_radius().ok();
    let payload = json!({
        "dim": body.dim,
        "volume": body.volume(),
        "diameter": body.diameter(),
        "inner_radius": body.inner_radius(),
        "outer_radius": body.outer_radius(),
        "smooth": body.is_smooth(),
        "positive_curvature": body.is_positive_curvature(),
        "min_curvature_radius": min_curv,
    });
    let report = Report::new("body", json!({"body": body}), &payload)?;
    cmd.output.emit(report)?;
    Ok(0)
}

fn run_fourier(cmd: &FourierCmd) -> Result<i32> {
    let body = load_body(&cmd.body)?;
    let thetas = direction_grid(body.dim, cmd.grid.theta_count)?;
    let rhos = log_grid(cmd.grid.rho_min, cmd.grid.rho_max, cmd.grid.rho_steps);
    let mut rows = Vec::new();
    for (ti, theta) in thetas.iter().enumerate() {
        for &rho in &rhos {
            let q = FourierQuery::new(body.clone(), theta.clone(), rho).with_tolerance(cmd.tol);
            let section = ft_via_section(&q)?;
            let surface = ft_via_surface(&q)?;
            let closed = ft_closed_form(&q).ok();
            let herz = herz_leading_term(&q).ok();
            let dev = (section - surface).norm() / section.norm().max(1e-300);
            rows.push(json!({
                "theta": ti,
                "rho": rho,
                "section_re": section.re,
                "section_im": section.im,
                "surface_re": surface.re,
                "surface_im": surface.im,
                "closed_re": closed.map(|c| c.re),
                "closed_im": closed.map(|c| c.im),
                "herz_re": herz.map(|c| c.re),
                "herz_im": herz.map(|c| c.im),
                "section_surface_rel_dev": dev,
            }));
        }
    }
    let config = json!({
        "body": body,
        "theta_count": cmd.grid.theta_count,
        "rho_min": cmd.grid.rho_min,
        "rho_max": cmd.grid.rho_max,
        "rho_steps": cmd.grid.rho_steps,
        "tol": cmd.tol,
    });
    let report = Report::new("fourier", config, &json!({ "rows": rows }))?;
    cmd.output.emit(report)?;
    Ok(0)
}

const ALL_CHECKS: [&str; 8] = [
    "bnw-upper",
    "double-cone",
    "lower-average",
    "single-scale-lower",
    "corollary-rho-d",
    "brunn",
    "concave-lemma",
    "uniform-ball",
];

fn make_scan(body: &BodySpec, cmd: &VerifyCmd) -> Result<RatioScan> {
    let thetas = direction_grid(body.dim, cmd.grid.theta_count)?;
    let rhos = log_grid(cmd.grid.rho_min, cmd.grid.rho_max, cmd.grid.rho_steps);
    let mut scan = RatioScan::new(body.clone(), thetas, rhos);
    scan.alpha = cmd.alpha;
    scan.beta = cmd.beta;
    scan.gamma = cmd.gamma.unwrap_or(cmd.alpha / cmd.beta);
    scan.kappa = cmd.kappa;
    Ok(scan)
}

fn brunn_suite(body: &BodySpec, theta_count: usize) -> Result<Vec<CheckReport>> {
    let thetas = direction_grid(body.dim, theta_count.min(10).max(1))?;
    thetas
        .iter()
        .map(|t| check_brunn(body, t, 1000))
        .collect()
}

fn concave_suite(body: &BodySpec, theta_count: usize) -> Result<Vec<CheckReport>> {
    let thetas = direction_grid(body.dim, theta_count.min(8).max(1))?;
    let fractions = [(0.0, 0.5), (0.1, 0.6), (0.25, 0.75), (0.4, 0.8)];
    let mut out = Vec::new();
    for theta in &thetas {
        let profile = body.section_profile(theta)?;
        let mut pairs: Vec<(f64, f64)> = fractions
            .iter()
            .map(|&(f1, f2)| (f1 * profile.support.b, f2 * profile.support.b))
            .collect();
        pairs.extend(
            fractions
                .iter()
                .map(|&(f1, f2)| (-f1 * profile.support.a, -f2 * profile.support.a)),
        );
        out.push(check_concave_lemma(&profile, &pairs)?);
    }
    Ok(out)
}

fn run_one_check(body: &BodySpec, name: &str, cmd: &VerifyCmd) -> Result<Vec<CheckReport>> {
    match name {
        "bnw-upper" => Ok(vec![check_bnw_upper(&make_scan(body, cmd)?)]
            .into_iter()
            .collect::<Result<_>>()?),
        "double-cone" => {
            let rhos = log_grid(
                cmd.grid.rho_min.max(2.0),
                cmd.grid.rho_max.max(16.0),
                cmd.grid.rho_steps,
            );
            Ok(vec![check_double_cone_failure(&rhos)?])
        }
        "lower-average" => Ok(vec![check_lower_average(&make_scan(body, cmd)?)?]),
        "single-scale-lower" => Ok(vec![check_single_scale_lower(&make_scan(body, cmd)?)?]),
        "corollary-rho-d" => Ok(vec![check_corollary_rho_d(&make_scan(body, cmd)?)?]),
        "brunn" => brunn_suite(body, cmd.grid.theta_count),
        "concave-lemma" => concave_suite(body, cmd.grid.theta_count),
        "uniform-ball" => Ok(vec![check_uniform_ball(&make_scan(body, cmd)?)?]),
        other => Err(DiscLabError::Config(format!(
            "unknown check '{other}' (expected one of {})",
            ALL_CHECKS.join(", ")
        ))),
    }
}

fn run_verify(cmd: &VerifyCmd) -> Result<i32> {
    let body = load_body(&cmd.body)?;
    let mut reports: Vec<Value> = Vec::new();
    let mut all_pass = true;
    if cmd.all || cmd.check.as_deref() == Some("all") {
        for name in ALL_CHECKS {
            if name == "double-cone" && !matches!(body.kind, disclab::bodies::BodyKind::DoubleCone { .. }) {
                continue;
            }
            match run_one_check(&body, name, cmd) {
                Ok(rs) => {
                    for r in rs {
                        all_pass &= r.verdict;
                        reports.push(serde_json::to_value(&r)?);
                    }
                }
                Err(DiscLabError::UnsupportedBody(msg))
                | Err(DiscLabError::UnsupportedQuery(msg)) => {
                    reports.push(json!({"check": name, "skipped": msg}));
                }
                Err(e) => return Err(e),
            }
        }
    } else {
        let name = cmd.check.as_deref().ok_or_else(|| {
            DiscLabError::Config("verify needs --check <name> or --all".into())
        })?;
        for r in run_one_check(&body, name, cmd)? {
            all_pass &= r.verdict;
            reports.push(serde_json::to_value(&r)?);
        }
    }
    let config = json!({
        "body": body,
        "check": cmd.check,
        "all": cmd.all,
        "theta_count": cmd.grid.theta_count,
        "rho_min": cmd.grid.rho_min,
        "rho_max": cmd.grid.rho_max,
        "rho_steps": cmd.grid.rho_steps,
        "alpha": cmd.alpha,
        "beta": cmd.beta,
        "gamma": cmd.gamma.unwrap_or(cmd.alpha / cmd.beta),
        "kappa": cmd.kappa,
    });
    let payload = json!({ "rows": reports, "all_pass": all_pass });
    cmd.output.emit(Report::new("verify", config, &payload)?)?;
    Ok(if all_pass { 0 } else { 1 })
}

fn run_discrepancy(cmd: &DiscrepancyCmd) -> Result<i32> {
    let raw = load_body(&cmd.body)?;
    // shrink so dilates wrap on the torus without self-overlap
    let body = raw.scaled_to_radius(0.25);
    let generator = Generator::from_str(&cmd.gen)?;
    let seed = effective_seed(cmd.seed);
    let points = generate_points(generator, cmd.n, body.dim, seed)?;
    let mut payload = serde_json::Map::new();
    let mut exit = 0;
    let run_parseval = cmd.method == "parseval" || cmd.method == "both";
    let run_mc = cmd.method == "mc" || cmd.method == "both";
    if !(run_parseval || run_mc) {
        return Err(DiscLabError::Config(format!(
            "unknown method '{}' (expected parseval, mc, or both)",
            cmd.method
        )));
    }
    let parseval = if run_parseval {
        let r = l2_discrepancy_parseval(&points, &body, cmd.m)?;
        payload.insert("parseval".into(), serde_json::to_value(&r)?);
        Some(r)
    } else {
        None
    };
    let mc = if run_mc {
        let r = l2_discrepancy_mc(&points, &body, cmd.samples, seed)?;
        payload.insert("mc".into(), serde_json::to_value(&r)?);
        Some(r)
    } else {
        None
    };
    if let (Some(p), Some(m)) = (&parseval, &mc) {
        let agree = (p.value - m.value).abs() <= 3.0 * (p.error + m.error);
        payload.insert("methods_agree".into(), json!(agree));
        if !agree {
            exit = 1;
        }
    }
    if let Some(h) = cmd.h {
        let m_shell = cmd
            .m
            .max(4.0 * (cmd.n as f64).powf(1.0 / body.dim as f64));
        let shell = LatticeShell::new(h, m_shell)?;
        let (sum, report) = cassels_montgomery(&points, shell, DEFAULT_CM_FLOOR)?;
        payload.insert("shell_sum".into(), json!(sum));
        payload.insert("cassels_montgomery".into(), serde_json::to_value(&report)?);
        if !report.verdict {
            exit = 1;
        }
    }
    let config = json!({
        "body": body,
        "generator": generator.to_string(),
        "n": cmd.n,
        "seed": seed,
        "method": cmd.method,
        "samples": cmd.samples,
        "m": cmd.m,
        "h": cmd.h,
        "scaled_outer_radius": 0.25,
    });
    cmd.output
        .emit(Report::new("discrepancy", config, &Value::Object(payload))?)?;
    Ok(exit)
}

fn run_experiment(cmd: &ExperimentCmd) -> Result<i32> {
    let raw = load_body(&cmd.body)?;
    let body = raw.scaled_to_radius(0.25);
    let generators: Vec<Generator> = cmd
        .gen
        .split(',')
        .map(|g| Generator::from_str(g.trim()))
        .collect::<Result<_>>()?;
    let n_list: Vec<usize> = cmd
        .n
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| DiscLabError::Config(format!("bad N value '{s}': {e}")))
        })
        .collect::<Result<_>>()?;
    let table = scaling_experiment(&body, &generators, &n_list, cmd.repeats.max(1))?;
    let config = json!({
        "body": body,
        "generators": generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "n_list": n_list,
        "repeats": cmd.repeats.max(1),
        "scaled_outer_radius": 0.25,
    });
    let payload = json!({
        "rows": table.rows,
        "slopes": table
            .slopes
            .iter()
            .map(|(g, s)| json!({"generator": g.to_string(), "slope": s}))
            .collect::<Vec<_>>(),
    });
    cmd.output.emit(Report::new("experiment", config, &payload)?)?;
    Ok(0)
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Body(c) => {
            c.output.init_threads();
            run_body(c)
        }
        Command::Fourier(c) => {
            c.output.init_threads();
            run_fourier(c)
        }
        Command::Verify(c) => {
            c.output.init_threads();
            run_verify(c)
        }
        Command::Discrepancy(c) => {
            c.output.init_threads();
            run_discrepancy(c)
        }
        Command::Experiment(c) => {
            c.output.init_threads();
            run_experiment(c)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
