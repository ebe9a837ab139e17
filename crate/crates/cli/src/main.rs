use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vrrw_core::graph::{Family, GraphSpec};
use vrrw_core::harness::{
    aggregate, format_float, load_ensemble, run_ensemble, EnsembleConfig, EnsembleRun, FitConfig, HarnessError,
    ModeSpec, RatesSummary, ReplicaTrace, URN_HEADER,
};
use vrrw_core::ld::{binomial_lower_tail, binomial_upper_tail, chernoff_bound, entropy, Tail};
use vrrw_core::rates::{recursion_iterate, Forcing, RecursionParams};

#[derive(Parser)]
#[command(name = "vrrw-lab", version, about = "Vertex-reinforced random walk laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble of plain vertex-reinforced walks.
    Walk(WalkArgs),
    /// Ensemble of modified walks with a scheduled special vertex.
    Mvrrw(MvrrwArgs),
    /// Ensemble of generalized two-color urns.
    Urn(UrnArgs),
    /// Fit decay exponents from checkpoint CSV files.
    Rates(RatesArgs),
    /// Iterate the eta recursion and report the scaled supremum.
    Recursion(RecursionArgs),
    /// Chernoff bound against the exact binomial tail.
    Chernoff(ChernoffArgs),
}

#[derive(Args, Clone, Default)]
struct EnsembleArgs {
    /// JSON configuration file; inline flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of interior vertices of the complete-like graph.
    #[arg(long)]
    d: Option<usize>,
    /// Leaves per interior vertex, comma separated.
    #[arg(long, value_delimiter = ',')]
    leaves: Option<Vec<i64>>,
    #[arg(long)]
    tmax: Option<u64>,
    /// Checkpoint exponent: records at t = round(k^m).
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    kmax: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct WalkArgs {
    #[command(flatten)]
    common: EnsembleArgs,
}

#[derive(Args)]
struct MvrrwArgs {
    #[command(flatten)]
    common: EnsembleArgs,
    /// Special vertex index.
    #[arg(long)]
    special: Option<usize>,
    /// Affine schedule H(k) = h0 + c k.
    #[arg(long)]
    h0: Option<i64>,
    #[arg(long)]
    c: Option<u64>,
    /// Minimum of xi is taken over t at or after this time.
    #[arg(long)]
    xi_burn_in: Option<u64>,
}

#[derive(Args)]
struct UrnArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    y0: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write records_{replica}.csv and report.json here instead of printing CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RatesArgs {
    /// Checkpoint CSV files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    burn_in: u64,
    #[arg(long)]
    fit_tmax: Option<u64>,
    #[arg(long, default_value_t = 0.1)]
    slack: f64,
    /// Records come from a d-partite graph (no band applies).
    #[arg(long)]
    d_partite: bool,
    /// Also print the full aggregate report.
    #[arg(long)]
    report: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ForcingArg {
    Equality,
    Inequality,
}

#[derive(Args)]
struct RecursionArgs {
    #[arg(long)]
    c: f64,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    eta0: f64,
    #[arg(long, default_value_t = 10)]
    k0: u64,
    #[arg(long, default_value_t = 1_000_000)]
    kmax: u64,
    #[arg(long, value_enum, default_value_t = ForcingArg::Equality)]
    forcing: ForcingArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Upper,
    Lower,
}

#[derive(Args)]
struct ChernoffArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    a: f64,
    #[arg(long, value_enum, default_value_t = SideArg::Upper)]
    side: SideArg,
}

fn load_config(path: &Option<PathBuf>, fallback_t_max: u64) -> Result<EnsembleConfig, HarnessError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
            EnsembleConfig::from_json(&text)
        }
        None => Ok(EnsembleConfig::new(GraphSpec::CompleteLike { d: 3, leaves: None }, fallback_t_max, 1, 0)),
    }
}

fn ensemble_config(args: &EnsembleArgs, kind: &str) -> Result<EnsembleConfig, HarnessError> {
    let mut cfg = load_config(&args.config, 1_000_000)?;
    if args.config.is_none() {
        cfg.mode = ModeSpec::named(kind);
    } else if cfg.mode.kind != kind {
        return Err(HarnessError::Config(format!(
            "config mode `{}` does not match subcommand `{kind}`",
            cfg.mode.kind
        )));
    }
    if args.d.is_some() || args.leaves.is_some() {
        let (d0, leaves0) = match &cfg.graph {
            GraphSpec::CompleteLike { d, leaves } => (*d, leaves.clone()),
            _ => (3, None),
        };
        let d = args.d.unwrap_or(d0);
        let leaves = args.leaves.clone().or(if args.d.is_some() { None } else { leaves0 });
        cfg.graph = GraphSpec::CompleteLike { d, leaves };
    }
    if let Some(t) = args.tmax {
        cfg.t_max = t;
    }
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if args.kmax.is_some() {
        cfg.k_max = args.kmax;
    }
    if let Some(r) = args.replicas {
        cfg.replicas = r;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    Ok(cfg)
}

fn summary(run: &EnsembleRun) -> Value {
    let r = &run.report;
    let mut v = json!({
        "model": r.model,
        "replicas": r.replicas,
        "files": run.files.len(),
    });
    if let Some(last) = r.checkpoints.last() {
        v["final_t"] = json!(last.t);
        v["median_sup_dist"] = json!(last.sup_dist.q50);
        v["median_eta"] = json!(last.eta.q50);
    }
    if let Some(rates) = &r.rates {
        v["slope_sup_dist"] = json!(rates.slope_sup_dist);
    }
    if let Some(ratio) = &r.extras.ratio {
        v["fraction_min_xi_above_0.01"] = json!(ratio.fraction_min_above_001);
    }
    if let Some(t) = &r.timing {
        v["steps_per_sec"] = json!(t.steps_per_sec);
    }
    v
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value serializes"));
}

fn cmd_walk(args: WalkArgs) -> Result<(), HarnessError> {
    let cfg = ensemble_config(&args.common, "vrrw")?;
    let run = run_ensemble(&cfg)?;
    print_json(&summary(&run));
    Ok(())
}

fn cmd_mvrrw(args: MvrrwArgs) -> Result<(), HarnessError> {
    let mut cfg = ensemble_config(&args.common, "mvrrw")?;
    if let Some(s) = args.special {
        cfg.mode.params.insert("special".into(), json!(s));
    }
    if args.h0.is_some() || args.c.is_some() {
        let h0 = args.h0.unwrap_or(0);
        let c = args.c.unwrap_or(2);
        cfg.mode.params.insert("schedule".into(), json!({"form": "affine", "h0": h0, "c": c}));
    }
    if let Some(b) = args.xi_burn_in {
        cfg.mode.params.insert("xi_burn_in".into(), json!(b));
    }
    let run = run_ensemble(&cfg)?;
    print_json(&summary(&run));
    Ok(())
}

fn cmd_urn(args: UrnArgs) -> Result<(), HarnessError> {
    let mut cfg = load_config(&args.config, 1_000_000)?;
    if args.config.is_none() {
        cfg.mode = ModeSpec::named("urn");
    } else if cfg.mode.kind != "urn" {
        return Err(HarnessError::Config(format!("config mode `{}` does not match subcommand `urn`", cfg.mode.kind)));
    }
    for (key, value) in [("a", args.a), ("b", args.b), ("c", args.c), ("d", args.d), ("x0", args.x0), ("y0", args.y0)] {
        if let Some(v) = value {
            cfg.mode.params.insert(key.into(), json!(v));
        }
    }
    if let Some(n) = args.steps {
        cfg.t_max = n;
        cfg.k_max = None;
    }
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if let Some(r) = args.replicas {
        cfg.replicas = r;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    let run = run_ensemble(&cfg)?;
    if cfg.out.is_some() {
        print_json(&summary(&run));
        return Ok(());
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{URN_HEADER}")?;
        for trace in &run.traces {
            if let ReplicaTrace::Urn(u) = trace {
                for r in &u.records {
                    let stat = r.stat.map(format_float).unwrap_or_default();
                    writeln!(out, "{},{},{},{},{stat}", r.replica, r.n, format_float(r.x), format_float(r.y))?;
                }
            }
        }
        out.flush()
    };
    write().map_err(|e| HarnessError::Io(format!("stdout: {e}")))
}

fn cmd_rates(args: RatesArgs) -> Result<(), HarnessError> {
    let fit = FitConfig { burn_in: args.burn_in, fit_t_max: args.fit_tmax, band_slack: args.slack };
    let family = Some(if args.d_partite { Family::DPartite } else { Family::CompleteLike });
    if args.report {
        let report = aggregate("vrrw", &args.inputs, &fit, family)?;
        print_json(&serde_json::to_value(&report).expect("report serializes"));
        return Ok(());
    }
    let ensemble = load_ensemble(&args.inputs)?;
    let rates = RatesSummary::from_ensemble(&ensemble, &fit, family)?;
    print_json(&json!({
        "slope_sup_dist": rates.slope_sup_dist,
        "slope_eta": rates.slope_eta,
        "slope_leaf": rates.slope_leaf,
        "band": rates.band.map(|b| json!({"upper": b.upper, "lower": b.lower})),
        "verdict": rates.verdict,
        "fit_window": rates.fit_window,
        "fits": rates.fits,
        "replicas": ensemble.len(),
    }));
    Ok(())
}

fn cmd_recursion(args: RecursionArgs) -> Result<(), HarnessError> {
    let params = RecursionParams {
        c: args.c,
        d: args.d,
        beta_tilde: args.beta,
        epsilon: args.epsilon,
        eta0: args.eta0,
        k0: args.k0,
    };
    let forcing = match args.forcing {
        ForcingArg::Equality => Forcing::Equality,
        ForcingArg::Inequality => Forcing::InequalityRandom { seed: args.seed },
    };
    let r = recursion_iterate(params, args.kmax, forcing).map_err(|e| HarnessError::Config(e.to_string()))?;
    let k_end = r.k_end();
    let decade = |hi: u64| r.window_sup(hi / 10, hi);
    print_json(&json!({
        "branch": r.branch,
        "k_end": k_end,
        "eta_final": r.eta.last(),
        "sup_scaled": r.sup_scaled,
        "sup_last_decade": decade(k_end),
        "sup_previous_decade": decade(k_end / 10),
        "clamped_steps": r.clamped_steps,
    }));
    Ok(())
}

fn cmd_chernoff(args: ChernoffArgs) -> Result<(), HarnessError> {
    let side = match args.side {
        SideArg::Upper => Tail::Upper,
        SideArg::Lower => Tail::Lower,
    };
    let config = |e: vrrw_core::ld::LdError| HarnessError::Config(e.to_string());
    let h = entropy(args.a, args.p).map_err(config)?;
    let bound = chernoff_bound(args.n, args.p, args.a, side).map_err(config)?;
    // a n can land a hair off an integer in floating point
    let threshold = args.a * args.n as f64;
    let exact = match side {
        Tail::Upper => binomial_upper_tail(args.n, args.p, (threshold - 1e-9).ceil() as u64),
        Tail::Lower => binomial_lower_tail(args.n, args.p, (threshold + 1e-9).floor() as u64),
    };
    print_json(&json!({
        "n": args.n,
        "p": args.p,
        "a": args.a,
        "entropy": h,
        "bound": bound,
        "exact_tail": exact,
        "dominates": exact <= bound,
    }));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Walk(a) => cmd_walk(a),
        Command::Mvrrw(a) => cmd_mvrrw(a),
        Command::Urn(a) => cmd_urn(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Recursion(a) => cmd_recursion(a),
        Command::Chernoff(a) => cmd_chernoff(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vrrw-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
