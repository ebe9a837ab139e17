//! End-to-end acceptance checks. Runs as a plain binary (no libtest
//! harness) so that every criterion prints one PASS/FAIL line.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::json;
use vrrw_core::graph::{GraphSpec, GraphTopology, VertexId};
use vrrw_core::harness::{run_ensemble, EnsembleConfig, EnsembleReport, FitConfig, ModeSpec};
use vrrw_core::ld::{chernoff_bound, Tail};
use vrrw_core::rates::{checkpoint_plan, recursion_iterate, Forcing, RecursionParams};
use vrrw_core::rng::SimRng;
use vrrw_core::urn::{RegimeStatistic, UrnParams, UrnState};
use vrrw_core::walk::{excursion_tail_prob, ObserveFn, TailMode, WalkState};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Appends a wall-clock limit to an outcome.
fn within(limit: Duration, started: Instant, o: Outcome) -> Outcome {
    let elapsed = started.elapsed();
    let fast = elapsed < limit;
    outcome(o.pass && fast, format!("{}; {:.2}s of {}s allowed", o.detail, elapsed.as_secs_f64(), limit.as_secs()))
}

fn weight_conservation() -> Outcome {
    let started = Instant::now();
    let mut violations = 0u64;
    let mut checkpoints = 0usize;
    for d in [3usize, 4, 5] {
        for leaves in [vec![0i64; d], (0..d as i64).map(|i| i % 3).collect()] {
            let g = Arc::new(GraphTopology::complete_like(d, &leaves).unwrap());
            let mut w = WalkState::with_defaults(g, 1000 + d as u64);
            let horizon = w.t() + 1_000_000;
            let plan = checkpoint_plan(3.0, 100).unwrap();
            let records = w
                .run_to(
                    horizon,
                    &plan,
                    &mut ObserveFn(|s: &WalkState| violations += u64::from(s.weight_sum() != s.t())),
                )
                .unwrap();
            checkpoints += records.len();
            violations += records.iter().filter(|r| r.weight_sum() != r.t).count() as u64;
        }
    }
    within(
        Duration::from_secs(10),
        started,
        outcome(
            violations == 0,
            format!("6 trajectories x 1e6 steps, {checkpoints} checkpoints, {violations} violations"),
        ),
    )
}

fn transition_law() -> Outcome {
    let started = Instant::now();
    let mut rng = SimRng::seed_from(31337);
    let draws = 100_000u64;
    let mut worst = 0.0f64;
    let mut comparisons = 0;
    for state in 0..20 {
        let d = 3 + rng.below(4) as usize;
        let leaves: Vec<i64> = (0..d).map(|_| rng.below(3) as i64).collect();
        let g = Arc::new(GraphTopology::complete_like(d, &leaves).unwrap());
        let weights: Vec<u64> = (0..g.num_vertices()).map(|_| 1 + rng.below(1000)).collect();
        let start = VertexId(rng.below(d as u64) as usize);
        let mut w = WalkState::new(g.clone(), &weights, start, 500 + state, None).unwrap();
        let nbrs = g.neighbors(start).unwrap().to_vec();
        let total: u64 = nbrs.iter().map(|&v| weights[v]).sum();
        let mut counts = vec![0u64; g.num_vertices()];
        for _ in 0..draws {
            counts[w.sample_next().0] += 1;
        }
        for &v in &nbrs {
            let p = weights[v] as f64 / total as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            let z = (counts[v] as f64 / draws as f64 - p).abs() / se;
            worst = worst.max(z);
            comparisons += 1;
        }
    }
    within(
        Duration::from_secs(5),
        started,
        outcome(worst < 4.0, format!("20 states, {comparisons} neighbor frequencies, max |z| = {worst:.2}")),
    )
}

fn excursion_oracle() -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for u in 1..=4 {
        for v in 1..=4 {
            for a in 1..=4 {
                for m in 1..=4 {
                    let exact = excursion_tail_prob(u, v, a, m, TailMode::Exact).unwrap();
                    worst = worst.max((exact - common::enumerate_tail(u, v, a, m)).abs());
                }
            }
        }
    }
    within(
        Duration::from_secs(1),
        started,
        outcome(worst < 1e-12, format!("256 cases, max |exact - enumerated| = {worst:.2e}")),
    )
}

fn chernoff_domination() -> Outcome {
    let started = Instant::now();
    let mut cases = 0;
    let mut failures = 0;
    for n in 1..=20u64 {
        for step in 1..=9 {
            let p = step as f64 / 10.0;
            for k in 1..n {
                let a = k as f64 / n as f64;
                if a >= p {
                    cases += 1;
                    failures +=
                        usize::from(common::binomial_mass(n, p, k..=n) > chernoff_bound(n, p, a, Tail::Upper).unwrap());
                }
                if a <= p {
                    cases += 1;
                    failures +=
                        usize::from(common::binomial_mass(n, p, 0..=k) > chernoff_bound(n, p, a, Tail::Lower).unwrap());
                }
            }
        }
    }
    within(
        Duration::from_secs(1),
        started,
        outcome(failures == 0, format!("{cases} (n, p, a, side) cases, {failures} failures")),
    )
}

/// K_3, 100 replicas to 10^7; shared by the convergence and slope checks.
fn k3_ensemble() -> &'static EnsembleReport {
    static REPORT: std::sync::OnceLock<EnsembleReport> = std::sync::OnceLock::new();
    REPORT.get_or_init(|| {
        let mut cfg = EnsembleConfig::new(GraphSpec::CompleteLike { d: 3, leaves: None }, 10_000_000, 100, 20_240_601);
        cfg.fit = FitConfig { burn_in: 100_000, fit_t_max: Some(10_000_000), band_slack: 0.1 };
        run_ensemble(&cfg).unwrap().report
    })
}

fn k3_convergence() -> Outcome {
    let report = k3_ensemble();
    let near_1e5 = report.checkpoints.iter().min_by_key(|c| c.t.abs_diff(100_000)).unwrap();
    let last = report.checkpoints.last().unwrap();
    let pass = last.sup_dist.q50 < near_1e5.sup_dist.q50 && last.eta.q50 < 0.15;
    let rate = report.timing.map_or(0.0, |t| t.steps_per_sec);
    outcome(
        pass,
        format!(
            "median sup_dist {:.4} at t={} vs {:.4} at t={}; median eta {:.4} at t={}; {:.1e} steps/s",
            last.sup_dist.q50, last.t, near_1e5.sup_dist.q50, near_1e5.t, last.eta.q50, last.t, rate
        ),
    )
}

fn rate_band_d3() -> Outcome {
    let rates = k3_ensemble().rates.as_ref().unwrap();
    match rates.slope_sup_dist {
        Some(slope) => outcome(
            (-0.80..=-0.15).contains(&slope),
            format!(
                "slope {slope:.4} over t in [{}, {}], target [-0.80, -0.15]",
                rates.fit_window.0, rates.fit_window.1
            ),
        ),
        None => outcome(false, "no fit"),
    }
}

fn leaf_exponent() -> Outcome {
    let mut cfg =
        EnsembleConfig::new(GraphSpec::CompleteLike { d: 3, leaves: Some(vec![0, 0, 1]) }, 10_000_000, 50, 7_070_707);
    cfg.fit = FitConfig { burn_in: 100_000, fit_t_max: Some(10_000_000), band_slack: 0.1 };
    let report = run_ensemble(&cfg).unwrap().report;
    let rates = report.rates.unwrap();
    match rates.slope_leaf {
        Some(slope) => outcome((slope - 0.5).abs() <= 0.2, format!("leaf slope {slope:.4}, target 0.5 +/- 0.2")),
        None => outcome(false, "no leaf fit"),
    }
}

fn urn_regimes() -> Outcome {
    let started = Instant::now();
    let mut rng = SimRng::seed_from(8_675_309);

    let log_ratio: Vec<f64> = (0..200)
        .map(|_| {
            let mut s = UrnState::new(1.0, 1.0, UrnParams { a: 2.0, b: 0.0, c: 0.0, d: 1.0 }).unwrap();
            for _ in 0..1_000_000 {
                s.step(&mut rng).unwrap();
            }
            s.statistic(RegimeStatistic::LogRatio).unwrap_or(f64::NAN)
        })
        .collect();
    let med = common::median(&log_ratio);
    let first_ok = (1.6..=2.4).contains(&med);

    let early_pts = common::log_points(100, 1_000, 20);
    let late_pts = common::log_points(100_000, 1_000_000, 20);
    let replicas = 200;
    let mut stabilized = 0;
    for _ in 0..replicas {
        let mut s = UrnState::new(1.0, 1.0, UrnParams { a: 1.0, b: 0.0, c: 1.0, d: 1.0 }).unwrap();
        let mut sample = |pts: &[u64], s: &mut UrnState| -> Vec<f64> {
            pts.iter()
                .filter_map(|&n| {
                    while s.n < n {
                        s.step(&mut rng).unwrap();
                    }
                    s.statistic(RegimeStatistic::Centered).ok()
                })
                .collect()
        };
        let early = sample(&early_pts, &mut s);
        let late = sample(&late_pts, &mut s);
        if early.len() >= 2 && late.len() >= 2 && common::sample_std(&late) < common::sample_std(&early) {
            stabilized += 1;
        }
    }
    let fraction = stabilized as f64 / replicas as f64;
    within(
        Duration::from_secs(60),
        started,
        outcome(
            first_ok && fraction >= 0.9,
            format!(
                "median ln X/ln Y = {med:.4} (target [1.6, 2.4]); late std < early std in {:.1}% of replicas",
                100.0 * fraction
            ),
        ),
    )
}

fn recursion_solver() -> Outcome {
    let started = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (label, c, beta) in [("beta<C", 1.0, 0.5), ("beta=C", 0.5, 0.5), ("beta>C", 0.5, 1.0)] {
        let params = RecursionParams { c, d: 1.0, beta_tilde: beta, epsilon: 0.5, eta0: 0.1, k0: 10 };
        let r = recursion_iterate(params, 1_000_000, Forcing::Equality).unwrap();
        let growth = r.window_sup(100_000, 1_000_000) / r.window_sup(10_000, 100_000) - 1.0;
        pass &= growth < 0.01;
        parts.push(format!("{label} growth {:+.3}%", 100.0 * growth));
    }
    let zero = RecursionParams { c: 1.0, d: 0.0, beta_tilde: 0.5, epsilon: 0.5, eta0: 0.0, k0: 10 };
    let r = recursion_iterate(zero, 1_000_000, Forcing::Equality).unwrap();
    let zero_ok = r.eta.iter().all(|&e| e == 0.0) && r.sup_scaled == 0.0;
    parts.push(format!("D=0 identically zero: {zero_ok}"));
    within(Duration::from_secs(5), started, outcome(pass && zero_ok, parts.join(", ")))
}

fn mvrrw_ratio() -> Outcome {
    let mut cfg = EnsembleConfig::new(GraphSpec::CompleteLike { d: 3, leaves: None }, 1_000_000, 50, 4_242);
    cfg.mode = ModeSpec::named("mvrrw")
        .with("special", json!(2))
        .with("schedule", json!({"form": "affine", "h0": 0, "c": 2}))
        .with("xi_burn_in", json!(10_000));
    let report = run_ensemble(&cfg).unwrap().report;
    let ratio = report.extras.ratio.unwrap();
    outcome(
        ratio.fraction_min_above_001 >= 0.95,
        format!(
            "min xi > 0.01 in {:.0}% of 50 replicas (median min xi {:.4})",
            100.0 * ratio.fraction_min_above_001,
            ratio.min_xi.q50
        ),
    )
}

fn determinism() -> Outcome {
    let configs = [
        ("vrrw", GraphSpec::CompleteLike { d: 4, leaves: Some(vec![1, 0, 2, 0]) }, ModeSpec::named("vrrw")),
        ("mvrrw", GraphSpec::CompleteLike { d: 3, leaves: None }, ModeSpec::named("mvrrw")),
        (
            "urn",
            GraphSpec::CompleteLike { d: 3, leaves: None },
            ModeSpec::named("urn")
                .with("a", json!(2.0))
                .with("b", json!(0.0))
                .with("c", json!(0.0))
                .with("d", json!(1.0)),
        ),
    ];
    let mut details = Vec::new();
    let mut pass = true;
    for (name, graph, mode) in configs {
        let mut outputs = Vec::new();
        for workers in [1usize, 1, 3] {
            let dir = tempfile::tempdir().unwrap();
            let mut cfg = EnsembleConfig::new(graph.clone(), 200_000, 4, 555);
            cfg.mode = mode.clone();
            cfg.workers = Some(workers);
            cfg.out = Some(dir.path().to_path_buf());
            let run = run_ensemble(&cfg).unwrap();
            let bytes: Vec<Vec<u8>> = run.files.iter().map(|f| std::fs::read(f).unwrap()).collect();
            outputs.push(bytes);
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        pass &= same;
        details.push(format!("{name}: {}", if same { "identical" } else { "DIFFERENT" }));
    }
    outcome(pass, format!("3 runs each (workers 1, 1, 3): {}", details.join(", ")))
}

fn two_leaf_competition() -> Outcome {
    let cfg = EnsembleConfig::new(GraphSpec::CompleteLike { d: 2, leaves: Some(vec![1, 1]) }, 1_000_000, 50, 1_212);
    let run = run_ensemble(&cfg).unwrap();
    let mut small = 0;
    let mut products = Vec::new();
    for records in run.walk_records() {
        let last = records.last().unwrap();
        let (z1, z2) = (last.weights[0] as f64, last.weights[1] as f64);
        let (l1, l2) = (last.leaf_totals[0] as f64, last.leaf_totals[1] as f64);
        let product = (l1 / (l1 + z2)) * (l2 / (l2 + z1));
        small += usize::from(product < 0.05);
        products.push(product);
    }
    let fraction = small as f64 / products.len() as f64;
    outcome(
        fraction >= 0.9,
        format!(
            "xi_L * xi_R < 0.05 in {:.0}% of 50 replicas (median product {:.4})",
            100.0 * fraction,
            common::median(&products)
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("weight conservation", weight_conservation),
        ("transition law", transition_law),
        ("excursion formula oracle", excursion_oracle),
        ("chernoff domination", chernoff_domination),
        ("convergence on K_3", k3_convergence),
        ("rate band d=3", rate_band_d3),
        ("leaf exponent", leaf_exponent),
        ("urn regimes", urn_regimes),
        ("recursion solver", recursion_solver),
        ("modified walk ratio", mvrrw_ratio),
        ("determinism", determinism),
        ("two-leaf competition", two_leaf_competition),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!(
            "acceptance {:>2} {verdict} {name}: {} [{:.1}s]",
            i + 1,
            result.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
