//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. A full verification run gates the rest.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use otl::market::price_by_enumeration;
use otl::sim::play_path;
use otl::verify::{self, enumerate_q, Suite};
use otl::{
    compare, make_policy, price_process, run, sample_path, solve_q, Action, Belief,
    DecisionProblem, DividendSpec, MarketModel, Move, PolicySpec, SimConfig, Ticks,
};

const ORACLE_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;
const STRICT_MARGIN: f64 = 1e-9;
const BELLMAN_BUDGET: Duration = Duration::from_secs(10);
const MC_BUDGET: Duration = Duration::from_secs(30);
const MC_HALF_WIDTH: f64 = 0.21;

type Outcome = Result<String, String>;

fn ticks(size: f64) -> Ticks {
    Ticks::symmetric(size).expect("positive tick")
}

fn q_grid() -> Vec<f64> {
    (0..9).map(|i| (55 + 5 * i) as f64 / 100.0).collect()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bellman_oracle() -> Outcome {
    let start = Instant::now();
    let beliefs = [
        Belief::fixed(0.6).unwrap(),
        Belief::mirror(0.6, Move::Up).unwrap(),
        Belief::beta(3.0, 2.0).unwrap(),
    ];
    let mut worst = 0.0f64;
    for belief in beliefs {
        for horizon in 0..=8 {
            let problem = DecisionProblem::new(horizon, ticks(10.0), belief);
            let table = solve_q(&problem).map_err(|e| e.to_string())?;
            if horizon == 0 {
                let v = table.value(0, &belief).map_err(|e| e.to_string())?;
                worst = worst.max(v.abs());
                continue;
            }
            let solver = table.q_values(0, &belief).map_err(|e| e.to_string())?;
            for (s, o) in solver.iter().zip(enumerate_q(&problem)) {
                worst = worst.max((s - o).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= ORACLE_TOL && elapsed < BELLMAN_BUDGET,
        format!("max|dQ| = {worst:e} (tol {ORACLE_TOL:e}), {:.3}s", elapsed.as_secs_f64()),
    )
}

fn example_chain() -> Outcome {
    let mut weakest = f64::INFINITY;
    for q in q_grid() {
        for horizon in 1..=5 {
            let belief = Belief::fixed(q).unwrap();
            let table = solve_q(&DecisionProblem::new(horizon, ticks(10.0), belief))
                .map_err(|e| e.to_string())?;
            let get = |a| table.q(0, &belief, a).unwrap();
            let (l, n, s) = (get(Action::LONG), get(Action::NEUTRAL), get(Action::SHORT));
            weakest = weakest.min(l - n).min(n - s);
        }
    }
    let belief = Belief::fixed(0.6).unwrap();
    let table = solve_q(&DecisionProblem::new(1, ticks(10.0), belief)).map_err(|e| e.to_string())?;
    let one_step = [Action::LONG, Action::NEUTRAL, Action::SHORT].map(|a| table.q(0, &belief, a).unwrap());
    let dev = one_step
        .iter()
        .zip([2.0, 0.0, -2.0])
        .map(|(got, want)| (got - want).abs())
        .fold(0.0, f64::max);
    check(
        weakest > STRICT_MARGIN && dev <= EXACT_TOL,
        format!("min gap = {weakest}, T=1 q=0.6 values {one_step:?} (dev {dev:e})"),
    )
}

fn averaging_contradiction() -> Outcome {
    let actions = vec![Action::NEUTRAL, Action::LONG, Action::long(2), Action::SHORT];
    let (mut worst_double, mut worst_single, mut min_margin) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut cases = 0;
    for q in q_grid() {
        for scale in [1.0, 10.0, 100.0] {
            for remaining in 1..=5 {
                let start = Belief::mirror(q, Move::Up).unwrap();
                let problem = DecisionProblem::new(remaining + 1, ticks(10.0 * scale), start)
                    .with_actions(actions.clone());
                let table = solve_q(&problem).map_err(|e| e.to_string())?;
                if table.optimal_action(0, &start).map_err(|e| e.to_string())? != Action::long(2) {
                    return Err(format!("q={q} scale={scale}: entry is not long"));
                }
                let after = start.update(Move::Down);
                let q_at = |a| table.q(1, &after, a).unwrap();
                let edge = scale * 10.0 * (2.0 * q - 1.0);
                let double_gap = q_at(Action::NEUTRAL) - q_at(Action::long(2));
                let single_gap = q_at(Action::NEUTRAL) - q_at(Action::LONG);
                worst_double = worst_double.max((double_gap - 2.0 * edge).abs());
                worst_single = worst_single.max((single_gap - edge).abs());
                min_margin = min_margin.min(double_gap).min(single_gap);
                cases += 1;
            }
        }
    }
    check(
        worst_double <= ORACLE_TOL && worst_single <= ORACLE_TOL && min_margin > STRICT_MARGIN,
        format!(
            "{cases} cases, |Q(N)-Q(2L) - 2*s*10*(2q-1)| <= {worst_double:e}, \
             |Q(N)-Q(L) - s*10*(2q-1)| <= {worst_single:e}, min margin {min_margin}"
        ),
    )
}

fn symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0004);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let q = rng.random_range(0.01..0.99);
        let horizon = rng.random_range(1..=6usize);
        let up = Belief::fixed(q).unwrap();
        let down = Belief::fixed(1.0 - q).unwrap();
        let a = solve_q(&DecisionProblem::new(horizon, ticks(10.0), up)).map_err(|e| e.to_string())?;
        let b = solve_q(&DecisionProblem::new(horizon, ticks(10.0), down)).map_err(|e| e.to_string())?;
        for t in 0..horizon {
            let qa = |x| a.q(t, &up, x).unwrap();
            let qb = |x| b.q(t, &down, x).unwrap();
            worst = worst
                .max((qa(Action::LONG) - qb(Action::SHORT)).abs())
                .max((qa(Action::SHORT) - qb(Action::LONG)).abs())
                .max((qa(Action::NEUTRAL) - qb(Action::NEUTRAL)).abs());
        }
    }
    check(worst <= EXACT_TOL, format!("20 cases, max deviation {worst:e} (tol {EXACT_TOL:e})"))
}

fn mc_consistency() -> Outcome {
    let start = Instant::now();
    let model = MarketModel::new(ticks(10.0), 0.4, 1000.0).map_err(|e| e.to_string())?;
    let problem = DecisionProblem::new(10, ticks(10.0), Belief::fixed(0.5).unwrap());
    let policy = make_policy(PolicySpec::AlwaysLong, &problem).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(200_000, 10, 20_240_401);
    let res = run(&policy, &model, &cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mean = res.stats.mean_terminal;
    let se = res.stats.std_error(cfg.n_paths);
    check(
        (mean - 980.0).abs() <= MC_HALF_WIDTH && elapsed < MC_BUDGET,
        format!(
            "mean {mean:.4} vs 980 +/- {MC_HALF_WIDTH} (se {se:.4}), {:.3}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn average_down_dominance() -> Outcome {
    let model = MarketModel::new(ticks(10.0), 0.45, 1000.0).map_err(|e| e.to_string())?;
    let problem = DecisionProblem::new(20, ticks(10.0), Belief::mirror(0.6, Move::Up).unwrap());
    let policies = [PolicySpec::CutLoss, PolicySpec::average_down()]
        .into_iter()
        .map(|s| make_policy(s, &problem))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let table = compare(&policies, &model, &SimConfig::new(100_000, 20, 77)).map_err(|e| e.to_string())?;
    let d = &table.diffs[0];
    check(
        d.mean_diff > 0.0 && d.ci99.0 > 0.0,
        format!(
            "{} - {} = {:.3}, 99% CI ({:.3}, {:.3})",
            d.first, d.second, d.mean_diff, d.ci99.0, d.ci99.1
        ),
    )
}

fn policy_equivalence() -> Outcome {
    let model = MarketModel::new(ticks(10.0), 0.5, 1000.0).map_err(|e| e.to_string())?;
    let problem = DecisionProblem::new(20, ticks(10.0), Belief::mirror(0.6, Move::Up).unwrap())
        .with_actions(vec![Action::LONG, Action::NEUTRAL]);
    let bellman = make_policy(PolicySpec::bellman(), &problem).map_err(|e| e.to_string())?;
    let cut = make_policy(PolicySpec::CutLoss, &problem).map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    for i in 0..1000u64 {
        let path = sample_path(&model, 20, otl::path_seed(99, i));
        let a = play_path(&bellman, &model, &path.moves, i as usize).map_err(|e| e.to_string())?;
        let b = play_path(&cut, &model, &path.moves, i as usize).map_err(|e| e.to_string())?;
        if !a.actions().eq(b.actions()) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("1000 paths, {mismatches} action-sequence mismatches"))
}

fn price_checks() -> Outcome {
    let unit = |p| MarketModel::new(ticks(1.0), p, 0.0).unwrap();
    let identity = || DividendSpec::terminal_only(100.0, |x| x);
    let e = |x: otl::Error| x.to_string();

    let mut martingale_ok = true;
    for horizon in 0..=12 {
        martingale_ok &= price_process(&unit(0.5), &identity(), horizon).map_err(e)? == 100.0;
    }
    let one_step = price_process(&unit(0.6), &identity(), 1).map_err(e)?;

    let mut worst = 0.0f64;
    for p in [0.3, 0.5, 0.6] {
        for horizon in 0..=12 {
            let div = DividendSpec::new(
                100.0,
                |t, _: Action, x: f64| 0.01 * x - 0.5 * t as f64 + 0.1,
                |x: f64| (x - 100.0).max(0.0),
            );
            let lattice = price_process(&unit(p), &div, horizon).map_err(e)?;
            let paths = price_by_enumeration(&unit(p), &div, horizon).map_err(e)?;
            worst = worst.max((lattice - paths).abs());
        }
    }
    check(
        martingale_ok && (one_step - 100.2).abs() <= EXACT_TOL && worst <= ORACLE_TOL,
        format!(
            "martingale exact: {martingale_ok}, p=0.6 T=1 price {one_step:?}, \
             lattice vs enumeration max dev {worst:e}"
        ),
    )
}

fn cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_otl"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "`otl {}` in {} exited {:?}: {}",
            args.join(" "),
            dir.display(),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let cfg = root.join("run.conf");
    fs::write(&cfg, "market.p = 0.45\nproblem.horizon = 20\nsim.paths = 2000\nsim.seed = 123\n")
        .map_err(|e| e.to_string())?;
    let cfg = cfg.to_str().unwrap();
    let mut files = Vec::new();
    for round in 0..2 {
        let paths = root.join(format!("paths{round}.csv"));
        let stats = root.join(format!("stats{round}.csv"));
        let table = root.join(format!("compare{round}.csv"));
        let diffs = root.join(format!("diffs{round}.csv"));
        let s = |p: &Path| p.to_str().unwrap().to_owned();
        cli(root, &["simulate", "--config", cfg, "--policy", "avgdown", "--out", &s(&paths), "--stats", &s(&stats)])?;
        cli(
            root,
            &["compare", "--config", cfg, "--policies", "cutloss,avgdown,bellman", "--out", &s(&table), "--diffs", &s(&diffs)],
        )?;
        let read = |p: &Path| fs::read(p).map_err(|e| e.to_string());
        files.push([read(&paths)?, read(&stats)?, read(&table)?, read(&diffs)?]);
    }
    let bytes: usize = files[0].iter().map(Vec::len).sum();
    check(files[0] == files[1], format!("4 output files, {bytes} bytes, identical across 2 runs"))
}

fn main() -> ExitCode {
    let reports = verify::run_suite(Suite::All);
    let verified = reports.iter().all(|r| r.overall);
    for r in &reports {
        let failed = r.failures().count();
        println!("verify {:<10} {} ({} cases, {failed} failed)", r.suite, if r.overall { "PASS" } else { "FAIL" }, r.cases.len());
    }
    if !verified {
        println!("FAIL verify gate: acceptance criteria not evaluated");
        return ExitCode::FAILURE;
    }

    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 bellman oracle equivalence", bellman_oracle),
        ("2 optimistic ordering chain", example_chain),
        ("3 no averaging down after a loss", averaging_contradiction),
        ("4 long/short symmetry", symmetry),
        ("5 monte carlo consistency", mc_consistency),
        ("6 cut-loss beats average-down", average_down_dominance),
        ("7 bellman mirror equals cut-loss", policy_equivalence),
        ("8 price process", price_checks),
        ("9 cli determinism", determinism),
    ];
    let mut all = true;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                all = false;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
