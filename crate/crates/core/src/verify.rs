//! Mechanical checks of the trading claims: the Bellman recursion against a
//! path-enumeration oracle, the long/neutral/short ordering for an optimistic
//! trader, the exit-after-a-loss flip that rules out averaging down, and the
//! price-process recursion.
//!
//! Every checker is exact and seed-free. Failures are report contents, not
//! errors.

use std::fmt;

use serde::Serialize;

use crate::action::{Action, Direction};
use crate::belief::{Belief, Move};
use crate::error::Result;
use crate::market::{price_by_enumeration, price_process, DividendSpec, MarketModel, Ticks};
use crate::mdp::{solve_q, DecisionProblem};

/// Tolerance for solver vs. enumeration agreement.
pub const ORACLE_TOL: f64 = 1e-9;
/// Minimum gap for a strict inequality to count.
pub const STRICT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseStatus {
    Pass,
    Fail,
    /// Reported for contrast; never affects the overall verdict.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub description: String,
    pub status: CaseStatus,
    pub values: Vec<(String, f64)>,
}

impl Case {
    fn new(description: impl Into<String>, passed: bool) -> Self {
        Case {
            description: description.into(),
            status: if passed {
                CaseStatus::Pass
            } else {
                CaseStatus::Fail
            },
            values: Vec::new(),
        }
    }

    fn info(description: impl Into<String>) -> Self {
        Case {
            description: description.into(),
            status: CaseStatus::Info,
            values: Vec::new(),
        }
    }

    fn with(mut self, name: &str, value: f64) -> Self {
        self.values.push((name.to_string(), value));
        self
    }

    pub fn passed(&self) -> bool {
        self.status != CaseStatus::Fail
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub cases: Vec<Case>,
    pub overall: bool,
}

impl Report {
    fn new(suite: &str, cases: Vec<Case>) -> Self {
        let overall = cases.iter().all(Case::passed);
        Report {
            suite: suite.to_string(),
            cases,
            overall,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.passed())
    }

    /// Largest value recorded under `name` across cases.
    pub fn max_value(&self, name: &str) -> Option<f64> {
        self.cases
            .iter()
            .filter_map(|c| c.value(name))
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "suite": self.suite,
            "cases": self.cases.iter().map(|c| {
                let values: serde_json::Map<String, serde_json::Value> = c
                    .values
                    .iter()
                    .map(|(k, v)| (k.clone(), serde_json::json!(v)))
                    .collect();
                serde_json::json!({
                    "description": c.description,
                    "passed": c.passed(),
                    "informational": c.status == CaseStatus::Info,
                    "values": values,
                })
            }).collect::<Vec<_>>(),
            "overall": self.overall,
        })
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let passed = self.cases.iter().filter(|c| c.status == CaseStatus::Pass).count();
        writeln!(
            f,
            "suite {}: {} ({passed}/{} pass)",
            self.suite,
            if self.overall { "PASS" } else { "FAIL" },
            self.cases.len()
        )?;
        for c in &self.cases {
            let tag = match c.status {
                CaseStatus::Pass => "pass",
                CaseStatus::Fail => "FAIL",
                CaseStatus::Info => "info",
            };
            write!(f, "  [{tag}] {}", c.description)?;
            if !c.values.is_empty() {
                let vals: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v:?}")).collect();
                write!(f, "  ({})", vals.join(", "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Bellman,
    Example21,
    Averaging,
    Price,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "bellman" => Ok(Suite::Bellman),
            "example21" => Ok(Suite::Example21),
            "averaging" => Ok(Suite::Averaging),
            "price" => Ok(Suite::Price),
            other => Err(crate::Error::Config(format!("unknown suite `{other}`"))),
        }
    }
}

/// `0.55, 0.60, ..., 0.95`.
pub fn default_q_grid() -> Vec<f64> {
    (11..=19).map(|k| f64::from(k) * 5.0 / 100.0).collect()
}

pub const DEFAULT_TICK_SCALES: [f64; 3] = [1.0, 10.0, 100.0];

/// Run `suite` with the default parameters.
pub fn run_suite(suite: Suite) -> Vec<Report> {
    let grid = default_q_grid();
    let bellman = || check_bellman(8);
    let example = || check_example21(&grid);
    let averaging = || check_no_averaging(&grid, &DEFAULT_TICK_SCALES, 1..=5);
    let price = || check_price(12);
    match suite {
        Suite::All => vec![bellman(), example(), averaging(), price()],
        Suite::Bellman => vec![bellman()],
        Suite::Example21 => vec![example()],
        Suite::Averaging => vec![averaging()],
        Suite::Price => vec![price()],
    }
}

/// `Q(0, b0, a)` for every action, by enumerating all `2^T` move paths under
/// the subjective belief.
///
/// Rewards are additive and the belief transition ignores the action, so the
/// continuation from any stage is the same for every current action and the
/// optimal action at a later stage maximizes that stage's expected reward
/// under the belief held there. Along each path the first action is fixed and
/// later steps take that myopic argmax; path rewards are weighted by the path's
/// subjective probability.
pub fn enumerate_q(problem: &DecisionProblem) -> Vec<f64> {
    let horizon = problem.horizon;
    let n_actions = problem.actions.len();
    if horizon == 0 {
        return Vec::new();
    }
    let mut q = vec![0.0; n_actions];
    for bits in 0u64..(1u64 << horizon) {
        let mut belief = problem.initial_belief;
        let mut probability = 1.0;
        let mut first = vec![0.0; n_actions];
        let mut later = 0.0;
        for t in 0..horizon {
            let mv = if bits >> t & 1 == 0 { Move::Up } else { Move::Down };
            let p_up = belief.predictive();
            let tick = if mv == Move::Up {
                problem.ticks.up
            } else {
                problem.ticks.down
            };
            let discount = problem.discount.powi(t as i32);
            if t == 0 {
                for (slot, a) in first.iter_mut().zip(&problem.actions) {
                    *slot = discount * a.exposure() * tick;
                }
            } else {
                let mean_tick = p_up * problem.ticks.up + (1.0 - p_up) * problem.ticks.down;
                let chosen = problem
                    .actions
                    .iter()
                    .map(|a| a.exposure())
                    .max_by(|x, y| (x * mean_tick).total_cmp(&(y * mean_tick)))
                    .unwrap_or(0.0);
                later += discount * chosen * tick;
            }
            probability *= if mv == Move::Up { p_up } else { 1.0 - p_up };
            belief = belief.update(mv);
        }
        for (qa, fa) in q.iter_mut().zip(&first) {
            *qa += probability * (fa + later);
        }
    }
    q
}

fn bellman_beliefs() -> Vec<(&'static str, Belief)> {
    vec![
        ("Static(0.6)", Belief::Static { q_up: 0.6 }),
        (
            "Mirror(0.6, Up)",
            Belief::Mirror {
                confidence: 0.6,
                favored: Move::Up,
            },
        ),
        (
            "Beta(3, 2)",
            Belief::BetaBernoulli {
                alpha: 3.0,
                beta: 2.0,
            },
        ),
    ]
}

/// Solver vs. path enumeration for each belief kind and every `T <= max_horizon`.
pub fn check_bellman(max_horizon: usize) -> Report {
    let ticks = Ticks {
        up: 10.0,
        down: -10.0,
    };
    let mut cases = Vec::new();
    for discount in [1.0, 0.9] {
        for (name, belief) in bellman_beliefs() {
            for horizon in 0..=max_horizon {
                let problem = DecisionProblem::new(horizon, ticks, belief)
                    .with_actions(vec![
                        Action::NEUTRAL,
                        Action::LONG,
                        Action::SHORT,
                        Action::long(2),
                    ])
                    .with_discount(discount);
                let desc = format!("{name}, T={horizon}, discount={discount}");
                let case = match solve_q(&problem) {
                    Err(e) => Case::new(format!("{desc}: solver error {e}"), false),
                    Ok(table) if horizon == 0 => {
                        let v = table.value(0, &belief).unwrap_or(f64::NAN);
                        Case::new(desc, v == 0.0).with("value", v)
                    }
                    Ok(table) => {
                        let solver = table.q_values(0, &belief).map(<[f64]>::to_vec);
                        let oracle = enumerate_q(&problem);
                        match solver {
                            Err(e) => Case::new(format!("{desc}: {e}"), false),
                            Ok(solver) => {
                                let dev = solver
                                    .iter()
                                    .zip(&oracle)
                                    .map(|(a, b)| (a - b).abs())
                                    .fold(0.0, f64::max);
                                let long = problem.actions.iter().position(|&a| a == Action::LONG);
                                let mut c = Case::new(desc, dev <= ORACLE_TOL)
                                    .with("max_abs_dev", dev);
                                if let Some(i) = long {
                                    c = c.with("q_long_solver", solver[i]).with("q_long_oracle", oracle[i]);
                                }
                                c
                            }
                        }
                    }
                };
                cases.push(case);
            }
        }
    }
    Report::new("bellman", cases)
}

/// For an optimistic static trader: `Q(Long) > Q(Neutral) > Q(Short)` at t=0.
pub fn check_example21(q_grid: &[f64]) -> Report {
    let ticks = Ticks {
        up: 10.0,
        down: -10.0,
    };
    let mut cases = Vec::new();
    for &q in q_grid {
        if !(q > 0.5 && q < 1.0) {
            cases.push(Case::new(format!("q={q} outside (0.5, 1)"), false));
            continue;
        }
        for horizon in 1..=5 {
            let belief = Belief::Static { q_up: q };
            let problem = DecisionProblem::new(horizon, ticks, belief);
            let desc = format!("q={q}, T={horizon}: Q(L) > Q(N) > Q(S)");
            let case = match solve_q(&problem).and_then(|t| {
                Ok((
                    t.q(0, &belief, Action::LONG)?,
                    t.q(0, &belief, Action::NEUTRAL)?,
                    t.q(0, &belief, Action::SHORT)?,
                ))
            }) {
                Ok((l, n, s)) => Case::new(desc, l - n > STRICT_MARGIN && n - s > STRICT_MARGIN)
                    .with("q_long", l)
                    .with("q_neutral", n)
                    .with("q_short", s),
                Err(e) => Case::new(format!("{desc}: {e}"), false),
            };
            cases.push(case);
        }
    }
    Report::new("example21", cases)
}

/// Action set used by the averaging checks: the held long, its doubled stake,
/// flat and short.
pub fn averaging_actions() -> Vec<Action> {
    vec![Action::NEUTRAL, Action::LONG, Action::long(2), Action::SHORT]
}

/// A long position opened under `Mirror(q, Up)` loses one step. After the
/// update, staying flat must beat both holding the long and doubling it.
///
/// `horizons` counts the steps remaining after the losing step.
pub fn check_no_averaging(
    q_grid: &[f64],
    tick_scales: &[f64],
    horizons: impl IntoIterator<Item = usize> + Clone,
) -> Report {
    let mut cases = Vec::new();
    for &q in q_grid {
        for &scale in tick_scales {
            for remaining in horizons.clone() {
                cases.extend(averaging_cases(q, scale, remaining));
            }
        }
    }
    cases.push(bayes_contrast());
    Report::new("averaging", cases)
}

fn averaging_cases(q: f64, scale: f64, remaining: usize) -> Vec<Case> {
    let desc = format!("q={q}, scale={scale}, remaining={remaining}");
    let run = || -> Result<Vec<Case>> {
        let ticks = Ticks::symmetric(10.0 * scale)?;
        let start = Belief::mirror(q, Move::Up)?;
        let problem = DecisionProblem::new(remaining + 1, ticks, start).with_actions(averaging_actions());
        let table = solve_q(&problem)?;

        let entry_long = table.q(0, &start, Action::LONG)?;
        let entry_flat = table.q(0, &start, Action::NEUTRAL)?;
        let entry_best = table.optimal_action(0, &start)?;
        let premise = Case::new(
            format!("{desc}: entering long is optimal"),
            entry_best.direction() == Direction::Long && entry_long - entry_flat > STRICT_MARGIN,
        )
        .with("q_long", entry_long)
        .with("q_neutral", entry_flat);

        let after_loss = start.update(Move::Down);
        let flat = table.q(1, &after_loss, Action::NEUTRAL)?;
        let hold = table.q(1, &after_loss, Action::LONG)?;
        let double = table.q(1, &after_loss, Action::long(2))?;
        let edge = 10.0 * scale * (2.0 * q - 1.0);
        let flip = Case::new(
            format!("{desc}: after a loss Q(N) > Q(L) and Q(N) > Q(2L)"),
            flat - hold > STRICT_MARGIN
                && flat - double > STRICT_MARGIN
                && (flat - hold - edge).abs() <= ORACLE_TOL
                && (flat - double - 2.0 * edge).abs() <= ORACLE_TOL,
        )
        .with("q_neutral", flat)
        .with("q_long", hold)
        .with("q_double", double)
        .with("margin_hold", flat - hold)
        .with("margin_double", flat - double)
        .with("edge", edge);

        let after_win = start.update(Move::Up);
        let win_best = table.optimal_action(1, &after_win)?;
        let winners = Case::new(
            format!("{desc}: after a win the long stays optimal"),
            win_best.direction() == Direction::Long,
        );
        Ok(vec![premise, flip, winners])
    };
    run().unwrap_or_else(|e| vec![Case::new(format!("{desc}: {e}"), false)])
}

fn bayes_contrast() -> Case {
    let ticks = Ticks {
        up: 10.0,
        down: -10.0,
    };
    let prior = Belief::BetaBernoulli {
        alpha: 6.0,
        beta: 4.0,
    };
    let posterior = prior.update(Move::Down);
    let problem = DecisionProblem::new(2, ticks, prior);
    let best = solve_q(&problem).and_then(|t| t.optimal_action(1, &posterior));
    let mut c = Case::info(format!(
        "Bayes does not flip: Beta(6,4) after a loss still prefers {}",
        best.map_or_else(|e| e.to_string(), |a| a.to_string())
    ));
    c = c.with("posterior_mean", posterior.predictive());
    c
}

/// Price-process recursion against enumeration and closed-form cases.
pub fn check_price(max_horizon: usize) -> Report {
    let unit = |p: f64| MarketModel {
        ticks: Ticks {
            up: 1.0,
            down: -1.0,
        },
        p_up: p,
        initial_wealth: 0.0,
        stake: 1.0,
    };
    let identity = || DividendSpec::terminal_only(100.0, |x| x);
    let mut cases = Vec::new();

    for horizon in 0..=max_horizon {
        let desc = format!("martingale p=0.5, T={horizon}: price = 100");
        cases.push(match price_process(&unit(0.5), &identity(), horizon) {
            Ok(v) => Case::new(desc, v == 100.0).with("price", v),
            Err(e) => Case::new(format!("{desc}: {e}"), false),
        });
    }

    let desc = "p=0.6, T=1: price = 100.2";
    cases.push(match price_process(&unit(0.6), &identity(), 1) {
        Ok(v) => Case::new(desc, (v - 100.2).abs() <= 1e-12).with("price", v),
        Err(e) => Case::new(format!("{desc}: {e}"), false),
    });

    for horizon in [0, 3, max_horizon] {
        let zero = DividendSpec::terminal_only(100.0, |_| 0.0);
        let desc = format!("zero payoff, T={horizon}: price = 0");
        cases.push(match price_process(&unit(0.6), &zero, horizon) {
            Ok(v) => Case::new(desc, v == 0.0).with("price", v),
            Err(e) => Case::new(format!("{desc}: {e}"), false),
        });
    }

    for p in [0.3, 0.6] {
        for horizon in 0..=max_horizon {
            let div = DividendSpec::new(
                100.0,
                |t, _, level| 0.97f64.powi(t as i32) * 0.01 * level,
                |x| 0.97f64.powi(12) * x,
            )
            .with_actions(Action::default_set());
            let desc = format!("dividends, p={p}, T={horizon}: backward induction = enumeration");
            let both = price_process(&unit(p), &div, horizon)
                .and_then(|a| Ok((a, price_by_enumeration(&unit(p), &div, horizon)?)));
            cases.push(match both {
                Ok((a, b)) => Case::new(desc, (a - b).abs() <= ORACLE_TOL)
                    .with("backward", a)
                    .with("enumeration", b)
                    .with("abs_dev", (a - b).abs()),
                Err(e) => Case::new(format!("{desc}: {e}"), false),
            });
        }
    }
    Report::new("price", cases)
}
