//! Deterministic Monte Carlo runs of policies against the true-probability
//! market.
//!
//! Path `i` is driven by `path_seed(master_seed, i)`, so every path can be
//! reproduced on its own. Paths are evaluated in parallel and folded in path
//! index order, which makes results bit-identical regardless of thread count.
//! [`compare`] plays every policy on the same sampled paths (common random
//! numbers).

use rayon::prelude::*;

use crate::action::Action;
use crate::belief::Move;
use crate::error::{invalid, Error, Result};
use crate::market::{compensated_sum, enumerate_paths, path_seed, sample_path, MarketModel};
use crate::policy::{DecisionContext, Policy};

/// Two-sided 95% and 99% standard normal quantiles.
const Z95: f64 = 1.959_963_984_540_054;
const Z99: f64 = 2.575_829_303_548_900_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub horizon: usize,
    pub master_seed: u64,
}

impl SimConfig {
    pub fn new(n_paths: usize, horizon: usize, master_seed: u64) -> Self {
        SimConfig {
            n_paths,
            horizon,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(invalid("simulation needs at least one path"));
        }
        if self.horizon == 0 {
            return Err(invalid("simulation horizon must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub mv: Move,
    pub action: Action,
    pub reward: f64,
    /// Wealth after this step.
    pub wealth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WealthPath {
    pub path_id: usize,
    pub initial_wealth: f64,
    pub steps: Vec<StepRecord>,
}

impl WealthPath {
    pub fn terminal_wealth(&self) -> f64 {
        self.steps.last().map_or(self.initial_wealth, |s| s.wealth)
    }

    /// Wealth before the first step followed by wealth after every step.
    pub fn wealth_series(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.initial_wealth).chain(self.steps.iter().map(|s| s.wealth))
    }

    /// Largest drop from a running peak.
    pub fn max_drawdown(&self) -> f64 {
        let mut peak = f64::NEG_INFINITY;
        let mut worst = 0.0f64;
        for w in self.wealth_series() {
            peak = peak.max(w);
            worst = worst.max(peak - w);
        }
        worst
    }

    /// Wealth hit zero or below at some step.
    pub fn ruined(&self) -> bool {
        self.wealth_series().any(|w| w <= 0.0)
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        self.steps.iter().map(|s| s.action)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean_terminal: f64,
    /// Sample standard deviation (zero for a single path).
    pub std_terminal: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub mean_max_drawdown: f64,
    pub ruin_fraction: f64,
}

impl Stats {
    pub fn quantiles(&self) -> [f64; 5] {
        [self.q05, self.q25, self.q50, self.q75, self.q95]
    }

    /// Standard error of the mean terminal wealth over `n` paths.
    pub fn std_error(&self, n: usize) -> f64 {
        self.std_terminal / (n as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PathOutcome {
    terminal: f64,
    max_drawdown: f64,
    ruined: bool,
}

impl From<&WealthPath> for PathOutcome {
    fn from(p: &WealthPath) -> Self {
        PathOutcome {
            terminal: p.terminal_wealth(),
            max_drawdown: p.max_drawdown(),
            ruined: p.ruined(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub policy: String,
    pub config: SimConfig,
    pub paths: Vec<WealthPath>,
    pub stats: Stats,
}

/// Play `policy` along a fixed move sequence.
///
/// The context belief is updated with every observed move, including moves
/// observed while flat.
pub fn play_path(
    policy: &Policy,
    model: &MarketModel,
    moves: &[Move],
    path_id: usize,
) -> Result<WealthPath> {
    let problem = policy.problem();
    let mut ctx = DecisionContext::initial(problem.initial_belief, model.initial_wealth);
    let mut steps = Vec::with_capacity(moves.len());
    for (t, &mv) in moves.iter().enumerate() {
        let action = policy.decide(&ctx)?;
        let reward = problem.discount_at(t) * action.exposure() * model.ticks.on(mv);
        ctx = ctx.advance(action, mv, reward);
        steps.push(StepRecord {
            t,
            mv,
            action,
            reward,
            wealth: ctx.wealth,
        });
    }
    Ok(WealthPath {
        path_id,
        initial_wealth: model.initial_wealth,
        steps,
    })
}

fn check_compatible(policy: &Policy, model: &MarketModel, cfg: &SimConfig) -> Result<()> {
    let problem = policy.problem();
    if problem.ticks != model.ticks {
        return Err(Error::Config(format!(
            "policy `{}` was built for ticks ({}, {}) but the market moves ({}, {})",
            policy.name(),
            problem.ticks.up,
            problem.ticks.down,
            model.ticks.up,
            model.ticks.down
        )));
    }
    if policy.table().is_some() && cfg.horizon > problem.horizon {
        return Err(Error::Config(format!(
            "simulation horizon {} exceeds the Q-table horizon {}",
            cfg.horizon, problem.horizon
        )));
    }
    Ok(())
}

/// Run `policy` on `cfg.n_paths` seeded paths.
pub fn run(policy: &Policy, model: &MarketModel, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    model.validate()?;
    check_compatible(policy, model, cfg)?;

    let paths = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(model, cfg.horizon, path_seed(cfg.master_seed, i as u64));
            play_path(policy, model, &path.moves, i)
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = summarize(&paths)?;
    Ok(SimResult {
        policy: policy.name().to_string(),
        config: *cfg,
        paths,
        stats,
    })
}

/// Summary statistics over paths, folded in slice order.
pub fn summarize(paths: &[WealthPath]) -> Result<Stats> {
    let outcomes: Vec<PathOutcome> = paths.iter().map(PathOutcome::from).collect();
    stats_from_outcomes(&outcomes)
}

fn stats_from_outcomes(outcomes: &[PathOutcome]) -> Result<Stats> {
    if outcomes.is_empty() {
        return Err(invalid("cannot summarize an empty set of paths"));
    }
    let n = outcomes.len() as f64;
    let terminals: Vec<f64> = outcomes.iter().map(|o| o.terminal).collect();
    let mean = terminals.iter().sum::<f64>() / n;
    let std = if outcomes.len() > 1 {
        (terminals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = terminals;
    sorted.sort_by(f64::total_cmp);
    Ok(Stats {
        mean_terminal: mean,
        std_terminal: std,
        q05: quantile(&sorted, 0.05),
        q25: quantile(&sorted, 0.25),
        q50: quantile(&sorted, 0.50),
        q75: quantile(&sorted, 0.75),
        q95: quantile(&sorted, 0.95),
        mean_max_drawdown: outcomes.iter().map(|o| o.max_drawdown).sum::<f64>() / n,
        ruin_fraction: outcomes.iter().filter(|o| o.ruined).count() as f64 / n,
    })
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub policy: String,
    pub stats: Stats,
}

/// Paired difference of terminal wealth between two policies on the same paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDiff {
    pub first: String,
    pub second: String,
    /// Mean of `terminal(first) - terminal(second)`.
    pub mean_diff: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub ci99: (f64, f64),
    /// Both policies took the same action at every step of every path.
    pub identical_actions: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub config: SimConfig,
    pub rows: Vec<StatsRow>,
    /// One entry per unordered pair `(i, j)`, `i < j`, in row order.
    pub diffs: Vec<PairwiseDiff>,
}

struct PathComparison {
    outcomes: Vec<PathOutcome>,
    /// Upper-triangle pair flags in `pairs()` order.
    same_actions: Vec<bool>,
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Evaluate all `policies` on the same sampled paths.
pub fn compare(policies: &[Policy], model: &MarketModel, cfg: &SimConfig) -> Result<ComparisonTable> {
    if policies.is_empty() {
        return Err(invalid("comparison needs at least one policy"));
    }
    cfg.validate()?;
    model.validate()?;
    for p in policies {
        check_compatible(p, model, cfg)?;
    }

    let per_path = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let path = sample_path(model, cfg.horizon, path_seed(cfg.master_seed, i as u64));
            let played = policies
                .iter()
                .map(|p| play_path(p, model, &path.moves, i))
                .collect::<Result<Vec<_>>>()?;
            let same_actions = pairs(policies.len())
                .map(|(a, b)| played[a].actions().eq(played[b].actions()))
                .collect();
            Ok(PathComparison {
                outcomes: played.iter().map(PathOutcome::from).collect(),
                same_actions,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = policies
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let outcomes: Vec<PathOutcome> = per_path.iter().map(|c| c.outcomes[k]).collect();
            Ok(StatsRow {
                policy: p.name().to_string(),
                stats: stats_from_outcomes(&outcomes)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = per_path.len() as f64;
    let diffs = pairs(policies.len())
        .enumerate()
        .map(|(pair_idx, (a, b))| {
            let d: Vec<f64> = per_path
                .iter()
                .map(|c| c.outcomes[a].terminal - c.outcomes[b].terminal)
                .collect();
            let mean = d.iter().sum::<f64>() / n;
            let var = if d.len() > 1 {
                d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let se = (var / n).sqrt();
            PairwiseDiff {
                first: policies[a].name().to_string(),
                second: policies[b].name().to_string(),
                mean_diff: mean,
                std_error: se,
                ci95: (mean - Z95 * se, mean + Z95 * se),
                ci99: (mean - Z99 * se, mean + Z99 * se),
                identical_actions: per_path.iter().all(|c| c.same_actions[pair_idx]),
            }
        })
        .collect();

    Ok(ComparisonTable {
        config: *cfg,
        rows,
        diffs,
    })
}

/// Exact expected terminal wealth of `policy`, by enumerating all paths under
/// the true probability. Oracle for the Monte Carlo mean.
pub fn exact_mean_terminal(policy: &Policy, model: &MarketModel, horizon: usize) -> Result<f64> {
    let cfg = SimConfig::new(1, horizon.max(1), 0);
    check_compatible(policy, model, &cfg)?;
    let paths = enumerate_paths(model, horizon)?;
    let weighted = paths
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let played = play_path(policy, model, &path.moves, i)?;
            Ok(path.probability.unwrap_or(0.0) * played.terminal_wealth())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(weighted))
}
