//! Exogenous binomial market: per-move money ticks under a true up-probability,
//! seeded path sampling, exhaustive path enumeration and the backward-induction
//! price process.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::Action;
use crate::belief::Move;
use crate::error::{invalid, Error, Result};

/// Default bound on the horizon accepted by [`enumerate_paths`].
pub const DEFAULT_ENUM_HORIZON: usize = 20;

/// Environment variable that overrides [`DEFAULT_ENUM_HORIZON`].
pub const ENUM_HORIZON_ENV: &str = "OTL_MAX_ENUM_HORIZON";

/// Money gained per stake unit on an up move (`up > 0`) and on a down move (`down < 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ticks {
    pub up: f64,
    pub down: f64,
}

impl Ticks {
    pub fn new(up: f64, down: f64) -> Result<Self> {
        let t = Ticks { up, down };
        t.validate()?;
        Ok(t)
    }

    /// `(+size, -size)`.
    pub fn symmetric(size: f64) -> Result<Self> {
        Self::new(size, -size)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.up > 0.0 && self.down < 0.0 && self.up.is_finite() && self.down.is_finite()) {
            return Err(invalid(format!(
                "ticks need u > 0 > d, got u={}, d={}",
                self.up, self.down
            )));
        }
        Ok(())
    }

    pub fn on(&self, mv: Move) -> f64 {
        match mv {
            Move::Up => self.up,
            Move::Down => self.down,
        }
    }

    pub fn scaled(&self, factor: f64) -> Ticks {
        Ticks {
            up: self.up * factor,
            down: self.down * factor,
        }
    }
}

/// Binomial market dynamics.
///
/// Ticks are absolute money amounts per stake unit: the trader invests a
/// fixed stake every step and a down move changes wealth by `ticks.down`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketModel {
    pub ticks: Ticks,
    /// True probability of an up move.
    pub p_up: f64,
    pub initial_wealth: f64,
    /// Notional stake behind one size unit. Informational only.
    pub stake: f64,
}

impl Default for MarketModel {
    /// $1000 stake, moves of exactly ±1% (±$10), fair coin.
    fn default() -> Self {
        MarketModel {
            ticks: Ticks {
                up: 10.0,
                down: -10.0,
            },
            p_up: 0.5,
            initial_wealth: 1000.0,
            stake: 1000.0,
        }
    }
}

impl MarketModel {
    pub fn new(ticks: Ticks, p_up: f64, initial_wealth: f64) -> Result<Self> {
        let m = MarketModel {
            ticks,
            p_up,
            initial_wealth,
            ..Default::default()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.ticks.validate()?;
        if !(0.0..=1.0).contains(&self.p_up) {
            return Err(invalid(format!(
                "market p must lie in [0, 1], got {}",
                self.p_up
            )));
        }
        if !self.initial_wealth.is_finite() {
            return Err(invalid("initial wealth must be finite"));
        }
        Ok(())
    }

    pub fn probability_of(&self, mv: Move) -> f64 {
        match mv {
            Move::Up => self.p_up,
            Move::Down => 1.0 - self.p_up,
        }
    }
}

/// A sequence of moves; enumerated paths also carry their probability.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    pub moves: Vec<Move>,
    pub probability: Option<f64>,
}

/// Seed of path `index` under `master_seed`.
///
/// SplitMix64 finalizer applied to `master_seed + (index + 1) * 0x9E3779B97F4A7C15`
/// (wrapping). Each path is reproducible on its own, independent of how many
/// other paths are drawn or in which order.
pub fn path_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `horizon` independent moves, each up with probability `model.p_up`.
pub fn sample_path(model: &MarketModel, horizon: usize, path_seed: u64) -> PricePath {
    let mut rng = ChaCha8Rng::seed_from_u64(path_seed);
    let moves = (0..horizon)
        .map(|_| {
            if rng.random_bool(model.p_up) {
                Move::Up
            } else {
                Move::Down
            }
        })
        .collect();
    PricePath {
        moves,
        probability: None,
    }
}

/// Enumeration bound, honoring `OTL_MAX_ENUM_HORIZON` when it parses.
pub fn enumeration_bound() -> usize {
    std::env::var(ENUM_HORIZON_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ENUM_HORIZON)
}

/// All `2^horizon` paths with their probabilities under `model.p_up`.
pub fn enumerate_paths(model: &MarketModel, horizon: usize) -> Result<Vec<PricePath>> {
    enumerate_paths_bounded(model, horizon, enumeration_bound())
}

pub fn enumerate_paths_bounded(
    model: &MarketModel,
    horizon: usize,
    bound: usize,
) -> Result<Vec<PricePath>> {
    check_enum_bound(horizon, bound)?;
    let count = 1usize << horizon;
    let paths = (0..count)
        .map(|bits| {
            // bit t set means the move at step t is down; bits = 0 is the all-up path
            let moves: Vec<Move> = (0..horizon)
                .map(|t| if bits >> t & 1 == 0 { Move::Up } else { Move::Down })
                .collect();
            let probability = moves.iter().map(|&m| model.probability_of(m)).product();
            PricePath {
                moves,
                probability: Some(probability),
            }
        })
        .collect();
    Ok(paths)
}

/// Neumaier-compensated sum; keeps totals over `2^20` path weights within 1e-12.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn check_enum_bound(horizon: usize, bound: usize) -> Result<()> {
    if horizon > bound || horizon >= usize::BITS as usize {
        return Err(Error::ResourceLimit(format!(
            "horizon {horizon} exceeds the enumeration bound {bound} (set {ENUM_HORIZON_ENV} to raise it)"
        )));
    }
    Ok(())
}

type DividendFn = dyn Fn(usize, Action, f64) -> f64 + Send + Sync;
type PayoffFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Rewards paid along a price path: a per-step dividend depending on
/// `(t, action, level)` and a terminal payoff of the final level.
///
/// The price level starts at `initial_level` and moves by the market ticks.
pub struct DividendSpec {
    pub initial_level: f64,
    /// Actions maximized over at every stage.
    pub actions: Vec<Action>,
    dividend: Box<DividendFn>,
    terminal: Box<PayoffFn>,
}

impl DividendSpec {
    pub fn new(
        initial_level: f64,
        dividend: impl Fn(usize, Action, f64) -> f64 + Send + Sync + 'static,
        terminal: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DividendSpec {
            initial_level,
            actions: vec![Action::NEUTRAL],
            dividend: Box::new(dividend),
            terminal: Box::new(terminal),
        }
    }

    /// No dividends, only a terminal payoff.
    pub fn terminal_only(
        initial_level: f64,
        terminal: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(initial_level, |_, _, _| 0.0, terminal)
    }

    pub fn with_actions(mut self, actions: Vec<Action>) -> Self {
        self.actions = actions;
        self
    }

    pub fn dividend(&self, t: usize, action: Action, level: f64) -> f64 {
        (self.dividend)(t, action, level)
    }

    pub fn terminal_payoff(&self, level: f64) -> f64 {
        (self.terminal)(level)
    }
}

impl std::fmt::Debug for DividendSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DividendSpec")
            .field("initial_level", &self.initial_level)
            .field("actions", &self.actions)
            .finish_non_exhaustive()
    }
}

fn level_at(div: &DividendSpec, ticks: Ticks, ups: usize, downs: usize) -> f64 {
    div.initial_level + ups as f64 * ticks.up + downs as f64 * ticks.down
}

/// Price at time 0 by backward induction on the recombining level lattice:
/// `p_T(x) = payoff(x)`,
/// `p_t(x) = max_a E^p[dividend(t+1, a, X') + p_{t+1}(X')]`.
pub fn price_process(model: &MarketModel, div: &DividendSpec, horizon: usize) -> Result<f64> {
    model.validate()?;
    if div.actions.is_empty() {
        return Err(invalid("dividend spec needs at least one action"));
    }
    check_enum_bound(horizon, enumeration_bound())?;

    let ticks = model.ticks;
    let p = model.p_up;
    // values[k] = price at the node with k up moves
    let mut values: Vec<f64> = (0..=horizon)
        .map(|k| div.terminal_payoff(level_at(div, ticks, k, horizon - k)))
        .collect();

    for t in (0..horizon).rev() {
        let up_level = |k: usize| level_at(div, ticks, k + 1, t - k);
        let down_level = |k: usize| level_at(div, ticks, k, t + 1 - k);
        let next: Vec<f64> = (0..=t)
            .map(|k| {
                let (lu, ld) = (up_level(k), down_level(k));
                div.actions
                    .iter()
                    .map(|&a| {
                        p * (div.dividend(t + 1, a, lu) + values[k + 1])
                            + (1.0 - p) * (div.dividend(t + 1, a, ld) + values[k])
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        values = next;
    }
    Ok(values[0])
}

/// Expected total reward by enumerating every path, holding the first action
/// of `div.actions` throughout. Equals [`price_process`] whenever dividends do
/// not depend on the action.
pub fn price_by_enumeration(
    model: &MarketModel,
    div: &DividendSpec,
    horizon: usize,
) -> Result<f64> {
    let action = *div
        .actions
        .first()
        .ok_or_else(|| invalid("dividend spec needs at least one action"))?;
    let paths = enumerate_paths(model, horizon)?;
    let total = compensated_sum(paths.iter().map(|path| {
            let mut level = div.initial_level;
            let mut reward = 0.0;
            for (t, &mv) in path.moves.iter().enumerate() {
                level += model.ticks.on(mv);
                reward += div.dividend(t + 1, action, level);
            }
            reward += div.terminal_payoff(level);
            path.probability.unwrap_or(0.0) * reward
        }));
    Ok(total)
}
