//! Trading rules: the Bellman-optimal policy and the behaviors it is compared
//! against (cut the loss, average down, buy and hold).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::action::{Action, Direction};
use crate::belief::{Belief, Move};
use crate::error::{Error, Result};
use crate::mdp::{solve_q, DecisionProblem, QTable};

/// Rungs of the doubling ladder 1, 2, 4, ..., 64.
pub const DEFAULT_MAX_RUNGS: u32 = 7;

/// Everything a policy may look at when deciding step `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionContext {
    pub t: usize,
    /// Belief after every move observed so far.
    pub belief: Belief,
    pub last_move: Option<Move>,
    /// Consecutive losing steps of the position held over the last step.
    /// Always 0 when `current_position` is neutral.
    pub losing_streak: u32,
    /// Position held over the last step (`Neutral` before the first decision).
    pub current_position: Action,
    pub wealth: f64,
}

impl DecisionContext {
    pub fn initial(belief: Belief, wealth: f64) -> Self {
        DecisionContext {
            t: 0,
            belief,
            last_move: None,
            losing_streak: 0,
            current_position: Action::NEUTRAL,
            wealth,
        }
    }

    /// Context for step `t + 1` after holding `action` through `mv` for `reward`.
    pub fn advance(&self, action: Action, mv: Move, reward: f64) -> Self {
        let losing_streak = if action.is_neutral() || reward >= 0.0 {
            0
        } else {
            self.losing_streak + 1
        };
        DecisionContext {
            t: self.t + 1,
            belief: self.belief.update(mv),
            last_move: Some(mv),
            losing_streak,
            current_position: action,
            wealth: self.wealth + reward,
        }
    }
}

#[derive(Debug, Clone)]
pub enum PolicySpec {
    /// Argmax of a solved Q-table; solved on demand when `table` is `None`.
    BellmanOptimal { table: Option<Arc<QTable>> },
    /// Long after an up move (and at the start), flat after a down move.
    CutLoss,
    /// Doubles the long stake after every losing step, up to `max_rungs` rungs.
    AverageDown { max_rungs: u32 },
    BuyHold,
    AlwaysLong,
}

impl PolicySpec {
    pub fn bellman() -> Self {
        PolicySpec::BellmanOptimal { table: None }
    }

    pub fn average_down() -> Self {
        PolicySpec::AverageDown {
            max_rungs: DEFAULT_MAX_RUNGS,
        }
    }

    /// The name accepted on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::BellmanOptimal { .. } => "bellman",
            PolicySpec::CutLoss => "cutloss",
            PolicySpec::AverageDown { .. } => "avgdown",
            PolicySpec::BuyHold => "buyhold",
            PolicySpec::AlwaysLong => "alwayslong",
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bellman" => Ok(PolicySpec::bellman()),
            "cutloss" => Ok(PolicySpec::CutLoss),
            "avgdown" => Ok(PolicySpec::average_down()),
            "buyhold" => Ok(PolicySpec::BuyHold),
            "alwayslong" => Ok(PolicySpec::AlwaysLong),
            other => Err(Error::Config(format!(
                "unknown policy `{other}` (expected bellman, cutloss, avgdown, buyhold or alwayslong)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
enum Rule {
    Bellman(Arc<QTable>),
    CutLoss,
    AverageDown { max_rungs: u32 },
    Constant,
}

/// A policy bound to a decision problem. Immutable; `decide` is pure.
#[derive(Debug, Clone)]
pub struct Policy {
    name: &'static str,
    rule: Rule,
    problem: DecisionProblem,
}

/// Bind `spec` to `problem`, solving the Q-table when one is needed and not supplied.
pub fn make_policy(spec: PolicySpec, problem: &DecisionProblem) -> Result<Policy> {
    problem.validate()?;
    let name = spec.name();
    let has = |d: Direction| problem.actions.iter().any(|a| a.direction() == d);
    let require = |d: Direction| {
        if has(d) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "policy `{name}` needs a {} action in the action set",
                d.as_str()
            )))
        }
    };

    let rule = match spec {
        PolicySpec::BellmanOptimal { table } => {
            let table = match table {
                Some(t) => t,
                None => Arc::new(solve_q(problem)?),
            };
            if table.problem() != problem {
                return Err(Error::Config(
                    "Q-table was solved for a different decision problem".into(),
                ));
            }
            Rule::Bellman(table)
        }
        PolicySpec::CutLoss => {
            require(Direction::Long)?;
            require(Direction::Neutral)?;
            Rule::CutLoss
        }
        PolicySpec::AverageDown { max_rungs } => {
            require(Direction::Long)?;
            if !(1..=31).contains(&max_rungs) {
                return Err(Error::Config(format!(
                    "average-down ladder needs 1..=31 rungs, got {max_rungs}"
                )));
            }
            Rule::AverageDown { max_rungs }
        }
        PolicySpec::BuyHold | PolicySpec::AlwaysLong => {
            require(Direction::Long)?;
            Rule::Constant
        }
    };

    Ok(Policy {
        name,
        rule,
        problem: problem.clone(),
    })
}

impl Policy {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn problem(&self) -> &DecisionProblem {
        &self.problem
    }

    /// The Q-table behind a Bellman policy.
    pub fn table(&self) -> Option<&QTable> {
        match &self.rule {
            Rule::Bellman(t) => Some(t),
            _ => None,
        }
    }

    pub fn decide(&self, ctx: &DecisionContext) -> Result<Action> {
        match &self.rule {
            Rule::Bellman(table) => table.optimal_action(ctx.t, &ctx.belief),
            Rule::CutLoss => Ok(match ctx.last_move {
                Some(Move::Down) => Action::NEUTRAL,
                _ => Action::LONG,
            }),
            Rule::AverageDown { max_rungs } => {
                let rung = ctx.losing_streak.min(max_rungs - 1);
                Ok(Action::long(1 << rung))
            }
            Rule::Constant => Ok(Action::LONG),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}
