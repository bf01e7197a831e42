//! Bellman-optimal trading under subjective beliefs.
//!
//! * [`mdp`] solves the finite-horizon recursion over `(time, belief)` states.
//! * [`belief`] holds the trader's subjective view and its update rules.
//! * [`market`] samples and enumerates binomial price paths and values the
//!   price process by backward induction.
//! * [`policy`] implements the Bellman-optimal rule next to cut-loss,
//!   average-down and buy-and-hold.
//! * [`sim`] runs policies against the true market, with common random
//!   numbers for comparisons.
//! * [`verify`] checks the trading claims against exact oracles.
//! * [`config`], [`output`] and [`cli`] back the `otl` binary.
//!
//! ```
//! use otl::{solve_q, Action, Belief, DecisionProblem, Ticks};
//!
//! let problem = DecisionProblem::new(1, Ticks::symmetric(10.0)?, Belief::fixed(0.6)?);
//! let table = solve_q(&problem)?;
//! let b = problem.initial_belief;
//! assert_eq!(table.optimal_action(0, &b)?, Action::LONG);
//! assert!((table.value(0, &b)? - 2.0).abs() < 1e-12);
//! # Ok::<(), otl::Error>(())
//! ```

pub mod action;
pub mod belief;
pub mod cli;
pub mod config;
mod error;
pub mod market;
pub mod mdp;
pub mod output;
pub mod policy;
pub mod sim;
pub mod verify;

pub use action::{Action, Direction};
pub use belief::{Belief, BeliefId, BeliefKind, Move};
pub use error::{Error, Result};
pub use market::{
    enumerate_paths, path_seed, price_process, sample_path, DividendSpec, MarketModel, PricePath,
    Ticks,
};
pub use mdp::{solve_q, solve_q_with_limits, DecisionProblem, QTable, SolveLimits, StageState};
pub use policy::{make_policy, DecisionContext, Policy, PolicySpec};
pub use sim::{compare, run, summarize, ComparisonTable, SimConfig, SimResult, Stats, WealthPath};
