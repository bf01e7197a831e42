//! Finite-horizon Bellman recursion under the trader's subjective belief.
//!
//! The decision state is `(t, belief)`. Wealth is not part of it: whether to
//! be in or out of the market is assumed independent of the current wealth
//! level, and rewards are additive per step, so wealth only matters for
//! reporting.
//!
//! For `t < T`,
//!
//! ```text
//! Q(t, b, a) = E_b[ r_t(a, X) + V(t + 1, update(b, X)) ]
//! V(t, b)    = max_a Q(t, b, a),        V(T, b) = 0
//! r_t(a, X)  = discount^t * exposure(a) * tick(X)
//! ```
//!
//! where `X` is up with probability `b.predictive()`. The belief transition
//! does not depend on the action because the market is exogenous.

use std::collections::HashMap;
use std::fmt;

use crate::action::Action;
use crate::belief::{Belief, BeliefId, Move};
use crate::error::{invalid, Error, Result};
use crate::market::Ticks;

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    /// Number of decision steps `T`.
    pub horizon: usize,
    pub ticks: Ticks,
    /// Candidate actions; their order is the argmax tie-break order.
    pub actions: Vec<Action>,
    pub initial_belief: Belief,
    pub initial_wealth: f64,
    /// Per-step multiplier in `(0, 1]`, applied as `discount^t` to the step reward.
    pub discount: f64,
}

impl DecisionProblem {
    /// Problem with the default action order `(Neutral, Long, Short)`,
    /// initial wealth 1000 and no discounting.
    pub fn new(horizon: usize, ticks: Ticks, initial_belief: Belief) -> Self {
        DecisionProblem {
            horizon,
            ticks,
            actions: Action::default_set(),
            initial_belief,
            initial_wealth: 1000.0,
            discount: 1.0,
        }
    }

    pub fn with_actions(mut self, actions: Vec<Action>) -> Self {
        self.actions = actions;
        self
    }

    pub fn with_discount(mut self, discount: f64) -> Self {
        self.discount = discount;
        self
    }

    pub fn with_initial_wealth(mut self, wealth: f64) -> Self {
        self.initial_wealth = wealth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.ticks.validate()?;
        self.initial_belief.validate()?;
        if self.actions.is_empty() {
            return Err(invalid("action set is empty"));
        }
        for (i, a) in self.actions.iter().enumerate() {
            if self.actions[..i].contains(a) {
                return Err(invalid(format!("duplicate action {a} in action set")));
            }
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(invalid(format!(
                "discount must lie in (0, 1], got {}",
                self.discount
            )));
        }
        if !self.initial_wealth.is_finite() {
            return Err(invalid("initial wealth must be finite"));
        }
        Ok(())
    }

    /// Reward of holding `action` over step `t` when the market moves `mv`.
    pub fn step_reward(&self, t: usize, action: Action, mv: Move) -> f64 {
        self.discount_at(t) * action.exposure() * self.ticks.on(mv)
    }

    pub fn discount_at(&self, t: usize) -> f64 {
        if self.discount == 1.0 {
            1.0
        } else {
            self.discount.powi(t as i32)
        }
    }
}

/// A decision time and the belief held at it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageState {
    pub t: usize,
    pub belief: Belief,
}

/// Bounds on the size of problems [`solve_q_with_limits`] accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_horizon: usize,
    /// Total number of `(t, belief)` states across all stages.
    pub max_states: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_horizon: 100_000,
            max_states: 5_000_000,
        }
    }
}

#[derive(Debug, Clone)]
struct Stage {
    ids: Vec<BeliefId>,
    beliefs: Vec<Belief>,
    index: HashMap<BeliefId, usize>,
    /// Row-major `beliefs.len() x actions.len()`; empty at the terminal stage.
    q: Vec<f64>,
    value: Vec<f64>,
    best: Vec<usize>,
}

/// Solved Q-values for every reachable `(t, belief, action)`.
///
/// Immutable once built; share it behind an `Arc` to query from many threads.
#[derive(Debug, Clone)]
pub struct QTable {
    problem: DecisionProblem,
    stages: Vec<Stage>,
}

/// One `(t, belief, action)` entry of a [`QTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QEntry {
    pub t: usize,
    pub belief_id: BeliefId,
    pub belief: Belief,
    pub action: Action,
    pub q_value: f64,
    pub is_optimal: bool,
}

/// Solve with [`SolveLimits::default`].
pub fn solve_q(problem: &DecisionProblem) -> Result<QTable> {
    solve_q_with_limits(problem, SolveLimits::default())
}

pub fn solve_q_with_limits(problem: &DecisionProblem, limits: SolveLimits) -> Result<QTable> {
    problem.validate()?;
    if problem.horizon > limits.max_horizon {
        return Err(Error::ResourceLimit(format!(
            "horizon {} exceeds the solver bound {}",
            problem.horizon, limits.max_horizon
        )));
    }

    let mut stages = reachable_stages(problem, limits)?;
    let n_actions = problem.actions.len();

    for t in (0..problem.horizon).rev() {
        let (head, tail) = stages.split_at_mut(t + 1);
        let stage = &mut head[t];
        let next = &tail[0];
        let discount = problem.discount_at(t);
        let n = stage.beliefs.len();
        stage.q = Vec::with_capacity(n * n_actions);
        stage.value = Vec::with_capacity(n);
        stage.best = Vec::with_capacity(n);

        for belief in &stage.beliefs {
            let p_up = belief.predictive();
            let v_up = next.value[successor(next, problem, belief, Move::Up)];
            let v_down = next.value[successor(next, problem, belief, Move::Down)];

            let row = stage.q.len();
            let mut best = 0;
            for (i, action) in problem.actions.iter().enumerate() {
                let r_up = discount * action.exposure() * problem.ticks.up;
                let r_down = discount * action.exposure() * problem.ticks.down;
                let q = p_up * (r_up + v_up) + (1.0 - p_up) * (r_down + v_down);
                stage.q.push(q);
                // strict comparison keeps the earliest action among ties
                if q > stage.q[row + best] {
                    best = i;
                }
            }
            stage.value.push(stage.q[row + best]);
            stage.best.push(best);
        }
    }

    Ok(QTable {
        problem: problem.clone(),
        stages,
    })
}

fn successor(next: &Stage, problem: &DecisionProblem, belief: &Belief, mv: Move) -> usize {
    let id = belief
        .update(mv)
        .id_relative_to(&problem.initial_belief)
        .expect("successor of a reachable belief is reachable");
    next.index[&id]
}

/// Forward closure of the initial belief under `update`, one layer per stage.
fn reachable_stages(problem: &DecisionProblem, limits: SolveLimits) -> Result<Vec<Stage>> {
    let prior = problem.initial_belief;
    let mut stages = Vec::with_capacity(problem.horizon + 1);
    let mut layer = vec![(
        prior
            .id_relative_to(&prior)
            .expect("a belief is reachable from itself"),
        prior,
    )];
    let mut total = 0usize;

    for t in 0..=problem.horizon {
        total += layer.len();
        if total > limits.max_states {
            return Err(Error::ResourceLimit(format!(
                "belief lattice exceeds {} states by stage {t}",
                limits.max_states
            )));
        }
        let next_layer = if t < problem.horizon {
            let mut seen = HashMap::new();
            let mut out = Vec::new();
            for (_, b) in &layer {
                for mv in Move::BOTH {
                    let nb = b.update(mv);
                    let id = nb
                        .id_relative_to(&prior)
                        .expect("successor of a reachable belief is reachable");
                    if seen.insert(id, ()).is_none() {
                        out.push((id, nb));
                    }
                }
            }
            out.sort_by_key(|(id, _)| *id);
            out
        } else {
            Vec::new()
        };

        let (ids, beliefs): (Vec<_>, Vec<_>) = layer.into_iter().unzip();
        let index = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let n = beliefs.len();
        stages.push(Stage {
            ids,
            beliefs,
            index,
            q: Vec::new(),
            value: vec![0.0; n],
            best: Vec::new(),
        });
        layer = next_layer;
    }
    Ok(stages)
}

impl QTable {
    pub fn problem(&self) -> &DecisionProblem {
        &self.problem
    }

    pub fn horizon(&self) -> usize {
        self.problem.horizon
    }

    pub fn actions(&self) -> &[Action] {
        &self.problem.actions
    }

    /// Reachable stage states at time `t` (empty if `t > T`).
    pub fn states(&self, t: usize) -> Vec<StageState> {
        self.stages
            .get(t)
            .map(|s| {
                s.beliefs
                    .iter()
                    .map(|&belief| StageState { t, belief })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Total number of reachable `(t, belief)` states, terminal stage included.
    pub fn state_count(&self) -> usize {
        self.stages.iter().map(|s| s.beliefs.len()).sum()
    }

    fn locate(&self, t: usize, belief: &Belief) -> Result<(&Stage, usize)> {
        let stage = self.stages.get(t).ok_or_else(|| {
            Error::Lookup(format!("t={t} is beyond the horizon {}", self.horizon()))
        })?;
        let idx = belief
            .id_relative_to(&self.problem.initial_belief)
            .and_then(|id| stage.index.get(&id).copied())
            .ok_or_else(|| Error::Lookup(format!("{belief} is not reachable at t={t}")))?;
        Ok((stage, idx))
    }

    fn decision_row(&self, t: usize, belief: &Belief) -> Result<(&Stage, usize)> {
        if t >= self.horizon() {
            return Err(Error::Lookup(format!(
                "no decision at t={t}: the horizon is {}",
                self.horizon()
            )));
        }
        self.locate(t, belief)
    }

    /// Q-values at `(t, belief)` in action-set order.
    pub fn q_values(&self, t: usize, belief: &Belief) -> Result<&[f64]> {
        let (stage, idx) = self.decision_row(t, belief)?;
        let n = self.problem.actions.len();
        Ok(&stage.q[idx * n..(idx + 1) * n])
    }

    pub fn q(&self, t: usize, belief: &Belief, action: Action) -> Result<f64> {
        let i = self
            .problem
            .actions
            .iter()
            .position(|&a| a == action)
            .ok_or_else(|| Error::Lookup(format!("{action} is not in the action set")))?;
        Ok(self.q_values(t, belief)?[i])
    }

    /// The argmax action; ties go to the earliest action in the action set.
    pub fn optimal_action(&self, t: usize, belief: &Belief) -> Result<Action> {
        let (stage, idx) = self.decision_row(t, belief)?;
        Ok(self.problem.actions[stage.best[idx]])
    }

    /// `V(t, belief)`; zero at the terminal stage.
    pub fn value(&self, t: usize, belief: &Belief) -> Result<f64> {
        let (stage, idx) = self.locate(t, belief)?;
        Ok(stage.value[idx])
    }

    /// Every entry in `(t, belief id, action-set order)`.
    pub fn entries(&self) -> impl Iterator<Item = QEntry> + '_ {
        let actions = &self.problem.actions;
        self.stages
            .iter()
            .enumerate()
            .take(self.horizon())
            .flat_map(move |(t, stage)| {
                stage.ids.iter().enumerate().flat_map(move |(b, &id)| {
                    actions.iter().enumerate().map(move |(i, &action)| QEntry {
                        t,
                        belief_id: id,
                        belief: stage.beliefs[b],
                        action,
                        q_value: stage.q[b * actions.len() + i],
                        is_optimal: stage.best[b] == i,
                    })
                })
            })
    }

    /// Optimal action per reachable decision state, in stage order.
    pub fn policy(&self) -> Vec<(usize, BeliefId, Action)> {
        self.stages
            .iter()
            .enumerate()
            .take(self.horizon())
            .flat_map(|(t, stage)| {
                stage
                    .ids
                    .iter()
                    .zip(&stage.best)
                    .map(move |(&id, &best)| (t, id, self.problem.actions[best]))
            })
            .collect()
    }
}

impl fmt::Display for QTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.entries() {
            writeln!(
                f,
                "t={}, {}, {:?}  [{}]{}",
                e.t,
                e.action,
                e.q_value,
                e.belief_id,
                if e.is_optimal { " *" } else { "" }
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ticks() -> Ticks {
        Ticks::symmetric(10.0).unwrap()
    }

    fn q0(table: &QTable) -> Vec<f64> {
        table
            .q_values(0, &table.problem().initial_belief)
            .unwrap()
            .to_vec()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    // Action order in these tests is (Long, Neutral, Short).
    fn lns() -> Vec<Action> {
        vec![Action::LONG, Action::NEUTRAL, Action::SHORT]
    }

    #[test]
    fn one_step_static() {
        let p = DecisionProblem::new(1, ticks(), Belief::fixed(0.6).unwrap()).with_actions(lns());
        let table = solve_q(&p).unwrap();
        assert!(close(&q0(&table), &[2.0, 0.0, -2.0], 1e-12), "{:?}", q0(&table));
        assert_eq!(table.optimal_action(0, &p.initial_belief).unwrap(), Action::LONG);
        assert!((table.value(0, &p.initial_belief).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn three_steps_static() {
        // 8-path enumeration: V1 = 4, so Q0 = (2 + 4, 0 + 4, -2 + 4).
        let p = DecisionProblem::new(3, ticks(), Belief::fixed(0.6).unwrap()).with_actions(lns());
        let table = solve_q(&p).unwrap();
        assert!(close(&q0(&table), &[6.0, 4.0, 2.0], 1e-12), "{:?}", q0(&table));
    }

    #[test]
    fn two_steps_mirror() {
        // Either successor belief values the last step at 2, so Q0 = (2 + 2, 0 + 2, -2 + 2).
        let b = Belief::mirror(0.6, Move::Up).unwrap();
        let p = DecisionProblem::new(2, ticks(), b).with_actions(lns());
        let table = solve_q(&p).unwrap();
        assert!(close(&q0(&table), &[4.0, 2.0, 0.0], 1e-12), "{:?}", q0(&table));
    }

    #[test]
    fn fair_coin_is_symmetric() {
        for t in 1..6 {
            let p = DecisionProblem::new(t, ticks(), Belief::fixed(0.5).unwrap());
            let table = solve_q(&p).unwrap();
            let b = p.initial_belief;
            assert_eq!(
                table.q(0, &b, Action::LONG).unwrap(),
                table.q(0, &b, Action::SHORT).unwrap()
            );
            assert_eq!(table.value(0, &b).unwrap(), 0.0);
            // three-way tie goes to the first action
            assert_eq!(table.optimal_action(0, &b).unwrap(), Action::NEUTRAL);
        }
    }

    #[test]
    fn short_when_pessimistic() {
        let p = DecisionProblem::new(1, ticks(), Belief::fixed(0.3).unwrap());
        let table = solve_q(&p).unwrap();
        assert_eq!(table.optimal_action(0, &p.initial_belief).unwrap(), Action::SHORT);
    }

    #[test]
    fn terminal_value_is_zero() {
        let b = Belief::beta(3.0, 2.0).unwrap();
        let p = DecisionProblem::new(3, ticks(), b);
        let table = solve_q(&p).unwrap();
        for s in table.states(3) {
            assert_eq!(table.value(3, &s.belief).unwrap(), 0.0);
        }
        assert!(matches!(
            table.optimal_action(3, &table.states(3)[0].belief),
            Err(Error::Lookup(_))
        ));
    }

    #[test]
    fn zero_horizon() {
        let p = DecisionProblem::new(0, ticks(), Belief::fixed(0.6).unwrap());
        let table = solve_q(&p).unwrap();
        assert_eq!(table.value(0, &p.initial_belief).unwrap(), 0.0);
        assert_eq!(table.entries().count(), 0);
    }

    #[test]
    fn lattice_sizes() {
        let t = 6;
        let count = |b: Belief, stage: usize| {
            solve_q(&DecisionProblem::new(t, ticks(), b))
                .unwrap()
                .states(stage)
                .len()
        };
        for stage in 0..=t {
            assert_eq!(count(Belief::fixed(0.6).unwrap(), stage), 1);
            assert_eq!(
                count(Belief::mirror(0.6, Move::Up).unwrap(), stage),
                if stage == 0 { 1 } else { 2 }
            );
            assert_eq!(count(Belief::beta(3.0, 2.0).unwrap(), stage), stage + 1);
        }
    }

    #[test]
    fn unreachable_belief_is_a_lookup_error() {
        let p = DecisionProblem::new(2, ticks(), Belief::beta(3.0, 2.0).unwrap());
        let table = solve_q(&p).unwrap();
        // two ups are not reachable after one update
        let b = Belief::beta(5.0, 2.0).unwrap();
        assert!(matches!(table.value(1, &b), Err(Error::Lookup(_))));
        assert!(matches!(
            table.value(1, &Belief::fixed(0.6).unwrap()),
            Err(Error::Lookup(_))
        ));
        assert!(matches!(
            table.value(9, &p.initial_belief),
            Err(Error::Lookup(_))
        ));
    }

    #[test]
    fn discount_scales_later_rewards() {
        let p = DecisionProblem::new(2, ticks(), Belief::fixed(0.6).unwrap())
            .with_actions(lns())
            .with_discount(0.5);
        let table = solve_q(&p).unwrap();
        // step 0 pays 2, step 1 pays 0.5 * 2
        assert!(close(&q0(&table), &[3.0, 1.0, -1.0], 1e-12));
    }

    #[test]
    fn invalid_problems_rejected() {
        let b = Belief::fixed(0.6).unwrap();
        let empty = DecisionProblem::new(1, ticks(), b).with_actions(vec![]);
        assert!(matches!(solve_q(&empty), Err(Error::Validation(_))));
        let dup = DecisionProblem::new(1, ticks(), b)
            .with_actions(vec![Action::LONG, Action::LONG]);
        assert!(matches!(solve_q(&dup), Err(Error::Validation(_))));
        let bad_discount = DecisionProblem::new(1, ticks(), b).with_discount(0.0);
        assert!(matches!(solve_q(&bad_discount), Err(Error::Validation(_))));
        let bad_ticks = DecisionProblem::new(1, Ticks { up: 1.0, down: 1.0 }, b);
        assert!(matches!(solve_q(&bad_ticks), Err(Error::Validation(_))));
    }

    #[test]
    fn limits_enforced() {
        let b = Belief::beta(1.0, 1.0).unwrap();
        let p = DecisionProblem::new(50, ticks(), b);
        let tight = SolveLimits {
            max_horizon: 40,
            max_states: 1_000_000,
        };
        assert!(matches!(
            solve_q_with_limits(&p, tight),
            Err(Error::ResourceLimit(_))
        ));
        let small = SolveLimits {
            max_horizon: 100,
            max_states: 100,
        };
        assert!(matches!(
            solve_q_with_limits(&p, small),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn entries_and_policy_listing() {
        let p = DecisionProblem::new(2, ticks(), Belief::mirror(0.6, Move::Up).unwrap());
        let table = solve_q(&p).unwrap();
        // stage 0 has one belief, stage 1 two; three actions each
        assert_eq!(table.entries().count(), 9);
        let policy = table.policy();
        assert_eq!(
            policy,
            vec![
                (0, BeliefId::Mirror(Move::Up), Action::LONG),
                (1, BeliefId::Mirror(Move::Up), Action::LONG),
                (1, BeliefId::Mirror(Move::Down), Action::SHORT),
            ]
        );
        assert_eq!(table.entries().filter(|e| e.is_optimal).count(), 3);
    }
}
