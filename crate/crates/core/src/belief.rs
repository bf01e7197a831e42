//! The trader's subjective distribution over the next price move, and how it
//! is revised after each observed move.
//!
//! Three update rules are provided:
//!
//! * [`Belief::Static`] never learns; the trader keeps acting on the prior.
//! * [`Belief::Mirror`] keeps its confidence but snaps the favored direction
//!   to the last observed move. Under this rule a single loss on a long
//!   position flips the trader's preferred side.
//! * [`Belief::BetaBernoulli`] is the conjugate Bayesian update of the
//!   up-probability. One loss does not necessarily flip it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::action::Action;
use crate::error::{invalid, Result};
use crate::market::Ticks;

/// A single binomial price move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    Up,
    Down,
}

impl Move {
    pub const BOTH: [Move; 2] = [Move::Up, Move::Down];

    pub fn opposite(self) -> Move {
        match self {
            Move::Up => Move::Down,
            Move::Down => Move::Up,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::Up => "Up",
            Move::Down => "Down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BeliefKind {
    Static,
    Mirror,
    BetaBernoulli,
}

impl BeliefKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BeliefKind::Static => "static",
            BeliefKind::Mirror => "mirror",
            BeliefKind::BetaBernoulli => "beta",
        }
    }
}

impl fmt::Display for BeliefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BeliefKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "static" => Ok(BeliefKind::Static),
            "mirror" => Ok(BeliefKind::Mirror),
            "beta" => Ok(BeliefKind::BetaBernoulli),
            other => Err(invalid(format!(
                "unknown belief kind `{other}` (expected static, mirror or beta)"
            ))),
        }
    }
}

/// Subjective belief about the next move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Belief {
    Static { q_up: f64 },
    Mirror { confidence: f64, favored: Move },
    BetaBernoulli { alpha: f64, beta: f64 },
}

impl Belief {
    /// A belief that never changes: `0 < q_up < 1`.
    pub fn fixed(q_up: f64) -> Result<Self> {
        let b = Belief::Static { q_up };
        b.validate()?;
        Ok(b)
    }

    /// `0.5 <= confidence < 1` in the `favored` direction.
    pub fn mirror(confidence: f64, favored: Move) -> Result<Self> {
        let b = Belief::Mirror {
            confidence,
            favored,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        let b = Belief::BetaBernoulli { alpha, beta };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Belief::Static { q_up } => {
                if !(q_up > 0.0 && q_up < 1.0) {
                    return Err(invalid(format!(
                        "static belief needs 0 < q_up < 1, got {q_up}"
                    )));
                }
            }
            Belief::Mirror { confidence, .. } => {
                if !(confidence >= 0.5 && confidence < 1.0) {
                    return Err(invalid(format!(
                        "mirror belief needs 0.5 <= confidence < 1, got {confidence}"
                    )));
                }
            }
            Belief::BetaBernoulli { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return Err(invalid(format!(
                        "beta belief needs finite alpha > 0 and beta > 0, got ({alpha}, {beta})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> BeliefKind {
        match self {
            Belief::Static { .. } => BeliefKind::Static,
            Belief::Mirror { .. } => BeliefKind::Mirror,
            Belief::BetaBernoulli { .. } => BeliefKind::BetaBernoulli,
        }
    }

    /// Subjective probability that the next move is up.
    pub fn predictive(&self) -> f64 {
        match *self {
            Belief::Static { q_up } => q_up,
            Belief::Mirror {
                confidence,
                favored: Move::Up,
            } => confidence,
            Belief::Mirror {
                confidence,
                favored: Move::Down,
            } => 1.0 - confidence,
            Belief::BetaBernoulli { alpha, beta } => alpha / (alpha + beta),
        }
    }

    /// Subjective probability of `mv`.
    pub fn probability_of(&self, mv: Move) -> f64 {
        let up = self.predictive();
        match mv {
            Move::Up => up,
            Move::Down => 1.0 - up,
        }
    }

    /// Belief after observing `observed`.
    pub fn update(&self, observed: Move) -> Belief {
        match *self {
            Belief::Static { .. } => *self,
            Belief::Mirror { confidence, .. } => Belief::Mirror {
                confidence,
                favored: observed,
            },
            Belief::BetaBernoulli { alpha, beta } => match observed {
                Move::Up => Belief::BetaBernoulli {
                    alpha: alpha + 1.0,
                    beta,
                },
                Move::Down => Belief::BetaBernoulli {
                    alpha,
                    beta: beta + 1.0,
                },
            },
        }
    }

    /// Subjective expectation of the undiscounted one-step reward of `action`.
    pub fn expected_step_reward(&self, action: Action, ticks: Ticks) -> f64 {
        let up = self.predictive();
        action.exposure() * (up * ticks.up + (1.0 - up) * ticks.down)
    }

    /// Stage-local identity of this belief relative to the `prior` it was
    /// reached from, or `None` if it is not reachable from `prior`.
    pub fn id_relative_to(&self, prior: &Belief) -> Option<BeliefId> {
        match (*self, *prior) {
            (Belief::Static { q_up }, Belief::Static { q_up: q0 }) if q_up == q0 => {
                Some(BeliefId::Static)
            }
            (
                Belief::Mirror {
                    confidence,
                    favored,
                },
                Belief::Mirror {
                    confidence: c0, ..
                },
            ) if confidence == c0 => Some(BeliefId::Mirror(favored)),
            (
                Belief::BetaBernoulli { alpha, beta },
                Belief::BetaBernoulli {
                    alpha: a0,
                    beta: b0,
                },
            ) => {
                let ups = integer_offset(alpha, a0)?;
                let downs = integer_offset(beta, b0)?;
                Some(BeliefId::Beta { ups, downs })
            }
            _ => None,
        }
    }
}

fn integer_offset(value: f64, base: f64) -> Option<u32> {
    let diff = value - base;
    let rounded = diff.round();
    if rounded < 0.0 || (diff - rounded).abs() > 1e-9 || rounded > f64::from(u32::MAX) {
        return None;
    }
    Some(rounded as u32)
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Belief::Static { q_up } => write!(f, "Static(q={q_up})"),
            Belief::Mirror {
                confidence,
                favored,
            } => write!(f, "Mirror(c={confidence}, favored={favored})"),
            Belief::BetaBernoulli { alpha, beta } => write!(f, "Beta({alpha}, {beta})"),
        }
    }
}

/// Key of a belief state within one stage of a Q-table.
///
/// Beta beliefs are keyed by the number of up and down moves absorbed since
/// the prior, so keys never depend on floating-point accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BeliefId {
    Static,
    Mirror(Move),
    Beta { ups: u32, downs: u32 },
}

impl fmt::Display for BeliefId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeliefId::Static => f.write_str("static"),
            BeliefId::Mirror(Move::Up) => f.write_str("mirror:up"),
            BeliefId::Mirror(Move::Down) => f.write_str("mirror:down"),
            BeliefId::Beta { ups, downs } => write!(f, "beta:u{ups}d{downs}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ticks() -> Ticks {
        Ticks::new(10.0, -10.0).unwrap()
    }

    #[test]
    fn predictive_values() {
        assert_eq!(Belief::fixed(0.6).unwrap().predictive(), 0.6);
        assert!((Belief::beta(3.0, 2.0).unwrap().predictive() - 0.6).abs() < 1e-15);
        assert!((Belief::mirror(0.7, Move::Down).unwrap().predictive() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn updates() {
        let s = Belief::fixed(0.6).unwrap();
        assert_eq!(s.update(Move::Down), s);

        let b = Belief::beta(6.0, 4.0).unwrap().update(Move::Down);
        assert_eq!(
            b,
            Belief::BetaBernoulli {
                alpha: 6.0,
                beta: 5.0
            }
        );
        assert!((b.predictive() - 6.0 / 11.0).abs() < 1e-15);
        assert!((b.predictive() - 0.5455).abs() < 1e-4);

        let m = Belief::mirror(0.6, Move::Up).unwrap().update(Move::Down);
        assert_eq!(m, Belief::mirror(0.6, Move::Down).unwrap());
    }

    #[test]
    fn expected_rewards() {
        let s = Belief::fixed(0.6).unwrap();
        assert!((s.expected_step_reward(Action::LONG, ticks()) - 2.0).abs() < 1e-12);
        assert_eq!(s.expected_step_reward(Action::NEUTRAL, ticks()), 0.0);
        assert!((s.expected_step_reward(Action::short(2), ticks()) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_flips_after_a_loss() {
        let b = Belief::mirror(0.6, Move::Up).unwrap().update(Move::Down);
        assert!(b.expected_step_reward(Action::LONG, ticks()) < 0.0);
        assert!(b.expected_step_reward(Action::SHORT, ticks()) > 0.0);
    }

    #[test]
    fn bayes_does_not_flip_after_one_loss() {
        let b = Belief::beta(6.0, 4.0).unwrap().update(Move::Down);
        assert!(b.expected_step_reward(Action::LONG, ticks()) > 0.0);
    }

    #[test]
    fn invalid_beliefs_rejected() {
        assert!(Belief::fixed(0.0).is_err());
        assert!(Belief::fixed(1.0).is_err());
        assert!(Belief::fixed(f64::NAN).is_err());
        assert!(Belief::mirror(0.49, Move::Up).is_err());
        assert!(Belief::mirror(1.0, Move::Up).is_err());
        assert!(Belief::mirror(0.5, Move::Up).is_ok());
        assert!(Belief::beta(0.0, 1.0).is_err());
        assert!(Belief::beta(1.0, -2.0).is_err());
    }

    #[test]
    fn ids_relative_to_prior() {
        let prior = Belief::beta(0.3, 0.7).unwrap();
        let b = prior
            .update(Move::Up)
            .update(Move::Down)
            .update(Move::Up);
        assert_eq!(
            b.id_relative_to(&prior),
            Some(BeliefId::Beta { ups: 2, downs: 1 })
        );
        assert_eq!(
            Belief::fixed(0.4).unwrap().id_relative_to(&Belief::fixed(0.6).unwrap()),
            None
        );
        assert_eq!(
            Belief::beta(0.5, 0.7).unwrap().id_relative_to(&prior),
            None
        );
        assert_eq!(BeliefId::Beta { ups: 2, downs: 1 }.to_string(), "beta:u2d1");
    }
}
