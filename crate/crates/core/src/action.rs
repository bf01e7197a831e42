//! Trading actions: a direction plus a positive stake multiplier.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Long,
    Neutral,
    Short,
}

impl Direction {
    /// +1 for Long, 0 for Neutral, -1 for Short.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Long => 1.0,
            Direction::Neutral => 0.0,
            Direction::Short => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Long => "long",
            Direction::Neutral => "neutral",
            Direction::Short => "short",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Direction::Long => "Long",
            Direction::Neutral => "Neutral",
            Direction::Short => "Short",
        };
        f.write_str(s)
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "long" => Ok(Direction::Long),
            "neutral" => Ok(Direction::Neutral),
            "short" => Ok(Direction::Short),
            other => Err(invalid(format!(
                "unknown action `{other}` (expected long, neutral or short)"
            ))),
        }
    }
}

/// A position the trader can take for one step.
///
/// `Neutral` always carries size 1; the constructors normalize it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    direction: Direction,
    size: u32,
}

impl Action {
    pub const NEUTRAL: Action = Action {
        direction: Direction::Neutral,
        size: 1,
    };
    pub const LONG: Action = Action {
        direction: Direction::Long,
        size: 1,
    };
    pub const SHORT: Action = Action {
        direction: Direction::Short,
        size: 1,
    };

    pub fn new(direction: Direction, size: u32) -> Result<Self> {
        if size == 0 {
            return Err(invalid("action size must be at least 1"));
        }
        let size = if direction == Direction::Neutral { 1 } else { size };
        Ok(Action { direction, size })
    }

    /// Long position of `size` stake units. Panics if `size` is zero.
    pub fn long(size: u32) -> Self {
        Self::new(Direction::Long, size).expect("long size must be positive")
    }

    /// Short position of `size` stake units. Panics if `size` is zero.
    pub fn short(size: u32) -> Self {
        Self::new(Direction::Short, size).expect("short size must be positive")
    }

    pub fn direction(self) -> Direction {
        self.direction
    }

    pub fn size(self) -> u32 {
        self.size
    }

    pub fn is_neutral(self) -> bool {
        self.direction == Direction::Neutral
    }

    /// Signed number of stake units held: `+size`, `0` or `-size`.
    pub fn exposure(self) -> f64 {
        self.direction.sign() * f64::from(self.size)
    }

    /// The default action order, which doubles as the argmax tie-break order:
    /// stay out when indifferent.
    pub fn default_set() -> Vec<Action> {
        vec![Action::NEUTRAL, Action::LONG, Action::SHORT]
    }
}

impl From<Direction> for Action {
    fn from(direction: Direction) -> Self {
        Action { direction, size: 1 }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size == 1 {
            write!(f, "{}", self.direction)
        } else {
            write!(f, "{}({})", self.direction, self.size)
        }
    }
}
