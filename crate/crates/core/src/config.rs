//! Flat `key = value` run configuration.
//!
//! ```text
//! # Example 2.1 desk: $1000 stake, ±$10 moves
//! market.u = 10
//! market.d = -10
//! market.p = 0.45
//! problem.horizon = 20
//! problem.actions = neutral, long, short
//! belief.kind = mirror
//! belief.confidence = 0.6
//! sim.paths = 100000
//! sim.seed = 7
//! ```
//!
//! Unknown and duplicate keys are rejected with the offending line number.
//! Omitted keys take the defaults of [`RunConfig::default`].

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::path::Path;

use crate::action::{Action, Direction};
use crate::belief::{Belief, BeliefKind, Move};
use crate::error::{Error, Result};
use crate::market::{MarketModel, Ticks};
use crate::mdp::DecisionProblem;
use crate::sim::SimConfig;

pub const KEYS: [&str; 14] = [
    "market.u",
    "market.d",
    "market.p",
    "market.initial_wealth",
    "problem.horizon",
    "problem.actions",
    "problem.discount",
    "belief.kind",
    "belief.q0",
    "belief.confidence",
    "belief.alpha",
    "belief.beta",
    "sim.paths",
    "sim.seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub u: f64,
    pub d: f64,
    pub p: f64,
    pub initial_wealth: f64,
    pub horizon: usize,
    pub actions: Vec<Direction>,
    pub discount: f64,
    pub belief_kind: BeliefKind,
    pub q0: f64,
    /// Mirror beliefs start out favoring an up move.
    pub confidence: f64,
    pub alpha: f64,
    pub beta: f64,
    pub paths: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            u: 10.0,
            d: -10.0,
            p: 0.5,
            initial_wealth: 1000.0,
            horizon: 10,
            actions: vec![Direction::Neutral, Direction::Long, Direction::Short],
            discount: 1.0,
            belief_kind: BeliefKind::Static,
            q0: 0.6,
            confidence: 0.6,
            alpha: 3.0,
            beta: 2.0,
            paths: 10_000,
            seed: 42,
        }
    }
}

/// Parse error carrying the 1-based line it occurred on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e.to_string())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}` expects a number, got `{value}`"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(format!("unknown key `{key}`")).into());
            }
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")).into());
            }
            cfg.set(key, value).map_err(err)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "market.u" => self.u = parse_num(key, value)?,
            "market.d" => self.d = parse_num(key, value)?,
            "market.p" => self.p = parse_num(key, value)?,
            "market.initial_wealth" => self.initial_wealth = parse_num(key, value)?,
            "problem.horizon" => self.horizon = parse_num(key, value)?,
            "problem.discount" => self.discount = parse_num(key, value)?,
            "problem.actions" => {
                self.actions = value
                    .split(',')
                    .map(|s| s.parse::<Direction>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "belief.kind" => self.belief_kind = value.parse().map_err(|e: Error| e.to_string())?,
            "belief.q0" => self.q0 = parse_num(key, value)?,
            "belief.confidence" => self.confidence = parse_num(key, value)?,
            "belief.alpha" => self.alpha = parse_num(key, value)?,
            "belief.beta" => self.beta = parse_num(key, value)?,
            "sim.paths" => self.paths = parse_num(key, value)?,
            "sim.seed" => self.seed = parse_num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Re-check every invariant of the market, belief and problem this config describes.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Validation(msg) => Error::Config(msg),
            other => other,
        };
        self.market().map_err(wrap)?;
        self.problem().map_err(wrap)?;
        if self.paths == 0 {
            return Err(Error::Config("`sim.paths` must be at least 1".into()));
        }
        Ok(())
    }

    pub fn market(&self) -> Result<MarketModel> {
        MarketModel::new(Ticks::new(self.u, self.d)?, self.p, self.initial_wealth)
    }

    pub fn belief(&self) -> Result<Belief> {
        match self.belief_kind {
            BeliefKind::Static => Belief::fixed(self.q0),
            BeliefKind::Mirror => Belief::mirror(self.confidence, Move::Up),
            BeliefKind::BetaBernoulli => Belief::beta(self.alpha, self.beta),
        }
    }

    pub fn problem(&self) -> Result<DecisionProblem> {
        let problem = DecisionProblem::new(self.horizon, Ticks::new(self.u, self.d)?, self.belief()?)
            .with_actions(self.actions.iter().map(|&d| Action::from(d)).collect())
            .with_discount(self.discount)
            .with_initial_wealth(self.initial_wealth);
        problem.validate()?;
        Ok(problem)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig::new(self.paths, self.horizon, self.seed)
    }

    /// Every key, in documented order, with full-precision values.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let actions: Vec<&str> = self.actions.iter().map(|d| d.as_str()).collect();
        let _ = writeln!(out, "market.u = {:?}", self.u);
        let _ = writeln!(out, "market.d = {:?}", self.d);
        let _ = writeln!(out, "market.p = {:?}", self.p);
        let _ = writeln!(out, "market.initial_wealth = {:?}", self.initial_wealth);
        let _ = writeln!(out, "problem.horizon = {}", self.horizon);
        let _ = writeln!(out, "problem.actions = {}", actions.join(","));
        let _ = writeln!(out, "problem.discount = {:?}", self.discount);
        let _ = writeln!(out, "belief.kind = {}", self.belief_kind);
        let _ = writeln!(out, "belief.q0 = {:?}", self.q0);
        let _ = writeln!(out, "belief.confidence = {:?}", self.confidence);
        let _ = writeln!(out, "belief.alpha = {:?}", self.alpha);
        let _ = writeln!(out, "belief.beta = {:?}", self.beta);
        let _ = writeln!(out, "sim.paths = {}", self.paths);
        let _ = writeln!(out, "sim.seed = {}", self.seed);
        out
    }
}
