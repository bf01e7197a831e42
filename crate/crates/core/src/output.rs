//! CSV emission. Numbers are written with Rust's shortest round-trip
//! formatting, so every value parses back to the same `f64`.

use std::io::{self, Write};

use crate::mdp::QTable;
use crate::sim::{ComparisonTable, SimResult, Stats};

pub const PATHS_HEADER: &str = "path_id,t,move,action,size,reward,wealth";
pub const STATS_HEADER: &str =
    "policy,mean_terminal,std_terminal,q05,q25,q50,q75,q95,mean_max_drawdown,ruin_fraction";
pub const QTABLE_HEADER: &str = "t,belief_id,action,q_value,is_optimal";
pub const DIFFS_HEADER: &str =
    "first,second,mean_diff,std_error,ci95_lo,ci95_hi,ci99_lo,ci99_hi,identical_actions";

/// Full-precision decimal rendering of a float.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_qtable_csv(table: &QTable, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{QTABLE_HEADER}")?;
    for e in table.entries() {
        writeln!(
            w,
            "{},{},{},{},{}",
            e.t,
            e.belief_id,
            e.action,
            num(e.q_value),
            e.is_optimal
        )?;
    }
    Ok(())
}

pub fn write_paths_csv(result: &SimResult, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{PATHS_HEADER}")?;
    for path in &result.paths {
        for s in &path.steps {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                path.path_id,
                s.t,
                s.mv,
                s.action.direction(),
                s.action.size(),
                num(s.reward),
                num(s.wealth)
            )?;
        }
    }
    Ok(())
}

fn stats_line(policy: &str, s: &Stats) -> String {
    let fields = [
        s.mean_terminal,
        s.std_terminal,
        s.q05,
        s.q25,
        s.q50,
        s.q75,
        s.q95,
        s.mean_max_drawdown,
        s.ruin_fraction,
    ]
    .map(num);
    format!("{policy},{}", fields.join(","))
}

pub fn write_stats_csv<'a>(
    rows: impl IntoIterator<Item = (&'a str, &'a Stats)>,
    mut w: impl Write,
) -> io::Result<()> {
    writeln!(w, "{STATS_HEADER}")?;
    for (policy, stats) in rows {
        writeln!(w, "{}", stats_line(policy, stats))?;
    }
    Ok(())
}

pub fn write_comparison_csv(table: &ComparisonTable, w: impl Write) -> io::Result<()> {
    write_stats_csv(table.rows.iter().map(|r| (r.policy.as_str(), &r.stats)), w)
}

pub fn write_diffs_csv(table: &ComparisonTable, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{DIFFS_HEADER}")?;
    for d in &table.diffs {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            d.first,
            d.second,
            num(d.mean_diff),
            num(d.std_error),
            num(d.ci95.0),
            num(d.ci95.1),
            num(d.ci99.0),
            num(d.ci99.1),
            d.identical_actions
        )?;
    }
    Ok(())
}
