//! Run every built-in policy on the same sampled paths and print the stats
//! table and the paired differences.

use otl::output::{write_comparison_csv, write_diffs_csv};
use otl::{compare, make_policy, Belief, DecisionProblem, MarketModel, Move, SimConfig, Ticks};

fn main() -> otl::Result<()> {
    let ticks = Ticks::symmetric(10.0)?;
    let model = MarketModel::new(ticks, 0.45, 1000.0)?;
    let problem = DecisionProblem::new(20, ticks, Belief::mirror(0.6, Move::Up)?);
    let policies = ["bellman", "cutloss", "avgdown", "buyhold", "alwayslong"]
        .iter()
        .map(|name| make_policy(name.parse()?, &problem))
        .collect::<otl::Result<Vec<_>>>()?;
    let table = compare(&policies, &model, &SimConfig::new(20_000, 20, 7))?;

    let mut out = std::io::stdout().lock();
    write_comparison_csv(&table, &mut out).expect("stdout");
    println!();
    write_diffs_csv(&table, &mut out).expect("stdout");
    Ok(())
}
