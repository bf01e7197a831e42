//! A trader plans with a fixed subjective q while the market moves with a
//! different p. The plan is optimal for the belief, and its realized mean
//! follows p, not q.

use otl::sim::exact_mean_terminal;
use otl::{make_policy, run, Belief, DecisionProblem, MarketModel, PolicySpec, SimConfig, Ticks};

fn main() -> otl::Result<()> {
    let ticks = Ticks::symmetric(10.0)?;
    let horizon = 10;
    println!("{:>4} {:>4} {:>12} {:>12} {:>12}", "q", "p", "planned", "exact", "simulated");
    for q in [0.55, 0.6, 0.7] {
        let problem = DecisionProblem::new(horizon, ticks, Belief::fixed(q)?);
        let policy = make_policy(PolicySpec::bellman(), &problem)?;
        let planned = 1000.0
            + policy
                .table()
                .expect("bellman policy carries its table")
                .value(0, &problem.initial_belief)?;
        for p in [0.4, 0.5, q] {
            let model = MarketModel::new(ticks, p, 1000.0)?;
            let exact = exact_mean_terminal(&policy, &model, horizon)?;
            let sim = run(&policy, &model, &SimConfig::new(50_000, horizon, 11))?;
            println!(
                "{q:>4} {p:>4} {planned:>12.3} {exact:>12.3} {:>12.3}",
                sim.stats.mean_terminal
            );
        }
    }
    Ok(())
}
