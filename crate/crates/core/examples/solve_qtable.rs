//! Solve the Q-table for each belief kind and print the optimal action per stage.
//!
//! cargo run --example solve_qtable -- 4

use otl::{solve_q, Belief, DecisionProblem, Move, Ticks};

fn main() -> otl::Result<()> {
    let horizon = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("horizon must be an integer"))
        .unwrap_or(3);
    let ticks = Ticks::symmetric(10.0)?;
    let beliefs = [
        Belief::fixed(0.6)?,
        Belief::mirror(0.6, Move::Up)?,
        Belief::beta(3.0, 2.0)?,
    ];
    for belief in beliefs {
        let table = solve_q(&DecisionProblem::new(horizon, ticks, belief))?;
        println!("== {belief}, horizon {horizon}, {} states", table.state_count());
        for t in 0..horizon {
            for s in table.states(t) {
                let id = s.belief.id_relative_to(&belief).expect("reachable from the prior");
                let best = table.optimal_action(t, &s.belief)?;
                let q = table.q_values(t, &s.belief)?;
                println!("t={t} {:<12} -> {:<8} Q={q:?}", id.to_string(), best.to_string());
            }
        }
    }
    Ok(())
}
