//! A long position loses one tick. The unchanged belief keeps adding to the
//! long; under the mirror belief flat beats holding, holding beats doubling,
//! and the best action reverses to short.

use otl::{solve_q, Action, Belief, DecisionProblem, Move, Ticks};

fn main() -> otl::Result<()> {
    let ticks = Ticks::symmetric(10.0)?;
    let actions = vec![Action::NEUTRAL, Action::LONG, Action::long(2), Action::SHORT];
    println!("{:>5} {:>10} {:>10} {:>10} {:>10}", "q", "belief", "Q(N)", "Q(L)", "Q(2L)");
    for q in [0.55, 0.6, 0.75, 0.9] {
        for start in [Belief::fixed(q)?, Belief::mirror(q, Move::Up)?] {
            let problem = DecisionProblem::new(3, ticks, start).with_actions(actions.clone());
            let table = solve_q(&problem)?;
            let after = start.update(Move::Down);
            let row: Vec<f64> = [Action::NEUTRAL, Action::LONG, Action::long(2)]
                .iter()
                .map(|&a| table.q(1, &after, a))
                .collect::<otl::Result<_>>()?;
            println!(
                "{q:>5} {:>10} {:>10.3} {:>10.3} {:>10.3}  -> {}",
                start.kind(),
                row[0],
                row[1],
                row[2],
                table.optimal_action(1, &after)?
            );
        }
    }
    Ok(())
}
