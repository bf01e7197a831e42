//! Price a terminal payoff and a dividend stream on the price lattice, and
//! check the lattice against brute-force path enumeration.

use otl::market::price_by_enumeration;
use otl::{price_process, DividendSpec, MarketModel, Ticks};

fn main() -> otl::Result<()> {
    let ticks = Ticks::symmetric(1.0)?;
    for p in [0.4, 0.5, 0.6] {
        let model = MarketModel::new(ticks, p, 0.0)?;
        let level = DividendSpec::terminal_only(100.0, |x| x);
        let call = || DividendSpec::terminal_only(100.0, |x| (x - 100.0).max(0.0));
        let coupon = DividendSpec::new(100.0, |_, _, x| 0.001 * x, |x| x);
        for horizon in [1, 5, 10] {
            let lattice = price_process(&model, &call(), horizon)?;
            let paths = price_by_enumeration(&model, &call(), horizon)?;
            println!(
                "p={p} T={horizon:>2}: level {:>8.4}  call {lattice:>8.4} (enum {paths:.4})  level+coupon {:>8.4}",
                price_process(&model, &level, horizon)?,
                price_process(&model, &coupon, horizon)?,
            );
        }
    }
    Ok(())
}
