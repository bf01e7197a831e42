//! Run every verification suite and print the reports.

use otl::verify::{run_suite, Suite};

fn main() {
    let reports = run_suite(Suite::All);
    for r in &reports {
        print!("{r}");
    }
    let ok = reports.iter().all(|r| r.overall);
    println!("overall: {}", if ok { "PASS" } else { "FAIL" });
    std::process::exit(if ok { 0 } else { 1 });
}
