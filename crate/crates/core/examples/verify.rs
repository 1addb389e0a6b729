//! The self-check suites behind `stratdisc verify`.

use stratdisc::verify::{run_suite, Suite};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut failed = 0;
    for suite in Suite::ALL {
        for check in run_suite(suite, 256)? {
            failed += usize::from(!check.passed);
            println!("{check}");
        }
    }
    println!("\n{failed} failed");
    Ok(())
}
