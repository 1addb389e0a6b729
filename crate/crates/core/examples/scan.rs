//! Objective curves along one parameter, written as CSV to stdout.

use stratdisc::io::write_table;
use stratdisc::optimize::{scan, ScanSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = scan(&ScanSpec::Example3 { points: 41 })?;
    let best = table.argmin("value").expect("non-empty scan");
    println!("two diagonal strata: best v = {:.4}, value {:.6}\n", best[0], best[3]);

    let table = scan(&ScanSpec::N3FixedA {
        a: 0.7508,
        points: 11,
        grid: Some(256),
    })?;
    write_table(&table.header, &table.rows, std::io::stdout().lock())?;
    Ok(())
}
