//! Small-scale run of both benchmark tables. The CLI's `reproduce`
//! command runs them at full size.

use stratdisc::tables::{reproduce_table1, reproduce_table2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12}",
        "N", "mean", "se", "expected", "printed"
    );
    for r in reproduce_table1(&[50, 100, 256], 100, 0, 512)? {
        println!(
            "{:>5} {:>12.4e} {:>12.2e} {:>12.4e} {:>12.4e}",
            r.n, r.equivolume_mean, r.equivolume_se, r.equivolume_expected, r.equivolume_published
        );
    }

    println!();
    for r in reproduce_table2(20, 0, Some(16))?.iter().filter(|r| r.d <= 3) {
        println!(
            "d={} N={:<5} {:<16} {:.4} +- {:.4}  printed {:.4}{}",
            r.d,
            r.n,
            r.sampler.as_str(),
            r.mean,
            r.se,
            r.published.unwrap_or(f64::NAN),
            if r.exact { "" } else { "  (grid lower bound)" }
        );
    }
    Ok(())
}
