//! Expected squared L2 discrepancy of several stratifications of the unit
//! square, by quadrature, next to the closed forms where they exist.

use std::time::Instant;

use stratdisc::expectation::closed_form::{mc, vertical};
use stratdisc::expectation::expected_lp;
use stratdisc::geometry::PartitionSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = 1024;
    let cases = [
        ("equivolume diagonal, N = 2", PartitionSpec::equivolume_diag(2)),
        ("equivolume diagonal, N = 3", PartitionSpec::equivolume_diag(3)),
        ("jittered 2 x 2", PartitionSpec::jittered(2, 2)),
        ("vertical strips, N = 4", PartitionSpec::vertical(4, 2)),
        (
            "diagonal, N = 4 (perturbed)",
            PartitionSpec::diag(vec![
                2f64.sqrt() / 4.0 + 0.08,
                2f64.sqrt() / 2.0 + 0.11,
                3.0 * 2f64.sqrt() / 4.0 - 0.02,
            ]),
        ),
    ];
    println!("{:<30} {:>12} {:>10} {:>8}", "partition", "E L2^2", "err est", "secs");
    for (name, spec) in cases {
        let part = spec.build()?;
        let t = Instant::now();
        let r = expected_lp(&part, 2.0, grid)?;
        println!(
            "{name:<30} {:>12.8} {:>10.1e} {:>8.2}",
            r.value,
            r.error_estimate.unwrap_or(f64::NAN),
            t.elapsed().as_secs_f64()
        );
    }
    println!();
    println!(
        "closed forms for N = 4: Monte Carlo {:.8}, vertical {:.8}",
        mc(4, 2),
        vertical(4, 2)
    );
    Ok(())
}
