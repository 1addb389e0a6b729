//! Uniform-distribution diagnostics: the expected fraction of a stratified
//! sample in a box, stratum counts inside and across it, and average
//! diameters as N grows.

use stratdisc::expectation::closed_form::mc;
use stratdisc::expectation::expected_lp_value;
use stratdisc::geometry::{AxisBox, Family};
use stratdisc::uniformity::{counterexample_partition, uniformity_sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let boxes = [
        AxisBox::new(vec![0.1, 0.2], vec![0.6, 0.5])?,
        AxisBox::new(vec![0.0, 0.0], vec![0.5, 0.5])?,
    ];
    let ns = [4, 16, 64, 256];
    for family in [Family::EquidistantDiag, Family::Vertical, Family::Jittered] {
        for report in uniformity_sweep(family, &boxes, &ns, 2)? {
            println!(
                "{} box {:?}..{:?} (volume {:.3})",
                family.as_str(),
                report.lo,
                report.hi,
                report.volume
            );
            for row in &report.rows {
                println!(
                    "  N={:<4} a_N={:.6} inside={:.4} straddle={:.4} diam={:.4}",
                    row.n, row.a_n, row.inside_frac, row.straddle_frac, row.avg_diameter
                );
            }
            println!(
                "  gap slope {:?}, diameter slope {:?}",
                report.gap_trend, report.diameter_trend
            );
        }
    }

    // a stratification that does worse than plain Monte Carlo
    let n = 8;
    let bad = counterexample_partition(n, 0.5)?;
    println!(
        "\ncounterexample N={n}: E L2^2 = {:.6} vs monte carlo {:.6}",
        expected_lp_value(&bad, 2.0, 512)?,
        mc(n, 2)
    );
    Ok(())
}
