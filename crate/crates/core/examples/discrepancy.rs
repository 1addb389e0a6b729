//! Discrepancy of concrete point sets: Warnock's formula, tensor quadrature,
//! and exact and grid star discrepancy.

use stratdisc::discrepancy::{l2_warnock, lp_quadrature, star_disc_exact_2d, star_disc_grid};
use stratdisc::geometry::PartitionSpec;
use stratdisc::rng::{Purpose, SeedSpec};
use stratdisc::sampling::{sample_mc, sample_stratified};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 256;
    let sets = [
        (
            "monte carlo",
            sample_mc(n, 2, SeedSpec::new(1, Purpose::MonteCarlo, 0))?,
        ),
        (
            "equivolume diagonal",
            sample_stratified(
                &PartitionSpec::equivolume_diag(n).build()?,
                SeedSpec::new(1, Purpose::Stratified, 0),
            )?,
        ),
        (
            "jittered 16 x 16",
            sample_stratified(
                &PartitionSpec::jittered(16, 2).build()?,
                SeedSpec::new(1, Purpose::Stratified, 0),
            )?,
        ),
    ];
    println!(
        "{:<22} {:>12} {:>12} {:>12} {:>10} {:>10}",
        "points", "L2^2", "L2^2 quad", "L4^4 quad", "D* exact", "D* grid"
    );
    for (name, ps) in &sets {
        println!(
            "{name:<22} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.5} {:>10.5}",
            l2_warnock(ps)?.value,
            lp_quadrature(ps, 2.0, 1024)?.value,
            lp_quadrature(ps, 4.0, 1024)?.value,
            star_disc_exact_2d(ps)?.value,
            star_disc_grid(ps, 128)?.value,
        );
    }
    Ok(())
}
