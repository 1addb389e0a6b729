//! Stratified and Monte Carlo samples. Every draw is fixed by the master
//! seed, the purpose, the replicate and the stratum, so replicates can be
//! generated in any order.

use stratdisc::geometry::PartitionSpec;
use stratdisc::io::write_points;
use stratdisc::rng::{Purpose, SeedSpec};
use stratdisc::sampling::{sample_mc, sample_stratified};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let part = PartitionSpec::equivolume_diag(8).build()?;
    let seed = SeedSpec::new(42, Purpose::Stratified, 0);
    let ps = sample_stratified(&part, seed)?;
    for (i, x) in ps.iter().enumerate() {
        println!("stratum {i}: ({:.4}, {:.4})  x+y = {:.4}", x[0], x[1], x[0] + x[1]);
    }

    let again = sample_stratified(&part, seed)?;
    let other = sample_stratified(&part, seed.with_replicate(1))?;
    println!("\nsame seed reproduces: {}", again.coords() == ps.coords());
    println!("next replicate differs: {}", other.coords() != ps.coords());

    let mc = sample_mc(4, 3, SeedSpec::new(42, Purpose::MonteCarlo, 0))?;
    println!("\nMonte Carlo points as CSV:");
    write_points(&mc, std::io::stdout().lock())?;
    Ok(())
}
