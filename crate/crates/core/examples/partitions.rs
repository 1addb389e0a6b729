//! Building partitions: named families, explicit cut vectors, and the
//! success profile of an anchored box.

use stratdisc::geometry::{success_profile, validate_partition, PartitionSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        PartitionSpec::equivolume_diag(5),
        PartitionSpec::equidistant_diag(5),
        PartitionSpec::diag(vec![0.5, 1.1]),
        PartitionSpec::vertical(4, 3),
        PartitionSpec::jittered(3, 2),
    ];
    for spec in &specs {
        let part = spec.build()?;
        let report = validate_partition(&part);
        let measures: Vec<String> = part.measures().iter().map(|m| format!("{m:.4}")).collect();
        println!(
            "{:<18} N={:<3} d={} equivolume={:<5} sum={:.15}  [{}]",
            spec.family.as_str(),
            part.len(),
            part.dim(),
            report.equivolume,
            report.measure_sum,
            measures.join(", ")
        );
    }

    // probability that each stratum's point falls in [0, 0.6) x [0, 0.7)
    let part = PartitionSpec::equivolume_diag(4).build()?;
    let prof = success_profile(&part, &[0.6, 0.7])?;
    println!("\nsuccess profile at (0.6, 0.7): {:?}", prof.q);
    println!(
        "mean count / N = {:.6}, box volume = {:.6}",
        prof.mean(),
        prof.anchor_volume()
    );

    // partitions round-trip through JSON
    println!(
        "\n{}",
        serde_json::to_string_pretty(&PartitionSpec::diag(vec![0.5309, 1.0706]))?
    );
    Ok(())
}
