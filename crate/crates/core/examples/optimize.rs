//! Nelder-Mead search for the best diagonal cut vectors for N = 2, 3, 4.

use stratdisc::optimize::{minimize_family, OptimizeOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = OptimizeOptions {
        restarts: 8,
        grid: 512,
        ..OptimizeOptions::default()
    };
    for n in 2..=4 {
        let r = minimize_family(n, 2.0, &opts)?;
        let v: Vec<String> = r.v.iter().map(|x| format!("{x:.5}")).collect();
        println!(
            "N={n}: v = ({}), E L2^2 = {:.7} (equivolume {:.7}), {} evaluations, converged {}",
            v.join(", "),
            r.value,
            r.equivolume_value,
            r.evaluations,
            r.converged
        );
    }
    Ok(())
}
