//! Closed-form expected discrepancies, and the pointwise three-stratum
//! forms checked against the general Poisson-binomial engine.

use std::f64::consts::SQRT_2;

use stratdisc::expectation::closed_form::{
    appendix_f, appendix_f_as_printed, closed_form, mc, n2_diag, n3_appendix, n3_case2, n3_main, vertical,
    AppendixCase, ClosedForm,
};
use stratdisc::expectation::expected_pointwise;
use stratdisc::geometry::PartitionSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>5} {:>14} {:>14}", "N", "monte carlo", "vertical");
    for n in [2, 10, 100, 1000] {
        println!("{n:>5} {:>14.8e} {:>14.8e}", mc(n, 2), vertical(n, 2));
    }

    println!("\ntwo diagonal strata, offset a from the centre line:");
    for a in [0.0, 0.1, 0.122034, 0.2] {
        println!("  a = {a:<8} {:.8}", n2_diag(a));
    }

    let (a, b) = (0.7508, 0.5141);
    println!("\nthree diagonal strata at A = {a}, B = {b}:");
    println!("  main-text rational         {:.8}", n3_main(a, b));
    println!("  case-2 rational            {:.8}", n3_case2(a, b));
    println!("  appendix rational, printed {:.8}", n3_appendix(a, b));
    let form = ClosedForm::N2Diag { a: 0.122034 };
    println!("  via {} {:.8}", serde_json::to_string(&form)?, closed_form(&form)?);

    let part = PartitionSpec::diag(vec![a / SQRT_2, (1.0 + b) / SQRT_2]).build()?;
    println!("\npointwise forms vs engine at one point per case:");
    let points = [(0.2, 0.3), (0.4, 0.9), (0.3, 0.5), (0.76, 0.7), (0.7, 0.9), (0.9, 0.95)];
    for (case, (x, y)) in AppendixCase::ALL.into_iter().zip(points) {
        if !case.contains(x, y, a, b) {
            continue;
        }
        let engine = expected_pointwise(&part, &[x, y], 2.0)?;
        println!(
            "  {case:?}: engine {engine:.10}  corrected {:.10}  as printed {:.10}",
            appendix_f(case, x, y, a, b),
            appendix_f_as_printed(case, x, y, a, b)
        );
    }
    Ok(())
}
