//! Self-checks run by `stratdisc verify`.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::expectation::closed_form::{mc, mc_l4};
use crate::expectation::{expected_lp_value, hoeffding_gap, ExpectationError};
use crate::geometry::{halfplane_box_area, AxisBox, Partition, PartitionSpec};
use crate::rng::{Purpose, SeedSpec};
use crate::sampling::sample_stratified;
use crate::tables::TABLE1_N;
use crate::uniformity::a_n_statistic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Geometry,
    PartitionPrinciple,
    ConjectureFactor2,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Self::Geometry, Self::PartitionPrinciple, Self::ConjectureFactor2];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Geometry => "geometry",
            Self::PartitionPrinciple => "partition-principle",
            Self::ConjectureFactor2 => "conjecture-factor2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {}: {}", self.suite.as_str(), self.name, self.detail)
    }
}

fn check(suite: Suite, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        suite,
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// The eight equivolume partitions used for the partition-principle checks.
pub fn named_equivolume() -> Vec<(String, Partition)> {
    let specs = [
        ("vertical N=2", PartitionSpec::vertical(2, 2)),
        ("vertical N=5", PartitionSpec::vertical(5, 2)),
        ("vertical N=10", PartitionSpec::vertical(10, 2)),
        ("jittered m=2", PartitionSpec::jittered(2, 2)),
        ("jittered m=3", PartitionSpec::jittered(3, 2)),
        ("equivolume_diag N=2", PartitionSpec::equivolume_diag(2)),
        ("equivolume_diag N=3", PartitionSpec::equivolume_diag(3)),
        ("equivolume_diag N=6", PartitionSpec::equivolume_diag(6)),
    ];
    specs
        .into_iter()
        .map(|(name, spec)| (name.to_string(), spec.build().expect("named partitions are valid")))
        .collect()
}

fn geometry_suite() -> Vec<Check> {
    let suite = Suite::Geometry;
    let mut out = Vec::new();
    let g = 1024;
    let mut worst: f64 = 0.0;
    for &(c, x, y) in &[(0.3, 0.5, 0.5), (0.9, 0.7, 0.4), (1.5, 1.0, 0.8), (1.2, 0.6, 0.9)] {
        let h = 1.0 / g as f64;
        let mut count = 0usize;
        for i in 0..g {
            let s = (i as f64 + 0.5) * h;
            for j in 0..g {
                let t = (j as f64 + 0.5) * h;
                if s < x && t < y && s + t <= c {
                    count += 1;
                }
            }
        }
        let pixel = count as f64 * h * h;
        let exact = halfplane_box_area(c, x, y).expect("valid inputs");
        worst = worst.max((pixel - exact).abs());
    }
    out.push(check(
        suite,
        "halfplane area vs pixel count",
        worst < 2.0 / g as f64,
        format!("max deviation {worst:.2e} at {g}x{g}"),
    ));

    let specs = [
        PartitionSpec::equivolume_diag(7),
        PartitionSpec::equidistant_diag(5),
        PartitionSpec::diag(vec![0.5, 1.1]),
        PartitionSpec::vertical(6, 3),
        PartitionSpec::jittered(4, 2),
    ];
    for spec in &specs {
        let part = spec.build().expect("valid spec");
        let total: f64 = part.measures().iter().sum();
        out.push(check(
            suite,
            format!("{} N={} measures cover the cube", spec.family, spec.n),
            (total - 1.0).abs() < 1e-12,
            format!("sum {total:.15}"),
        ));
    }
    let eqv = PartitionSpec::equivolume_diag(9).build().expect("valid");
    out.push(check(
        suite,
        "equivolume cuts give measure 1/N",
        eqv.is_equivolume(),
        format!("{:?}", eqv.measures()),
    ));

    let mut rng = SeedSpec::new(0, Purpose::Test, 0).stream(0);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        let (c, d): (f64, f64) = (rng.random(), rng.random());
        let bx = AxisBox::new(vec![a.min(b), c.min(d)], vec![a.max(b), c.max(d)]).expect("ordered");
        worst = worst.max((a_n_statistic(&eqv, &bx) - bx.volume()).abs());
    }
    out.push(check(
        suite,
        "box mass of equivolume partition equals box volume",
        worst < 1e-12,
        format!("max deviation {worst:.2e} over 200 boxes"),
    ));

    let mut misplaced = 0;
    for spec in &specs {
        let part = spec.build().expect("valid spec");
        for r in 0..20 {
            let ps = sample_stratified(&part, SeedSpec::new(1, Purpose::Test, r)).expect("non-degenerate");
            misplaced += ps
                .iter()
                .enumerate()
                .filter(|(i, p)| !part.sets()[*i].contains(p, 1e-12))
                .count();
        }
    }
    out.push(check(
        suite,
        "stratified points lie in their strata",
        misplaced == 0,
        format!("{misplaced} misplaced points"),
    ));
    out
}

fn partition_principle_suite(grid: usize) -> Result<Vec<Check>, ExpectationError> {
    let suite = Suite::PartitionPrinciple;
    let mut out = Vec::new();
    for (t, (name, part)) in named_equivolume().into_iter().enumerate() {
        let n = part.len();
        for (p, bound) in [(2.0, mc(n, 2)), (4.0, mc_l4(n, 2))] {
            let value = expected_lp_value(&part, p, grid)?;
            out.push(check(
                suite,
                format!("{name} p={p}: stratified below Monte Carlo"),
                value < bound,
                format!("{value:.6e} < {bound:.6e}"),
            ));
            let mut rng = SeedSpec::new(0, Purpose::Anchors, t as u64).stream(p as u64);
            let mut worst = f64::INFINITY;
            for _ in 0..200 {
                let anchor = [rng.random::<f64>(), rng.random::<f64>()];
                worst = worst.min(hoeffding_gap(&part, &anchor, p)?);
            }
            out.push(check(
                suite,
                format!("{name} p={p}: Hoeffding gap"),
                worst >= -1e-12,
                format!("min gap {worst:.3e} over 200 anchors"),
            ));
        }
    }
    Ok(out)
}

/// `(N, mc / equivolume_diag)` for every table 1 size.
pub fn factor2_ratios(grid: usize) -> Result<Vec<(usize, f64)>, ExpectationError> {
    TABLE1_N
        .iter()
        .map(|&n| {
            let part = PartitionSpec::equivolume_diag(n).build()?;
            Ok((n, mc(n, 2) / expected_lp_value(&part, 2.0, grid)?))
        })
        .collect()
}

fn factor2_suite(grid: usize) -> Result<Vec<Check>, ExpectationError> {
    let ratios = factor2_ratios(grid)?;
    let table: Vec<String> = ratios.iter().map(|(n, r)| format!("{n}:{r:.4}")).collect();
    let ok = ratios
        .iter()
        .filter(|(n, _)| *n >= 200)
        .all(|(_, r)| (1.9..=2.1).contains(r));
    Ok(vec![check(
        Suite::ConjectureFactor2,
        "mc / equivolume_diag in [1.9, 2.1] for N >= 200",
        ok,
        table.join(" "),
    )])
}

/// Runs one suite; quadrature checks use resolution `grid`.
pub fn run_suite(suite: Suite, grid: usize) -> Result<Vec<Check>, ExpectationError> {
    match suite {
        Suite::Geometry => Ok(geometry_suite()),
        Suite::PartitionPrinciple => partition_principle_suite(grid),
        Suite::ConjectureFactor2 => factor2_suite(grid),
    }
}
