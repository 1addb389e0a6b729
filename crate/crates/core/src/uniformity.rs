//! Diagnostics for sequences of partitions: how much of a test box the
//! strata cover on average, how many strata sit inside or across the box,
//! and how fast the strata shrink.

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{set_box_intersection, AxisBox, Family, GeometryError, Partition, PartitionSet, PartitionSpec};

/// Tolerance for deciding `|Omega ∩ b| = |Omega|` and `|Omega ∩ b| = 0`.
pub const CONTAINMENT_TOL: f64 = 1e-12;

/// `sum_i |Omega_i ∩ b| / (N |Omega_i|)`, the expected fraction of the
/// stratified sample inside `b`.
pub fn a_n_statistic(part: &Partition, b: &AxisBox) -> f64 {
    let n = part.len() as f64;
    part.sets()
        .iter()
        .zip(part.measures())
        .map(|(s, m)| set_box_intersection(s, b) / (n * m))
        .sum()
}

/// `(I_B, T_B)`: strata inside `b`, and strata meeting both `b` and its
/// complement in positive measure.
pub fn index_counts(part: &Partition, b: &AxisBox) -> (usize, usize) {
    let mut inside = 0;
    let mut straddle = 0;
    for (s, m) in part.sets().iter().zip(part.measures()) {
        let cut = set_box_intersection(s, b);
        if cut >= m - CONTAINMENT_TOL {
            inside += 1;
        } else if cut > CONTAINMENT_TOL {
            straddle += 1;
        }
    }
    (inside, straddle)
}

pub fn avg_diameter(part: &Partition) -> f64 {
    part.sets().iter().map(PartitionSet::diameter).sum::<f64>() / part.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityRow {
    pub n: usize,
    pub a_n: f64,
    pub inside_frac: f64,
    pub straddle_frac: f64,
    pub avg_diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityReport {
    pub family: Family,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub volume: f64,
    pub rows: Vec<UniformityRow>,
    /// Log-log slope of `|a_N - |b||` against `N`; `None` when the gap is
    /// zero to rounding at every `N`.
    pub gap_trend: Option<f64>,
    /// Log-log slope of the average diameter against `N`.
    pub diameter_trend: Option<f64>,
}

/// The partition of `family` with `n` strata in dimension `dim`.
///
/// For the jittered family `n` must be a perfect `dim`-th power.
pub fn family_member(family: Family, n: usize, dim: usize) -> Result<Partition, GeometryError> {
    let spec = match family {
        Family::EquivolumeDiag => PartitionSpec::equivolume_diag(n),
        Family::EquidistantDiag => PartitionSpec::equidistant_diag(n),
        Family::Vertical => PartitionSpec::vertical(n, dim),
        Family::Jittered => PartitionSpec {
            family,
            dim,
            n,
            v: None,
        },
        Family::Diag | Family::Custom => {
            return Err(GeometryError::InvalidSet(format!(
                "family `{family}` has no canonical member for each N"
            )))
        }
    };
    spec.build()
}

/// Least-squares slope of `ln y` on `ln x` over the entries with `y > floor`.
pub fn log_log_slope(xs: &[f64], ys: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > floor)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// One report per box, each with one row per `N`.
pub fn uniformity_sweep(
    family: Family,
    boxes: &[AxisBox],
    ns: &[usize],
    dim: usize,
) -> Result<Vec<UniformityReport>, GeometryError> {
    let parts: Vec<Partition> = ns
        .par_iter()
        .map(|&n| family_member(family, n, dim))
        .collect::<Result<_, _>>()?;
    let diameters: Vec<f64> = parts.par_iter().map(avg_diameter).collect();
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let diameter_trend = log_log_slope(&nf, &diameters, 0.0);
    boxes
        .par_iter()
        .map(|b| {
            if b.dim() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    got: b.dim(),
                });
            }
            let volume = b.volume();
            let rows: Vec<UniformityRow> = parts
                .iter()
                .zip(&diameters)
                .map(|(part, &avg)| {
                    let (i, t) = index_counts(part, b);
                    let n = part.len();
                    UniformityRow {
                        n,
                        a_n: a_n_statistic(part, b),
                        inside_frac: i as f64 / n as f64,
                        straddle_frac: t as f64 / n as f64,
                        avg_diameter: avg,
                    }
                })
                .collect();
            let gaps: Vec<f64> = rows.iter().map(|r| (r.a_n - volume).abs()).collect();
            Ok(UniformityReport {
                family,
                lo: b.lo().to_vec(),
                hi: b.hi().to_vec(),
                volume,
                gap_trend: log_log_slope(&nf, &gaps, 1e-13),
                diameter_trend,
                rows,
            })
        })
        .collect()
}

/// A stratification that is worse than Monte Carlo: `n - 1` vertical slabs
/// of the corner square `[delta, 1]^2` and one L-shaped stratum holding the
/// rest of the unit square, listed last.
pub fn counterexample_partition(n: usize, delta: f64) -> Result<Partition, GeometryError> {
    if n < 2 || !(delta > 0.0 && delta < 1.0) {
        return Err(GeometryError::InvalidSet(format!(
            "counterexample needs n >= 2 and 0 < delta < 1, got n = {n}, delta = {delta}"
        )));
    }
    let width = (1.0 - delta) / (n - 1) as f64;
    let mut sets: Vec<PartitionSet> = (0..n - 1)
        .map(|k| {
            let lo = delta + width * k as f64;
            let hi = if k + 2 == n { 1.0 } else { lo + width };
            AxisBox::new(vec![lo, delta], vec![hi, 1.0]).map(PartitionSet::AxisRegion)
        })
        .collect::<Result<_, _>>()?;
    sets.push(PartitionSet::BoxUnion(vec![
        AxisBox::new(vec![0.0, 0.0], vec![1.0, delta])?,
        AxisBox::new(vec![0.0, delta], vec![delta, 1.0])?,
    ]));
    Partition::from_sets(sets, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::closed_form::mc;
    use crate::expectation::expected_lp_value;
    use crate::rng::{Purpose, SeedSpec};
    use crate::sampling::sample_stratified;

    fn square(lo: f64, hi: f64) -> AxisBox {
        AxisBox::new(vec![lo, lo], vec![hi, hi]).unwrap()
    }

    #[test]
    fn equivolume_mass_is_box_volume() {
        let b = AxisBox::new(vec![0.1, 0.35], vec![0.8, 0.6]).unwrap();
        for spec in [
            PartitionSpec::equivolume_diag(7),
            PartitionSpec::vertical(5, 2),
            PartitionSpec::jittered(3, 2),
        ] {
            let part = spec.build().unwrap();
            assert!((a_n_statistic(&part, &b) - b.volume()).abs() < 1e-12);
        }
        let single = PartitionSpec::vertical(1, 2).build().unwrap();
        assert!((a_n_statistic(&single, &b) - b.volume()).abs() < 1e-15);
    }

    #[test]
    fn equidistant_regression() {
        let part = PartitionSpec::equidistant_diag(4).build().unwrap();
        let b = square(0.0, 0.5);
        // measures 1/8, 3/8, 3/8, 1/8; the first slice lies inside b and the
        // second meets it in 1/8
        let a = a_n_statistic(&part, &b);
        assert!((a - 1.0 / 3.0).abs() < 1e-14, "{a}");
    }

    #[test]
    fn counts() {
        let part = PartitionSpec::jittered(4, 2).build().unwrap();
        assert_eq!(index_counts(&part, &square(0.0, 0.5)), (4, 0));
        assert_eq!(index_counts(&part, &AxisBox::unit(2)), (16, 0));
        let vert = PartitionSpec::vertical(8, 2).build().unwrap();
        let low = AxisBox::new(vec![0.0, 0.0], vec![1.0, 0.9]).unwrap();
        assert_eq!(index_counts(&vert, &low), (0, 8));
    }

    #[test]
    fn diameters() {
        let jit = PartitionSpec::jittered(5, 2).build().unwrap();
        assert!((avg_diameter(&jit) - 2f64.sqrt() / 5.0).abs() < 1e-15);
        let vert = PartitionSpec::vertical(10, 2).build().unwrap();
        assert!((avg_diameter(&vert) - (1.0f64 + 0.01).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sweep_shapes() {
        let boxes = [square(0.25, 0.75), square(0.0, 0.5)];
        let reports = uniformity_sweep(Family::Vertical, &boxes, &[2, 16, 256], 2).unwrap();
        assert_eq!(reports.len(), 2);
        for r in &reports {
            assert!(r.gap_trend.is_none());
            for row in &r.rows {
                assert!((row.a_n - r.volume).abs() < 1e-12);
                assert_eq!(row.inside_frac, 0.0);
            }
        }
        let jit = uniformity_sweep(Family::Jittered, &boxes[1..], &[4, 16, 64, 256], 2).unwrap();
        for row in &jit[0].rows {
            assert!((row.inside_frac - 0.25).abs() < 1e-15);
        }
        assert!(jit[0].diameter_trend.unwrap() < -0.49);
        assert!(uniformity_sweep(Family::Jittered, &boxes, &[5], 2).is_err());
    }

    #[test]
    fn counterexample_is_worse_than_monte_carlo() {
        let part = counterexample_partition(4, 0.9).unwrap();
        assert!(!part.is_equivolume());
        let strat = expected_lp_value(&part, 2.0, 256).unwrap();
        assert!(strat > 0.9f64.powi(4) / 16.0);
        assert!(strat > mc(4, 2));
    }

    #[test]
    fn sample_fraction_tracks_volume() {
        let part = PartitionSpec::equivolume_diag(5).build().unwrap();
        let b = AxisBox::new(vec![0.2, 0.1], vec![0.7, 0.9]).unwrap();
        let m = 4000;
        let fractions: Vec<f64> = (0..m)
            .map(|r| {
                let ps = sample_stratified(&part, SeedSpec::new(3, Purpose::Test, r)).unwrap();
                ps.iter().filter(|p| b.contains(p)).count() as f64 / 5.0
            })
            .collect();
        let (mean, se) = crate::expectation::mean_and_se(&fractions);
        assert!((mean - b.volume()).abs() < 4.0 * se, "{mean} {se}");
    }
}
