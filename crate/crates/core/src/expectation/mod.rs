//! Expected discrepancy of stratified samples.
//!
//! At an anchor `x` the count `N Z_x` is a sum of independent Bernoulli
//! variables with success probabilities `q_i(x)`, so every pointwise moment
//! is a function of the success profile alone. The expected `L_p^p`
//! discrepancy is the integral of `E |Z_x - |[0,x)||^p` over the cube; the
//! bias `E Z_x - |[0,x)|` is kept, so non-equivolume partitions are handled
//! correctly.

pub mod closed_form;
pub mod pmf;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::discrepancy::{l2_warnock, lp_quadrature, pairwise_sum, DiscrepancyError};
use crate::geometry::{success_profile, GeometryError, Partition};
use crate::rng::SeedSpec;
use crate::sampling::{sample_stratified, SamplingError};

pub use closed_form::{closed_form, AppendixCase, ClosedForm, ClosedFormError};
pub use pmf::{pb_pmf, PoissonBinomialPmf};

/// Largest number of quadrature anchors `G^d` evaluated by [`expected_lp`].
pub const MAX_QUADRATURE_NODES: usize = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpectationError {
    #[error("exponent p must be a real number >= 1, got {0}")]
    Exponent(f64),
    #[error("quadrature resolution must be at least 16, got {0}")]
    Resolution(usize),
    #[error("quadrature grid of {nodes} anchors exceeds the budget of {budget}")]
    Budget { nodes: f64, budget: usize },
    #[error("at least 2 replicates are needed, got {0}")]
    Replicates(usize),
    #[error("the Hoeffding comparison needs an equivolume partition")]
    NotEquivolume,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Discrepancy(#[from] DiscrepancyError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub value: f64,
    pub p: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Richardson estimate for quadrature, standard error for Monte Carlo.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
}

impl ExpectationResult {
    pub fn closed_form(value: f64) -> Self {
        Self {
            value,
            p: 2.0,
            method: Method::ClosedForm,
            resolution: None,
            replicates: None,
            error_estimate: None,
        }
    }
}

fn check_p(p: f64) -> Result<(), ExpectationError> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(ExpectationError::Exponent(p))
    }
}

/// Splits the success profile at `anchor` into the number of strata with
/// `q_i = 1` and the strictly fractional probabilities (written to `frac`).
/// Strata with `q_i = 0` are dropped.
fn split_profile(part: &Partition, anchor: &[f64], full: &mut [f64], frac: &mut Vec<f64>) -> usize {
    frac.clear();
    if let Some(offsets) = part.diagonal_offsets() {
        let (x, y) = (anchor[0], anchor[1]);
        let (inner, outer) = (x.min(y), x + y);
        let measures = part.measures();
        // slice i spans [offsets[i], offsets[i + 1]]
        let ones = offsets[1..].partition_point(|&c| c <= inner);
        let mut below = crate::geometry::halfplane_area_unchecked(offsets[ones], x, y);
        for i in ones..measures.len() {
            if offsets[i] >= outer {
                break;
            }
            let next = crate::geometry::halfplane_area_unchecked(offsets[i + 1], x, y);
            frac.push(((next - below) / measures[i]).clamp(0.0, 1.0));
            below = next;
        }
        return ones;
    }
    part.success_profile_into(anchor, full);
    let mut ones = 0;
    for &q in full.iter() {
        if q >= 1.0 {
            ones += 1;
        } else if q > 0.0 {
            frac.push(q);
        }
    }
    ones
}

/// `E |(ones + S)/n - vol|^p` where `S` is Poisson-binomial over `frac`.
fn moment(ones: usize, frac: &[f64], n: usize, vol: f64, p: f64) -> f64 {
    let nf = n as f64;
    let mean = (ones as f64 + frac.iter().sum::<f64>()) / nf;
    let b = mean - vol;
    if p == 2.0 {
        let var: f64 = frac.iter().map(|q| q * (1.0 - q)).sum();
        return var / (nf * nf) + b * b;
    }
    if p == 4.0 {
        let (mut s2, mut s2sq, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
        for &q in frac {
            let r = q * (1.0 - q);
            s2 += r;
            s2sq += r * r;
            s3 += r * (1.0 - 2.0 * q);
            s4 += q * (1.0 - q).powi(4) + q.powi(4) * (1.0 - q);
        }
        let m2 = s2 / nf.powi(2);
        let m3 = s3 / nf.powi(3);
        let m4 = (s4 + 3.0 * (s2 * s2 - s2sq)) / nf.powi(4);
        return m4 + 4.0 * b * m3 + 6.0 * b * b * m2 + b.powi(4);
    }
    pmf_moment(ones, frac, n, vol, p)
}

fn pmf_moment(ones: usize, frac: &[f64], n: usize, vol: f64, p: f64) -> f64 {
    let nf = n as f64;
    let pmf = PoissonBinomialPmf::from_probabilities(frac);
    pmf.probabilities
        .iter()
        .enumerate()
        .map(|(k, w)| w * (((ones + k) as f64) / nf - vol).abs().powf(p))
        .sum()
}

/// `E |Z_x - |[0,x)||^p` from the full Poisson-binomial law of the count.
pub fn expected_pointwise(part: &Partition, anchor: &[f64], p: f64) -> Result<f64, ExpectationError> {
    check_p(p)?;
    let profile = success_profile(part, anchor)?;
    let pmf = pb_pmf(&profile);
    Ok(pmf.abs_moment_about(profile.anchor_volume(), p))
}

/// Same quantity as [`expected_pointwise`], through the moment identities
/// for `p = 2` and `p = 4` (any other `p` falls back to the PMF).
pub fn expected_pointwise_moments(part: &Partition, anchor: &[f64], p: f64) -> Result<f64, ExpectationError> {
    check_p(p)?;
    let profile = success_profile(part, anchor)?;
    let mut frac = Vec::new();
    let mut ones = 0;
    for &q in &profile.q {
        if q >= 1.0 {
            ones += 1;
        } else if q > 0.0 {
            frac.push(q);
        }
    }
    Ok(moment(ones, &frac, part.len(), profile.anchor_volume(), p))
}

/// `M_p(U_x) - M_p(Z_x)`: binomial minus Poisson-binomial central moment at
/// equal mean.
pub fn hoeffding_gap(part: &Partition, anchor: &[f64], p: f64) -> Result<f64, ExpectationError> {
    if !part.is_equivolume() {
        return Err(ExpectationError::NotEquivolume);
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(ExpectationError::Exponent(p));
    }
    let profile = success_profile(part, anchor)?;
    let vol = profile.anchor_volume();
    let z = pb_pmf(&profile).abs_moment_about(vol, p);
    let u = PoissonBinomialPmf::binomial(part.len(), vol).abs_moment_about(vol, p);
    Ok(u - z)
}

fn node_budget(dim: usize, g: usize) -> Result<usize, ExpectationError> {
    let nodes = (g as f64).powi(dim as i32);
    if nodes > MAX_QUADRATURE_NODES as f64 {
        return Err(ExpectationError::Budget {
            nodes,
            budget: MAX_QUADRATURE_NODES,
        });
    }
    Ok(nodes as usize)
}

/// Midpoint-rule value of `int E |Z_x - |[0,x)||^p dx` on a `G^d` grid, with
/// no error estimate. Partitions symmetric in the two axes of the square
/// are integrated over the half `y >= x` only.
pub fn expected_lp_value(part: &Partition, p: f64, g: usize) -> Result<f64, ExpectationError> {
    check_p(p)?;
    if g < 2 {
        return Err(ExpectationError::Resolution(g));
    }
    let dim = part.dim();
    let nodes = node_budget(dim, g)?;
    let n = part.len();
    let h = 1.0 / g as f64;
    let symmetric = part.is_diagonal_symmetric();
    let inner = nodes / g;
    let rows: Vec<f64> = (0..g)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], Vec::with_capacity(n), vec![0.0; dim]),
            |(full, frac, anchor), i| {
                anchor[0] = (i as f64 + 0.5) * h;
                let mut acc = 0.0;
                if symmetric {
                    for j in i..g {
                        anchor[1] = (j as f64 + 0.5) * h;
                        let ones = split_profile(part, anchor, full, frac);
                        let m = moment(ones, frac, n, anchor[0] * anchor[1], p);
                        acc += if j == i { m } else { 2.0 * m };
                    }
                    return acc;
                }
                for flat in 0..inner {
                    let mut rest = flat;
                    for a in anchor[1..].iter_mut() {
                        *a = ((rest % g) as f64 + 0.5) * h;
                        rest /= g;
                    }
                    let vol: f64 = anchor.iter().product();
                    let ones = split_profile(part, anchor, full, frac);
                    acc += moment(ones, frac, n, vol, p);
                }
                acc
            },
        )
        .collect();
    Ok(pairwise_sum(&rows) / nodes as f64)
}

/// Expected `L_p^p` discrepancy by tensor midpoint quadrature.
///
/// The error estimate compares the `G` grid with the `G/2` grid: for a
/// second-order rule the error of the finer value is about a third of the
/// difference.
pub fn expected_lp(part: &Partition, p: f64, g: usize) -> Result<ExpectationResult, ExpectationError> {
    if g < 16 {
        return Err(ExpectationError::Resolution(g));
    }
    let fine = expected_lp_value(part, p, g)?;
    let coarse = expected_lp_value(part, p, g / 2)?;
    Ok(ExpectationResult {
        value: fine,
        p,
        method: Method::Quadrature,
        resolution: Some(g),
        replicates: None,
        error_estimate: Some((fine - coarse).abs() / 3.0),
    })
}

/// Mean discrepancy over `replicates` independent stratified samples.
///
/// `p = 2` uses Warnock's formula; other exponents use grid quadrature at
/// resolution `g`. The error estimate is the standard error of the mean.
pub fn expected_lp_empirical(
    part: &Partition,
    p: f64,
    replicates: usize,
    seed: SeedSpec,
    g: usize,
) -> Result<ExpectationResult, ExpectationError> {
    check_p(p)?;
    if replicates < 2 {
        return Err(ExpectationError::Replicates(replicates));
    }
    let values: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<f64, ExpectationError> {
            let ps = sample_stratified(part, seed.with_replicate(r))?;
            let d = if p == 2.0 {
                l2_warnock(&ps)?
            } else {
                lp_quadrature(&ps, p, g)?
            };
            Ok(d.value)
        })
        .collect::<Result<_, _>>()?;
    let (mean, se) = mean_and_se(&values);
    Ok(ExpectationResult {
        value: mean,
        p,
        method: Method::MonteCarlo,
        resolution: (p != 2.0).then_some(g),
        replicates: Some(replicates),
        error_estimate: Some(se),
    })
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = pairwise_sum(values) / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PartitionSpec;
    use crate::rng::Purpose;
    use rand::Rng;

    fn anchors(count: usize, dim: usize, tag: u64) -> Vec<Vec<f64>> {
        let mut rng = SeedSpec::new(17, Purpose::Anchors, tag).stream(0);
        (0..count)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect()
    }

    #[test]
    fn pointwise_p2_is_variance_plus_bias() {
        let part = PartitionSpec::diag(vec![0.4, 0.9]).build().unwrap();
        for a in anchors(50, 2, 0) {
            let prof = success_profile(&part, &a).unwrap();
            let var: f64 = prof.q.iter().map(|q| q * (1.0 - q)).sum::<f64>() / 9.0;
            let b = prof.mean() - prof.anchor_volume();
            let v = expected_pointwise(&part, &a, 2.0).unwrap();
            assert!((v - (var + b * b)).abs() < 1e-14);
        }
    }

    #[test]
    fn binomial_case() {
        // one stratum: count is Bernoulli(vol)
        let part = PartitionSpec::vertical(1, 2).build().unwrap();
        let v = expected_pointwise(&part, &[0.5, 0.6], 2.0).unwrap();
        assert!((v - 0.3 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn p4_two_point_enumeration() {
        // profile (0.2, 0.7) on a 2-stratum partition, checked by summing the
        // four outcomes directly
        let (q1, q2, vol) = (0.2, 0.7, 0.45);
        let mut direct = 0.0;
        for (k, w) in [(0.0, 0.8 * 0.3), (1.0, 0.2 * 0.3 + 0.8 * 0.7), (2.0, 0.2 * 0.7)] {
            let dev: f64 = k / 2.0 - vol;
            direct += w * dev.powi(4);
        }
        let fast = moment(0, &[q1, q2], 2, vol, 4.0);
        let slow = pmf_moment(0, &[q1, q2], 2, vol, 4.0);
        assert!((fast - direct).abs() < 1e-15);
        assert!((slow - direct).abs() < 1e-15);
    }

    #[test]
    fn moment_paths_agree() {
        let parts = [
            PartitionSpec::equivolume_diag(5).build().unwrap(),
            PartitionSpec::diag(vec![0.3, 0.5, 1.2]).build().unwrap(),
            PartitionSpec::jittered(2, 2).build().unwrap(),
            PartitionSpec::vertical(6, 2).build().unwrap(),
        ];
        for (t, part) in parts.iter().enumerate() {
            for a in anchors(200, 2, t as u64) {
                for p in [2.0, 4.0] {
                    let slow = expected_pointwise(part, &a, p).unwrap();
                    let fast = expected_pointwise_moments(part, &a, p).unwrap();
                    assert!((slow - fast).abs() < 1e-12, "{p} {a:?}");
                }
            }
        }
    }

    #[test]
    fn diagonal_split_matches_full_profile() {
        let part = PartitionSpec::equivolume_diag(9).build().unwrap();
        let mut full = vec![0.0; 9];
        let mut frac = Vec::new();
        for a in anchors(300, 2, 7) {
            let ones = split_profile(&part, &a, &mut full, &mut frac);
            let prof = success_profile(&part, &a).unwrap();
            let vol = a[0] * a[1];
            for p in [2.0, 3.0, 4.0] {
                let fast = moment(ones, &frac, 9, vol, p);
                let slow = PoissonBinomialPmf::from_probabilities(&prof.q).abs_moment_about(vol, p);
                assert!((fast - slow).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn hoeffding_examples() {
        let jit = PartitionSpec::jittered(2, 2).build().unwrap();
        assert!(hoeffding_gap(&jit, &[0.5, 0.5], 2.0).unwrap() > 0.0);
        assert!(hoeffding_gap(&jit, &[1.0, 1.0], 2.0).unwrap().abs() < 1e-15);
        // vertical strips at an anchor on a strip boundary with full height:
        // every q_i equals 0 or 1 and vol is a multiple of 1/N
        let vert = PartitionSpec::vertical(4, 2).build().unwrap();
        let single = PartitionSpec::vertical(1, 2).build().unwrap();
        assert!(hoeffding_gap(&single, &[0.3, 0.8], 4.0).unwrap().abs() < 1e-15);
        assert!(hoeffding_gap(&vert, &[0.5, 1.0], 2.0).unwrap() > 0.0);
        let skew = PartitionSpec::diag(vec![0.3]).build().unwrap();
        assert_eq!(
            hoeffding_gap(&skew, &[0.5, 0.5], 2.0),
            Err(ExpectationError::NotEquivolume)
        );
    }

    #[test]
    fn quadrature_small_cases() {
        // N = 2 anti-diagonal split
        let part = PartitionSpec::equivolume_diag(2).build().unwrap();
        let r = expected_lp(&part, 2.0, 256).unwrap();
        assert!((r.value - 0.05).abs() < 5e-5, "{}", r.value);
        assert!(r.error_estimate.unwrap() < 1e-4);
        // d = 1, two strata
        let part = PartitionSpec::vertical(2, 1).build().unwrap();
        let r = expected_lp(&part, 2.0, 1024).unwrap();
        assert!((r.value - 1.0 / 24.0).abs() < 1e-6);
        // a single stratum is plain Monte Carlo
        let part = PartitionSpec::vertical(1, 3).build().unwrap();
        let r = expected_lp_value(&part, 2.0, 32).unwrap();
        assert!((r - closed_form::mc(1, 3)).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let part = PartitionSpec::equivolume_diag(2).build().unwrap();
        assert!(matches!(
            expected_lp(&part, 0.5, 64),
            Err(ExpectationError::Exponent(_))
        ));
        assert!(matches!(
            expected_lp(&part, 2.0, 8),
            Err(ExpectationError::Resolution(8))
        ));
        assert!(matches!(
            expected_lp(&part, 2.0, 1 << 14),
            Err(ExpectationError::Budget { .. })
        ));
        let seed = SeedSpec::new(1, Purpose::Stratified, 0);
        assert!(expected_lp_empirical(&part, 2.0, 1, seed, 64).is_err());
    }

    #[test]
    fn empirical_is_reproducible() {
        let part = PartitionSpec::jittered(3, 2).build().unwrap();
        let seed = SeedSpec::new(5, Purpose::Stratified, 0);
        let a = expected_lp_empirical(&part, 2.0, 20, seed, 64).unwrap();
        let b = expected_lp_empirical(&part, 2.0, 20, seed, 64).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.replicates, Some(20));
    }
}
