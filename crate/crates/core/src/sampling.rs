//! Monte Carlo and stratified point sets.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{square_below, Partition, PartitionSet};
use crate::rng::SeedSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("cannot sample from a stratum with measure {0}")]
    DegenerateStratum(f64),
    #[error("point set needs N >= 1 and dim >= 1")]
    Empty,
}

/// Where a point set came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub family: String,
    pub seed: Option<SeedSpec>,
}

/// `N` points in `[0,1]^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    provenance: Provenance,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self, SamplingError> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(SamplingError::Empty);
        }
        Ok(Self {
            dim,
            coords,
            provenance: Provenance {
                family: "explicit".into(),
                seed: None,
            },
        })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self, SamplingError> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(SamplingError::Empty);
        }
        Self::new(dim, points.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Fraction of points in the half-open anchored box `[0, corner)`.
    pub fn fraction_below(&self, corner: &[f64]) -> f64 {
        let hits = self.iter().filter(|p| p.iter().zip(corner).all(|(x, c)| x < c)).count();
        hits as f64 / self.len() as f64
    }
}

/// `n` i.i.d. uniform points in `[0,1)^dim`.
pub fn sample_mc(n: usize, dim: usize, seed: SeedSpec) -> Result<PointSet, SamplingError> {
    if n == 0 || dim == 0 {
        return Err(SamplingError::Empty);
    }
    let mut rng = seed.stream(0);
    let coords = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    Ok(PointSet {
        dim,
        coords,
        provenance: Provenance {
            family: "mc".into(),
            seed: Some(seed),
        },
    })
}

/// Inverse of `c -> |{s + t <= c} ∩ [0,1]^2|`.
fn inverse_square_below(area: f64) -> f64 {
    if area <= 0.5 {
        (2.0 * area).sqrt()
    } else {
        2.0 - (2.0 * (1.0 - area).max(0.0)).sqrt()
    }
}

/// One uniform point in the stratum, appended to `out`.
pub fn sample_in_set<R: Rng + ?Sized>(
    set: &PartitionSet,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> Result<(), SamplingError> {
    match set {
        PartitionSet::VerticalStrip { index, count, dim } => {
            let u: f64 = rng.random();
            out.push((*index as f64 + u) / *count as f64);
            out.extend((1..*dim).map(|_| rng.random::<f64>()));
        }
        PartitionSet::GridCell { index, side } => {
            let m = *side as f64;
            out.extend(index.iter().map(|&k| (k as f64 + rng.random::<f64>()) / m));
        }
        PartitionSet::DiagonalSlice { lo, hi } => {
            // Invert the area profile along the diagonal, then uniform along
            // the segment s + t = c.
            let c_lo = lo * std::f64::consts::SQRT_2;
            let c_hi = (hi * std::f64::consts::SQRT_2).min(2.0);
            let (a_lo, a_hi) = (square_below(c_lo), square_below(c_hi));
            if a_hi - a_lo <= 0.0 {
                return Err(SamplingError::DegenerateStratum(a_hi - a_lo));
            }
            let target = a_lo + rng.random::<f64>() * (a_hi - a_lo);
            let c = inverse_square_below(target).clamp(c_lo, c_hi);
            let s_min = (c - 1.0).max(0.0);
            let s_max = c.min(1.0);
            let s = s_min + rng.random::<f64>() * (s_max - s_min);
            out.push(s);
            out.push((c - s).clamp(0.0, 1.0));
        }
        PartitionSet::AxisRegion(b) => {
            if b.volume() <= 0.0 {
                return Err(SamplingError::DegenerateStratum(b.volume()));
            }
            out.extend(
                b.lo()
                    .iter()
                    .zip(b.hi())
                    .map(|(l, h)| l + rng.random::<f64>() * (h - l)),
            );
        }
        PartitionSet::BoxUnion(boxes) => {
            let total = set.measure();
            if total <= 0.0 {
                return Err(SamplingError::DegenerateStratum(total));
            }
            let mut pick = rng.random::<f64>() * total;
            let chosen = boxes
                .iter()
                .find(|b| {
                    pick -= b.volume();
                    pick < 0.0
                })
                .unwrap_or_else(|| boxes.last().expect("non-empty union"));
            out.extend(
                chosen
                    .lo()
                    .iter()
                    .zip(chosen.hi())
                    .map(|(l, h)| l + rng.random::<f64>() * (h - l)),
            );
        }
    }
    Ok(())
}

/// One independent uniform point per stratum; point `i` lies in stratum `i`.
pub fn sample_stratified(p: &Partition, seed: SeedSpec) -> Result<PointSet, SamplingError> {
    let mut coords = Vec::with_capacity(p.len() * p.dim());
    for (i, set) in p.sets().iter().enumerate() {
        let mut rng = seed.stream(i as u64);
        sample_in_set(set, &mut rng, &mut coords)?;
    }
    Ok(PointSet {
        dim: p.dim(),
        coords,
        provenance: Provenance {
            family: p.family().to_string(),
            seed: Some(seed),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AxisBox, PartitionSpec};
    use crate::rng::Purpose;

    fn seed(r: u64) -> SeedSpec {
        SeedSpec::new(42, Purpose::Test, r)
    }

    #[test]
    fn mc_is_deterministic() {
        let a = sample_mc(1, 2, seed(0)).unwrap();
        let b = sample_mc(1, 2, seed(0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mc_moments() {
        let ps = sample_mc(10_000, 2, seed(1)).unwrap();
        for axis in 0..2 {
            let mean = ps.iter().map(|p| p[axis]).sum::<f64>() / 1e4;
            assert!((mean - 0.5).abs() < 3.0 * (1.0 / 12f64).sqrt() / 100.0);
        }
        let frac = ps.fraction_below(&[0.5, 0.5]);
        assert!((frac - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / 1e4).sqrt());
    }

    #[test]
    fn unit_region_is_plain_uniform() {
        let set = PartitionSet::AxisRegion(AxisBox::unit(3));
        let mut rng = seed(2).stream(0);
        let mut out = Vec::new();
        sample_in_set(&set, &mut rng, &mut out).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn lower_triangle_moments() {
        // s + t on the triangle {s + t <= 1}: density 2c on [0,1], mean 2/3,
        // variance 1/2 - 4/9 = 1/18.
        let set = PartitionSet::diagonal_slice(0.0, 1.0 / std::f64::consts::SQRT_2).unwrap();
        let mut rng = seed(3).stream(0);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let mut out = Vec::new();
            sample_in_set(&set, &mut rng, &mut out).unwrap();
            assert!(out[0] + out[1] <= 1.0 + 1e-15);
            sum += out[0] + out[1];
        }
        let sigma = (1.0f64 / 18.0).sqrt();
        assert!((sum / 1e4 - 2.0 / 3.0).abs() < 3.0 * sigma / 100.0);
    }

    #[test]
    fn grid_cell_draw() {
        let set = PartitionSet::GridCell {
            index: vec![1, 1],
            side: 2,
        };
        let mut rng = seed(4).stream(0);
        let mut out = Vec::new();
        sample_in_set(&set, &mut rng, &mut out).unwrap();
        assert!(out.iter().all(|x| (0.5..=1.0).contains(x)));
    }

    #[test]
    fn stratified_membership() {
        let specs = [
            PartitionSpec::jittered(5, 2),
            PartitionSpec::vertical(3, 2),
            PartitionSpec::equivolume_diag(2),
            PartitionSpec::equivolume_diag(7),
            PartitionSpec::equidistant_diag(5),
            PartitionSpec::jittered(3, 3),
        ];
        for spec in specs {
            let p = spec.build().unwrap();
            for r in 0..100 {
                let ps = sample_stratified(&p, seed(r)).unwrap();
                for (i, point) in ps.iter().enumerate() {
                    assert!(p.sets()[i].contains(point, 1e-12), "{spec:?} point {i}");
                }
            }
        }
        let p = PartitionSpec::equivolume_diag(2).build().unwrap();
        let ps = sample_stratified(&p, seed(9)).unwrap();
        let below = ps.iter().filter(|q| q[0] + q[1] <= 1.0).count();
        assert_eq!(below, 1);
    }

    #[test]
    fn degenerate_stratum_errors() {
        let b = AxisBox::new(vec![0.2, 0.2], vec![0.2, 0.5]).unwrap();
        let set = PartitionSet::AxisRegion(b);
        let mut rng = seed(5).stream(0);
        let mut out = Vec::new();
        assert!(matches!(
            sample_in_set(&set, &mut rng, &mut out),
            Err(SamplingError::DegenerateStratum(_))
        ));
    }
}
