//! Discrepancy of concrete point sets.
//!
//! Anchored boxes are half-open, `[0, x)`. A point with some coordinate equal
//! to 1 is therefore never counted by any anchored box.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::sampling::PointSet;

/// Largest corner lattice (number of cells) the grid kernels will allocate.
pub const MAX_GRID_CELLS: usize = 1 << 25;

/// Largest point set accepted by [`star_disc_exact_2d`].
pub const MAX_EXACT_STAR_POINTS: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscrepancyError {
    #[error("empty point set")]
    Empty,
    #[error("grid resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("exponent p must be >= 1, got {0}")]
    Exponent(f64),
    #[error("grid of {cells} cells exceeds the budget of {budget}")]
    Budget { cells: f64, budget: usize },
    #[error("exact star discrepancy needs dim = 2, got {0}")]
    NotPlanar(usize),
    #[error("exact star discrepancy is limited to {max} points, got {got}")]
    TooManyPoints { got: usize, max: usize },
    #[error("star discrepancy on a grid needs dim >= 2, got {0}")]
    GridDim(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DiscrepancyKind {
    /// Squared L2 discrepancy.
    L2,
    /// p-th power of the L_p discrepancy.
    Lp {
        p: f64,
    },
    StarExact,
    StarGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub kind: DiscrepancyKind,
    pub exact: bool,
    /// Grid resolution for quadrature and grid kernels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    /// True when point coordinates were added to the grid lattice.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub augmented: bool,
}

/// Squared L2 discrepancy by Warnock's closed form, `O(N^2 d)`.
pub fn l2_warnock(ps: &PointSet) -> Result<DiscrepancyResult, DiscrepancyError> {
    if ps.is_empty() {
        return Err(DiscrepancyError::Empty);
    }
    let n = ps.len();
    let d = ps.dim();
    let nf = n as f64;
    // complements 1 - x stored once
    let comp: Vec<f64> = ps.coords().iter().map(|x| 1.0 - x).collect();
    let single: f64 = ps
        .iter()
        .map(|p| p.iter().map(|x| 0.5 * (1.0 - x * x)).product::<f64>())
        .sum();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|m| {
            let a = &comp[m * d..(m + 1) * d];
            let diag: f64 = a.iter().product();
            let off: f64 = (m + 1..n)
                .map(|k| {
                    let b = &comp[k * d..(k + 1) * d];
                    a.iter().zip(b).map(|(u, v)| u.min(*v)).product::<f64>()
                })
                .sum();
            diag + 2.0 * off
        })
        .collect();
    let pair = pairwise_sum(&rows);
    let value = 3f64.powi(-(d as i32)) - 2.0 / nf * single + pair / (nf * nf);
    Ok(DiscrepancyResult {
        value: value.max(0.0),
        kind: DiscrepancyKind::L2,
        exact: true,
        resolution: None,
        augmented: false,
    })
}

/// Deterministic pairwise summation.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn cells_of(axes: &[Vec<f64>]) -> Result<usize, DiscrepancyError> {
    let cells: f64 = axes.iter().map(|a| a.len() as f64).product();
    if cells > MAX_GRID_CELLS as f64 {
        return Err(DiscrepancyError::Budget {
            cells,
            budget: MAX_GRID_CELLS,
        });
    }
    Ok(cells as usize)
}

/// Counts of points in the box `[0, corner]` for every corner of the lattice
/// `axes[0] x ... x axes[d-1]` (flat, axis 0 fastest).
///
/// With `closed = false` a point is counted when every coordinate is strictly
/// below the corner, otherwise when it is at most the corner. Points with a
/// coordinate equal to 1 are never counted.
fn corner_counts(ps: &PointSet, axes: &[Vec<f64>], closed: bool) -> Vec<u32> {
    let d = axes.len();
    let cells: usize = axes.iter().map(Vec::len).product();
    let mut counts = vec![0u32; cells];
    'points: for p in ps.iter() {
        let mut flat = 0usize;
        let mut stride = 1usize;
        for (x, axis) in p.iter().zip(axes) {
            if *x >= 1.0 {
                continue 'points;
            }
            let j = if closed {
                axis.partition_point(|c| c < x)
            } else {
                axis.partition_point(|c| c <= x)
            };
            if j == axis.len() {
                continue 'points;
            }
            flat += j * stride;
            stride *= axis.len();
        }
        counts[flat] += 1;
    }
    // prefix sums along each axis
    let mut stride = 1usize;
    for axis in axes.iter().take(d) {
        let len = axis.len();
        let block = stride * len;
        for start in (0..cells).step_by(block) {
            for j in 1..len {
                let row = start + j * stride;
                for k in 0..stride {
                    counts[row + k] += counts[row + k - stride];
                }
            }
        }
        stride = block;
    }
    counts
}

/// Volumes of the anchored boxes at every lattice corner (flat, axis 0 fastest).
fn corner_volumes(axes: &[Vec<f64>]) -> Vec<f64> {
    let mut vols = vec![1.0];
    for axis in axes {
        let mut next = Vec::with_capacity(vols.len() * axis.len());
        for &c in axis {
            next.extend(vols.iter().map(|v| v * c));
        }
        vols = next;
    }
    vols
}

/// Midpoint-rule value of `int |Z_x - |[0,x)||^p dx` over a `G^d` tensor grid.
///
/// Returns the p-th power (no root is taken).
pub fn lp_quadrature(ps: &PointSet, p: f64, resolution: usize) -> Result<DiscrepancyResult, DiscrepancyError> {
    if ps.is_empty() {
        return Err(DiscrepancyError::Empty);
    }
    if resolution < 2 {
        return Err(DiscrepancyError::Resolution(resolution));
    }
    if p < 1.0 || p.is_nan() {
        return Err(DiscrepancyError::Exponent(p));
    }
    let g = resolution as f64;
    let mids: Vec<f64> = (0..resolution).map(|j| (j as f64 + 0.5) / g).collect();
    let axes = vec![mids; ps.dim()];
    let cells = cells_of(&axes)?;
    let counts = corner_counts(ps, &axes, false);
    let vols = corner_volumes(&axes);
    let inv_n = 1.0 / ps.len() as f64;
    let chunk_sums: Vec<f64> = counts
        .par_chunks(resolution)
        .zip(vols.par_chunks(resolution))
        .map(|(c, v)| {
            c.iter()
                .zip(v)
                .map(|(&k, &vol)| {
                    let diff = (k as f64 * inv_n - vol).abs();
                    if p == 2.0 {
                        diff * diff
                    } else {
                        diff.powf(p)
                    }
                })
                .sum::<f64>()
        })
        .collect();
    Ok(DiscrepancyResult {
        value: pairwise_sum(&chunk_sums) / cells as f64,
        kind: DiscrepancyKind::Lp { p },
        exact: false,
        resolution: Some(resolution),
        augmented: false,
    })
}

/// Exact star discrepancy in the plane, `O(N^2)` after sorting.
///
/// The supremum is attained in the closure of the count-jump set, so both
/// the open count (`x < a, y < b`, for the "too few points" side) and the
/// closed count (`x <= a, y <= b`, for the "too many" side) are evaluated at
/// every critical corner built from the point coordinates and 1.
pub fn star_disc_exact_2d(ps: &PointSet) -> Result<DiscrepancyResult, DiscrepancyError> {
    if ps.is_empty() {
        return Err(DiscrepancyError::Empty);
    }
    if ps.dim() != 2 {
        return Err(DiscrepancyError::NotPlanar(ps.dim()));
    }
    if ps.len() > MAX_EXACT_STAR_POINTS {
        return Err(DiscrepancyError::TooManyPoints {
            got: ps.len(),
            max: MAX_EXACT_STAR_POINTS,
        });
    }
    let inv_n = 1.0 / ps.len() as f64;
    // Points touching the far faces are never counted.
    let mut pts: Vec<(f64, f64)> = ps
        .iter()
        .filter(|p| p[0] < 1.0 && p[1] < 1.0)
        .map(|p| (p[0], p[1]))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut xs: Vec<f64> = ps.iter().map(|p| p[0]).filter(|&x| x < 1.0).collect();
    xs.push(1.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut ys: Vec<f64> = ps.iter().map(|p| p[1]).filter(|&y| y < 1.0).collect();
    ys.push(1.0);
    ys.sort_by(f64::total_cmp);
    ys.dedup();

    let mut active: Vec<f64> = Vec::with_capacity(pts.len());
    let mut next = 0usize;
    let mut best = 0.0_f64;
    for &a in &xs {
        // open side: points with x < a
        while next < pts.len() && pts[next].0 < a {
            let y = pts[next].1;
            let at = active.partition_point(|v| *v < y);
            active.insert(at, y);
            next += 1;
        }
        let mut k = 0usize;
        for &b in &ys {
            while k < active.len() && active[k] < b {
                k += 1;
            }
            best = best.max(a * b - k as f64 * inv_n);
        }
        // closed side: points with x <= a
        let mut closed = active.clone();
        let mut extra = next;
        while extra < pts.len() && pts[extra].0 <= a {
            let y = pts[extra].1;
            let at = closed.partition_point(|v| *v < y);
            closed.insert(at, y);
            extra += 1;
        }
        let mut k = 0usize;
        for &b in &ys {
            while k < closed.len() && closed[k] <= b {
                k += 1;
            }
            best = best.max(k as f64 * inv_n - a * b);
        }
    }
    Ok(DiscrepancyResult {
        value: best.clamp(0.0, 1.0),
        kind: DiscrepancyKind::StarExact,
        exact: true,
        resolution: None,
        augmented: false,
    })
}

/// Lower bound on the star discrepancy from the lattice `{k/G}^d`, augmented
/// with the point coordinates on every axis when that fits the cell budget.
pub fn star_disc_grid(ps: &PointSet, resolution: usize) -> Result<DiscrepancyResult, DiscrepancyError> {
    if ps.is_empty() {
        return Err(DiscrepancyError::Empty);
    }
    if ps.dim() < 2 {
        return Err(DiscrepancyError::GridDim(ps.dim()));
    }
    if resolution < 2 {
        return Err(DiscrepancyError::Resolution(resolution));
    }
    let g = resolution as f64;
    let lattice: Vec<f64> = (1..=resolution).map(|k| k as f64 / g).collect();
    let augmented_axes: Vec<Vec<f64>> = (0..ps.dim())
        .map(|axis| {
            let mut a = lattice.clone();
            a.extend(ps.iter().map(|p| p[axis]));
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        })
        .collect();
    let (axes, augmented) = if cells_of(&augmented_axes).is_ok() {
        (augmented_axes, true)
    } else {
        (vec![lattice; ps.dim()], false)
    };
    cells_of(&axes)?;
    let open = corner_counts(ps, &axes, false);
    let closed = corner_counts(ps, &axes, true);
    let vols = corner_volumes(&axes);
    let inv_n = 1.0 / ps.len() as f64;
    let value = open
        .iter()
        .zip(&closed)
        .zip(&vols)
        .map(|((&o, &c), &v)| (v - o as f64 * inv_n).max(c as f64 * inv_n - v))
        .fold(0.0_f64, f64::max);
    Ok(DiscrepancyResult {
        value: value.clamp(0.0, 1.0),
        kind: DiscrepancyKind::StarGrid,
        exact: false,
        resolution: Some(resolution),
        augmented,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, SeedSpec};
    use crate::sampling::sample_mc;

    fn pts(points: &[&[f64]]) -> PointSet {
        PointSet::from_points(&points.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    /// Brute-force star discrepancy over all critical corners, `O(N^3)`.
    fn star_enumeration(ps: &PointSet) -> f64 {
        let n = ps.len() as f64;
        let mut xs: Vec<f64> = ps.iter().map(|p| p[0]).collect();
        let mut ys: Vec<f64> = ps.iter().map(|p| p[1]).collect();
        xs.push(1.0);
        ys.push(1.0);
        let mut best = 0.0_f64;
        for &a in &xs {
            for &b in &ys {
                let open = ps.iter().filter(|p| p[0] < a && p[1] < b).count() as f64;
                best = best.max(a * b - open / n);
                if a < 1.0 && b < 1.0 {
                    let closed = ps.iter().filter(|p| p[0] <= a && p[1] <= b).count() as f64;
                    best = best.max(closed / n - a * b);
                }
            }
        }
        best
    }

    #[test]
    fn warnock_single_points() {
        // int_0^1 x^2 dx = 1/3 and int (x1 x2)^2 = 1/9
        let r = l2_warnock(&pts(&[&[1.0]])).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        let r = l2_warnock(&pts(&[&[1.0, 1.0]])).unwrap();
        assert!((r.value - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn warnock_matches_quadrature_in_plane() {
        let ps = sample_mc(64, 2, SeedSpec::new(11, Purpose::Test, 0)).unwrap();
        let w = l2_warnock(&ps).unwrap().value;
        let q = lp_quadrature(&ps, 2.0, 2048).unwrap().value;
        assert!((w - q).abs() < 1e-5, "{w} vs {q}");
    }

    #[test]
    fn quadrature_direct_integrals() {
        // Z_x = 1 everywhere: int (1 - x)^2 = 1/3
        let r = lp_quadrature(&pts(&[&[0.0]]), 2.0, 4096).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-7);
        // never counted: int x^4 = 1/5
        let r = lp_quadrature(&pts(&[&[1.0]]), 4.0, 4096).unwrap();
        assert!((r.value - 0.2).abs() < 1e-7);
    }

    #[test]
    fn quadrature_rejects_bad_input() {
        let ps = pts(&[&[0.5, 0.5]]);
        assert!(matches!(
            lp_quadrature(&ps, 2.0, 1),
            Err(DiscrepancyError::Resolution(1))
        ));
        assert!(matches!(
            lp_quadrature(&ps, 0.5, 16),
            Err(DiscrepancyError::Exponent(_))
        ));
        let cube = PointSet::new(5, vec![0.5; 5]).unwrap();
        assert!(matches!(
            lp_quadrature(&cube, 2.0, 1024),
            Err(DiscrepancyError::Budget { .. })
        ));
    }

    #[test]
    fn star_small_cases() {
        let r = star_disc_exact_2d(&pts(&[&[0.5, 0.5]])).unwrap();
        assert!((r.value - 0.75).abs() < 1e-15);
        let r = star_disc_exact_2d(&pts(&[&[0.0, 0.0]])).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert!(star_disc_exact_2d(&PointSet::new(3, vec![0.1; 3]).unwrap()).is_err());
    }

    #[test]
    fn star_exact_matches_enumeration() {
        for r in 0..20 {
            let ps = sample_mc(1 + 3 * r as usize, 2, SeedSpec::new(5, Purpose::Test, r)).unwrap();
            let fast = star_disc_exact_2d(&ps).unwrap().value;
            let slow = star_enumeration(&ps);
            assert!((fast - slow).abs() < 1e-14, "{fast} vs {slow}");
        }
        // ties and points on the far faces
        let ps = pts(&[&[0.5, 0.5], &[0.5, 0.25], &[1.0, 0.2], &[0.25, 1.0], &[0.25, 0.5]]);
        assert!((star_disc_exact_2d(&ps).unwrap().value - star_enumeration(&ps)).abs() < 1e-15);
    }

    #[test]
    fn grid_is_a_lower_bound() {
        let ps = sample_mc(500, 2, SeedSpec::new(6, Purpose::Test, 0)).unwrap();
        let exact = star_disc_exact_2d(&ps).unwrap().value;
        for g in [4, 16, 64] {
            let grid = star_disc_grid(&ps, g).unwrap();
            assert!(grid.value <= exact + 1e-15);
        }
    }

    #[test]
    fn grid_center_point_in_three_dims() {
        let ps = PointSet::new(3, vec![0.5; 3]).unwrap();
        let r = star_disc_grid(&ps, 64).unwrap();
        assert!((r.value - 0.875).abs() < 1e-15);
    }

    #[test]
    fn grid_monotone_in_nested_resolution() {
        let ps = sample_mc(40, 3, SeedSpec::new(8, Purpose::Test, 0)).unwrap();
        let mut last = 0.0;
        for g in [2, 4, 8, 16, 32] {
            let v = star_disc_grid(&ps, g).unwrap().value;
            assert!(v >= last);
            last = v;
        }
    }
}
