//! Partitions of the unit cube and exact stratum/box intersection areas.
//!
//! Every other module consumes the quantities defined here: stratum
//! measures, the measure of a stratum inside an axis-aligned box, and the
//! per-stratum success probabilities `q_i(x) = |Omega_i ∩ [0,x)| / |Omega_i|`.
//!
//! Diagonal slices live in the unit square only. A slice is bounded by two
//! lines `s + t = c` orthogonal to the main diagonal; the distance of such a
//! line from the origin is `v = c / sqrt(2)`, so callers speak in `v` and the
//! area kernels work in the offset `c`.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for the measure-sum and equivolume checks.
pub const MEASURE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("negative input to area kernel: {0}")]
    NegativeInput(String),
    #[error("point coordinate {value} on axis {axis} outside [0,1]")]
    OutOfCube { axis: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("box lower corner exceeds upper corner on axis {0}")]
    InvertedBox(usize),
    #[error("cut vector must be strictly increasing in (0, sqrt 2): {0}")]
    NonMonotoneCuts(String),
    #[error("expected {expected} cut positions, got {got}")]
    CutCount { expected: usize, got: usize },
    #[error("jittered partition needs N = m^d, but {n} is not a perfect {dim}-th power")]
    NotPerfectPower { n: usize, dim: usize },
    #[error("diagonal families are only defined on the unit square (dim = 2), got dim = {0}")]
    DiagonalNeedsSquare(usize),
    #[error("partition needs N >= 1 and dim >= 1")]
    Empty,
    #[error("invalid stratum: {0}")]
    InvalidSet(String),
    #[error("strata measures sum to {0}, expected 1")]
    BadCover(f64),
}

fn positive_part(t: f64) -> f64 {
    if t > 0.0 {
        t
    } else {
        0.0
    }
}

/// Area of `{(s,t) in [0,x] x [0,y] : s + t <= c}`.
///
/// Clamped-square form: every corner that the half-plane cuts off
/// contributes one signed triangle.
pub fn halfplane_box_area(c: f64, x: f64, y: f64) -> Result<f64, GeometryError> {
    if c < 0.0 || x < 0.0 || y < 0.0 {
        return Err(GeometryError::NegativeInput(format!("c={c}, x={x}, y={y}")));
    }
    Ok(halfplane_area_unchecked(c, x, y))
}

#[inline]
pub(crate) fn halfplane_area_unchecked(c: f64, x: f64, y: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let a = positive_part(c - x);
    let b = positive_part(c - y);
    let e = positive_part(c - x - y);
    0.5 * (c * c - a * a - b * b + e * e)
}

/// Measure of the lower-left part `{s + t <= c}` of the unit square.
#[inline]
pub(crate) fn square_below(c: f64) -> f64 {
    halfplane_area_unchecked(c, 1.0, 1.0)
}

/// Half-open anchored box `[0, corner)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchoredBox {
    corner: Vec<f64>,
}

impl AnchoredBox {
    pub fn new(corner: Vec<f64>) -> Result<Self, GeometryError> {
        check_in_cube(&corner)?;
        Ok(Self { corner })
    }

    pub fn corner(&self) -> &[f64] {
        &self.corner
    }

    pub fn volume(&self) -> f64 {
        self.corner.iter().product()
    }

    pub fn to_axis_box(&self) -> AxisBox {
        AxisBox {
            lo: vec![0.0; self.corner.len()],
            hi: self.corner.clone(),
        }
    }
}

/// Half-open axis box `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GeometryError> {
        if lo.len() != hi.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        check_in_cube(&lo)?;
        check_in_cube(&hi)?;
        if let Some(axis) = lo.iter().zip(&hi).position(|(l, h)| l > h) {
            return Err(GeometryError::InvertedBox(axis));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn anchored(corner: &[f64]) -> Result<Self, GeometryError> {
        Self::new(vec![0.0; corner.len()], corner.to_vec())
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(p, (l, h))| *l <= *p && *p < *h)
    }

    fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }
}

fn check_in_cube(point: &[f64]) -> Result<(), GeometryError> {
    for (axis, &value) in point.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(GeometryError::OutOfCube { axis, value });
        }
    }
    Ok(())
}

#[inline]
fn interval_overlap(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> f64 {
    positive_part(a_hi.min(b_hi) - a_lo.max(b_lo))
}

/// One stratum of a partition.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSet {
    /// `{x : index/count <= x_1 <= (index+1)/count}`; `index` is zero-based.
    VerticalStrip { index: usize, count: usize, dim: usize },
    /// Region of the unit square between the anti-diagonal lines at distances
    /// `lo` and `hi` from the origin.
    DiagonalSlice { lo: f64, hi: f64 },
    /// Cube `prod [k_j/side, (k_j+1)/side]`.
    GridCell { index: Vec<usize>, side: usize },
    /// A single axis box.
    AxisRegion(AxisBox),
    /// Finite union of axis boxes with pairwise null intersections.
    BoxUnion(Vec<AxisBox>),
}

impl PartitionSet {
    pub fn diagonal_slice(lo: f64, hi: f64) -> Result<Self, GeometryError> {
        if !(0.0..SQRT_2 + 1e-15).contains(&lo) || hi <= lo || hi > SQRT_2 + 1e-15 {
            return Err(GeometryError::InvalidSet(format!(
                "diagonal slice needs 0 <= lo < hi <= sqrt 2, got ({lo}, {hi})"
            )));
        }
        Ok(Self::DiagonalSlice { lo, hi: hi.min(SQRT_2) })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::VerticalStrip { dim, .. } => *dim,
            Self::DiagonalSlice { .. } => 2,
            Self::GridCell { index, .. } => index.len(),
            Self::AxisRegion(b) => b.dim(),
            Self::BoxUnion(boxes) => boxes.first().map_or(0, AxisBox::dim),
        }
    }

    /// Offsets `c = v sqrt 2` of a diagonal slice's bounding lines.
    fn offsets(lo: f64, hi: f64) -> (f64, f64) {
        (lo * SQRT_2, (hi * SQRT_2).min(2.0))
    }

    pub fn measure(&self) -> f64 {
        match self {
            Self::VerticalStrip { count, .. } => 1.0 / *count as f64,
            Self::DiagonalSlice { lo, hi } => {
                let (c_lo, c_hi) = Self::offsets(*lo, *hi);
                square_below(c_hi) - square_below(c_lo)
            }
            Self::GridCell { index, side } => (1.0 / *side as f64).powi(index.len() as i32),
            Self::AxisRegion(b) => b.volume(),
            Self::BoxUnion(boxes) => boxes.iter().map(AxisBox::volume).sum(),
        }
    }

    /// Measure of the stratum inside the half-open box `[lo, hi)`.
    pub fn intersection(&self, b: &AxisBox) -> f64 {
        self.intersection_with(b.lo(), b.hi())
    }

    /// Measure of the stratum inside the anchored box `[0, corner)`.
    pub fn anchored_intersection(&self, corner: &[f64]) -> f64 {
        match self {
            Self::DiagonalSlice { lo, hi } => {
                let (c_lo, c_hi) = Self::offsets(*lo, *hi);
                let (x, y) = (corner[0], corner[1]);
                halfplane_area_unchecked(c_hi, x, y) - halfplane_area_unchecked(c_lo, x, y)
            }
            Self::VerticalStrip { index, count, .. } => {
                let n = *count as f64;
                interval_overlap(0.0, corner[0], *index as f64 / n, (*index + 1) as f64 / n)
                    * corner[1..].iter().product::<f64>()
            }
            Self::GridCell { index, side } => {
                let m = *side as f64;
                index
                    .iter()
                    .zip(corner)
                    .map(|(&k, &c)| interval_overlap(0.0, c, k as f64 / m, (k + 1) as f64 / m))
                    .product()
            }
            _ => {
                let zeros = vec![0.0; corner.len()];
                self.intersection_with(&zeros, corner)
            }
        }
    }

    fn intersection_with(&self, lo: &[f64], hi: &[f64]) -> f64 {
        match self {
            Self::VerticalStrip { index, count, .. } => {
                let n = *count as f64;
                let first = interval_overlap(lo[0], hi[0], *index as f64 / n, (*index + 1) as f64 / n);
                first * lo[1..].iter().zip(&hi[1..]).map(|(l, h)| h - l).product::<f64>()
            }
            Self::DiagonalSlice { .. } => {
                // inclusion-exclusion over the four anchored corners
                let f = |x: f64, y: f64| self.anchored_intersection(&[x, y]);
                f(hi[0], hi[1]) - f(lo[0], hi[1]) - f(hi[0], lo[1]) + f(lo[0], lo[1])
            }
            Self::GridCell { index, side } => {
                let m = *side as f64;
                index
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| interval_overlap(lo[j], hi[j], k as f64 / m, (k + 1) as f64 / m))
                    .product()
            }
            Self::AxisRegion(b) => box_overlap(b, lo, hi),
            Self::BoxUnion(boxes) => boxes.iter().map(|b| box_overlap(b, lo, hi)).sum(),
        }
    }

    /// Whether `point` lies in the (closed) stratum, up to `tol`.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        let within = |v: f64, a: f64, b: f64| v >= a - tol && v <= b + tol;
        match self {
            Self::VerticalStrip { index, count, .. } => {
                let n = *count as f64;
                within(point[0], *index as f64 / n, (*index + 1) as f64 / n)
                    && point.iter().all(|&v| within(v, 0.0, 1.0))
            }
            Self::DiagonalSlice { lo, hi } => {
                let (c_lo, c_hi) = Self::offsets(*lo, *hi);
                point.iter().all(|&v| within(v, 0.0, 1.0)) && within(point[0] + point[1], c_lo, c_hi)
            }
            Self::GridCell { index, side } => {
                let m = *side as f64;
                index
                    .iter()
                    .zip(point)
                    .all(|(&k, &v)| within(v, k as f64 / m, (k + 1) as f64 / m))
            }
            Self::AxisRegion(b) => b
                .lo()
                .iter()
                .zip(b.hi())
                .zip(point)
                .all(|((&l, &h), &v)| within(v, l, h)),
            Self::BoxUnion(boxes) => boxes.iter().any(|b| {
                b.lo()
                    .iter()
                    .zip(b.hi())
                    .zip(point)
                    .all(|((&l, &h), &v)| within(v, l, h))
            }),
        }
    }

    /// Euclidean diameter of the closed stratum.
    pub fn diameter(&self) -> f64 {
        match self {
            Self::VerticalStrip { count, dim, .. } => {
                let w = 1.0 / *count as f64;
                (w * w + (*dim as f64 - 1.0)).sqrt()
            }
            Self::DiagonalSlice { lo, hi } => slice_diameter(*lo, *hi),
            Self::GridCell { index, side } => (index.len() as f64).sqrt() / *side as f64,
            Self::AxisRegion(b) => b.diameter(),
            Self::BoxUnion(boxes) => {
                let corners: Vec<Vec<f64>> = boxes.iter().flat_map(box_corners).collect();
                max_pairwise_distance(&corners)
            }
        }
    }
}

fn box_overlap(b: &AxisBox, lo: &[f64], hi: &[f64]) -> f64 {
    b.lo()
        .iter()
        .zip(b.hi())
        .enumerate()
        .map(|(j, (&l, &h))| interval_overlap(lo[j], hi[j], l, h))
        .product()
}

fn box_corners(b: &AxisBox) -> Vec<Vec<f64>> {
    let d = b.dim();
    (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|j| if mask >> j & 1 == 1 { b.hi()[j] } else { b.lo()[j] })
                .collect()
        })
        .collect()
}

fn max_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = 0.0_f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}

/// Vertices of the convex polygon `{s + t in [c_lo, c_hi]} ∩ [0,1]^2`.
fn slice_vertices(c_lo: f64, c_hi: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for c in [c_lo, c_hi] {
        // endpoints of the segment s + t = c inside the square
        let s_min = positive_part(c - 1.0);
        let s_max = c.min(1.0);
        out.push(vec![s_min, c - s_min]);
        out.push(vec![s_max, c - s_max]);
    }
    for corner in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
        let s = corner[0] + corner[1];
        if s >= c_lo && s <= c_hi {
            out.push(corner.to_vec());
        }
    }
    out
}

fn slice_diameter(lo: f64, hi: f64) -> f64 {
    let (c_lo, c_hi) = PartitionSet::offsets(lo, hi);
    max_pairwise_distance(&slice_vertices(c_lo, c_hi))
}

/// Named families of partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Diag,
    EquivolumeDiag,
    EquidistantDiag,
    Vertical,
    Jittered,
    Custom,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Diag => "diag",
            Self::EquivolumeDiag => "equivolume_diag",
            Self::EquidistantDiag => "equidistant_diag",
            Self::Vertical => "vertical",
            Self::Jittered => "jittered",
            Self::Custom => "custom",
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Self::Diag | Self::EquivolumeDiag | Self::EquidistantDiag)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "diag" => Self::Diag,
            "equivolume_diag" => Self::EquivolumeDiag,
            "equidistant_diag" => Self::EquidistantDiag,
            "vertical" => Self::Vertical,
            "jittered" => Self::Jittered,
            "custom" => Self::Custom,
            other => return Err(format!("unknown partition family `{other}`")),
        })
    }
}

/// Recipe for a partition; also the on-disk partition spec format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub family: Family,
    pub dim: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
}

impl PartitionSpec {
    pub fn diag(v: Vec<f64>) -> Self {
        Self {
            family: Family::Diag,
            dim: 2,
            n: v.len() + 1,
            v: Some(v),
        }
    }

    pub fn equivolume_diag(n: usize) -> Self {
        Self {
            family: Family::EquivolumeDiag,
            dim: 2,
            n,
            v: None,
        }
    }

    pub fn equidistant_diag(n: usize) -> Self {
        Self {
            family: Family::EquidistantDiag,
            dim: 2,
            n,
            v: None,
        }
    }

    pub fn vertical(n: usize, dim: usize) -> Self {
        Self {
            family: Family::Vertical,
            dim,
            n,
            v: None,
        }
    }

    /// Jittered partition with `side^dim` congruent cubes.
    pub fn jittered(side: usize, dim: usize) -> Self {
        Self {
            family: Family::Jittered,
            dim,
            n: side.pow(dim as u32),
            v: None,
        }
    }

    pub fn build(&self) -> Result<Partition, GeometryError> {
        build_partition(self)
    }
}

/// Cut distances `v_1 < ... < v_{N-1}` of the equivolume diagonal partition.
pub fn equivolume_cuts(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (1..n)
        .map(|i| {
            if i <= n / 2 {
                (i as f64 / nf).sqrt()
            } else {
                SQRT_2 - ((n - i) as f64 / nf).sqrt()
            }
        })
        .collect()
}

/// Cut distances `v_i = sqrt 2 * i / N`.
pub fn equidistant_cuts(n: usize) -> Vec<f64> {
    (1..n).map(|i| SQRT_2 * i as f64 / n as f64).collect()
}

fn integer_root(n: usize, dim: usize) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / dim as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|m| m.checked_pow(dim as u32) == Some(n))
}

/// A validated, immutable partition of `[0,1]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    sets: Vec<PartitionSet>,
    dim: usize,
    family: Family,
    params: Vec<f64>,
    measures: Vec<f64>,
    /// Offsets `c_0 = 0 < c_1 < ... < c_N = 2` for diagonal families.
    offsets: Option<Vec<f64>>,
    equivolume: bool,
}

/// Outcome of [`validate_partition`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub measure_sum: f64,
    pub equivolume: bool,
    pub measures: Vec<f64>,
    pub covers: bool,
}

pub fn build_partition(spec: &PartitionSpec) -> Result<Partition, GeometryError> {
    let (n, dim) = (spec.n, spec.dim);
    if n == 0 || dim == 0 {
        return Err(GeometryError::Empty);
    }
    let (sets, params) = match spec.family {
        Family::Diag | Family::EquivolumeDiag | Family::EquidistantDiag => {
            if dim != 2 {
                return Err(GeometryError::DiagonalNeedsSquare(dim));
            }
            let v = match spec.family {
                Family::EquivolumeDiag => equivolume_cuts(n),
                Family::EquidistantDiag => equidistant_cuts(n),
                _ => spec.v.clone().unwrap_or_default(),
            };
            if v.len() != n - 1 {
                return Err(GeometryError::CutCount {
                    expected: n - 1,
                    got: v.len(),
                });
            }
            let increasing = v.windows(2).all(|w| w[0] < w[1]);
            let inside = v.iter().all(|&x| x > 0.0 && x < SQRT_2);
            if !increasing || !inside {
                return Err(GeometryError::NonMonotoneCuts(format!("{v:?}")));
            }
            let bounds: Vec<f64> = std::iter::once(0.0)
                .chain(v.iter().copied())
                .chain(std::iter::once(SQRT_2))
                .collect();
            let sets = bounds
                .windows(2)
                .map(|w| PartitionSet::DiagonalSlice { lo: w[0], hi: w[1] })
                .collect();
            (sets, v)
        }
        Family::Vertical => {
            let sets = (0..n)
                .map(|index| PartitionSet::VerticalStrip { index, count: n, dim })
                .collect();
            (sets, Vec::new())
        }
        Family::Jittered => {
            let side = integer_root(n, dim).ok_or(GeometryError::NotPerfectPower { n, dim })?;
            let sets = (0..n)
                .map(|flat| {
                    let mut rest = flat;
                    let index = (0..dim)
                        .map(|_| {
                            let k = rest % side;
                            rest /= side;
                            k
                        })
                        .collect();
                    PartitionSet::GridCell { index, side }
                })
                .collect();
            (sets, Vec::new())
        }
        Family::Custom => {
            return Err(GeometryError::InvalidSet(
                "custom partitions are built with Partition::from_sets".into(),
            ))
        }
    };
    Partition::assemble(sets, dim, spec.family, params)
}

impl Partition {
    /// Builds a custom partition from explicit strata.
    pub fn from_sets(sets: Vec<PartitionSet>, dim: usize) -> Result<Self, GeometryError> {
        if sets.is_empty() || dim == 0 {
            return Err(GeometryError::Empty);
        }
        if let Some(bad) = sets.iter().find(|s| s.dim() != dim) {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Self::assemble(sets, dim, Family::Custom, Vec::new())
    }

    fn assemble(sets: Vec<PartitionSet>, dim: usize, family: Family, params: Vec<f64>) -> Result<Self, GeometryError> {
        let measures: Vec<f64> = sets.iter().map(PartitionSet::measure).collect();
        if let Some(i) = measures.iter().position(|&m| m <= 0.0) {
            return Err(GeometryError::InvalidSet(format!("stratum {i} has zero measure")));
        }
        let total: f64 = measures.iter().sum();
        if (total - 1.0).abs() > MEASURE_TOL {
            return Err(GeometryError::BadCover(total));
        }
        let offsets = family.is_diagonal().then(|| {
            std::iter::once(0.0)
                .chain(params.iter().map(|v| v * SQRT_2))
                .chain(std::iter::once(2.0))
                .collect()
        });
        let inv_n = 1.0 / sets.len() as f64;
        let equivolume = measures.iter().all(|m| (m - inv_n).abs() < MEASURE_TOL);
        Ok(Self {
            sets,
            dim,
            family,
            params,
            measures,
            offsets,
            equivolume,
        })
    }

    pub fn sets(&self) -> &[PartitionSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Cut distances for diagonal families, empty otherwise.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn is_equivolume(&self) -> bool {
        self.equivolume
    }

    /// Whether the partition is invariant under swapping the two axes of
    /// the square.
    pub fn is_diagonal_symmetric(&self) -> bool {
        self.offsets.is_some()
    }

    /// Offsets `0 = c_0 < ... < c_N = 2` of a diagonal family's cut lines.
    pub(crate) fn diagonal_offsets(&self) -> Option<&[f64]> {
        self.offsets.as_deref()
    }

    pub fn spec(&self) -> PartitionSpec {
        PartitionSpec {
            family: self.family,
            dim: self.dim,
            n: self.len(),
            v: (self.family == Family::Diag).then(|| self.params.clone()),
        }
    }

    /// Writes `q_i(anchor)` into `out` without allocating.
    pub fn success_profile_into(&self, anchor: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.sets.len());
        if let Some(offsets) = &self.offsets {
            let (x, y) = (anchor[0], anchor[1]);
            let mut below = 0.0;
            for (i, c) in offsets[1..].iter().enumerate() {
                let next = if i + 1 == self.sets.len() {
                    x * y
                } else {
                    halfplane_area_unchecked(*c, x, y)
                };
                out[i] = ((next - below) / self.measures[i]).clamp(0.0, 1.0);
                below = next;
            }
            return;
        }
        for ((q, set), m) in out.iter_mut().zip(&self.sets).zip(&self.measures) {
            *q = (set.anchored_intersection(anchor) / m).clamp(0.0, 1.0);
        }
    }
}

/// Report-only validation; never fails.
pub fn validate_partition(p: &Partition) -> ValidationReport {
    let measures: Vec<f64> = p.sets.iter().map(PartitionSet::measure).collect();
    let measure_sum: f64 = measures.iter().sum();
    let inv_n = 1.0 / measures.len() as f64;
    ValidationReport {
        measure_sum,
        equivolume: measures.iter().all(|m| (m - inv_n).abs() < MEASURE_TOL),
        covers: (measure_sum - 1.0).abs() < MEASURE_TOL,
        measures,
    }
}

/// Per-stratum inclusion probabilities at an anchor point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessProfile {
    pub q: Vec<f64>,
    pub anchor: Vec<f64>,
}

impl SuccessProfile {
    /// Builds a profile directly from probabilities.
    pub fn from_probabilities(q: Vec<f64>, anchor: Vec<f64>) -> Self {
        Self { q, anchor }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn anchor_volume(&self) -> f64 {
        self.anchor.iter().product()
    }

    /// `(1/N) sum q_i`, the expected fraction of points in `[0, anchor)`.
    pub fn mean(&self) -> f64 {
        self.q.iter().sum::<f64>() / self.q.len() as f64
    }
}

fn check_anchor(p: &Partition, anchor: &[f64]) -> Result<(), GeometryError> {
    if anchor.len() != p.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: p.dim,
            got: anchor.len(),
        });
    }
    check_in_cube(anchor)
}

pub fn success_profile(p: &Partition, anchor: &[f64]) -> Result<SuccessProfile, GeometryError> {
    check_anchor(p, anchor)?;
    let mut q = vec![0.0; p.len()];
    p.success_profile_into(anchor, &mut q);
    Ok(SuccessProfile {
        q,
        anchor: anchor.to_vec(),
    })
}

/// `E Z_x - |[0,x)|` for the stratified sample of `p`.
pub fn bias_at(p: &Partition, anchor: &[f64]) -> Result<f64, GeometryError> {
    let profile = success_profile(p, anchor)?;
    Ok(profile.mean() - profile.anchor_volume())
}

pub fn set_measure(s: &PartitionSet) -> f64 {
    s.measure()
}

pub fn set_box_intersection(s: &PartitionSet, b: &AxisBox) -> f64 {
    s.intersection(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pixel-count oracle for `|{s + t <= c} ∩ [0,x] x [0,y]|` on a G x G
    /// grid of pixel centres over the unit square.
    fn pixel_area(c: f64, x: f64, y: f64, g: usize) -> f64 {
        let h = 1.0 / g as f64;
        let mut count = 0usize;
        for i in 0..g {
            let s = (i as f64 + 0.5) * h;
            if s > x {
                break;
            }
            for j in 0..g {
                let t = (j as f64 + 0.5) * h;
                if t > y {
                    break;
                }
                if s + t <= c {
                    count += 1;
                }
            }
        }
        count as f64 * h * h
    }

    #[test]
    fn halfplane_trivial_cases() {
        assert_eq!(halfplane_box_area(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(halfplane_box_area(2.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(halfplane_box_area(1.0, 1.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn halfplane_matches_pixel_oracle() {
        // frozen from the 4096^2 pixel oracle: 0.125 (up to 2/4096)
        let exact = halfplane_box_area(0.5, 1.0, 1.0).unwrap();
        assert!((exact - 0.125).abs() < 1e-15);
        let g = 1024;
        for &(c, x, y) in &[(0.5, 1.0, 1.0), (1.3, 0.7, 0.9), (0.4, 0.2, 0.9), (1.9, 1.0, 0.95)] {
            let exact = halfplane_box_area(c, x, y).unwrap();
            let pix = pixel_area(c, x, y, g);
            assert!(
                (exact - pix).abs() < 2.0 / g as f64,
                "c={c} x={x} y={y}: {exact} vs {pix}"
            );
        }
    }

    #[test]
    fn halfplane_rejects_negative() {
        assert!(halfplane_box_area(-0.1, 1.0, 1.0).is_err());
        assert!(halfplane_box_area(0.1, -1.0, 1.0).is_err());
    }

    #[test]
    fn set_measures() {
        let lower = PartitionSet::diagonal_slice(0.0, 1.0 / SQRT_2).unwrap();
        assert!((lower.measure() - 0.5).abs() < 1e-15);
        let p = PartitionSpec::equivolume_diag(3).build().unwrap();
        for m in p.measures() {
            assert!((m - 1.0 / 3.0).abs() < 1e-12);
        }
        let jit = PartitionSpec::jittered(2, 2).build().unwrap();
        assert!(jit.measures().iter().all(|&m| m == 0.25));
    }

    #[test]
    fn box_intersection_examples() {
        let p = PartitionSpec::diag(vec![0.3, 0.9]).build().unwrap();
        for s in p.sets() {
            assert!((s.intersection(&AxisBox::unit(2)) - s.measure()).abs() < 1e-15);
        }
        let strip = PartitionSet::VerticalStrip {
            index: 0,
            count: 2,
            dim: 2,
        };
        let b = AxisBox::anchored(&[1.0, 0.5]).unwrap();
        assert!((strip.intersection(&b) - 0.25).abs() < 1e-15);
        let slice = PartitionSet::diagonal_slice(0.0, 0.8 / SQRT_2).unwrap();
        let b = AxisBox::anchored(&[0.3, 0.3]).unwrap();
        assert!((slice.intersection(&b) - 0.09).abs() < 1e-15);
    }

    #[test]
    fn slice_box_intersection_matches_pixels() {
        let slice = PartitionSet::diagonal_slice(0.4, 1.0).unwrap();
        let b = AxisBox::new(vec![0.1, 0.25], vec![0.8, 0.9]).unwrap();
        let g = 2048;
        let h = 1.0 / g as f64;
        let (c_lo, c_hi) = (0.4 * SQRT_2, SQRT_2);
        let mut count = 0usize;
        for i in 0..g {
            let s = (i as f64 + 0.5) * h;
            for j in 0..g {
                let t = (j as f64 + 0.5) * h;
                if b.contains(&[s, t]) && s + t >= c_lo && s + t <= c_hi {
                    count += 1;
                }
            }
        }
        let pix = count as f64 * h * h;
        assert!((slice.intersection(&b) - pix).abs() < 4.0 / g as f64);
    }

    #[test]
    fn equivolume_cut_values() {
        let p = PartitionSpec::equivolume_diag(2).build().unwrap();
        assert!((p.params()[0] - (0.5f64).sqrt()).abs() < 1e-15);
        let v = equivolume_cuts(6);
        let expected = [
            (1.0f64 / 6.0).sqrt(),
            (2.0f64 / 6.0).sqrt(),
            (3.0f64 / 6.0).sqrt(),
            SQRT_2 - (2.0f64 / 6.0).sqrt(),
            SQRT_2 - (1.0f64 / 6.0).sqrt(),
        ];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn diag_measures_from_area_formula() {
        // Exact: A(c) with c = v sqrt 2. Pixel oracle at 4096^2 agrees to 2/4096.
        let p = PartitionSpec::diag(vec![0.5, 1.1]).build().unwrap();
        let c2: f64 = 1.1 * SQRT_2;
        let top = (2.0 - c2).powi(2) / 2.0;
        let expected = [0.25, 1.0 - 0.25 - top, top];
        for (m, e) in p.measures().iter().zip(expected) {
            assert!((m - e).abs() < 1e-14, "{m} vs {e}");
        }
        assert!((p.measures()[1] - 0.651_269_8).abs() < 1e-6);
        assert!((p.measures()[2] - 0.098_730_2).abs() < 1e-6);
    }

    #[test]
    fn build_errors() {
        assert!(matches!(
            PartitionSpec::diag(vec![0.9, 0.5]).build(),
            Err(GeometryError::NonMonotoneCuts(_))
        ));
        assert!(matches!(
            PartitionSpec::diag(vec![0.5, 1.5]).build(),
            Err(GeometryError::NonMonotoneCuts(_))
        ));
        let spec = PartitionSpec {
            family: Family::Jittered,
            dim: 2,
            n: 5,
            v: None,
        };
        assert!(matches!(spec.build(), Err(GeometryError::NotPerfectPower { .. })));
        let spec = PartitionSpec {
            family: Family::EquivolumeDiag,
            dim: 3,
            n: 4,
            v: None,
        };
        assert!(matches!(spec.build(), Err(GeometryError::DiagonalNeedsSquare(3))));
    }

    #[test]
    fn validation_reports() {
        let r = validate_partition(&PartitionSpec::vertical(7, 2).build().unwrap());
        assert!(r.equivolume);
        let r = validate_partition(&PartitionSpec::diag(vec![0.5, 1.1]).build().unwrap());
        assert!(!r.equivolume);
        let r = validate_partition(&PartitionSpec::jittered(2, 2).build().unwrap());
        assert!((r.measure_sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn success_profile_examples() {
        let p = PartitionSpec::equivolume_diag(2).build().unwrap();
        let full = success_profile(&p, &[1.0, 1.0]).unwrap();
        assert!(full.q.iter().all(|&q| (q - 1.0).abs() < 1e-15));
        let prof = success_profile(&p, &[1.0, 0.5]).unwrap();
        assert!((prof.q[0] - 0.75).abs() < 1e-14);
        assert!((prof.q[1] - 0.25).abs() < 1e-14);

        // Omega_1 is the triangle below s + t = A with A = 0.8.
        let a: f64 = 0.8;
        let p = PartitionSpec::diag(vec![a / SQRT_2, 1.65 / SQRT_2]).build().unwrap();
        let prof = success_profile(&p, &[0.3, 0.3]).unwrap();
        assert!((prof.q[0] - 2.0 * 0.09 / (a * a)).abs() < 1e-14);
        assert!((prof.q[0] - 0.28125).abs() < 1e-14);
        assert!(prof.q[1].abs() < 1e-15);
        assert_eq!(prof.q[2], 0.0);
    }

    #[test]
    fn bias_examples() {
        let p = PartitionSpec::diag(vec![0.5, 1.1]).build().unwrap();
        assert!(bias_at(&p, &[1.0, 1.0]).unwrap().abs() < 1e-15);
        // Regression constant from the exact area formula.
        let b = bias_at(&p, &[0.5, 0.5]).unwrap();
        let q1 = halfplane_box_area(0.5 * SQRT_2, 0.5, 0.5).unwrap() / 0.25;
        let m2 = p.measures()[1];
        let q2 = (0.25 - q1 * 0.25) / m2;
        let expected = (q1 + q2) / 3.0 - 0.25;
        assert!((b - expected).abs() < 1e-15);
        assert!((b - 0.048_096_0).abs() < 1e-6, "{b}");
    }

    #[test]
    fn diameters() {
        let jit = PartitionSpec::jittered(4, 2).build().unwrap();
        assert!(jit.sets().iter().all(|s| (s.diameter() - SQRT_2 / 4.0).abs() < 1e-15));
        let lower = PartitionSet::diagonal_slice(0.0, 1.0 / SQRT_2).unwrap();
        assert!((lower.diameter() - SQRT_2).abs() < 1e-15);
        let corner = PartitionSet::diagonal_slice(0.0, 0.1).unwrap();
        assert!((corner.diameter() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn anchored_rejects_outside_cube() {
        let p = PartitionSpec::vertical(3, 2).build().unwrap();
        assert!(success_profile(&p, &[1.2, 0.5]).is_err());
        assert!(success_profile(&p, &[0.2]).is_err());
    }
}
