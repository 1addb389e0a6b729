//! Minimising expected discrepancy over diagonal-slice partitions, and
//! one- and two-parameter scans of the objective.
//!
//! The search runs in unconstrained coordinates `w in R^{N-1}`. A point `w`
//! maps to cut distances by `v = sort(sqrt 2 * logistic(w))`, so every
//! simplex vertex is a valid ordered cut vector and no penalty is needed.

use std::cmp::Ordering;
use std::f64::consts::SQRT_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expectation::closed_form::{self, ClosedForm};
use crate::expectation::{expected_lp_value, ExpectationError};
use crate::geometry::{equidistant_cuts, equivolume_cuts, PartitionSpec};
use crate::rng::{Purpose, SeedSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("the diagonal family needs N >= 2, got {0}")]
    TooFewStrata(usize),
    #[error("start vector has {got} entries, expected {expected}")]
    StartLength { expected: usize, got: usize },
    #[error("scan needs at least 2 points, got {0}")]
    ScanPoints(usize),
    #[error("scan parameter outside its domain: {0}")]
    ScanDomain(String),
    #[error(transparent)]
    Expectation(#[from] ExpectationError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub restarts: usize,
    /// Stop when every simplex vertex lies within `tol` of the best one in v-space.
    pub tol: f64,
    pub max_iter: usize,
    pub grid: usize,
    pub seed: u64,
    /// Extra starting cut vectors, tried before the random ones.
    #[serde(default)]
    pub starts: Vec<Vec<f64>>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            tol: 1e-5,
            max_iter: 400,
            grid: 1024,
            seed: 0,
            starts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub v: Vec<f64>,
    pub value: f64,
    pub p: f64,
    pub grid: usize,
    pub method: &'static str,
    /// Iterations of the winning restart.
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Objective at the equivolume cut vector.
    pub equivolume_value: f64,
}

fn logistic(w: f64) -> f64 {
    1.0 / (1.0 + (-w).exp())
}

fn to_v(w: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = w.iter().map(|&x| SQRT_2 * logistic(x)).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn to_w(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let t = (x / SQRT_2).clamp(1e-12, 1.0 - 1e-12);
            (t / (1.0 - t)).ln()
        })
        .collect()
}

/// `v -> E L_p^p` of the diagonal partition with cuts `v`; invalid cut
/// vectors (ties, or cuts on the boundary) are `+inf`.
pub fn diag_objective(v: &[f64], p: f64, grid: usize) -> Result<f64, ExpectationError> {
    match PartitionSpec::diag(v.to_vec()).build() {
        Ok(part) => expected_lp_value(&part, p, grid),
        Err(_) => Ok(f64::INFINITY),
    }
}

struct Run {
    v: Vec<f64>,
    value: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

fn v_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Nelder-Mead in w-space with standard coefficients.
fn nelder_mead(
    start: &[f64],
    f: &(dyn Fn(&[f64]) -> Result<f64, ExpectationError> + Sync),
    tol: f64,
    max_iter: usize,
) -> Result<Run, ExpectationError> {
    let k = start.len();
    let mut evaluations = 0;
    let mut eval = |w: &[f64]| -> Result<f64, ExpectationError> {
        evaluations += 1;
        f(&to_v(w))
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    simplex.push((start.to_vec(), eval(start)?));
    for i in 0..k {
        let mut w = start.to_vec();
        w[i] += 0.3;
        let fw = eval(&w)?;
        simplex.push((w, fw));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        order(&mut simplex);
        let best_v = to_v(&simplex[0].0);
        let spread = simplex[1..]
            .iter()
            .map(|(w, _)| v_distance(&to_v(w), &best_v))
            .fold(0.0, f64::max);
        if spread < tol {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..k)
            .map(|j| simplex[..k].iter().map(|(w, _)| w[j]).sum::<f64>() / k as f64)
            .collect();
        let worst = simplex[k].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, x)| c + t * (c - x)).collect() };
        let reflected = along(1.0);
        let fr = eval(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded)?;
            simplex[k] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[k - 1].1 {
            simplex[k] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = along(0.5);
            let fc = eval(&c)?;
            (c, fc)
        } else {
            let c = along(-0.5);
            let fc = eval(&c)?;
            (c, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[k] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let w: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
            let fw = eval(&w)?;
            *vertex = (w, fw);
        }
    }
    order(&mut simplex);
    Ok(Run {
        v: to_v(&simplex[0].0),
        value: simplex[0].1,
        iterations,
        evaluations,
        converged,
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Starting cut vectors: equivolume, equidistant, the caller's, then random.
fn starting_points(n: usize, opts: &OptimizeOptions) -> Result<Vec<Vec<f64>>, OptimizeError> {
    let mut starts = vec![equivolume_cuts(n), equidistant_cuts(n)];
    for s in &opts.starts {
        if s.len() != n - 1 {
            return Err(OptimizeError::StartLength {
                expected: n - 1,
                got: s.len(),
            });
        }
        starts.push(s.clone());
    }
    let mut rng = SeedSpec::new(opts.seed, Purpose::Optimizer, n as u64).stream(0);
    while starts.len() < opts.restarts.max(2) {
        let mut v: Vec<f64> = (0..n - 1).map(|_| SQRT_2 * rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        starts.push(v);
    }
    starts.truncate(opts.restarts.max(2 + opts.starts.len()));
    Ok(starts)
}

/// Multi-start Nelder-Mead over the cut vectors of the `N`-slice family.
pub fn minimize_family(n: usize, p: f64, opts: &OptimizeOptions) -> Result<OptimizationResult, OptimizeError> {
    if n < 2 {
        return Err(OptimizeError::TooFewStrata(n));
    }
    let starts = starting_points(n, opts)?;
    let objective = |v: &[f64]| diag_objective(v, p, opts.grid);
    let equivolume_value = objective(&starts[0])?;
    let runs: Vec<Run> = starts
        .par_iter()
        .map(|s| nelder_mead(&to_w(s), &objective, opts.tol, opts.max_iter))
        .collect::<Result<_, _>>()?;
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then_with(|| lexicographic(&a.v, &b.v)))
        .expect("at least two restarts");
    Ok(OptimizationResult {
        v: best.v,
        value: best.value,
        p,
        grid: opts.grid,
        method: "nelder_mead",
        iterations: best.iterations,
        evaluations,
        restarts: starts.len(),
        converged: best.converged,
        equivolume_value,
    })
}

/// What a scan sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanSpec {
    /// Convex two-set partitions through the centre; `A in [0,1]`.
    Example2 { points: usize },
    /// Two diagonal slices, cut distance `v in [0, sqrt 2]`, both branches.
    Example3 { points: usize },
    /// Three diagonal slices at fixed `A`, `B in [0, A]`. Quadrature values
    /// are added when `grid` is set.
    N3FixedA {
        a: f64,
        points: usize,
        #[serde(default)]
        grid: Option<usize>,
    },
    /// One cut of a general diagonal partition varied over `[lo, hi]`.
    DiagAxis {
        base: Vec<f64>,
        axis: usize,
        lo: f64,
        hi: f64,
        points: usize,
        p: f64,
        grid: usize,
    },
    /// Three diagonal slices on a `points x points` grid of `(v1, v2)`.
    N3Grid { points: usize, p: f64, grid: usize },
}

/// Curve data ready for CSV output. Missing values are NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScanTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Row with the smallest entry in column `name`.
    pub fn argmin(&self, name: &str) -> Option<&[f64]> {
        let j = self.header.iter().position(|h| h == name)?;
        self.rows
            .iter()
            .filter(|r| r[j].is_finite())
            .min_by(|a, b| a[j].total_cmp(&b[j]))
            .map(Vec::as_slice)
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(move |i| if i + 1 == points { hi } else { lo + step * i as f64 })
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn scan(spec: &ScanSpec) -> Result<ScanTable, OptimizeError> {
    let points = match spec {
        ScanSpec::Example2 { points }
        | ScanSpec::Example3 { points }
        | ScanSpec::N3FixedA { points, .. }
        | ScanSpec::DiagAxis { points, .. }
        | ScanSpec::N3Grid { points, .. } => *points,
    };
    if points < 2 {
        return Err(OptimizeError::ScanPoints(points));
    }
    match spec {
        ScanSpec::Example2 { points } => Ok(ScanTable {
            header: header(&["A", "value"]),
            rows: linspace(0.0, 1.0, *points)
                .map(|a| vec![a, closed_form::n2_convex(a)])
                .collect(),
        }),
        ScanSpec::Example3 { points } => {
            // branch 1: cut through (B, 0), B = sqrt 2 v; branch 2: cut
            // through (A, 1), A = sqrt 2 v - 1
            let rows = linspace(0.0, SQRT_2, *points)
                .map(|v| {
                    let c = v * SQRT_2;
                    if c <= 1.0 + 1e-12 {
                        let b = c.min(1.0);
                        vec![v, b, 1.0, closed_form::n2_diag_b(b)]
                    } else {
                        let a = (c - 1.0).min(1.0);
                        vec![v, a, 2.0, closed_form::n2_diag(a)]
                    }
                })
                .collect();
            Ok(ScanTable {
                header: header(&["v", "param", "branch", "value"]),
                rows,
            })
        }
        ScanSpec::N3FixedA { a, points, grid } => {
            let a = *a;
            if !(0.5..=1.0).contains(&a) {
                return Err(OptimizeError::ScanDomain(format!("A = {a} not in [1/2, 1]")));
            }
            let mut rows = Vec::with_capacity(*points);
            for b in linspace(0.0, a.min(1.0 - 1e-9), *points) {
                let (v1, v2) = (a / SQRT_2, (b + 1.0) / SQRT_2);
                let boundary = 2.0 * a - 1.0;
                let form = if b <= boundary {
                    ClosedForm::N3Case2 { a, b }
                } else {
                    ClosedForm::N3Main { a, b }
                };
                let closed = closed_form::closed_form(&form).unwrap_or(f64::NAN);
                let appendix = if b >= boundary {
                    closed_form::closed_form(&ClosedForm::N3Appendix { a, b }).unwrap_or(f64::NAN)
                } else {
                    closed
                };
                let quad = match grid {
                    Some(g) if v1 < v2 => diag_objective(&[v1, v2], 2.0, *g)?,
                    _ => f64::NAN,
                };
                rows.push(vec![b, v1, v2, closed, appendix, quad]);
            }
            Ok(ScanTable {
                header: header(&["B", "v1", "v2", "main_text", "appendix", "quadrature"]),
                rows,
            })
        }
        ScanSpec::DiagAxis {
            base,
            axis,
            lo,
            hi,
            points,
            p,
            grid,
        } => {
            if *axis >= base.len() {
                return Err(OptimizeError::ScanDomain(format!(
                    "axis {axis} out of range for {} cuts",
                    base.len()
                )));
            }
            let mut rows = Vec::with_capacity(*points);
            for t in linspace(*lo, *hi, *points) {
                let mut v = base.clone();
                v[*axis] = t;
                rows.push(vec![t, diag_objective(&v, *p, *grid)?]);
            }
            Ok(ScanTable {
                header: header(&["v", "value"]),
                rows,
            })
        }
        ScanSpec::N3Grid { points, p, grid } => {
            let ts: Vec<f64> = linspace(0.0, SQRT_2, *points + 2).collect();
            let inner = &ts[1..ts.len() - 1];
            let mut rows = Vec::new();
            for (i, &v1) in inner.iter().enumerate() {
                for &v2 in &inner[i + 1..] {
                    rows.push(vec![v1, v2, diag_objective(&[v1, v2], *p, *grid)?]);
                }
            }
            Ok(ScanTable {
                header: header(&["v1", "v2", "value"]),
                rows,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reparameterisation_round_trip() {
        let v = vec![0.1, 0.7, 1.3];
        let back = to_v(&to_w(&v));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let v = to_v(&[3.0, -2.0, 0.5]);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v.iter().all(|&x| x > 0.0 && x < SQRT_2));
    }

    #[test]
    fn nelder_mead_on_quadratic() {
        let f = |v: &[f64]| -> Result<f64, ExpectationError> { Ok((v[0] - 0.4).powi(2) + (v[1] - 1.0).powi(2)) };
        let run = nelder_mead(&to_w(&[0.7, 0.9]), &f, 1e-7, 1000).unwrap();
        assert!(run.converged);
        assert!((run.v[0] - 0.4).abs() < 1e-5 && (run.v[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn two_slices_small_grid() {
        let opts = OptimizeOptions {
            restarts: 3,
            grid: 128,
            ..Default::default()
        };
        let r = minimize_family(2, 2.0, &opts).unwrap();
        assert!(r.converged);
        assert!((r.v[0] - 0.793_398).abs() < 5e-3, "{:?}", r.v);
        assert!(r.value < 0.05);
        assert!(r.value <= r.equivolume_value);
        let again = minimize_family(2, 2.0, &opts).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn start_length_checked() {
        let opts = OptimizeOptions {
            starts: vec![vec![0.5]],
            ..Default::default()
        };
        assert!(matches!(
            minimize_family(3, 2.0, &opts),
            Err(OptimizeError::StartLength { expected: 2, got: 1 })
        ));
        assert!(matches!(
            minimize_family(1, 2.0, &opts),
            Err(OptimizeError::TooFewStrata(1))
        ));
    }

    #[test]
    fn example_scans() {
        let t = scan(&ScanSpec::Example2 { points: 101 }).unwrap();
        let best = t.argmin("value").unwrap();
        assert_eq!(best[0], 1.0);
        assert!((best[1] - 0.05).abs() < 1e-15);
        assert!((t.rows[50][1] - 1.0 / 18.0).abs() < 1e-15);

        let t = scan(&ScanSpec::Example3 { points: 201 }).unwrap();
        let b_branch: Vec<&Vec<f64>> = t.rows.iter().filter(|r| r[2] == 1.0).collect();
        let best = b_branch.iter().min_by(|a, b| a[3].total_cmp(&b[3])).unwrap();
        assert!((best[1] - 1.0).abs() < 1e-12 && (best[3] - 0.05).abs() < 1e-12);
        let best = t.argmin("value").unwrap();
        assert_eq!(best[2], 2.0);

        let t = scan(&ScanSpec::N3FixedA {
            a: 0.7255,
            points: 5,
            grid: None,
        })
        .unwrap();
        assert_eq!(t.header.len(), 6);
        assert!(scan(&ScanSpec::Example2 { points: 1 }).is_err());
    }
}
