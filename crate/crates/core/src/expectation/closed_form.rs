//! Exact expected squared L2 discrepancies for the families with known
//! polynomial or rational closed forms.
//!
//! Parameter conventions for the diagonal families on the unit square:
//! a cut at distance `v` from the origin is the line `s + t = v sqrt 2`.
//! Two-stratum slices use `A = sqrt 2 v - 1` (line through `(A, 1)`) or
//! `B = sqrt 2 v` (line through `(B, 0)`). Three-stratum slices use
//! `A = sqrt 2 v_1` and `B = sqrt 2 v_2 - 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("{name}: parameters outside the domain {domain}")]
    Domain { name: &'static str, domain: &'static str },
}

/// Pointwise case of the three-stratum computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AppendixCase {
    I = 1,
    II = 2,
    III = 3,
    IV = 4,
    V = 5,
    VI = 6,
}

impl AppendixCase {
    pub const ALL: [AppendixCase; 6] = [Self::I, Self::II, Self::III, Self::IV, Self::V, Self::VI];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i.wrapping_sub(1)).copied()
    }

    /// Whether `(x, y)` lies in this case's region for parameters in the
    /// `2A - 1 <= B <= A` domain. Cases II-VI describe the half `y >= x`.
    pub fn contains(self, x: f64, y: f64, a: f64, b: f64) -> bool {
        match self {
            Self::I => x >= 0.0 && y >= 0.0 && x + y <= a,
            Self::II => (x <= b && y >= a && y <= 1.0) || (x >= b && x <= a && y >= a && y <= 1.0 + b - x),
            Self::III => (x <= a / 2.0 && y >= a - x && y <= a) || (x >= a / 2.0 && x <= a && y >= x && y <= a),
            Self::IV => x >= a && x <= 1.0 + b - a && y >= a && y <= 1.0 + b - x,
            Self::V => x >= b && x <= a && y >= 1.0 + b - x && y <= 1.0,
            Self::VI => {
                (x >= a && x <= (b + 1.0) / 2.0 && y >= 1.0 + b - x && y <= 1.0)
                    || (x >= (b + 1.0) / 2.0 && x <= 1.0 && y >= x && y <= 1.0)
            }
        }
    }
}

/// Every closed form this crate can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `N` i.i.d. uniform points in `[0,1]^d`.
    MonteCarlo { n: usize, d: usize },
    /// Stratification by `N` slabs orthogonal to the first axis.
    Vertical { n: usize, d: usize },
    /// Convex equivolume two-set partitions whose separating line passes
    /// through the centre and hits the bottom edge at `A`, `A in [0,1]`.
    N2Convex { a: f64 },
    /// Two diagonal slices, cut through `(A, 1)`, `A in [0,1]`.
    N2Diag { a: f64 },
    /// Two diagonal slices, cut through `(B, 0)`, `B in [0,1]`.
    N2DiagB { b: f64 },
    /// Three diagonal slices, `1/2 <= A <= 1`, `2A - 1 <= B <= A` (the
    /// main-text rational).
    N3Main { a: f64, b: f64 },
    /// Three diagonal slices, `1/2 <= A <= 1`, `0 <= B <= 2A - 1`.
    N3Case2 { a: f64, b: f64 },
    /// Three diagonal slices, same domain as `N3Main` (the appendix rational).
    N3Appendix { a: f64, b: f64 },
    /// Pointwise `E (#/3 - xy)^2` in one of the six cases.
    AppendixF {
        case: AppendixCase,
        x: f64,
        y: f64,
        a: f64,
        b: f64,
    },
}

fn check(ok: bool, name: &'static str, domain: &'static str) -> Result<(), ClosedFormError> {
    if ok {
        Ok(())
    } else {
        Err(ClosedFormError::Domain { name, domain })
    }
}

fn in_unit(t: f64) -> bool {
    (0.0..=1.0).contains(&t)
}

const N3_MAIN_DOMAIN: &str = "1/2 <= A <= 1, 2A-1 <= B <= A, B < 1";

fn n3_main_domain(a: f64, b: f64) -> bool {
    (0.5..=1.0).contains(&a) && b >= 2.0 * a - 1.0 - 1e-12 && b <= a && b < 1.0
}

pub fn closed_form(form: &ClosedForm) -> Result<f64, ClosedFormError> {
    match *form {
        ClosedForm::MonteCarlo { n, d } => {
            check(n >= 1 && d >= 1, "mc", "N >= 1, d >= 1")?;
            Ok(mc(n, d))
        }
        ClosedForm::Vertical { n, d } => {
            check(n >= 1 && d >= 1, "vertical", "N >= 1, d >= 1")?;
            Ok(vertical(n, d))
        }
        ClosedForm::N2Convex { a } => {
            check(in_unit(a), "n2_convex", "0 <= A <= 1")?;
            Ok(n2_convex(a))
        }
        ClosedForm::N2Diag { a } => {
            check(in_unit(a), "n2_diag", "0 <= A <= 1")?;
            Ok(n2_diag(a))
        }
        ClosedForm::N2DiagB { b } => {
            check(in_unit(b), "n2_diag_b", "0 <= B <= 1")?;
            Ok(n2_diag_b(b))
        }
        ClosedForm::N3Main { a, b } => {
            check(n3_main_domain(a, b), "n3_main", N3_MAIN_DOMAIN)?;
            Ok(n3_main(a, b))
        }
        ClosedForm::N3Case2 { a, b } => {
            check(
                (0.5..=1.0).contains(&a) && b >= 0.0 && b <= 2.0 * a - 1.0 + 1e-12 && b < 1.0,
                "n3_case2",
                "1/2 <= A <= 1, 0 <= B <= 2A-1, B < 1",
            )?;
            Ok(n3_case2(a, b))
        }
        ClosedForm::N3Appendix { a, b } => {
            check(n3_main_domain(a, b), "n3_appendix", N3_MAIN_DOMAIN)?;
            Ok(n3_appendix(a, b))
        }
        ClosedForm::AppendixF { case, x, y, a, b } => {
            check(
                n3_main_domain(a, b) && a > 0.0 && in_unit(x) && in_unit(y),
                "appendix_f",
                "1/2 <= A <= 1, 2A-1 <= B <= A, B < 1, (x, y) in [0,1]^2",
            )?;
            Ok(appendix_f(case, x, y, a, b))
        }
    }
}

/// `[2^-d - 3^-d] / N`.
pub fn mc(n: usize, d: usize) -> f64 {
    (0.5f64.powi(d as i32) - 3f64.powi(-(d as i32))) / n as f64
}

/// Expected `L_4^4` discrepancy of `N` i.i.d. uniform points in `[0,1]^d`.
///
/// The fourth central moment of `Bin(N, v)` is
/// `N v(1-v) [1 + 3(N-2) v(1-v)]`, and `int v^k dx = (k+1)^-d` for the
/// anchored volume `v`.
pub fn mc_l4(n: usize, d: usize) -> f64 {
    let m = |k: i32| (k as f64).powi(-(d as i32));
    let nf = n as f64;
    let first = m(2) - m(3);
    let second = m(3) - 2.0 * m(4) + m(5);
    (first + 3.0 * (nf - 2.0) * second) / nf.powi(3)
}

/// `[2^-d - (3N - 1)/(2N) 3^-d] / N`.
pub fn vertical(n: usize, d: usize) -> f64 {
    let nf = n as f64;
    (0.5f64.powi(d as i32) - (3.0 * nf - 1.0) / (2.0 * nf) * 3f64.powi(-(d as i32))) / nf
}

pub fn n2_convex(a: f64) -> f64 {
    if a >= 0.5 {
        (2.0 * a.powi(3) + 3.0 * a * a - 12.0 * a + 25.0) / 360.0
    } else {
        (-6.0 * a.powi(3) + 3.0 * a * a - 6.0 * a + 23.0) / 360.0
    }
}

pub fn n2_diag(a: f64) -> f64 {
    let num = -18.0 - 30.0 * a + a.powi(2) - 36.0 * a.powi(3) + 52.0 * a.powi(4) - 12.0 * a.powi(5) - 2.0 * a.powi(6);
    num / (-360.0 - 720.0 * a + 360.0 * a * a)
}

pub fn n2_diag_b(b: f64) -> f64 {
    let num = -135.0 + 120.0 * b + 175.0 * b.powi(2) - 288.0 * b.powi(3) + 112.0 * b.powi(4) - 2.0 * b.powi(6);
    num / (360.0 * (b * b - 2.0))
}

/// `A^2 + (B - 2) B - 1`, i.e. minus twice the middle stratum's area.
fn middle(a: f64, b: f64) -> f64 {
    a * a + (b - 2.0) * b - 1.0
}

/// Evaluates `sum_k coeffs[k] t^k` by Horner's rule.
fn poly(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

pub fn n3_main(a: f64, b: f64) -> f64 {
    // coefficients of A^k as polynomials in B (ascending powers)
    let rows: [&[f64]; 11] = [
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 128.0, -64.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -768.0, 384.0],
        &[
            -787.0, 1740.0, 528.0, -6292.0, 9198.0, -3492.0, -212.0, 84.0, 237.0, -72.0, -36.0,
        ],
        &[-480.0, -1440.0, 1920.0, 3840.0, -7840.0, 3104.0],
        &[1908.0, -1920.0, 5496.0, -8976.0, -480.0, 5760.0, -1608.0, -144.0, -36.0],
        &[5472.0, -8544.0, -8736.0, 20384.0, -5280.0, -2400.0, -1440.0, 1440.0],
        &[-13936.0, 19408.0, 4360.0, -12864.0, -1104.0, 6480.0, -3240.0],
        &[10368.0, -12288.0, -4032.0, 8640.0, -6336.0, 4032.0],
        &[-3832.0, 3936.0, -1248.0, 5760.0, -4680.0],
        &[2592.0, -2592.0, -2592.0, 2592.0],
        &[-1440.0, 2880.0, -1440.0],
    ];
    let coeffs: Vec<f64> = rows.iter().map(|r| poly(r, b)).collect();
    poly(&coeffs, a) / (12960.0 * a * a * (b - 1.0).powi(2) * middle(a, b))
}

pub fn n3_case2(a: f64, b: f64) -> f64 {
    let rows: [&[f64]; 9] = [
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 16.0, -8.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -96.0, 48.0],
        &[-146.0, 168.0, 264.0, -704.0, 870.0, -444.0, 134.0, -24.0, -6.0],
        &[120.0, 0.0, -480.0, 480.0, -440.0, 208.0],
        &[333.0, -942.0, 1065.0, -420.0, -15.0, -18.0, -3.0],
        &[-576.0, 1152.0, -672.0, 208.0],
        &[283.0, -544.0, 140.0, 12.0, -3.0],
        &[0.0, 48.0],
        &[-14.0, 12.0, -6.0],
    ];
    let coeffs: Vec<f64> = rows.iter().map(|r| poly(r, b)).collect();
    poly(&coeffs, a) / (1620.0 * a * a * (b - 1.0).powi(2) * middle(a, b))
}

pub fn n3_appendix(a: f64, b: f64) -> f64 {
    let rows: [&[f64]; 9] = [
        &[0.0, -56.0, -774.0, -556.0, 1364.0, 1728.0, 70.0, -396.0, -99.0],
        &[-480.0, 336.0, 3648.0, -144.0, -6720.0, -2016.0, 1728.0, 576.0],
        &[-472.0, -416.0, -1380.0, -3104.0, 2912.0, -5472.0, -1572.0],
        &[-2592.0, -8688.0, -9792.0, 1104.0, 5760.0, 1152.0],
        &[9948.0, 23424.0, 32640.0, 14736.0, 5172.0],
        &[-4992.0, -25728.0, -33408.0, -12672.0],
        &[-8432.0, 5280.0, 3120.0],
        &[6912.0, 6912.0],
        &[480.0],
    ];
    let coeffs: Vec<f64> = rows.iter().map(|r| poly(r, b)).collect();
    poly(&coeffs, a) / (25920.0 * a * a * middle(a, b))
}

/// Pointwise expected squared discrepancy in case `case`, with the
/// transcription errors of cases IV and VI corrected.
///
/// Cases I, II, III and V are the polynomial forms as derived; case IV is the
/// simplified form of `Var + bias^2` with `q_1 = 1`,
/// `q_2 = (xy - A^2/2) / |Omega_2|`, `q_3 = 0`, and case VI is evaluated from
/// its three success probabilities.
pub fn appendix_f(case: AppendixCase, x: f64, y: f64, a: f64, b: f64) -> f64 {
    match case {
        AppendixCase::I => f1(x, y, a),
        AppendixCase::II => f2(x, y, a, b, 1.0),
        AppendixCase::III => f3(x, y, a, b),
        AppendixCase::IV => {
            let u = x * y;
            (a * a * (2.0 - 3.0 * u).powi(2) + b * (b - 2.0) * (1.0 - 3.0 * u).powi(2) + 3.0 * u * u - 1.0)
                / (9.0 * middle(a, b))
        }
        AppendixCase::V => f56_numerator(x, y, a, b) / (9.0 * a * a * (b - 1.0).powi(2) * middle(a, b)),
        AppendixCase::VI => {
            let w2 = -0.5 * middle(a, b);
            let s = x + y - 1.0 - b;
            let q2 = (x * y - a * a / 2.0 - s * s / 2.0) / w2;
            let q3 = s * s / ((1.0 - b) * (1.0 - b));
            three_strata_moment([1.0, q2, q3], x * y)
        }
    }
}

/// The pointwise forms exactly as transcribed, including the stray factor
/// `b` (read as `B`) in case II and the erroneous cases IV and VI.
pub fn appendix_f_as_printed(case: AppendixCase, x: f64, y: f64, a: f64, b: f64) -> f64 {
    match case {
        AppendixCase::II => f2(x, y, a, b, b),
        AppendixCase::IV => {
            let u = 1.0 - 3.0 * x * y;
            (-1.0 - 2.0 * b * u * u + b * b * u * u + x * x * (4.0 + 3.0 * y * (-4.0 * x + y + 3.0 * a * a * y)))
                / (9.0 * middle(a, b))
        }
        AppendixCase::VI => f56_numerator(x, y, a, b) / (9.0 * (b - 1.0).powi(2) * middle(a, b)),
        other => appendix_f(other, x, y, a, b),
    }
}

fn three_strata_moment(q: [f64; 3], vol: f64) -> f64 {
    let var: f64 = q.iter().map(|p| p * (1.0 - p)).sum::<f64>() / 9.0;
    let bias = q.iter().sum::<f64>() / 3.0 - vol;
    var + bias * bias
}

fn f1(x: f64, y: f64, a: f64) -> f64 {
    x * y * (2.0 + 3.0 * (-4.0 + 3.0 * a * a) * x * y) / (9.0 * a * a)
}

fn f2(x: f64, y: f64, a: f64, b: f64, quartic: f64) -> f64 {
    let bb = (b - 2.0) * b;
    let a2 = a * a;
    let num = x.powi(3) * (-2.0 * y * (-6.0 * a2 - 3.0 * bb + 1.0) - 8.0 * a)
        + x * x
            * (3.0 * a2 * y * y * (3.0 * a2 + 3.0 * bb + 1.0) - 4.0 * a * y * (6.0 * a2 + 3.0 * bb - 1.0)
                + 6.0 * a2
                + (2.0 - b) * b
                + 1.0)
        + x * (4.0 * a.powi(3) - 2.0 * a2 * y + 2.0 * a * bb - 2.0 * a)
        + 2.0 * x.powi(4) * quartic;
    num / (9.0 * a2 * middle(a, b))
}

fn f3(x: f64, y: f64, a: f64, b: f64) -> f64 {
    let bb = (b - 2.0) * b;
    let a2 = a * a;
    let num = 2.0 * x.powi(4)
        + x.powi(3) * (12.0 * a2 * y - 8.0 * a + 6.0 * bb * y - 2.0 * y)
        + x * (12.0 * a.powi(4) * y - 24.0 * a.powi(3) * y * y - 4.0 * a.powi(3) + 6.0 * a2 * b * b * y
            - 12.0 * a2 * b * y
            + 12.0 * a2 * y.powi(3)
            + 12.0 * a2 * y
            - 12.0 * a * bb * y * y
            + 2.0 * a * bb
            - 4.0 * a * y * y
            - 2.0 * a
            + 6.0 * bb * y.powi(3)
            - 2.0 * y.powi(3))
        + x * x
            * (9.0 * a.powi(4) * y * y - 24.0 * a.powi(3) * y + 3.0 * a2 * (3.0 * bb + 1.0) * y * y + 10.0 * a2
                - 12.0 * a * bb * y
                - 4.0 * a * y
                + (2.0 - b) * b
                + 4.0 * y * y
                + 1.0)
        + 2.0 * a * bb * y
        - 8.0 * a * y.powi(3)
        - 2.0 * a * y
        - bb * y * y
        + 2.0 * y.powi(4)
        + y * y
        + 2.0 * a2 * b
        + 10.0 * a2 * y * y
        + a2
        - 4.0 * a.powi(3) * y
        - a2 * b * b;
    num / (9.0 * a2 * middle(a, b))
}

fn f56_numerator(x: f64, y: f64, a: f64, b: f64) -> f64 {
    let (a2, a3, a4) = (a * a, a.powi(3), a.powi(4));
    let (b2, b3, b4) = (b * b, b.powi(3), b.powi(4));
    let bb = (b - 2.0) * b;
    let c0 = a4 * b2 - 2.0 * a4 * b * y + 2.0 * a4 * b + a4 * y * y - 2.0 * a4 * y
        + a4
        + 2.0 * a2 * (b + 1.0).powi(2) * (2.0 * b2 + 1.0)
        - 8.0 * a2 * b * y.powi(3)
        + 2.0 * a2 * (b * (7.0 * b + 10.0) + 6.0) * y * y
        - 4.0 * a2 * b * (b * (3.0 * b + 5.0) + 4.0) * y
        + 2.0 * a2 * y.powi(4)
        - 8.0 * a2 * y.powi(3)
        - 8.0 * a2 * y;
    let c4 = -2.0 * a2 - 2.0 * b2 + 4.0 * b + 2.0;
    let c3 = -6.0 * a4 * y + 8.0 * a3 + 8.0 * a2 * y - 8.0 * a + 6.0 * b4 * y + b3 * (8.0 - 24.0 * y)
        - 2.0 * b2 * (4.0 - 10.0 * y)
        + 8.0 * b * (y - 2.0)
        - 2.0 * y;
    let c2 = 9.0 * a4 * bb * y * y + 12.0 * a4 * b * y - 3.0 * a4 * y * y + 12.0 * a4 * y + a4
        - 24.0 * a3 * bb * y
        - 16.0 * a3 * b
        - 8.0 * a3 * y
        - 16.0 * a3
        + 2.0 * a2 * (8.0 * b2 + 7.0)
        + 3.0 * a2 * (bb - 1.0) * (3.0 * bb - 1.0) * y * y
        + 8.0 * a2 * (b + 1.0) * (3.0 * bb - 1.0) * y
        - 12.0 * a * b4 * y
        + 8.0 * a * b3 * (6.0 * y - 2.0)
        + 8.0 * a * b2 * (2.0 - 5.0 * y)
        - 16.0 * a * b * (y - 2.0)
        + 4.0 * a * y
        - 5.0 * b4
        + 8.0 * b3 * y
        + 4.0 * b3
        - 4.0 * b2 * y * (y + 2.0)
        + 8.0 * b2
        + 8.0 * b * (y - 1.0).powi(2)
        + 1.0;
    let c1 = -6.0 * a4 * b2 * y + 12.0 * a4 * b * y * y - 12.0 * a4 * b * y - 2.0 * a4 * b - 6.0 * a4 * y.powi(3)
        + 12.0 * a4 * y * y
        - 4.0 * a4 * y
        - 2.0 * a4
        + 12.0 * a3 * b2
        - 16.0 * a3 * b * y
        + 8.0 * a3 * b
        + 8.0 * a3 * y * y
        - 16.0 * a3 * y
        + 12.0 * a3
        - 2.0 * a2 * b * (6.0 * b3 - 29.0 * b - 30.0) * y
        - 12.0 * a2 * bb * y.powi(3)
        + 8.0 * a2 * (b + 1.0) * (3.0 * bb - 2.0) * y * y
        - 4.0 * a2 * (b + 1.0) * (b * (3.0 * b + 2.0) + 2.0)
        + 4.0 * a2 * y.powi(3)
        + 18.0 * a2 * y
        + 10.0 * a * b4
        - 16.0 * a * b3 * y
        - 8.0 * a * b3
        + 8.0 * a * b2 * y * (y + 2.0)
        - 16.0 * a * b2
        - 16.0 * a * b * (y - 1.0).powi(2)
        - 2.0 * a;
    poly(&[c0, c1, c2, c3, c4], x)
}
