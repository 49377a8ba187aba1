//! Two-state discrimination with equal priors, binary entropy and the
//! entropy inequalities behind the tradeoff bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::trace_norm;
use crate::qmeas::{outcome_probabilities, KrausInstrument};
use crate::qstate::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscriminationMethod {
    HelstromOptimal,
    ClassicalOutcomes,
    PureOverlap,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscriminationResult {
    pub p_error: f64,
    pub method: DiscriminationMethod,
}

fn require_unit_interval(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            value,
            low: 0.0,
            high: 1.0,
        })
    }
}

/// Minimum error for two equiprobable states, `1/2 - Tr|r1 - r2| / 4`.
pub fn helstrom_error(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<DiscriminationResult> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            expected: r1.dim(),
            found: r2.dim(),
        });
    }
    let diff = (r1.matrix() - r2.matrix()).hermitized();
    let p = 0.5 - trace_norm(&diff)? / 4.0;
    Ok(DiscriminationResult {
        p_error: p.clamp(0.0, 0.5),
        method: DiscriminationMethod::HelstromOptimal,
    })
}

/// Helstrom error for pure states with overlap `c = |<a|a'>|`:
/// `(1 - sqrt(1 - c^2)) / 2`, evaluated as `c^2 / (2 (1 + sqrt(1 - c^2)))` to
/// avoid cancellation at small `c`. Overlaps up to `1 + 1e-12` are accepted
/// and clamped.
pub fn pure_error_from_overlap(c: f64) -> Result<f64> {
    let c = if c > 1.0 && c <= 1.0 + 1e-12 { 1.0 } else { c };
    require_unit_interval(c)?;
    let s = (1.0 - c * c).max(0.0).sqrt();
    Ok(c * c / (2.0 * (1.0 + s)))
}

/// `H2(p) = -p log2 p - (1-p) log2(1-p)`, zero at both endpoints.
pub fn binary_entropy(p: f64) -> Result<f64> {
    require_unit_interval(p)?;
    let small = p.min(1.0 - p);
    let large = 1.0 - small;
    let small_term = if small < 1e-300 {
        0.0
    } else {
        -small * small.log2()
    };
    // log2(large) = log2(1 - small), kept accurate near 1
    let large_term = -large * (-small).ln_1p() / std::f64::consts::LN_2;
    Ok((small_term + large_term).clamp(0.0, 1.0))
}

/// `I = 1 - H2(p_e)` in bits.
pub fn mutual_information(p_e: f64) -> Result<f64> {
    Ok(1.0 - binary_entropy(p_e)?)
}

/// Error of the maximum-likelihood guess from the instrument's outcome
/// record: `1/2 - sum_k |p_k(r1) - p_k(r2)| / 4`.
pub fn classical_outcome_error(
    instr: &KrausInstrument,
    r1: &DensityMatrix,
    r2: &DensityMatrix,
) -> Result<DiscriminationResult> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            expected: r1.dim(),
            found: r2.dim(),
        });
    }
    let p1 = outcome_probabilities(instr, r1)?;
    let p2 = outcome_probabilities(instr, r2)?;
    let l1: f64 = p1.iter().zip(&p2).map(|(a, b)| (a - b).abs()).sum();
    Ok(DiscriminationResult {
        p_error: (0.5 - l1 / 4.0).clamp(0.0, 0.5),
        method: DiscriminationMethod::ClassicalOutcomes,
    })
}

/// Worst grid point of one inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    /// `max(lhs - rhs)` over the grid; `<= 0` when the inequality holds.
    pub max_violation: f64,
    /// Grid coordinate where `max_violation` occurs.
    pub location: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub grid_points: usize,
    pub checks: Vec<InequalityCheck>,
    /// `max |H2(p) - 4p(1-p)|` over `p in {0, 1/2, 1}`.
    pub endpoint_equality_residual: f64,
}

impl InequalityReport {
    pub fn worst_violation(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.max_violation)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(move |i| if i == n - 1 { b } else { a + step * i as f64 })
}

fn worst_on_grid(
    name: &'static str,
    points: impl Iterator<Item = f64>,
    excess: impl Fn(f64) -> f64,
) -> InequalityCheck {
    let mut check = InequalityCheck {
        name,
        max_violation: f64::NEG_INFINITY,
        location: f64::NAN,
    };
    for x in points {
        let e = excess(x);
        if e > check.max_violation {
            check.max_violation = e;
            check.location = x;
        }
    }
    check
}

fn h2(p: f64) -> f64 {
    binary_entropy(p.clamp(0.0, 1.0)).expect("clamped into range")
}

/// Checks on closed uniform grids:
///
/// - `4p(1-p) <= H2(p)` on `[0, 1]`
/// - `x <= H2(1/2 - sqrt(1-x)/2)` on `[0, 1]`
/// - `x <= H2(1/2 + sqrt(1-x)/2)` on `[0, 1]`
/// - `H2` non-decreasing on `[0, 1/2]` (consecutive grid points)
pub fn entropy_inequality_suite(grid_points: usize) -> Result<InequalityReport> {
    if grid_points < 2 {
        return Err(Error::OutOfRange {
            value: grid_points as f64,
            low: 2.0,
            high: f64::INFINITY,
        });
    }
    let n = grid_points;
    let quadratic = worst_on_grid("4p(1-p) <= H2(p)", grid(0.0, 1.0, n), |p| {
        4.0 * p * (1.0 - p) - h2(p)
    });
    let lower_branch = worst_on_grid("x <= H2(1/2 - sqrt(1-x)/2)", grid(0.0, 1.0, n), |x| {
        x - h2(0.5 - 0.5 * (1.0 - x).sqrt())
    });
    let upper_branch = worst_on_grid("x <= H2(1/2 + sqrt(1-x)/2)", grid(0.0, 1.0, n), |x| {
        x - h2(0.5 + 0.5 * (1.0 - x).sqrt())
    });
    let step = 0.5 / (n - 1) as f64;
    let monotone = worst_on_grid("H2 non-decreasing on [0, 1/2]", grid(0.0, 0.5, n), |p| {
        let next = (p + step).min(0.5);
        h2(p) - h2(next)
    });
    let endpoint_equality_residual = [0.0, 0.5, 1.0]
        .iter()
        .map(|&p| (h2(p) - 4.0 * p * (1.0 - p)).abs())
        .fold(0.0, f64::max);
    Ok(InequalityReport {
        grid_points: n,
        checks: vec![quadratic, lower_branch, upper_branch, monotone],
        endpoint_equality_residual,
    })
}
