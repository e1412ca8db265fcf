//! Sampling-based strong convexity certificates.
//!
//! Three equivalent characterizations of "strongly convex with parameter α"
//! are checked on finite samples:
//!
//! * the defining inequality
//!   `f(tx + (1−t)y) ≤ t f(x) + (1−t) f(y) − ½ α t(1−t) ‖x−y‖²`,
//! * plain convexity of the shifted function `g(x) = f(x) − (α/2)‖x‖²`,
//! * `λ_min(∇²f(x)) ≥ α` (C² objectives only).
//!
//! A finite sample can refute strong convexity but never prove it, so a
//! passing certificate means "no violation found".

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{ObjectiveSpec, Smoothness};

pub const DEFAULT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityMethod {
    MidpointDefinition,
    ShiftedConvexity,
    HessianEigenvalue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    pub method: ConvexityMethod,
    pub alpha_tested: f64,
    pub samples_used: usize,
    /// Most negative slack observed (the smallest margin).
    pub worst_margin: f64,
    pub passed: bool,
}

impl ConvexityCertificate {
    fn from_margins(
        method: ConvexityMethod,
        alpha: f64,
        margins: impl Iterator<Item = f64>,
        slack: f64,
    ) -> Self {
        let mut samples_used = 0;
        let mut worst_margin = f64::INFINITY;
        for m in margins {
            samples_used += 1;
            // NaN margins count as violations.
            worst_margin = if m.is_nan() { f64::NEG_INFINITY } else { worst_margin.min(m) };
        }
        Self {
            method,
            alpha_tested: alpha,
            samples_used,
            worst_margin,
            passed: worst_margin >= -slack,
        }
    }
}

/// A test triple (x, y, t) for the interpolation inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub t: f64,
}

impl Triple {
    pub fn new(x: DVector<f64>, y: DVector<f64>, t: f64) -> Self {
        Self { x, y, t }
    }

    fn interpolate(&self) -> DVector<f64> {
        &self.x * self.t + &self.y * (1.0 - self.t)
    }
}

fn check_inputs(alpha: f64, triples: &[Triple]) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    for tr in triples {
        if tr.x.len() != tr.y.len() {
            return Err(Error::DimensionMismatch {
                expected: tr.x.len(),
                actual: tr.y.len(),
            });
        }
        if !(0.0..=1.0).contains(&tr.t) {
            return Err(Error::InvalidInterpolation(tr.t));
        }
    }
    Ok(())
}

pub fn certify_midpoint(
    objective: &ObjectiveSpec,
    alpha: f64,
    triples: &[Triple],
) -> Result<ConvexityCertificate> {
    certify_midpoint_with_slack(objective, alpha, triples, DEFAULT_SLACK)
}

pub fn certify_midpoint_with_slack(
    objective: &ObjectiveSpec,
    alpha: f64,
    triples: &[Triple],
    slack: f64,
) -> Result<ConvexityCertificate> {
    check_inputs(alpha, triples)?;
    let margins = triples.iter().map(|tr| {
        let t = tr.t;
        let rhs = t * objective.value(&tr.x) + (1.0 - t) * objective.value(&tr.y)
            - 0.5 * alpha * t * (1.0 - t) * (&tr.x - &tr.y).norm_squared();
        rhs - objective.value(&tr.interpolate())
    });
    Ok(ConvexityCertificate::from_margins(
        ConvexityMethod::MidpointDefinition,
        alpha,
        margins,
        slack,
    ))
}

pub fn certify_shifted_convexity(
    objective: &ObjectiveSpec,
    alpha: f64,
    triples: &[Triple],
) -> Result<ConvexityCertificate> {
    certify_shifted_convexity_with_slack(objective, alpha, triples, DEFAULT_SLACK)
}

pub fn certify_shifted_convexity_with_slack(
    objective: &ObjectiveSpec,
    alpha: f64,
    triples: &[Triple],
    slack: f64,
) -> Result<ConvexityCertificate> {
    check_inputs(alpha, triples)?;
    let shifted = |x: &DVector<f64>| objective.value(x) - 0.5 * alpha * x.norm_squared();
    let margins = triples.iter().map(|tr| {
        let t = tr.t;
        t * shifted(&tr.x) + (1.0 - t) * shifted(&tr.y) - shifted(&tr.interpolate())
    });
    Ok(ConvexityCertificate::from_margins(
        ConvexityMethod::ShiftedConvexity,
        alpha,
        margins,
        slack,
    ))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(matrix: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(matrix.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// `objective_index` only labels the error when the Hessian is missing.
pub fn certify_hessian(
    objective: &ObjectiveSpec,
    objective_index: usize,
    alpha: f64,
    probe_points: &[DVector<f64>],
) -> Result<ConvexityCertificate> {
    certify_hessian_with_slack(objective, objective_index, alpha, probe_points, DEFAULT_SLACK)
}

pub fn certify_hessian_with_slack(
    objective: &ObjectiveSpec,
    objective_index: usize,
    alpha: f64,
    probe_points: &[DVector<f64>],
    slack: f64,
) -> Result<ConvexityCertificate> {
    if objective.smoothness() != Smoothness::C2OrHigher || !objective.has_hessian() {
        return Err(Error::HessianUnavailable(objective_index));
    }
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    let margins = probe_points.iter().map(|x| {
        let h = objective.hessian(x).expect("hessian presence checked above");
        min_eigenvalue(&h) - alpha
    });
    Ok(ConvexityCertificate::from_margins(
        ConvexityMethod::HessianEigenvalue,
        alpha,
        margins,
        slack,
    ))
}

/// `t‖x‖² + (1−t)‖y‖² − ‖tx + (1−t)y‖² − t(1−t)‖x−y‖²`, identically zero.
pub fn norm_identity_residual(t: f64, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let lhs = t * x.norm_squared() + (1.0 - t) * y.norm_squared()
        - (x * t + y * (1.0 - t)).norm_squared();
    lhs - t * (1.0 - t) * (x - y).norm_squared()
}

/// Axis-aligned box used for random probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeBox {
    pub lower: f64,
    pub upper: f64,
}

impl Default for ProbeBox {
    fn default() -> Self {
        Self {
            lower: -2.0,
            upper: 2.0,
        }
    }
}

impl ProbeBox {
    pub fn new(lower: f64, upper: f64) -> Self {
        assert!(lower < upper, "empty probe box");
        Self { lower, upper }
    }

    fn point(&self, rng: &mut impl Rng, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.gen_range(self.lower..=self.upper))
    }
}

pub fn sample_points(n: usize, count: usize, bounds: ProbeBox, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| bounds.point(&mut rng, n)).collect()
}

pub fn sample_triples(n: usize, count: usize, bounds: ProbeBox, seed: u64) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = bounds.point(&mut rng, n);
            let y = bounds.point(&mut rng, n);
            let t = rng.gen_range(0.0..=1.0);
            Triple { x, y, t }
        })
        .collect()
}

/// Brute-force search for a triple violating the definition inequality at
/// `alpha`. Returns the triple with the most negative margin, if any margin
/// is below `-slack`.
pub fn find_violating_triple(
    objective: &ObjectiveSpec,
    alpha: f64,
    n: usize,
    bounds: ProbeBox,
    budget: usize,
    seed: u64,
) -> Result<Option<Triple>> {
    let triples = sample_triples(n, budget, bounds, seed);
    let mut worst: Option<(f64, &Triple)> = None;
    for tr in &triples {
        let cert = certify_midpoint(objective, alpha, std::slice::from_ref(tr))?;
        if !cert.passed && worst.is_none_or(|(m, _)| cert.worst_margin < m) {
            worst = Some((cert.worst_margin, tr));
        }
    }
    Ok(worst.map(|(_, tr)| tr.clone()))
}

/// Worst relative disagreement between analytic and central-difference
/// derivatives over a set of probe points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub gradient_rel_error: f64,
    pub hessian_rel_error: Option<f64>,
}

pub fn derivative_consistency(objective: &ObjectiveSpec, points: &[DVector<f64>]) -> DerivativeCheck {
    let rel = |fd: f64, exact: f64| (fd - exact).abs() / exact.abs().max(1.0);
    let mut gradient_rel_error: f64 = 0.0;
    let mut hessian_rel_error: Option<f64> = objective.has_hessian().then_some(0.0);
    for x in points {
        let n = x.len();
        let g = objective.gradient(x);
        let h = objective.hessian(x);
        for j in 0..n {
            let step = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += step;
            xm[j] -= step;
            let fd = (objective.value(&xp) - objective.value(&xm)) / (2.0 * step);
            gradient_rel_error = gradient_rel_error.max(rel(fd, g[j]));
            if let (Some(h), Some(err)) = (&h, hessian_rel_error.as_mut()) {
                let col = (objective.gradient(&xp) - objective.gradient(&xm)) / (2.0 * step);
                for i in 0..n {
                    *err = err.max(rel(col[i], h[(i, j)]));
                }
            }
        }
    }
    DerivativeCheck {
        gradient_rel_error,
        hessian_rel_error,
    }
}
