//! Certified minimization of strongly convex scalar functions.
//!
//! For an α-strongly convex C¹ function F with minimizer x̂,
//! `‖x − x̂‖ ≤ ‖∇F(x)‖ / α` at every x. The solver stops once this radius
//! drops below the requested tolerance, so a converged result is a
//! guaranteed enclosure of the true minimizer.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{GradientFn, HessianFn, ProblemInstance, ScalarFn};
use crate::weights::WeightVector;

pub const DEFAULT_TOL_X: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// A strongly convex scalar function with its convexity parameter.
#[derive(Clone)]
pub struct ScalarObjective {
    evaluate: ScalarFn,
    gradient: GradientFn,
    hessian: Option<HessianFn>,
    alpha: f64,
}

impl std::fmt::Debug for ScalarObjective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarObjective")
            .field("alpha", &self.alpha)
            .field("has_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl ScalarObjective {
    pub fn new<F, G>(alpha: f64, evaluate: F, gradient: G) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        if !(alpha > 0.0) {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        Ok(Self {
            evaluate: Arc::new(evaluate),
            gradient: Arc::new(gradient),
            hessian: None,
            alpha,
        })
    }

    pub fn with_hessian<H>(mut self, hessian: H) -> Self
    where
        H: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.evaluate)(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }

    pub fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.hessian.as_ref().map(|h| h(x))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Σ wᵢ fᵢ with parameter Σ wᵢ αᵢ. Objectives with zero weight are skipped,
/// so a vertex weight reproduces fᵢ exactly.
pub fn weighted_objective(problem: &ProblemInstance, w: &WeightVector) -> Result<ScalarObjective> {
    if w.len() != problem.m() {
        return Err(Error::DimensionMismatch {
            expected: problem.m(),
            actual: w.len(),
        });
    }
    let terms: Arc<Vec<(f64, crate::problem::ObjectiveSpec)>> = Arc::new(
        w.support()
            .iter()
            .map(|&i| (w[i], problem.objective(i).clone()))
            .collect(),
    );
    let alpha = terms.iter().map(|(wi, o)| wi * o.alpha()).sum();
    let n = problem.n();

    let t1 = terms.clone();
    let t2 = terms.clone();
    let mut objective = ScalarObjective::new(
        alpha,
        move |x| t1.iter().map(|(wi, o)| wi * o.value(x)).sum(),
        move |x| {
            t2.iter()
                .fold(DVector::zeros(n), |acc, (wi, o)| acc + o.gradient(x) * *wi)
        },
    )?;
    if terms.iter().all(|(_, o)| o.has_hessian()) {
        let t3 = terms;
        objective = objective.with_hessian(move |x| {
            t3.iter().fold(DMatrix::zeros(n, n), |acc, (wi, o)| {
                acc + o.hessian(x).expect("checked above") * *wi
            })
        });
    }
    Ok(objective)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol_x: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_x: DEFAULT_TOL_X,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedMinimizer {
    pub x: DVector<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    /// ‖∇F(x)‖ / α, an upper bound on the distance to the true minimizer.
    pub error_radius: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn minimize(
    objective: &ScalarObjective,
    x0: &DVector<f64>,
    tol_x: f64,
    max_iter: usize,
) -> Result<CertifiedMinimizer> {
    minimize_observed(objective, x0, tol_x, max_iter, |_, _| {})
}

/// Like [`minimize`], calling `observer(iteration, value)` after every
/// accepted step (and once for the starting point with iteration 0).
pub fn minimize_observed<O>(
    objective: &ScalarObjective,
    x0: &DVector<f64>,
    tol_x: f64,
    max_iter: usize,
    mut observer: O,
) -> Result<CertifiedMinimizer>
where
    O: FnMut(usize, f64),
{
    if !(tol_x > 0.0) {
        return Err(Error::InvalidConfig(format!("tol_x must be positive, got {tol_x}")));
    }
    let alpha = objective.alpha();
    let target = alpha * tol_x;

    let mut x = x0.clone();
    let mut f = objective.value(&x);
    let mut g = objective.gradient(&x);
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: g.len(),
        });
    }
    let mut gn = g.norm();
    let mut step_guess = 1.0;
    let mut iterations = 0;
    observer(0, f);

    while gn > target && iterations < max_iter {
        let newton = objective
            .hessian(&x)
            .and_then(Cholesky::new)
            .map(|chol| -chol.solve(&g))
            .filter(|d| d.dot(&g) < 0.0 && d.iter().all(|v| v.is_finite()));
        let is_newton = newton.is_some();
        let d = newton.unwrap_or_else(|| -&g);
        let slope = g.dot(&d);
        let rounding = 4.0 * f64::EPSILON * f.abs().max(1.0);

        let mut t: f64 = if is_newton { 1.0 } else { step_guess };
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let xn = &x + &d * t;
            let fnew = objective.value(&xn);
            if fnew.is_finite() {
                if fnew <= f + ARMIJO_C * t * slope {
                    accepted = Some((xn, fnew, None));
                    break;
                }
                // The decrease is below the floating-point resolution of f;
                // only the derivative search can still make progress.
                if fnew <= f + rounding {
                    break;
                }
            }
            t *= 0.5;
        }
        if accepted.is_none() {
            accepted = derivative_search(objective, &x, &d, slope, if is_newton { 1.0 } else { step_guess })
                .map(|(xn, fnew, gnew, s)| {
                    t = s;
                    (xn, fnew, Some(gnew))
                });
        }
        let Some((xn, fnew, gnew)) = accepted else {
            break;
        };
        if !is_newton {
            step_guess = t * 2.0;
        }
        x = xn;
        f = fnew;
        g = gnew.unwrap_or_else(|| objective.gradient(&x));
        gn = g.norm();
        iterations += 1;
        observer(iterations, f);
    }

    Ok(CertifiedMinimizer {
        value: f,
        gradient_norm: gn,
        error_radius: gn / alpha,
        iterations,
        converged: gn <= target,
        x,
    })
}

/// Line search on φ'(s) = ⟨∇F(x + s·d), d⟩ for when value comparisons are
/// lost in rounding. Bisects a bracket [lo, hi] with φ'(lo) < 0 ≤ φ'(hi)
/// until |φ'(lo)| ≤ |φ'(0)| / 10 and returns the point at `lo`. Since φ' is
/// non-decreasing and negative on [0, lo], φ(lo) < φ(0) in exact arithmetic
/// even when the computed values cannot show it.
fn derivative_search(
    objective: &ScalarObjective,
    x: &DVector<f64>,
    d: &DVector<f64>,
    slope: f64,
    initial: f64,
) -> Option<(DVector<f64>, f64, DVector<f64>, f64)> {
    let dphi = |s: f64| {
        let g = objective.gradient(&(x + d * s));
        (g.dot(d), g)
    };
    let (mut lo, mut g_lo) = (0.0, None);
    let mut hi = initial;
    let mut found_hi = false;
    for _ in 0..MAX_HALVINGS {
        let (v, g) = dphi(hi);
        if !v.is_finite() {
            break;
        }
        if v >= 0.0 {
            found_hi = true;
            break;
        }
        lo = hi;
        g_lo = Some((v, g));
        hi *= 2.0;
    }
    if !found_hi {
        return None;
    }
    for _ in 0..MAX_HALVINGS {
        if g_lo.as_ref().is_some_and(|(v, _)| *v >= 0.1 * slope) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (v, g) = dphi(mid);
        if v < 0.0 {
            lo = mid;
            g_lo = Some((v, g));
        } else {
            hi = mid;
        }
    }
    let (_, g) = g_lo?;
    let xn = x + d * lo;
    let fnew = objective.value(&xn);
    fnew.is_finite().then_some((xn, fnew, g, lo))
}
