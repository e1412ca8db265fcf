//! Built-in problems with known Pareto sets.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::{ObjectiveSpec, ProblemInstance};

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static [(&'static str, &'static str)],
    pub summary: &'static str,
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "example1",
        params: &[("a", "positive real, default 1")],
        summary: "f1 = a(x1-1)^2 + x2^2 + x3^2, f2 = x1^2 + (x2-1)^2 + x3^2, f3 = x1^2 + x2^2 + (x3-1)^2 on R^3",
    },
    CatalogEntry {
        name: "example2",
        params: &[],
        summary: "f1 = (x-2)^2, f2 = x^2 (x<1) or x^2 + (x-1)^2 (x>=1) on R; C1 but not C2",
    },
    CatalogEntry {
        name: "remark3_rank_deficient",
        params: &[],
        summary: "f = (x^2, x^2) on R; Pareto set {0}, rank df_0 = 0",
    },
    CatalogEntry {
        name: "remark4_identical_norms",
        params: &[("n", "positive integer, default 3")],
        summary: "f_i = |x|^2 for i = 1..3 on R^n; Pareto set {0}",
    },
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

/// Looks up a catalog problem by name.
pub fn get(name: &str, params: &Params) -> Result<ProblemInstance> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))?;
    if let Some(key) = params
        .keys()
        .find(|k| !entry.params.iter().any(|(p, _)| p == k))
    {
        return Err(Error::InvalidParameter {
            name: key.clone(),
            reason: format!("not accepted by `{name}`"),
        });
    }
    match name {
        "example1" => example1(params.get("a").copied().unwrap_or(1.0)),
        "example2" => example2(),
        "remark3_rank_deficient" => remark3_rank_deficient(),
        "remark4_identical_norms" => {
            let n = params.get("n").copied().unwrap_or(3.0);
            if !(n >= 1.0) || n.fract() != 0.0 {
                return Err(Error::InvalidParameter {
                    name: "n".into(),
                    reason: format!("must be a positive integer, got {n}"),
                });
            }
            remark4_identical_norms(n as usize)
        }
        _ => unreachable!("catalog entry without constructor"),
    }
}

/// Three distance-squared objectives on ℝ³ with the first one stretched by `a`.
///
/// Pareto set: x*(w) = (a w₁ / (a w₁ + 1 − w₁), w₂, w₃).
pub fn example1(a: f64) -> Result<ProblemInstance> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter {
            name: "a".into(),
            reason: format!("must be positive, got {a}"),
        });
    }
    let objectives = vec![
        ObjectiveSpec::separable_quadratic(&[a, 1.0, 1.0], &[1.0, 0.0, 0.0])?,
        ObjectiveSpec::separable_quadratic(&[1.0, 1.0, 1.0], &[0.0, 1.0, 0.0])?,
        ObjectiveSpec::separable_quadratic(&[1.0, 1.0, 1.0], &[0.0, 0.0, 1.0])?,
    ];
    // f1 spans [0, a + 1] on the Pareto set, f2 and f3 span [0, 2].
    Ok(ProblemInstance::new(format!("example1(a={a})"), 3, objectives)?
        .with_analytic_k0((a + 1.0).max(2.0)))
}

/// Closed-form scalarization map of [`example1`].
pub fn example1_x_star(a: f64, w: &[f64]) -> DVector<f64> {
    let denom = a * w[0] + (1.0 - w[0]);
    DVector::from_vec(vec![a * w[0] / denom, w[1], w[2]])
}

fn example2_f2(x: f64) -> f64 {
    if x < 1.0 {
        x * x
    } else {
        x * x + (x - 1.0) * (x - 1.0)
    }
}

fn example2_df2(x: f64) -> f64 {
    // Both branches give 2 at x = 1; the left formula is used there.
    if x <= 1.0 {
        2.0 * x
    } else {
        2.0 * x + 2.0 * (x - 1.0)
    }
}

/// A C¹, non-C² pair on ℝ. Both objectives have convexity parameter 2.
pub fn example2() -> Result<ProblemInstance> {
    let f1 = ObjectiveSpec::separable_quadratic(&[1.0], &[2.0])?;
    let f2 = ObjectiveSpec::new(
        2.0,
        |x: &DVector<f64>| example2_f2(x[0]),
        |x: &DVector<f64>| DVector::from_element(1, example2_df2(x[0])),
    )?;
    // Pareto set [0, 2]: f1 spans [0, 4], f2 spans [0, 5].
    Ok(ProblemInstance::new("example2", 1, vec![f1, f2])?.with_analytic_k0(5.0))
}

/// Closed-form x* ∘ φ for [`example2`], φ(w₁) = (w₁, 1 − w₁).
pub fn example2_x_star(w1: f64) -> f64 {
    if w1 < 0.5 {
        2.0 * w1
    } else {
        (w1 + 1.0) / (2.0 - w1)
    }
}

fn norm_squared(n: usize) -> Result<ObjectiveSpec> {
    Ok(ObjectiveSpec::new(
        2.0,
        |x: &DVector<f64>| x.norm_squared(),
        |x: &DVector<f64>| x * 2.0,
    )?
    .with_hessian(move |_| DMatrix::identity(n, n) * 2.0))
}

/// f(x) = (x², x²) on ℝ: strongly convex, Pareto set {0}, rank df₀ = 0.
pub fn remark3_rank_deficient() -> Result<ProblemInstance> {
    Ok(
        ProblemInstance::new("remark3_rank_deficient", 1, vec![norm_squared(1)?, norm_squared(1)?])?
            .with_analytic_k0(0.0),
    )
}

/// fᵢ(x) = ‖x‖² for i = 1, 2, 3 on ℝⁿ.
pub fn remark4_identical_norms(n: usize) -> Result<ProblemInstance> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n".into(),
            reason: "must be positive".into(),
        });
    }
    let objectives = (0..3).map(|_| norm_squared(n)).collect::<Result<Vec<_>>>()?;
    Ok(ProblemInstance::new("remark4_identical_norms", n, objectives)?.with_analytic_k0(0.0))
}
