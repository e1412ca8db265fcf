//! Multiobjective problem definitions.
//!
//! A [`ProblemInstance`] is an ordered list of strongly convex objectives on a
//! common decision space ℝⁿ. Objectives are executable callbacks; each carries
//! its declared convexity parameter α so that downstream solvers can turn a
//! gradient norm into a distance-to-minimizer certificate.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    C1,
    C2OrHigher,
}

/// One strongly convex objective fᵢ together with its derivatives.
#[derive(Clone)]
pub struct ObjectiveSpec {
    evaluate: ScalarFn,
    gradient: GradientFn,
    hessian: Option<HessianFn>,
    alpha: f64,
    smoothness: Smoothness,
}

impl fmt::Debug for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveSpec")
            .field("alpha", &self.alpha)
            .field("smoothness", &self.smoothness)
            .field("has_hessian", &self.hessian.is_some())
            .finish()
    }
}

impl ObjectiveSpec {
    /// A C¹ objective without a Hessian.
    pub fn new<F, G>(alpha: f64, evaluate: F, gradient: G) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        Ok(Self {
            evaluate: Arc::new(evaluate),
            gradient: Arc::new(gradient),
            hessian: None,
            alpha,
            smoothness: Smoothness::C1,
        })
    }

    /// Attaches a Hessian and marks the objective as C².
    pub fn with_hessian<H>(mut self, hessian: H) -> Self
    where
        H: Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.hessian = Some(Arc::new(hessian));
        self.smoothness = Smoothness::C2OrHigher;
        self
    }

    /// Separable quadratic `Σ cᵢ (xᵢ − pᵢ)²` with the tight parameter `2·min cᵢ`.
    pub fn separable_quadratic(coefficients: &[f64], center: &[f64]) -> Result<Self> {
        if coefficients.len() != center.len() {
            return Err(Error::DimensionMismatch {
                expected: coefficients.len(),
                actual: center.len(),
            });
        }
        if let Some(&c) = coefficients.iter().find(|&&c| !(c > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "coefficient".into(),
                reason: format!("must be positive, got {c}"),
            });
        }
        let alpha = 2.0 * coefficients.iter().cloned().fold(f64::INFINITY, f64::min);
        let c = DVector::from_column_slice(coefficients);
        let p = DVector::from_column_slice(center);
        let (c1, p1) = (c.clone(), p.clone());
        let (c2, p2) = (c.clone(), p);
        Ok(Self::new(
            alpha,
            move |x| {
                x.iter()
                    .zip(c1.iter().zip(p1.iter()))
                    .map(|(xi, (ci, pi))| ci * (xi - pi).powi(2))
                    .sum()
            },
            move |x| {
                DVector::from_iterator(
                    x.len(),
                    x.iter()
                        .zip(c2.iter().zip(p2.iter()))
                        .map(|(xi, (ci, pi))| 2.0 * ci * (xi - pi)),
                )
            },
        )?
        .with_hessian(move |_| DMatrix::from_diagonal(&(&c * 2.0))))
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

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// Adds the linear form `⟨row, x⟩`. The convexity parameter and Hessian
    /// are unchanged.
    pub(crate) fn add_linear(&self, row: DVector<f64>) -> Self {
        let evaluate = self.evaluate.clone();
        let gradient = self.gradient.clone();
        let r1 = row.clone();
        Self {
            evaluate: Arc::new(move |x| evaluate(x) + r1.dot(x)),
            gradient: Arc::new(move |x| gradient(x) + &row),
            hessian: self.hessian.clone(),
            alpha: self.alpha,
            smoothness: self.smoothness,
        }
    }
}

/// A non-empty, strictly increasing subset I ⊆ M of objective indices
/// (zero-based internally; displayed one-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex {
    members: Vec<usize>,
}

impl SubsetIndex {
    pub fn new(members: Vec<usize>, m: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidSubset("subset must be non-empty".into()));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(format!(
                "members must be strictly increasing: {members:?}"
            )));
        }
        if let Some(&i) = members.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidSubset(format!(
                "index {} is outside 1..={m}",
                i + 1
            )));
        }
        Ok(Self { members })
    }

    /// Builds a subset from one-based indices, sorting and deduplicating.
    pub fn from_one_based(indices: &[usize], m: usize) -> Result<Self> {
        if indices.contains(&0) {
            return Err(Error::InvalidSubset("indices are one-based".into()));
        }
        let mut members: Vec<usize> = indices.iter().map(|i| i - 1).collect();
        members.sort_unstable();
        members.dedup();
        Self::new(members, m)
    }

    pub fn full(m: usize) -> Self {
        Self {
            members: (0..m).collect(),
        }
    }

    /// All 2ᵐ − 1 non-empty subsets, ordered by size then lexicographically.
    pub fn all_nonempty(m: usize) -> Vec<Self> {
        let mut subsets: Vec<Self> = (1u64..(1u64 << m))
            .map(|mask| Self {
                members: (0..m).filter(|i| mask & (1 << i) != 0).collect(),
            })
            .collect();
        subsets.sort_by(|a, b| {
            a.members
                .len()
                .cmp(&b.members.len())
                .then_with(|| a.members.cmp(&b.members))
        });
        subsets
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.members.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// The mapping f = (f₁, …, f_m): ℝⁿ → ℝᵐ.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    name: String,
    n: usize,
    objectives: Vec<ObjectiveSpec>,
    analytic_k0: Option<f64>,
}

impl ProblemInstance {
    pub fn new(name: impl Into<String>, n: usize, objectives: Vec<ObjectiveSpec>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n".into(),
                reason: "decision dimension must be positive".into(),
            });
        }
        if objectives.is_empty() {
            return Err(Error::InvalidParameter {
                name: "objectives".into(),
                reason: "at least one objective is required".into(),
            });
        }
        Ok(Self {
            name: name.into(),
            n,
            objectives,
            analytic_k0: None,
        })
    }

    /// Records a known upper bound on K₀ = maxᵢ (max fᵢ − min fᵢ over the
    /// Pareto set), used by the Hölder check instead of a sampled estimate.
    pub fn with_analytic_k0(mut self, k0: f64) -> Self {
        self.analytic_k0 = Some(k0);
        self
    }

    pub(crate) fn without_analytic_k0(mut self) -> Self {
        self.analytic_k0 = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.objectives.len()
    }

    pub fn objectives(&self) -> &[ObjectiveSpec] {
        &self.objectives
    }

    pub fn objective(&self, i: usize) -> &ObjectiveSpec {
        &self.objectives[i]
    }

    pub fn analytic_k0(&self) -> Option<f64> {
        self.analytic_k0
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.objectives.iter().map(ObjectiveSpec::alpha).collect()
    }

    /// α₀ = min αᵢ.
    pub fn min_alpha(&self) -> f64 {
        self.objectives
            .iter()
            .map(ObjectiveSpec::alpha)
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// f(x) ∈ ℝᵐ.
    pub fn evaluate_all(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x)?;
        Ok(DVector::from_iterator(
            self.m(),
            self.objectives.iter().map(|o| o.value(x)),
        ))
    }

    /// The differential df_x as an m×n matrix of stacked gradients.
    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        let mut jac = DMatrix::zeros(self.m(), self.n);
        for (i, o) in self.objectives.iter().enumerate() {
            let g = o.gradient(x);
            if g.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    actual: g.len(),
                });
            }
            jac.set_row(i, &g.transpose());
        }
        Ok(jac)
    }

    /// The subproblem f_I = (f_{i₁}, …, f_{i_k}).
    pub fn subproblem(&self, subset: &SubsetIndex) -> Result<Self> {
        if let Some(&i) = subset.members().iter().find(|&&i| i >= self.m()) {
            return Err(Error::InvalidSubset(format!(
                "index {} exceeds m = {}",
                i + 1,
                self.m()
            )));
        }
        Ok(Self {
            name: format!("{}{}", self.name, subset),
            n: self.n,
            objectives: subset
                .members()
                .iter()
                .map(|&i| self.objectives[i].clone())
                .collect(),
            analytic_k0: self.analytic_k0,
        })
    }

    pub(crate) fn with_objectives(&self, name: String, objectives: Vec<ObjectiveSpec>) -> Self {
        Self {
            name,
            n: self.n,
            objectives,
            analytic_k0: self.analytic_k0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_validation() {
        assert!(SubsetIndex::new(vec![], 3).is_err());
        assert!(SubsetIndex::new(vec![1, 0], 3).is_err());
        assert!(SubsetIndex::new(vec![0, 3], 3).is_err());
        let s = SubsetIndex::from_one_based(&[3, 1], 3).unwrap();
        assert_eq!(s.members(), &[0, 2]);
        assert_eq!(s.to_string(), "{1,3}");
        assert!(SubsetIndex::from_one_based(&[0], 3).is_err());
    }

    #[test]
    fn all_nonempty_subsets_count() {
        let all = SubsetIndex::all_nonempty(3);
        assert_eq!(all.len(), 7);
        assert_eq!(all[0].members(), &[0]);
        assert_eq!(all[6].members(), &[0, 1, 2]);
    }

    #[test]
    fn separable_quadratic_alpha_is_twice_min_coefficient() {
        let q = ObjectiveSpec::separable_quadratic(&[3.0, 0.5, 2.0], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(q.alpha(), 1.0);
        assert_eq!(q.smoothness(), Smoothness::C2OrHigher);
        let p = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_eq!(q.value(&p), 0.0);
        assert_eq!(q.gradient(&p), DVector::zeros(3));
    }

    #[test]
    fn non_positive_alpha_rejected() {
        let r = ObjectiveSpec::new(0.0, |x: &DVector<f64>| x.norm_squared(), |x| x * 2.0);
        assert!(matches!(r, Err(Error::NonPositiveAlpha(_))));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let q = ObjectiveSpec::separable_quadratic(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        let p = ProblemInstance::new("q", 2, vec![q]).unwrap();
        let x = DVector::zeros(3);
        assert_eq!(
            p.evaluate_all(&x).unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                actual: 3
            }
        );
        assert!(p.jacobian(&x).is_err());
    }
}
