//! The scalarization map x*(w) = argmin Σ wᵢ fᵢ and Pareto set sampling.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::rank::{numerical_rank_with_floor, DEFAULT_RANK_THRESHOLD};
use crate::solver::{minimize, weighted_objective, DEFAULT_MAX_ITER, DEFAULT_TOL_X};
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoOptions {
    pub tol_x: f64,
    pub max_iter: usize,
    pub rank_threshold: f64,
    /// Warm-start each solve from the previous grid point's solution. When
    /// off, every solve starts at the origin and the sweep runs in parallel.
    pub warm_start: bool,
}

impl Default for ParetoOptions {
    fn default() -> Self {
        Self {
            tol_x: DEFAULT_TOL_X,
            max_iter: DEFAULT_MAX_ITER,
            rank_threshold: DEFAULT_RANK_THRESHOLD,
            warm_start: true,
        }
    }
}

impl ParetoOptions {
    pub fn with_tol_x(mut self, tol_x: f64) -> Self {
        self.tol_x = tol_x;
        self
    }
}

/// One evaluation of the scalarization map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoSample {
    pub w: WeightVector,
    pub x: Vec<f64>,
    pub f_values: Vec<f64>,
    /// ‖Σ wᵢ ∇fᵢ(x)‖ at the returned point.
    pub kkt_residual: f64,
    pub jacobian_rank: usize,
    pub singular_values: Vec<f64>,
    pub error_radius: f64,
    /// Σ wᵢ αᵢ, the convexity parameter of the scalarized objective.
    pub alpha_w: f64,
    pub converged: bool,
}

impl ParetoSample {
    pub fn x_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.x)
    }
}

/// Euclidean distance between two equal-length slices.
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

pub fn x_star(problem: &ProblemInstance, w: &WeightVector, options: &ParetoOptions) -> Result<ParetoSample> {
    x_star_from(problem, w, &DVector::zeros(problem.n()), options)
}

pub fn x_star_from(
    problem: &ProblemInstance,
    w: &WeightVector,
    x0: &DVector<f64>,
    options: &ParetoOptions,
) -> Result<ParetoSample> {
    problem.check_dim(x0)?;
    let objective = weighted_objective(problem, w)?;
    let result = minimize(&objective, x0, options.tol_x, options.max_iter)?;
    let jac = problem.jacobian(&result.x)?;
    let weights = DVector::from_column_slice(w.coordinates());
    let kkt_residual = (jac.transpose() * weights).norm();
    // σ_min(df_x) ≤ ‖wᵀ df_x‖ / ‖w‖₂, so singular values below the certified
    // residual level cannot be told apart from zero.
    let floor = (problem.m() as f64).sqrt() * objective.alpha() * options.tol_x;
    let rank = numerical_rank_with_floor(&jac, options.rank_threshold, floor);
    Ok(ParetoSample {
        w: w.clone(),
        f_values: problem.evaluate_all(&result.x)?.iter().copied().collect(),
        x: result.x.iter().copied().collect(),
        kkt_residual,
        jacobian_rank: rank.rank,
        singular_values: rank.singular_values,
        error_radius: result.error_radius,
        alpha_w: objective.alpha(),
        converged: result.converged,
    })
}

/// Samples every weight of `grid`, returning unconverged samples as-is.
pub fn sample_pareto_unchecked(
    problem: &ProblemInstance,
    grid: &[WeightVector],
    options: &ParetoOptions,
) -> Result<Vec<ParetoSample>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("weight grid is empty".into()));
    }
    if options.warm_start {
        let mut samples: Vec<ParetoSample> = Vec::with_capacity(grid.len());
        let mut x0 = DVector::zeros(problem.n());
        for w in grid {
            let s = x_star_from(problem, w, &x0, options)?;
            x0 = s.x_vector();
            samples.push(s);
        }
        Ok(samples)
    } else {
        grid.par_iter()
            .map(|w| x_star(problem, w, options))
            .collect()
    }
}

/// Samples the Pareto set on `grid`; fails if any solve did not converge.
pub fn sample_pareto(
    problem: &ProblemInstance,
    grid: &[WeightVector],
    options: &ParetoOptions,
) -> Result<Vec<ParetoSample>> {
    let samples = sample_pareto_unchecked(problem, grid, options)?;
    let count = samples.iter().filter(|s| !s.converged).count();
    if count > 0 {
        return Err(Error::NotConverged {
            count,
            total: samples.len(),
        });
    }
    Ok(samples)
}

/// The compact region Ω = ⋃ᵢ Ωᵢ containing the Pareto set, with
/// Ωᵢ = {x : fᵢ(xᵢ) + (αᵢ/2)‖x − xᵢ‖² ≤ fᵢ(x_ref)} and xᵢ the minimizer of fᵢ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingRegion {
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    /// fᵢ(xᵢ), the minimum value of each objective.
    pub min_values: Vec<f64>,
    /// fᵢ(x_ref) for each i.
    pub reference_values: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Zero-based index of the objective whose minimizer is the reference.
    pub reference_index: usize,
}

pub const DEFAULT_MEMBERSHIP_SLACK: f64 = 1e-9;

impl BoundingRegion {
    /// minᵢ [fᵢ(xᵢ) + (αᵢ/2)‖x − xᵢ‖² − fᵢ(x_ref)]; non-positive inside Ω.
    pub fn membership_excess(&self, x: &[f64]) -> f64 {
        (0..self.centers.len())
            .map(|i| {
                self.min_values[i] + 0.5 * self.alphas[i] * distance(x, &self.centers[i]).powi(2)
                    - self.reference_values[i]
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Membership with slack `DEFAULT_MEMBERSHIP_SLACK · max(1, |fᵢ(x_ref)|)`.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_slack(x, DEFAULT_MEMBERSHIP_SLACK)
    }

    pub fn contains_with_slack(&self, x: &[f64], slack: f64) -> bool {
        self.normalized_excess(x) <= slack
    }

    /// minᵢ of the membership excess of Ωᵢ divided by max(1, |fᵢ(x_ref)|).
    pub fn normalized_excess(&self, x: &[f64]) -> f64 {
        (0..self.centers.len())
            .map(|i| {
                (self.min_values[i] + 0.5 * self.alphas[i] * distance(x, &self.centers[i]).powi(2)
                    - self.reference_values[i])
                    / self.reference_values[i].abs().max(1.0)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn bounding_region(problem: &ProblemInstance, options: &ParetoOptions) -> Result<BoundingRegion> {
    bounding_region_with_reference(problem, 0, options)
}

pub fn bounding_region_with_reference(
    problem: &ProblemInstance,
    reference_index: usize,
    options: &ParetoOptions,
) -> Result<BoundingRegion> {
    let m = problem.m();
    if reference_index >= m {
        return Err(Error::InvalidConfig(format!(
            "reference objective {} out of range 1..={m}",
            reference_index + 1
        )));
    }
    let mut centers = Vec::with_capacity(m);
    for i in 0..m {
        let s = x_star(problem, &WeightVector::vertex(m, i)?, options)?;
        if !s.converged {
            return Err(Error::NotConverged { count: 1, total: m });
        }
        centers.push(s.x);
    }
    let reference = DVector::from_column_slice(&centers[reference_index]);
    let reference_values: Vec<f64> = problem.evaluate_all(&reference)?.iter().copied().collect();
    let alphas = problem.alphas();
    let min_values: Vec<f64> = centers
        .iter()
        .enumerate()
        .map(|(i, c)| problem.objective(i).value(&DVector::from_column_slice(c)))
        .collect();
    let radii = (0..m)
        .map(|i| (2.0 * (reference_values[i] - min_values[i]) / alphas[i]).max(0.0).sqrt())
        .collect();
    Ok(BoundingRegion {
        centers,
        radii,
        min_values,
        reference_values,
        alphas,
        reference_index,
    })
}

/// `a` dominates `b`: aᵢ ≤ bᵢ for all i and a_j < b_j for some j.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (p, q) in a.iter().zip(b) {
        if p > q {
            return false;
        }
        strictly |= p < q;
    }
    strictly
}

/// `a` strictly improves on `b` in every coordinate.
pub fn weakly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(p, q)| p < q)
}

fn filter_by<P, F>(points: &[P], dominated_by: F) -> Vec<usize>
where
    P: AsRef<[f64]>,
    F: Fn(&[f64], &[f64]) -> bool,
{
    if let Some(first) = points.first() {
        let m = first.as_ref().len();
        assert!(
            points.iter().all(|p| p.as_ref().len() == m),
            "all points must have the same length"
        );
    }
    (0..points.len())
        .filter(|&i| {
            !points
                .iter()
                .enumerate()
                .any(|(j, q)| j != i && dominated_by(q.as_ref(), points[i].as_ref()))
        })
        .collect()
}

/// Indices of Pareto-optimal points (O(N²) pairwise scan).
pub fn dominance_filter<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    filter_by(points, dominates)
}

/// Indices of weakly Pareto-optimal points; a superset of [`dominance_filter`].
pub fn weak_dominance_filter<P: AsRef<[f64]>>(points: &[P]) -> Vec<usize> {
    filter_by(points, weakly_dominates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::weights::simplex_grid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn x_star_example1_a4_edge() {
        let p = catalog::example1(4.0).unwrap();
        let w = WeightVector::new(vec![0.5, 0.5, 0.0]).unwrap();
        let s = x_star(&p, &w, &ParetoOptions::default()).unwrap();
        assert!(s.converged);
        assert_abs_diff_eq!(s.x[0], 0.8, epsilon = 1e-8);
        assert_abs_diff_eq!(s.x[1], 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(s.x[2], 0.0, epsilon = 1e-8);
        assert_eq!(s.jacobian_rank, 2);
    }

    #[test]
    fn x_star_vertex_is_objective_minimizer() {
        for a in [0.25, 1.0, 4.0] {
            let p = catalog::example1(a).unwrap();
            let s = x_star(&p, &WeightVector::vertex(3, 1).unwrap(), &ParetoOptions::default()).unwrap();
            assert!(distance(&s.x, &[0.0, 1.0, 0.0]) <= 1e-8);
        }
    }

    #[test]
    fn x_star_example2_left_branch() {
        let p = catalog::example2().unwrap();
        let s = x_star(&p, &WeightVector::new(vec![0.25, 0.75]).unwrap(), &ParetoOptions::default()).unwrap();
        assert_abs_diff_eq!(s.x[0], 0.5, epsilon = 1e-8);
    }

    #[test]
    fn remark3_samples_collapse_to_origin() {
        let p = catalog::remark3_rank_deficient().unwrap();
        let grid = simplex_grid(2, 10).unwrap();
        let samples = sample_pareto(&p, &grid, &ParetoOptions::default()).unwrap();
        assert_eq!(samples.len(), 11);
        assert!(samples.iter().all(|s| s.x[0].abs() <= 1e-8 && s.jacobian_rank == 0));
    }

    #[test]
    fn single_objective_gives_unique_minimizer() {
        let f = crate::problem::ObjectiveSpec::separable_quadratic(&[1.0, 2.0], &[3.0, -1.0]).unwrap();
        let p = ProblemInstance::new("single", 2, vec![f]).unwrap();
        let grid = simplex_grid(1, 4).unwrap();
        let samples = sample_pareto(&p, &grid, &ParetoOptions::default()).unwrap();
        assert_eq!(samples.len(), 1);
        assert!(distance(&samples[0].x, &[3.0, -1.0]) <= 1e-8);
        let region = bounding_region(&p, &ParetoOptions::default()).unwrap();
        assert_eq!(region.radii, vec![0.0]);
        assert!(region.contains(&samples[0].x));
    }

    #[test]
    fn warm_and_cold_sweeps_agree() {
        let p = catalog::example1(4.0).unwrap();
        let grid = simplex_grid(3, 6).unwrap();
        let warm = sample_pareto(&p, &grid, &ParetoOptions::default()).unwrap();
        let cold = sample_pareto(
            &p,
            &grid,
            &ParetoOptions {
                warm_start: false,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in warm.iter().zip(&cold) {
            assert_eq!(a.w, b.w);
            assert!(distance(&a.x, &b.x) <= 2e-8);
        }
    }

    #[test]
    fn unconverged_batch_fails() {
        let p = catalog::example2().unwrap();
        let grid = simplex_grid(2, 4).unwrap();
        let opts = ParetoOptions {
            max_iter: 0,
            ..Default::default()
        };
        assert!(matches!(
            sample_pareto(&p, &grid, &opts),
            Err(Error::NotConverged { .. })
        ));
        assert!(sample_pareto(&p, &[], &ParetoOptions::default()).is_err());
    }

    #[test]
    fn bounding_region_example1() {
        let p = catalog::example1(1.0).unwrap();
        let region = bounding_region(&p, &ParetoOptions::default()).unwrap();
        assert!(distance(&region.centers[0], &[1.0, 0.0, 0.0]) <= 1e-8);
        assert!(distance(&region.centers[2], &[0.0, 0.0, 1.0]) <= 1e-8);
        // radiusᵢ = sqrt(fᵢ(e₁)): 0, sqrt 2, sqrt 2.
        assert_abs_diff_eq!(region.radii[0], 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(region.radii[1], 2f64.sqrt(), epsilon = 1e-7);
        assert_abs_diff_eq!(region.radii[2], 2f64.sqrt(), epsilon = 1e-7);
        assert!(region.contains(&[0.2, 0.3, 0.5]));
        assert!(!region.contains(&[3.0, 3.0, 3.0]));
    }

    #[test]
    fn dominance_examples() {
        let pts = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        assert_eq!(dominance_filter(&pts), vec![0, 1]);
        assert_eq!(dominance_filter(&[vec![0.0, 0.0]]), vec![0]);
        let ties = vec![vec![0.0, 1.0], vec![0.0, 2.0]];
        assert_eq!(weak_dominance_filter(&ties), vec![0, 1]);
        assert_eq!(dominance_filter(&ties), vec![0]);
        let chain = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        assert_eq!(weak_dominance_filter(&chain), vec![0]);
        assert_eq!(dominance_filter(&chain), vec![0]);
        let empty: Vec<Vec<f64>> = Vec::new();
        assert!(dominance_filter(&empty).is_empty());
    }
}
