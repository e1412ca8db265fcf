//! Numerical checks that witness (or refute) simpliciality on finite samples.
//!
//! Every check works on a finite grid, so a passing report is evidence that
//! the problem is consistent with being simplicial, not a proof.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pareto::{
    bounding_region, distance, dominance_filter, sample_pareto_unchecked, weak_dominance_filter,
    BoundingRegion, ParetoOptions, ParetoSample, DEFAULT_MEMBERSHIP_SLACK,
};
use crate::problem::{ProblemInstance, SubsetIndex};
use crate::rank::DEFAULT_RANK_THRESHOLD;
use crate::solver::{DEFAULT_MAX_ITER, DEFAULT_TOL_X};
use crate::weights::{face_embed, simplex_grid};

pub const KKT_ABSOLUTE_SLACK: f64 = 1e-9;
pub const FACE_SLACK: f64 = 1e-12;

pub const CHECK_KKT: &str = "kkt";
pub const CHECK_RANK: &str = "rank_condition";
pub const CHECK_HOLDER: &str = "holder";
pub const CHECK_X_INJECTIVITY: &str = "x_star_injectivity";
pub const CHECK_F_INJECTIVITY: &str = "f_injectivity";
pub const CHECK_FACE: &str = "face_consistency";
pub const CHECK_BOUNDING: &str = "bounding_region";
pub const CHECK_DOMINANCE: &str = "dominance_consistency";

/// Checks whose failure is explained by a failing rank condition.
const RANK_DEPENDENT: &[&str] = &[CHECK_X_INJECTIVITY];

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckOutcome {
    Passed,
    Inconclusive,
    Failed,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
}

impl Witness {
    fn of(samples: &[&ParetoSample]) -> Self {
        Self {
            subset: None,
            weights: samples.iter().map(|s| s.w.coordinates().to_vec()).collect(),
            points: samples.iter().map(|s| s.x.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Worse {
    Higher,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub outcome: CheckOutcome,
    /// Non-finite values (vacuous checks) serialize as null.
    #[serde(serialize_with = "finite_or_null")]
    pub worst_case: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    pub details: String,
}

impl CheckResult {
    fn build(name: &str, worst_case: f64, tolerance: f64, worse: Worse, witness: Option<Witness>, details: String) -> Self {
        let passed = match worse {
            Worse::Higher => worst_case <= tolerance,
            Worse::Lower => worst_case > tolerance,
        };
        Self {
            name: name.to_string(),
            passed,
            outcome: if passed { CheckOutcome::Passed } else { CheckOutcome::Failed },
            worst_case,
            tolerance,
            witness,
            details,
        }
    }

    fn mark_inconclusive(&mut self, note: &str) {
        if self.outcome == CheckOutcome::Passed {
            self.outcome = CheckOutcome::Inconclusive;
            self.passed = false;
        }
        self.details = format!("{}; {note}", self.details);
    }
}

fn direction(name: &str) -> Worse {
    match name {
        CHECK_X_INJECTIVITY | CHECK_F_INJECTIVITY => Worse::Lower,
        _ => Worse::Higher,
    }
}

/// Combines results of the same check over several subproblems.
fn merge(acc: Option<CheckResult>, next: CheckResult) -> CheckResult {
    let Some(acc) = acc else {
        return next;
    };
    let next_is_worse = match direction(&acc.name) {
        Worse::Higher => next.worst_case > acc.worst_case,
        Worse::Lower => next.worst_case < acc.worst_case,
    };
    let (mut keep, other) = if next_is_worse { (next, acc) } else { (acc, next) };
    keep.outcome = keep.outcome.max(other.outcome);
    keep.passed = keep.passed && other.passed;
    keep.tolerance = match direction(&keep.name) {
        Worse::Higher => keep.tolerance.min(other.tolerance),
        Worse::Lower => keep.tolerance.max(other.tolerance),
    };
    keep.details = format!("{}; {}", other.details, keep.details);
    keep
}

/// Every sample satisfies ‖Σ wᵢ∇fᵢ(x)‖ ≤ (Σ wᵢαᵢ)·tol_x + 1e−9.
/// `worst_case` is the largest residual-to-bound ratio.
pub fn check_kkt(samples: &[ParetoSample], tol_x: f64) -> CheckResult {
    let mut worst = 0.0;
    let mut witness = None;
    for s in samples {
        let ratio = s.kkt_residual / (s.alpha_w * tol_x + KKT_ABSOLUTE_SLACK);
        if ratio > worst || witness.is_none() {
            worst = f64::max(worst, ratio);
            witness = Some(Witness::of(&[s]));
        }
    }
    let max_residual = samples.iter().map(|s| s.kkt_residual).fold(0.0, f64::max);
    CheckResult::build(
        CHECK_KKT,
        worst,
        1.0,
        Worse::Higher,
        witness,
        format!("max residual {max_residual:e} over {} samples", samples.len()),
    )
}

/// Passes when every sample has Jacobian rank m − 1. A rank-m sample would
/// be a non-critical Pareto point, which is impossible; it is reported as
/// inconsistent rather than as a plain failure.
pub fn check_rank_condition(samples: &[ParetoSample], m: usize) -> CheckResult {
    let target = m.saturating_sub(1);
    let mut worst = 0usize;
    let mut witness = None;
    let mut full_rank = 0;
    let mut deficient = 0;
    for s in samples {
        let dev = s.jacobian_rank.abs_diff(target);
        if s.jacobian_rank >= m {
            full_rank += 1;
        } else if dev > 0 {
            deficient += 1;
        }
        if dev > worst || (witness.is_none() && dev == worst) {
            worst = dev;
            witness = Some(Witness::of(&[s]));
        }
    }
    let mut result = CheckResult::build(
        CHECK_RANK,
        worst as f64,
        0.0,
        Worse::Higher,
        witness,
        format!(
            "target rank {target}; {deficient} rank-deficient and {full_rank} full-rank samples of {}",
            samples.len()
        ),
    );
    if full_rank > 0 {
        result.outcome = CheckOutcome::Inconsistent;
    }
    result
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct K0Estimate {
    pub per_objective: Vec<f64>,
    pub k0: f64,
}

/// Kᵢ = max over sampled pairs of |fᵢ(x) − fᵢ(y)|, a lower bound on the true Kᵢ.
pub fn estimate_k0(samples: &[ParetoSample]) -> Result<K0Estimate> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            actual: samples.len(),
        });
    }
    let m = samples[0].f_values.len();
    let per_objective: Vec<f64> = (0..m)
        .map(|i| {
            let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.f_values[i]), hi.max(s.f_values[i]))
            });
            hi - lo
        })
        .collect();
    let k0 = per_objective.iter().cloned().fold(0.0, f64::max);
    Ok(K0Estimate { per_objective, k0 })
}

/// ‖x*(w) − x*(w̃)‖ ≤ sqrt((K₀/α₀) Σ|wᵢ − w̃ᵢ|) + 2·tol_x on every sampled pair.
/// `worst_case` is max LHS / (RHS + slack), so the check passes iff it is ≤ 1.
pub fn check_holder(samples: &[ParetoSample], alpha0: f64, k0: f64, tol_x: f64) -> CheckResult {
    let slack = 2.0 * tol_x;
    let mut worst = 0.0;
    let mut witness = None;
    let mut violations = 0;
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            let lhs = distance(&a.x, &b.x);
            let rhs = (k0 / alpha0 * a.w.l1_distance(&b.w)).sqrt();
            if lhs > rhs + slack {
                violations += 1;
            }
            let ratio = lhs / (rhs + slack);
            if ratio > worst {
                worst = ratio;
                witness = Some(Witness::of(&[a, b]));
            }
        }
    }
    CheckResult::build(
        CHECK_HOLDER,
        worst,
        1.0,
        Worse::Higher,
        witness,
        format!("K0 = {k0}, alpha0 = {alpha0}, slack = {slack:e}; {violations} violating pairs"),
    )
}

/// Distinct weights must map to points more than `margin` apart.
/// `worst_case` is the smallest such separation (infinite when vacuous).
pub fn check_injectivity_x_star(samples: &[ParetoSample], margin: f64) -> CheckResult {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut pairs = 0usize;
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            if a.w.l1_distance(&b.w) == 0.0 {
                continue;
            }
            pairs += 1;
            let d = distance(&a.x, &b.x);
            if d < worst {
                worst = d;
                witness = Some(Witness::of(&[a, b]));
            }
        }
    }
    CheckResult::build(
        CHECK_X_INJECTIVITY,
        worst,
        margin,
        Worse::Lower,
        witness,
        format!("{pairs} pairs with distinct weights; margin {margin:e}"),
    )
}

/// Sampled points more than `margin` apart must have images more than
/// `margin` apart.
pub fn check_injectivity_f(samples: &[ParetoSample], margin: f64) -> CheckResult {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut pairs = 0usize;
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            if distance(&a.x, &b.x) <= margin {
                continue;
            }
            pairs += 1;
            let d = distance(&a.f_values, &b.f_values);
            if d < worst {
                worst = d;
                witness = Some(Witness::of(&[a, b]));
            }
        }
    }
    CheckResult::build(
        CHECK_F_INJECTIVITY,
        worst,
        margin,
        Worse::Lower,
        witness,
        format!("{pairs} pairs of distinct points; margin {margin:e}"),
    )
}

/// Compares x* of the full problem on the face Δ_I with x* of the
/// subproblem f_I over a resolution grid on Δ^{|I|−1}.
pub fn check_face_consistency(
    problem: &ProblemInstance,
    subset: &SubsetIndex,
    resolution: usize,
    options: &ParetoOptions,
) -> Result<CheckResult> {
    let sub = problem.subproblem(subset)?;
    let sub_grid = simplex_grid(subset.len(), resolution)?;
    let full_grid = sub_grid
        .iter()
        .map(|w| face_embed(subset, w, problem.m()))
        .collect::<Result<Vec<_>>>()?;
    let full = sample_pareto_unchecked(problem, &full_grid, options)?;
    let restricted = sample_pareto_unchecked(&sub, &sub_grid, options)?;
    let mut worst = 0.0;
    let mut witness = None;
    for (a, b) in full.iter().zip(&restricted) {
        let d = distance(&a.x, &b.x);
        if d > worst || witness.is_none() {
            worst = f64::max(worst, d);
            witness = Some(Witness {
                subset: Some(subset.one_based()),
                weights: vec![a.w.coordinates().to_vec(), b.w.coordinates().to_vec()],
                points: vec![a.x.clone(), b.x.clone()],
            });
        }
    }
    let mut result = CheckResult::build(
        CHECK_FACE,
        worst,
        2.0 * options.tol_x + FACE_SLACK,
        Worse::Higher,
        witness,
        format!("I = {subset}: max deviation {worst:e} over {} face weights", full.len()),
    );
    let unconverged = full.iter().chain(&restricted).filter(|s| !s.converged).count();
    if unconverged > 0 {
        result.mark_inconclusive(&format!("{unconverged} solves did not converge"));
    }
    Ok(result)
}

/// Every sample must lie in Ω. `worst_case` is the largest normalized
/// membership excess.
pub fn check_bounding_region(region: &BoundingRegion, samples: &[ParetoSample], slack: f64) -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut outside = 0;
    for s in samples {
        let excess = region.normalized_excess(&s.x);
        if excess > slack {
            outside += 1;
        }
        if excess > worst {
            worst = excess;
            witness = Some(Witness::of(&[s]));
        }
    }
    CheckResult::build(
        CHECK_BOUNDING,
        worst,
        slack,
        Worse::Higher,
        witness,
        format!("{outside} of {} samples outside the region; radii {:?}", samples.len(), region.radii),
    )
}

/// Both dominance filters must keep every sampled image, and the strict
/// filter must be contained in the weak one.
pub fn check_dominance_consistency(samples: &[ParetoSample]) -> CheckResult {
    let images: Vec<&[f64]> = samples.iter().map(|s| s.f_values.as_slice()).collect();
    let strict = dominance_filter(&images);
    let weak = weak_dominance_filter(&images);
    let dropped = (samples.len() - strict.len()) + (samples.len() - weak.len());
    let nested = strict.iter().all(|i| weak.binary_search(i).is_ok());
    let witness = (0..samples.len())
        .find(|i| strict.binary_search(i).is_err())
        .map(|i| Witness::of(&[&samples[i]]));
    let worst = dropped as f64 + if nested { 0.0 } else { 1.0 };
    CheckResult::build(
        CHECK_DOMINANCE,
        worst,
        0.0,
        Worse::Higher,
        witness,
        format!(
            "strict keeps {}/{}, weak keeps {}/{}",
            strict.len(),
            samples.len(),
            weak.len(),
            samples.len()
        ),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithSimplicial,
    RankConditionFails,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub resolution: usize,
    pub tol_x: f64,
    pub max_iter: usize,
    pub rank_threshold: f64,
    /// Defaults to 10·tol_x.
    pub injectivity_margin: Option<f64>,
    /// Applied to sampled K₀ estimates when no analytic value is known.
    pub k0_inflation: f64,
    /// Takes precedence over the problem's analytic K₀.
    pub k0_override: Option<f64>,
    pub membership_slack: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            resolution: 20,
            tol_x: DEFAULT_TOL_X,
            max_iter: DEFAULT_MAX_ITER,
            rank_threshold: DEFAULT_RANK_THRESHOLD,
            injectivity_margin: None,
            k0_inflation: 1.5,
            k0_override: None,
            membership_slack: DEFAULT_MEMBERSHIP_SLACK,
        }
    }
}

impl VerifyConfig {
    pub fn pareto_options(&self) -> ParetoOptions {
        ParetoOptions {
            tol_x: self.tol_x,
            max_iter: self.max_iter,
            rank_threshold: self.rank_threshold,
            warm_start: true,
        }
    }

    pub fn margin(&self) -> f64 {
        self.injectivity_margin.unwrap_or(10.0 * self.tol_x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplicialityReport {
    pub problem_name: String,
    pub grid_resolution: usize,
    pub checks: Vec<CheckResult>,
    pub verdict: Verdict,
}

impl SimplicialityReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// consistent ⇔ every check passed; rank_condition_fails ⇔ the rank check
/// failed (without a full-rank sample) and every other failure is one that
/// the rank hypothesis is needed for.
pub fn classify(checks: &[CheckResult]) -> Verdict {
    if checks.iter().all(|c| c.passed) {
        return Verdict::ConsistentWithSimplicial;
    }
    let rank_failed = checks
        .iter()
        .any(|c| c.name == CHECK_RANK && c.outcome == CheckOutcome::Failed);
    let others_explained = checks
        .iter()
        .filter(|c| c.name != CHECK_RANK && !c.passed)
        .all(|c| RANK_DEPENDENT.contains(&c.name.as_str()) && c.outcome == CheckOutcome::Failed);
    if rank_failed && others_explained {
        Verdict::RankConditionFails
    } else {
        Verdict::Inconsistent
    }
}

fn subset_tag(mut r: CheckResult, subset: &SubsetIndex) -> CheckResult {
    r.details = format!("I = {subset}: {}", r.details);
    if let Some(w) = r.witness.as_mut() {
        w.subset = Some(subset.one_based());
    }
    r
}

/// Runs every check on each of the 2ᵐ − 1 subproblems f_I and folds the
/// per-subproblem results into one result per check.
pub fn build_report(problem: &ProblemInstance, config: &VerifyConfig) -> Result<SimplicialityReport> {
    if config.resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be at least 1".into()));
    }
    if !(config.tol_x > 0.0) {
        return Err(Error::InvalidConfig("tol_x must be positive".into()));
    }
    let options = config.pareto_options();
    let margin = config.margin();
    let names = [
        CHECK_KKT,
        CHECK_RANK,
        CHECK_HOLDER,
        CHECK_X_INJECTIVITY,
        CHECK_F_INJECTIVITY,
        CHECK_FACE,
        CHECK_BOUNDING,
        CHECK_DOMINANCE,
    ];
    let mut merged: Vec<Option<CheckResult>> = vec![None; names.len()];

    for subset in SubsetIndex::all_nonempty(problem.m()) {
        let sub = problem.subproblem(&subset)?;
        let grid = simplex_grid(sub.m(), config.resolution)?;
        let all = sample_pareto_unchecked(&sub, &grid, &options)?;
        let unconverged = all.iter().filter(|s| !s.converged).count();
        let samples: Vec<ParetoSample> = all.into_iter().filter(|s| s.converged).collect();

        let (k0, k0_source) = match (config.k0_override, sub.analytic_k0()) {
            (Some(k), _) => (k, "override".to_string()),
            (None, Some(k)) => (k, "analytic".to_string()),
            (None, None) => match estimate_k0(&samples) {
                Ok(est) => (
                    est.k0 * config.k0_inflation,
                    format!("sampled {} x {}", est.k0, config.k0_inflation),
                ),
                Err(_) => (0.0, "single sample".to_string()),
            },
        };
        let mut holder = check_holder(&samples, sub.min_alpha(), k0, config.tol_x);
        holder.details = format!("{} ({k0_source})", holder.details);

        let mut sampled = vec![
            check_kkt(&samples, config.tol_x),
            check_rank_condition(&samples, sub.m()),
            holder,
            check_injectivity_x_star(&samples, margin),
            check_injectivity_f(&samples, margin),
        ];
        match bounding_region(&sub, &options) {
            Ok(region) => sampled.push(check_bounding_region(&region, &samples, config.membership_slack)),
            Err(e) => {
                let mut r = CheckResult::build(CHECK_BOUNDING, f64::INFINITY, 0.0, Worse::Higher, None, String::new());
                r.outcome = CheckOutcome::Inconclusive;
                r.details = format!("region construction failed: {e}");
                sampled.push(r);
            }
        }
        sampled.push(check_dominance_consistency(&samples));
        if unconverged > 0 {
            for r in &mut sampled {
                r.mark_inconclusive(&format!("{unconverged} solves did not converge"));
            }
        }
        sampled.push(check_face_consistency(problem, &subset, config.resolution, &options)?);

        for r in sampled {
            let slot = names.iter().position(|n| *n == r.name).expect("known check");
            let tagged = subset_tag(r, &subset);
            merged[slot] = Some(merge(merged[slot].take(), tagged));
        }
    }

    let checks: Vec<CheckResult> = merged.into_iter().map(|r| r.expect("every check ran")).collect();
    let verdict = classify(&checks);
    Ok(SimplicialityReport {
        problem_name: problem.name().to_string(),
        grid_resolution: config.resolution,
        checks,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::pareto::sample_pareto;
    use crate::weights::WeightVector;

    fn samples(problem: &ProblemInstance, resolution: usize) -> Vec<ParetoSample> {
        let grid = simplex_grid(problem.m(), resolution).unwrap();
        sample_pareto(problem, &grid, &ParetoOptions::default()).unwrap()
    }

    #[test]
    fn rank_condition_on_catalog() {
        let p = catalog::example1(4.0).unwrap();
        let r = check_rank_condition(&samples(&p, 10), 3);
        assert!(r.passed, "{r:?}");

        let p = catalog::remark3_rank_deficient().unwrap();
        let r = check_rank_condition(&samples(&p, 10), 2);
        assert!(!r.passed);
        assert_eq!(r.outcome, CheckOutcome::Failed);
        assert_eq!(r.worst_case, 1.0);
    }

    #[test]
    fn full_rank_sample_is_inconsistent() {
        let p = catalog::example1(1.0).unwrap();
        let mut s = samples(&p, 2);
        s[0].jacobian_rank = 3;
        let r = check_rank_condition(&s, 3);
        assert_eq!(r.outcome, CheckOutcome::Inconsistent);
    }

    #[test]
    fn k0_estimates() {
        let p = catalog::example2().unwrap();
        let est = estimate_k0(&samples(&p, 20)).unwrap();
        assert!((est.per_objective[0] - 4.0).abs() < 1e-7);
        assert!((est.per_objective[1] - 5.0).abs() < 1e-7);

        let p = catalog::example1(1.0).unwrap();
        let s = samples(&p, 1);
        let dup = vec![s[0].clone(), s[0].clone()];
        assert_eq!(estimate_k0(&dup).unwrap().k0, 0.0);
        assert!(matches!(estimate_k0(&dup[..1]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn holder_identical_weights_is_zero_over_slack() {
        let p = catalog::example1(1.0).unwrap();
        let s = samples(&p, 1);
        let dup = vec![s[0].clone(), s[0].clone()];
        let r = check_holder(&dup, 2.0, 2.0, 1e-8);
        assert!(r.passed);
        assert!(r.worst_case <= 1.0);
    }

    #[test]
    fn holder_example2_straddling_half() {
        let p = catalog::example2().unwrap();
        let grid: Vec<WeightVector> = [0.4, 0.45, 0.5, 0.55, 0.6]
            .iter()
            .map(|&w| WeightVector::new(vec![w, 1.0 - w]).unwrap())
            .collect();
        let s = sample_pareto(&p, &grid, &ParetoOptions::default()).unwrap();
        assert!(check_holder(&s, 2.0, 5.0, 1e-8).passed);
    }

    #[test]
    fn injectivity_checks() {
        let p = catalog::example1(4.0).unwrap();
        assert!(check_injectivity_x_star(&samples(&p, 10), 1e-7).passed);
        let p = catalog::remark3_rank_deficient().unwrap();
        let r = check_injectivity_x_star(&samples(&p, 10), 1e-7);
        assert!(!r.passed);
        assert!(r.witness.is_some());
        // Single-point grid: vacuous.
        let f = crate::problem::ObjectiveSpec::separable_quadratic(&[1.0], &[0.0]).unwrap();
        let single = ProblemInstance::new("single", 1, vec![f]).unwrap();
        let r = check_injectivity_x_star(&samples(&single, 3), 1e-7);
        assert!(r.passed);
        assert!(r.worst_case.is_infinite());
    }

    #[test]
    fn f_injectivity_excludes_duplicates() {
        let p = catalog::example1(1.0).unwrap();
        let mut s = samples(&p, 6);
        assert!(check_injectivity_f(&s, 1e-7).passed);
        s.push(s[3].clone());
        assert!(check_injectivity_f(&s, 1e-7).passed);
        let p = catalog::remark4_identical_norms(3).unwrap();
        assert!(check_injectivity_f(&samples(&p, 5), 1e-7).passed);
    }

    #[test]
    fn face_consistency_cases() {
        let opts = ParetoOptions::default();
        let p = catalog::example1(4.0).unwrap();
        let i = SubsetIndex::from_one_based(&[2, 3], 3).unwrap();
        let r = check_face_consistency(&p, &i, 10, &opts).unwrap();
        assert!(r.passed, "{r:?}");
        let r = check_face_consistency(&p, &SubsetIndex::full(3), 5, &opts).unwrap();
        assert_eq!(r.worst_case, 0.0);
        let p = catalog::example2().unwrap();
        let i = SubsetIndex::from_one_based(&[1], 2).unwrap();
        let r = check_face_consistency(&p, &i, 4, &opts).unwrap();
        assert!(r.passed);
        let pts = &r.witness.unwrap().points;
        assert!((pts[0][0] - 2.0).abs() < 1e-8 && (pts[1][0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn verdicts_for_catalog() {
        let cfg = VerifyConfig {
            resolution: 8,
            ..Default::default()
        };
        for a in [1.0, 4.0, 0.25] {
            let r = build_report(&catalog::example1(a).unwrap(), &cfg).unwrap();
            assert_eq!(r.verdict, Verdict::ConsistentWithSimplicial, "{:#?}", r.checks);
        }
        let r = build_report(&catalog::example2().unwrap(), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentWithSimplicial, "{:#?}", r.checks);
        let r = build_report(&catalog::remark3_rank_deficient().unwrap(), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::RankConditionFails, "{:#?}", r.checks);
        let r = build_report(&catalog::remark4_identical_norms(3).unwrap(), &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::RankConditionFails, "{:#?}", r.checks);
        assert_eq!(r.checks.len(), 8);
    }

    #[test]
    fn classify_rules() {
        let pass = |name: &str| CheckResult::build(name, 0.0, 0.0, Worse::Higher, None, String::new());
        let fail = |name: &str| CheckResult::build(name, 1.0, 0.0, Worse::Higher, None, String::new());
        assert_eq!(classify(&[pass(CHECK_RANK), pass(CHECK_KKT)]), Verdict::ConsistentWithSimplicial);
        assert_eq!(classify(&[fail(CHECK_RANK), pass(CHECK_KKT)]), Verdict::RankConditionFails);
        assert_eq!(
            classify(&[fail(CHECK_RANK), fail(CHECK_X_INJECTIVITY)]),
            Verdict::RankConditionFails
        );
        assert_eq!(classify(&[fail(CHECK_RANK), fail(CHECK_KKT)]), Verdict::Inconsistent);
        assert_eq!(classify(&[pass(CHECK_RANK), fail(CHECK_HOLDER)]), Verdict::Inconsistent);
        let mut inc = fail(CHECK_RANK);
        inc.outcome = CheckOutcome::Inconsistent;
        assert_eq!(classify(&[inc]), Verdict::Inconsistent);
    }

    #[test]
    fn report_serializes_vacuous_worst_case_as_null() {
        let cfg = VerifyConfig {
            resolution: 3,
            ..Default::default()
        };
        let r = build_report(&catalog::remark4_identical_norms(3).unwrap(), &cfg).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        let f_inj = json["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == CHECK_F_INJECTIVITY)
            .unwrap();
        assert!(f_inj["worst_case"].is_null());
    }
}
