//! Points of the standard simplex Δ^{m−1}, lattice grids, and faces.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::SubsetIndex;

/// Default cap on the number of lattice points a grid may contain.
pub const DEFAULT_GRID_CAP: usize = 5_000_000;

/// A weight vector w ∈ Δ^{m−1} with its support {i : wᵢ > 0} tracked exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector {
    coordinates: Vec<f64>,
    support: Vec<usize>,
}

impl WeightVector {
    /// Normalizes non-negative raw weights onto the simplex. The largest
    /// coordinate absorbs the rounding so that the coordinates sum to one.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        validate_nonnegative(&raw)?;
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidWeights(format!(
                "weights must have a positive finite sum, got {total}"
            )));
        }
        let mut coordinates: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let (imax, _) = coordinates
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc });
        let rest: f64 = coordinates
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != imax)
            .map(|(_, w)| w)
            .sum();
        coordinates[imax] = (1.0 - rest).max(0.0);
        Ok(Self::from_parts(coordinates))
    }

    /// Accepts coordinates that already lie on the simplex (up to rounding).
    pub fn from_coordinates(coordinates: Vec<f64>) -> Result<Self> {
        validate_nonnegative(&coordinates)?;
        let total: f64 = coordinates.iter().sum();
        if (total - 1.0).abs() > 1e-12 * coordinates.len() as f64 {
            return Err(Error::InvalidWeights(format!(
                "coordinates sum to {total}, not 1"
            )));
        }
        Ok(Self::from_parts(coordinates))
    }

    /// The lattice point (k₁/r, …, k_m/r); zero counts give exact zeros.
    pub fn from_lattice(counts: &[usize], resolution: usize) -> Result<Self> {
        if resolution == 0 || counts.iter().sum::<usize>() != resolution {
            return Err(Error::InvalidWeights(format!(
                "lattice counts {counts:?} do not sum to resolution {resolution}"
            )));
        }
        let r = resolution as f64;
        Ok(Self::from_parts(
            counts.iter().map(|&k| k as f64 / r).collect(),
        ))
    }

    /// The vertex eᵢ (zero-based `i`).
    pub fn vertex(m: usize, i: usize) -> Result<Self> {
        if i >= m {
            return Err(Error::InvalidWeights(format!("vertex {i} out of range for m = {m}")));
        }
        let mut coordinates = vec![0.0; m];
        coordinates[i] = 1.0;
        Ok(Self::from_parts(coordinates))
    }

    fn from_parts(coordinates: Vec<f64>) -> Self {
        let support = coordinates
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect();
        Self {
            coordinates,
            support,
        }
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.coordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.is_empty()
    }

    /// True when w ∈ Δ_I, i.e. the support is contained in I.
    pub fn lies_in_face(&self, face: &SubsetIndex) -> bool {
        self.support.iter().all(|&i| face.contains(i))
    }

    /// The coordinates indexed by I, in order.
    pub fn restrict(&self, face: &SubsetIndex) -> Vec<f64> {
        face.members().iter().map(|&i| self.coordinates[i]).collect()
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.coordinates
            .iter()
            .zip(&other.coordinates)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

impl Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coordinates[i]
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::from_coordinates(value)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.coordinates
    }
}

fn validate_nonnegative(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidWeights("empty weight vector".into()));
    }
    if let Some(v) = w.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidWeights(format!(
            "weights must be finite and non-negative, got {v}"
        )));
    }
    Ok(())
}

/// C(resolution + m − 1, m − 1), or `None` on overflow.
pub fn lattice_size(m: usize, resolution: usize) -> Option<usize> {
    let k = m.checked_sub(1)? as u128;
    let n = resolution as u128 + k;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    usize::try_from(acc).ok()
}

/// All lattice points of Δ^{m−1} with denominator `resolution`.
///
/// Order is lexicographic in the count multi-index with the first count
/// descending: for m = 2, r = 2 this is (1,0), (½,½), (0,1).
pub fn simplex_grid(m: usize, resolution: usize) -> Result<Vec<WeightVector>> {
    simplex_grid_capped(m, resolution, DEFAULT_GRID_CAP)
}

pub fn simplex_grid_capped(m: usize, resolution: usize, cap: usize) -> Result<Vec<WeightVector>> {
    if m == 0 || resolution == 0 {
        return Err(Error::InvalidConfig(format!(
            "simplex grid needs m >= 1 and resolution >= 1, got m = {m}, resolution = {resolution}"
        )));
    }
    match lattice_size(m, resolution) {
        Some(size) if size <= cap => {
            let mut out = Vec::with_capacity(size);
            let mut counts = vec![0usize; m];
            fill_lattice(&mut out, &mut counts, 0, resolution, resolution);
            Ok(out)
        }
        _ => Err(Error::GridTooLarge { m, resolution, cap }),
    }
}

fn fill_lattice(
    out: &mut Vec<WeightVector>,
    counts: &mut [usize],
    depth: usize,
    remaining: usize,
    resolution: usize,
) {
    if depth == counts.len() - 1 {
        counts[depth] = remaining;
        out.push(WeightVector::from_lattice(counts, resolution).expect("counts sum to resolution"));
        return;
    }
    for k in (0..=remaining).rev() {
        counts[depth] = k;
        fill_lattice(out, counts, depth + 1, remaining - k, resolution);
    }
}

/// Embeds w_sub ∈ Δ^{|I|−1} into the face Δ_I ⊂ Δ^{m−1}.
pub fn face_embed(face: &SubsetIndex, w_sub: &WeightVector, m: usize) -> Result<WeightVector> {
    if face.len() != w_sub.len() {
        return Err(Error::DimensionMismatch {
            expected: face.len(),
            actual: w_sub.len(),
        });
    }
    if face.members().iter().any(|&i| i >= m) {
        return Err(Error::InvalidSubset(format!("{face} is not a subset of 1..={m}")));
    }
    let mut coordinates = vec![0.0; m];
    for (&i, &w) in face.members().iter().zip(w_sub.coordinates()) {
        coordinates[i] = w;
    }
    Ok(WeightVector::from_parts(coordinates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_m2_r2() {
        let g = simplex_grid(2, 2).unwrap();
        let coords: Vec<Vec<f64>> = g.iter().map(|w| w.coordinates().to_vec()).collect();
        assert_eq!(coords, vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]);
        assert_eq!(g[0].support(), &[0]);
        assert_eq!(g[1].support(), &[0, 1]);
    }

    #[test]
    fn grid_counts() {
        assert_eq!(simplex_grid(3, 2).unwrap().len(), 6);
        assert_eq!(simplex_grid(3, 20).unwrap().len(), 231);
        assert_eq!(simplex_grid(2, 100).unwrap().len(), 101);
        assert_eq!(simplex_grid(1, 5).unwrap().len(), 1);
        assert_eq!(lattice_size(3, 20), Some(231));
        assert_eq!(lattice_size(1, 7), Some(1));
    }

    #[test]
    fn grid_cap_enforced() {
        assert!(matches!(
            simplex_grid_capped(3, 20, 100),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(simplex_grid(200, 1_000_000).is_err());
        assert!(simplex_grid(0, 3).is_err());
        assert!(simplex_grid(3, 0).is_err());
    }

    #[test]
    fn embed_vertex_and_edge() {
        let m = 3;
        let i = SubsetIndex::from_one_based(&[2], m).unwrap();
        let w = face_embed(&i, &WeightVector::vertex(1, 0).unwrap(), m).unwrap();
        assert_eq!(w.coordinates(), &[0.0, 1.0, 0.0]);

        let i = SubsetIndex::from_one_based(&[1, 3], m).unwrap();
        let sub = WeightVector::new(vec![0.5, 0.5]).unwrap();
        let w = face_embed(&i, &sub, m).unwrap();
        assert_eq!(w.coordinates(), &[0.5, 0.0, 0.5]);
        assert!(w.lies_in_face(&i));
        assert_eq!(w.restrict(&i), sub.coordinates());
    }

    #[test]
    fn embed_size_mismatch() {
        let i = SubsetIndex::from_one_based(&[1, 3], 3).unwrap();
        assert!(face_embed(&i, &WeightVector::vertex(3, 0).unwrap(), 3).is_err());
    }

    #[test]
    fn normalization() {
        let w = WeightVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(w.coordinates().iter().sum::<f64>(), 1.0);
        let w = WeightVector::new(vec![2.0, 0.0, 6.0]).unwrap();
        assert_eq!(w.coordinates(), &[0.25, 0.0, 0.75]);
        assert_eq!(w.support(), &[0, 2]);
        assert!(WeightVector::new(vec![-1.0, 2.0]).is_err());
        assert!(WeightVector::new(vec![0.0, 0.0]).is_err());
        assert!(WeightVector::from_coordinates(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let w = WeightVector::from_lattice(&[1, 0, 2], 3).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        let back: WeightVector = serde_json::from_str(&s).unwrap();
        assert_eq!(w, back);
    }
}
