//! Finitely supported probability measures with exact rational masses.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeasureError {
    #[error("cannot take the uniform measure of an empty set")]
    EmptySet,
    #[error("masses sum to {0}, not 1")]
    NotProbability(String),
    #[error("non-positive mass at vertex {0}")]
    NonPositiveMass(VertexId),
}

/// A probability measure with finite support; all masses are strictly
/// positive exact rationals summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseProbMeasure {
    atoms: BTreeMap<VertexId, BigRational>,
}

impl SparseProbMeasure {
    pub fn dirac(v: VertexId) -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert(v, BigRational::one());
        SparseProbMeasure { atoms }
    }

    /// The uniform probability measure on a nonempty set.
    pub fn uniform_on(set: &[VertexId]) -> Result<Self, MeasureError> {
        if set.is_empty() {
            return Err(MeasureError::EmptySet);
        }
        let mass = BigRational::new(BigInt::one(), BigInt::from(set.len()));
        let mut atoms = BTreeMap::new();
        for &v in set {
            atoms.insert(v, mass.clone());
        }
        if atoms.len() != set.len() {
            // Duplicate entries would break total mass 1.
            let total: BigRational = atoms.values().sum();
            return Err(MeasureError::NotProbability(total.to_string()));
        }
        Ok(SparseProbMeasure { atoms })
    }

    pub fn from_atoms(atoms: BTreeMap<VertexId, BigRational>) -> Result<Self, MeasureError> {
        for (&v, mass) in &atoms {
            if !mass.is_positive() {
                return Err(MeasureError::NonPositiveMass(v));
            }
        }
        let total: BigRational = atoms.values().sum();
        if !total.is_one() {
            return Err(MeasureError::NotProbability(total.to_string()));
        }
        Ok(SparseProbMeasure { atoms })
    }

    pub fn mass_at(&self, v: VertexId) -> BigRational {
        self.atoms
            .get(&v)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.atoms.keys().copied()
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (VertexId, &BigRational)> {
        self.atoms.iter().map(|(&v, m)| (v, m))
    }

    pub fn total_mass(&self) -> BigRational {
        self.atoms.values().sum()
    }

    pub fn is_dirac_at(&self, v: VertexId) -> bool {
        self.atoms.len() == 1 && self.atoms.contains_key(&v)
    }

    /// Push forward along a vertex map; `None` when some atom leaves the
    /// domain. The map must be injective on the support.
    pub fn push<F>(&self, f: F) -> Option<Self>
    where
        F: Fn(VertexId) -> Option<VertexId>,
    {
        let mut atoms = BTreeMap::new();
        for (&v, mass) in &self.atoms {
            let image = f(v)?;
            if atoms.insert(image, mass.clone()).is_some() {
                return None;
            }
        }
        Some(SparseProbMeasure { atoms })
    }

    pub fn supports_intersect(&self, other: &Self) -> bool {
        // Both key sets are sorted; walk them together.
        let mut a = self.atoms.keys().peekable();
        let mut b = other.atoms.keys().peekable();
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Equal => return true,
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
            }
        }
        false
    }
}

/// Exact total-variation style distance `sum_v |mu(v) - nu(v)|`. Equals 2
/// iff the supports are disjoint, 0 iff the measures are equal.
pub fn l1_distance(a: &SparseProbMeasure, b: &SparseProbMeasure) -> BigRational {
    let mut total = BigRational::zero();
    let mut ia = a.atoms.iter().peekable();
    let mut ib = b.atoms.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (Some(&(&va, ma)), Some(&(&vb, mb))) => match va.cmp(&vb) {
                std::cmp::Ordering::Less => {
                    total += ma;
                    ia.next();
                }
                std::cmp::Ordering::Greater => {
                    total += mb;
                    ib.next();
                }
                std::cmp::Ordering::Equal => {
                    total += (ma - mb).abs();
                    ia.next();
                    ib.next();
                }
            },
            (Some(&(_, ma)), None) => {
                total += ma;
                ia.next();
            }
            (None, Some(&(_, mb))) => {
                total += mb;
                ib.next();
            }
            (None, None) => break,
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn dirac_is_probability() {
        let d = SparseProbMeasure::dirac(3);
        assert!(d.total_mass().is_one());
        assert!(d.is_dirac_at(3));
    }

    #[test]
    fn uniform_masses_exact() {
        let u = SparseProbMeasure::uniform_on(&[1, 2, 5]).unwrap();
        assert_eq!(u.mass_at(2), ratio(1, 3));
        assert!(u.total_mass().is_one());
        assert!(SparseProbMeasure::uniform_on(&[]).is_err());
    }

    #[test]
    fn l1_distance_cases() {
        let a = SparseProbMeasure::uniform_on(&[0, 1]).unwrap();
        let b = SparseProbMeasure::dirac(1);
        // ||(1/2, 1/2) - delta_1||_1 = 1/2 + 1/2 = 1.
        assert_eq!(l1_distance(&a, &b), ratio(1, 1));
        assert_eq!(l1_distance(&a, &a), ratio(0, 1));
        let c = SparseProbMeasure::dirac(7);
        assert_eq!(l1_distance(&a, &c), ratio(2, 1));
        assert!(!a.supports_intersect(&c));
        assert!(a.supports_intersect(&b));
    }

    #[test]
    fn push_forward() {
        let a = SparseProbMeasure::uniform_on(&[0, 1]).unwrap();
        let shifted = a.push(|v| Some(v + 10)).unwrap();
        assert_eq!(shifted.mass_at(10), ratio(1, 2));
        assert!(a.push(|v| if v == 0 { None } else { Some(v) }).is_none());
    }
}
