//! Atomic signed and complex measures on finite point sets.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Weight;

/// A finite point set `{0, .., n-1}`, optionally embedded in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpace {
    n: usize,
    coords: Option<Arc<[f64]>>,
}

impl DiscreteSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpace(
                "a space needs at least one point".into(),
            ));
        }
        Ok(DiscreteSpace { n, coords: None })
    }

    /// A space whose points carry strictly increasing coordinates in `[0, 1]`.
    pub fn with_coords(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidSpace(
                "a space needs at least one point".into(),
            ));
        }
        if coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidSpace("coordinates must lie in [0, 1]".into()));
        }
        if coords.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpace(
                "coordinates must be strictly increasing".into(),
            ));
        }
        Ok(DiscreteSpace {
            n: coords.len(),
            coords: Some(coords.into()),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    pub fn check_point(&self, point: usize) -> Result<()> {
        if point < self.n {
            Ok(())
        } else {
            Err(Error::PointOutOfRange { point, n: self.n })
        }
    }
}

/// An atomic measure; `weights[t]` is the mass of the singleton `{t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure<W: Weight> {
    space: DiscreteSpace,
    weights: Vec<W>,
}

impl<W: Weight> SignedMeasure<W> {
    pub fn new(space: DiscreteSpace, weights: Vec<W>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| w.try_modulus().is_none()) {
            return Err(Error::IrrationalModulus);
        }
        Ok(SignedMeasure { space, weights })
    }

    pub fn zero(space: DiscreteSpace) -> Self {
        let weights = vec![W::zero(); space.len()];
        SignedMeasure { space, weights }
    }

    pub fn dirac(space: DiscreteSpace, s: usize) -> Result<Self> {
        space.check_point(s)?;
        let mut m = Self::zero(space);
        m.weights[s] = W::one();
        Ok(m)
    }

    pub fn space(&self) -> &DiscreteSpace {
        &self.space
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<W> {
        self.weights
    }

    pub fn atom(&self, t: usize) -> Result<&W> {
        self.space.check_point(t)?;
        Ok(&self.weights[t])
    }

    /// `‖μ‖ = Σ_t |μ({t})|`.
    pub fn total_variation(&self) -> W::Real {
        self.weights
            .iter()
            .fold(<W::Real as num_traits::Zero>::zero(), |acc, w| {
                acc + w.modulus()
            })
    }

    /// `|μ|(S ∖ {t})`.
    pub fn tv_excluding(&self, t: usize) -> Result<W::Real> {
        self.space.check_point(t)?;
        Ok(self
            .weights
            .iter()
            .enumerate()
            .filter(|&(u, _)| u != t)
            .fold(<W::Real as num_traits::Zero>::zero(), |acc, (_, w)| {
                acc + w.modulus()
            }))
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: &W, other: &SignedMeasure<W>) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| a.clone() + c.clone() * b.clone())
            .collect();
        SignedMeasure::new(self.space.clone(), weights)
    }
}
