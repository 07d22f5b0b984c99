//! Kernel-represented operators on the finite model of `C(S)`.
//!
//! Row `s` of a [`KernelOperator`] is the measure `μ_s`, so `(Tf)(s) =
//! Σ_t μ_s({t}) f(t)`. In the matrix view entry `(s, t)` is `μ_s({t})`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::{DiscreteSpace, SignedMeasure};
use crate::scalar::{Scalar, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct KernelOperator<W: Weight> {
    space: DiscreteSpace,
    rows: Vec<SignedMeasure<W>>,
}

impl<W: Weight> KernelOperator<W> {
    pub fn from_rows(space: DiscreteSpace, rows: Vec<SignedMeasure<W>>) -> Result<Self> {
        if rows.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                actual: rows.len(),
            });
        }
        if rows.iter().any(|r| *r.space() != space) {
            return Err(Error::SpaceMismatch);
        }
        Ok(KernelOperator { space, rows })
    }

    /// Builds an operator from a square row-major matrix.
    pub fn from_matrix(matrix: Vec<Vec<W>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare);
        }
        let space = DiscreteSpace::new(n)?;
        Self::from_matrix_on(space, matrix)
    }

    pub fn from_matrix_on(space: DiscreteSpace, matrix: Vec<Vec<W>>) -> Result<Self> {
        if matrix.len() != space.len() || matrix.iter().any(|r| r.len() != space.len()) {
            return Err(Error::NotSquare);
        }
        let rows = matrix
            .into_iter()
            .map(|w| SignedMeasure::new(space.clone(), w))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelOperator { space, rows })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let space = DiscreteSpace::new(n)?;
        let rows = (0..n)
            .map(|s| SignedMeasure::dirac(space.clone(), s))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelOperator { space, rows })
    }

    pub fn zero(n: usize) -> Result<Self> {
        let space = DiscreteSpace::new(n)?;
        let rows = vec![SignedMeasure::zero(space.clone()); n];
        Ok(KernelOperator { space, rows })
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn space(&self) -> &DiscreteSpace {
        &self.space
    }

    pub fn rows(&self) -> &[SignedMeasure<W>] {
        &self.rows
    }

    pub fn row(&self, s: usize) -> Result<&SignedMeasure<W>> {
        self.space.check_point(s)?;
        Ok(&self.rows[s])
    }

    /// `μ_s({t})`.
    pub fn entry(&self, s: usize, t: usize) -> Result<&W> {
        self.row(s)?.atom(t)
    }

    pub fn to_matrix(&self) -> Vec<Vec<W>> {
        self.rows.iter().map(|r| r.weights().to_vec()).collect()
    }

    pub fn map<V: Weight>(&self, f: impl Fn(&W) -> V) -> Result<KernelOperator<V>> {
        let matrix = self
            .rows
            .iter()
            .map(|r| r.weights().iter().map(&f).collect())
            .collect();
        KernelOperator::from_matrix_on(self.space.clone(), matrix)
    }

    /// `(Tf)(s) = Σ_t μ_s({t}) f(t)`.
    pub fn apply(&self, f: &[W]) -> Result<Vec<W>> {
        if f.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: f.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                row.weights()
                    .iter()
                    .zip(f)
                    .fold(W::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect())
    }

    /// `‖T‖ = max_s ‖μ_s‖`, the operator norm for the sup norm.
    pub fn sup_operator_norm(&self) -> W::Real {
        self.rows
            .par_iter()
            .map(|r| r.total_variation())
            .collect::<Vec<_>>()
            .into_iter()
            .fold(<W::Real as num_traits::Zero>::zero(), W::Real::max_of)
    }

    /// Largest column absolute sum, i.e. the operator norm on `ℓ1`.
    pub fn l1_operator_norm(&self) -> W::Real {
        (0..self.n())
            .map(|t| {
                self.rows
                    .iter()
                    .fold(<W::Real as num_traits::Zero>::zero(), |acc, r| {
                        acc + r.weights()[t].modulus()
                    })
            })
            .fold(<W::Real as num_traits::Zero>::zero(), W::Real::max_of)
    }

    pub fn transpose(&self) -> Self {
        let n = self.n();
        let matrix: Vec<Vec<W>> = (0..n)
            .map(|s| (0..n).map(|t| self.rows[t].weights()[s].clone()).collect())
            .collect();
        Self::from_matrix_on(self.space.clone(), matrix)
            .expect("transpose of a valid kernel is valid")
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let n = self.n();
        let matrix = self
            .rows
            .par_iter()
            .map(|row| {
                (0..n)
                    .map(|t| {
                        row.weights()
                            .iter()
                            .zip(&other.rows)
                            .fold(W::zero(), |acc, (a, b)| {
                                acc + a.clone() * b.weights()[t].clone()
                            })
                    })
                    .collect()
            })
            .collect();
        Self::from_matrix_on(self.space.clone(), matrix)
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.add_scaled(&W::one(), b))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelOperator {
            space: self.space.clone(),
            rows,
        })
    }

    /// `I + c·T`.
    pub fn identity_plus(&self, c: &W) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(s, row)| SignedMeasure::dirac(self.space.clone(), s)?.add_scaled(c, row))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelOperator {
            space: self.space.clone(),
            rows,
        })
    }
}
