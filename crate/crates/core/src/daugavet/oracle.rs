//! Independent oracles.
//!
//! The unit ball of `ℓ∞^n` is the convex hull of the sign vectors, so
//! `‖A‖ = max_{f ∈ {±1}^n} ‖Af‖_∞`. The enumeration walks the sign vectors in
//! Gray-code order (one flip per step) and fixes `f_0 = +1`, which loses
//! nothing because `‖A(−f)‖ = ‖Af‖`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operator::KernelOperator;
use crate::scalar::{Scalar, Weight};

pub const BRUTE_FORCE_MAX_N: usize = 20;

/// `max_{f ∈ {±1}^n} ‖Af‖_∞` by exhaustive enumeration.
pub fn brute_force_norm<S: Scalar>(a: &KernelOperator<S>) -> Result<S> {
    let n = a.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeGuard(format!(
            "brute-force norm needs n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let m = a.to_matrix();
    let two = S::from_int(2);
    // Row sums for f = (1, .., 1).
    let mut sums: Vec<S> = m
        .iter()
        .map(|row| row.iter().fold(S::zero(), |acc, x| acc + x.clone()))
        .collect();
    let mut signs = vec![true; n];
    let sup = |sums: &[S]| sums.iter().map(|x| x.abs()).fold(S::zero(), S::max_of);
    let mut best = sup(&sums);
    let steps: u64 = 1 << (n - 1);
    for k in 1..steps {
        let bit = k.trailing_zeros() as usize + 1;
        signs[bit] = !signs[bit];
        for (sum, row) in sums.iter_mut().zip(&m) {
            let delta = two.clone() * row[bit].clone();
            *sum = if signs[bit] {
                sum.clone() + delta
            } else {
                sum.clone() - delta
            };
        }
        best = S::max_of(best, sup(&sums));
    }
    Ok(best)
}

/// `max_k ‖I + e^{iθ_k} T‖` over `angles` equally spaced angles, in floats.
pub fn grid_sweep_max<W>(t: &KernelOperator<Complex<W>>, angles: usize) -> f64
where
    W: Scalar,
    Complex<W>: Weight<Real = W>,
{
    let diag: Vec<Complex<f64>> = (0..t.n())
        .map(|s| {
            let z = &t.rows()[s].weights()[s];
            Complex::new(z.re.to_f64(), z.im.to_f64())
        })
        .collect();
    let off: Vec<f64> = (0..t.n())
        .map(|s| {
            t.rows()[s]
                .weights()
                .iter()
                .enumerate()
                .filter(|&(u, _)| u != s)
                .map(|(_, z)| z.re.to_f64().hypot(z.im.to_f64()))
                .sum()
        })
        .collect();
    (0..angles)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / angles as f64;
            let lambda = Complex::from_polar(1.0, theta);
            diag.iter()
                .zip(&off)
                .map(|(d, r)| (Complex::new(1.0, 0.0) + lambda * d).norm() + r)
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
