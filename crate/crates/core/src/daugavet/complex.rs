//! Complex scalars: `max_{|λ|=1} ‖I + λT‖`.
//!
//! `max_λ max_s (|1 + λ d_s| + r_s)` swaps to `max_s max_λ (..)`, and for a
//! fixed row `|1 + λ d_s|` peaks at `λ = conj(d_s)/|d_s|` with value
//! `1 + |d_s|`. Sweeping the finite candidate set
//! `{conj(d_s)/|d_s| : d_s ≠ 0} ∪ {1}` therefore attains the maximum.
//!
//! Values are returned as [`Surd`]s: with exact scalars `|1 + λ d|` is the
//! square root of a rational and stays exact in that form.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::operator::KernelOperator;
use crate::scalar::{Scalar, Surd, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSweep<S: Scalar> {
    pub lambda: Complex<S>,
    pub value: Surd<S>,
}

fn row_parts<S>(t: &KernelOperator<Complex<S>>) -> Vec<(Complex<S>, S)>
where
    S: Scalar,
    Complex<S>: Weight<Real = S>,
{
    (0..t.n())
        .map(|s| {
            let row = &t.rows()[s];
            let d = row.weights()[s].clone();
            let r = row.tv_excluding(s).expect("row index in range");
            (d, r)
        })
        .collect()
}

fn norm_from_parts<S: Scalar>(
    parts: &[(Complex<S>, S)],
    lambda: &Complex<S>,
    abs_lambda: &S,
) -> Surd<S> {
    parts
        .iter()
        .map(|(d, r)| {
            let z = Complex::<S>::one() + lambda.clone() * d.clone();
            Surd::new(z.norm_sqr(), abs_lambda.clone() * r.clone())
        })
        .reduce(|a, b| if b.cmp_exact(&a).is_gt() { b } else { a })
        .unwrap_or_else(|| Surd::rational(S::zero()))
}

/// `max_s (|1 + λ·d_s| + |λ|·r_s)`. `|λ|` must be representable in the field.
pub fn complex_norm_id_plus_scaled<S>(
    t: &KernelOperator<Complex<S>>,
    lambda: &Complex<S>,
) -> Result<Surd<S>>
where
    S: Scalar,
    Complex<S>: Weight<Real = S>,
{
    let abs_lambda = lambda.try_modulus().ok_or(Error::IrrationalModulus)?;
    Ok(norm_from_parts(&row_parts(t), lambda, &abs_lambda))
}

/// Maximises `‖I + λT‖` over `|λ| = 1` using the finite candidate set.
pub fn complex_sweep_max<S>(t: &KernelOperator<Complex<S>>) -> ComplexSweep<S>
where
    S: Scalar,
    Complex<S>: Weight<Real = S>,
{
    let parts = row_parts(t);
    let mut candidates: Vec<Complex<S>> = parts
        .iter()
        .filter(|(d, _)| !d.is_zero())
        .map(|(d, _)| {
            let m = d.modulus();
            Complex::new(d.re.clone() / m.clone(), -d.im.clone() / m)
        })
        .collect();
    candidates.push(Complex::one());
    let one = S::one();
    let mut best: Option<ComplexSweep<S>> = None;
    for lambda in candidates {
        let value = norm_from_parts(&parts, &lambda, &one);
        let better = match &best {
            None => true,
            Some(b) => value.cmp_exact(&b.value).is_gt(),
        };
        if better {
            best = Some(ComplexSweep { lambda, value });
        }
    }
    best.expect("candidate set is never empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::daugavet::{grid_sweep_max, norm_id_plus_scaled};
    use crate::scalar::{Rational, Tolerance};

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    fn c(re: (i64, i64), im: (i64, i64)) -> Complex<Rational> {
        Complex::new(q(re.0, re.1), q(im.0, im.1))
    }

    fn single(z: Complex<Rational>) -> KernelOperator<Complex<Rational>> {
        KernelOperator::from_matrix(vec![vec![z]]).unwrap()
    }

    #[test]
    fn zero_kernel() {
        let t = KernelOperator::<Complex<Rational>>::zero(2).unwrap();
        let v = complex_norm_id_plus_scaled(&t, &Complex::one()).unwrap();
        assert_eq!(v.to_scalar(), Some(q(1, 1)));
    }

    #[test]
    fn scalar_i_with_minus_i() {
        let t = single(c((0, 1), (1, 1)));
        let v = complex_norm_id_plus_scaled(&t, &c((0, 1), (-1, 1))).unwrap();
        assert_eq!(v.to_scalar(), Some(q(2, 1)));
        let sweep = complex_sweep_max(&t);
        assert_eq!(sweep.lambda, c((0, 1), (-1, 1)));
        assert_eq!(sweep.value.to_scalar(), Some(q(2, 1)));
        assert!((grid_sweep_max(&t, 4096) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn scalar_minus_one() {
        let t = single(c((-1, 1), (0, 1)));
        let sweep = complex_sweep_max(&t);
        assert_eq!(sweep.lambda, c((-1, 1), (0, 1)));
        assert_eq!(sweep.value.to_scalar(), Some(q(2, 1)));
        let at_one = complex_norm_id_plus_scaled(&t, &Complex::one()).unwrap();
        assert_eq!(at_one.to_scalar(), Some(q(0, 1)));
    }

    #[test]
    fn scalar_three_four_five() {
        let t = single(c((3, 10), (4, 10)));
        let sweep = complex_sweep_max(&t);
        assert_eq!(sweep.lambda, c((3, 5), (-4, 5)));
        assert_eq!(sweep.value.to_scalar(), Some(q(3, 2)));
        assert!((grid_sweep_max(&t, 4096) - 1.5).abs() < 1e-3);
    }

    #[test]
    fn non_unit_lambda_scales_off_diagonal() {
        let t = KernelOperator::from_matrix(vec![
            vec![c((0, 1), (0, 1)), c((1, 1), (0, 1))],
            vec![c((0, 1), (0, 1)), c((0, 1), (0, 1))],
        ])
        .unwrap();
        let v = complex_norm_id_plus_scaled(&t, &c((3, 1), (4, 1))).unwrap();
        assert_eq!(v.to_scalar(), Some(q(6, 1)));
        let bad = complex_norm_id_plus_scaled(&t, &c((1, 1), (1, 1)));
        assert_eq!(bad, Err(Error::IrrationalModulus));
    }

    #[test]
    fn real_kernels_sweep_to_plus_or_minus_one() {
        let real =
            KernelOperator::from_matrix(vec![vec![q(-1, 2), q(1, 2)], vec![q(1, 5), q(1, 5)]])
                .unwrap();
        let cplx = real.map(|x| Complex::new(x.clone(), q(0, 1))).unwrap();
        let sweep = complex_sweep_max(&cplx);
        assert!(sweep.lambda == Complex::one() || sweep.lambda == -Complex::<Rational>::one());
        let plus = norm_id_plus_scaled(&real, &q(1, 1));
        let minus = norm_id_plus_scaled(&real, &q(-1, 1));
        assert!(sweep.value.eq_within(
            &Surd::rational(Rational::max_of(plus, minus)),
            Tolerance::exact()
        ));
    }
}
