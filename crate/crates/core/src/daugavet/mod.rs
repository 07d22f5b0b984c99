//! Norms of `I + λT`, the Daugavet defect, and the self-atom conditions.
//!
//! Row `s` of `I + λT` is `δ_s + λμ_s`, whose total variation splits into the
//! self-atom part `|1 + λ·d_s|` and the off-diagonal mass `|λ|·r_s`, where
//! `d_s = μ_s({s})` and `r_s = |μ_s|(S ∖ {s})`. Everything in this module is
//! built from those two numbers per row.
//!
//! On a finite space every singleton is open, so the "every open set" condition
//! reduces to "every self-atom is nonnegative" ([`check_star`]). The
//! near-attaining sets `{s : ‖μ_s‖ > ‖T‖ − ε}` stabilise to the attaining set as
//! `ε → 0`, so the "for every ε" condition becomes "some norm-attaining row has
//! a nonnegative self-atom" ([`check_double_star`]). The defect is exactly
//!
//! ```text
//! defect = min_s ( ‖T‖ − ‖μ_s‖ + 2·min(1, max(0, −d_s)) )
//! ```
//!
//! because `1 + |d| − |1 + d| = 2·min(1, (−d)₊)`, and every term is
//! nonnegative. It vanishes iff some row attains the norm with `d_s ≥ 0`.

mod complex;
mod oracle;

pub use complex::{complex_norm_id_plus_scaled, complex_sweep_max, ComplexSweep};
pub use oracle::{brute_force_norm, grid_sweep_max, BRUTE_FORCE_MAX_N};

use crate::operator::KernelOperator;
use crate::scalar::{Scalar, Tolerance};

/// Per-row statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStat<S: Scalar> {
    pub s: usize,
    /// Self-atom `μ_s({s})`.
    pub d: S,
    /// Off-diagonal mass `|μ_s|(S ∖ {s})`.
    pub r: S,
    pub rownorm: S,
    pub attains: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaugavetReport<S: Scalar> {
    pub opnorm: S,
    pub norm_id_plus: S,
    pub norm_id_minus: S,
    /// `1 + ‖T‖ − ‖I + T‖`.
    pub defect: S,
    pub star: bool,
    pub double_star: bool,
    pub defect_bound: S,
    pub rows: Vec<RowStat<S>>,
}

impl<S: Scalar> DaugavetReport<S> {
    /// True when the Daugavet equation holds (defect zero within `tol`).
    pub fn holds(&self, tol: Tolerance) -> bool {
        tol.is_zero(&self.defect)
    }

    pub fn max_abs_diagonal(&self) -> S {
        self.rows
            .iter()
            .map(|r| r.d.abs())
            .fold(S::zero(), S::max_of)
    }
}

fn self_atom<S: Scalar>(t: &KernelOperator<S>, s: usize) -> S {
    t.rows()[s].weights()[s].clone()
}

fn off_diagonal_mass<S: Scalar>(t: &KernelOperator<S>, s: usize) -> S {
    t.rows()[s].tv_excluding(s).expect("row index in range")
}

/// `‖I + λT‖ = max_s (|1 + λ·d_s| + |λ|·r_s)` for real `λ`.
pub fn norm_id_plus_scaled<S: Scalar>(t: &KernelOperator<S>, lambda: &S) -> S {
    let abs_lambda = lambda.abs();
    (0..t.n())
        .map(|s| {
            let d = self_atom(t, s);
            (S::one() + lambda.clone() * d).abs() + abs_lambda.clone() * off_diagonal_mass(t, s)
        })
        .fold(S::zero(), S::max_of)
}

pub fn row_stats<S: Scalar>(t: &KernelOperator<S>, tol: Tolerance) -> Vec<RowStat<S>> {
    let mut rows: Vec<RowStat<S>> = (0..t.n())
        .map(|s| {
            let d = self_atom(t, s);
            let r = off_diagonal_mass(t, s);
            let rownorm = d.abs() + r.clone();
            RowStat {
                s,
                d,
                r,
                rownorm,
                attains: false,
            }
        })
        .collect();
    let opnorm = rows
        .iter()
        .map(|r| r.rownorm.clone())
        .fold(S::zero(), S::max_of);
    for row in &mut rows {
        row.attains = tol.ge(&row.rownorm, &opnorm);
    }
    rows
}

fn bound_from_rows<S: Scalar>(rows: &[RowStat<S>], opnorm: &S) -> S {
    let two = S::from_int(2);
    rows.iter()
        .map(|r| {
            let neg_part = S::min_of(S::one(), S::max_of(S::zero(), -r.d.clone()));
            opnorm.clone() - r.rownorm.clone() + two.clone() * neg_part
        })
        .reduce(S::min_of)
        .unwrap_or_else(S::zero)
}

pub fn daugavet_report<S: Scalar>(t: &KernelOperator<S>, tol: Tolerance) -> DaugavetReport<S> {
    let rows = row_stats(t, tol);
    let opnorm = rows
        .iter()
        .map(|r| r.rownorm.clone())
        .fold(S::zero(), S::max_of);
    let mut norm_id_plus = S::zero();
    let mut norm_id_minus = S::zero();
    for r in &rows {
        let plus = (S::one() + r.d.clone()).abs() + r.r.clone();
        let minus = (S::one() - r.d.clone()).abs() + r.r.clone();
        norm_id_plus = S::max_of(norm_id_plus, plus);
        norm_id_minus = S::max_of(norm_id_minus, minus);
    }
    let mut defect = S::one() + opnorm.clone() - norm_id_plus.clone();
    if defect.is_negative() {
        // Only reachable through float rounding.
        defect = S::zero();
    }
    let star = rows.iter().all(|r| tol.ge(&r.d, &S::zero()));
    let double_star = rows.iter().any(|r| r.attains && tol.ge(&r.d, &S::zero()));
    let defect_bound = bound_from_rows(&rows, &opnorm);
    DaugavetReport {
        opnorm,
        norm_id_plus,
        norm_id_minus,
        defect,
        star,
        double_star,
        defect_bound,
        rows,
    }
}

/// Every self-atom is nonnegative.
pub fn check_star<S: Scalar>(t: &KernelOperator<S>, tol: Tolerance) -> bool {
    (0..t.n()).all(|s| tol.ge(&self_atom(t, s), &S::zero()))
}

/// Some norm-attaining row has a nonnegative self-atom.
pub fn check_double_star<S: Scalar>(t: &KernelOperator<S>, tol: Tolerance) -> bool {
    row_stats(t, tol)
        .iter()
        .any(|r| r.attains && tol.ge(&r.d, &S::zero()))
}

/// `min_s (‖T‖ − ‖μ_s‖ + 2·min(1, max(0, −d_s)))`.
pub fn defect_upper_bound<S: Scalar>(t: &KernelOperator<S>) -> S {
    let rows = row_stats(t, Tolerance::exact());
    let opnorm = rows
        .iter()
        .map(|r| r.rownorm.clone())
        .fold(S::zero(), S::max_of);
    bound_from_rows(&rows, &opnorm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    fn qop(m: &[&[(i64, i64)]]) -> KernelOperator<Rational> {
        KernelOperator::from_matrix(
            m.iter()
                .map(|row| row.iter().map(|&(p, d)| q(p, d)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn exact() -> Tolerance {
        Tolerance::exact()
    }

    #[test]
    fn norm_id_plus_scaled_examples() {
        let zero = KernelOperator::<Rational>::zero(3).unwrap();
        assert_eq!(norm_id_plus_scaled(&zero, &q(1, 1)), q(1, 1));
        // [[-1/2, 1/2], [1/5, 1/5]]
        let t = qop(&[&[(-1, 2), (1, 2)], &[(1, 5), (1, 5)]]);
        assert_eq!(norm_id_plus_scaled(&t, &q(1, 1)), q(7, 5));
        assert_eq!(norm_id_plus_scaled(&t, &q(-1, 1)), q(2, 1));
    }

    #[test]
    fn report_minus_identity() {
        let t = qop(&[&[(-1, 1), (0, 1)], &[(0, 1), (-1, 1)]]);
        let r = daugavet_report(&t, exact());
        assert_eq!(r.opnorm, q(1, 1));
        assert_eq!(r.norm_id_plus, q(0, 1));
        assert_eq!(r.defect, q(2, 1));
        assert!(!r.star);
        assert!(!r.double_star);
        assert_eq!(r.defect_bound, q(2, 1));
        assert_eq!(defect_upper_bound(&t), q(2, 1));
    }

    #[test]
    fn report_signed_example_holds() {
        let t = qop(&[&[(1, 2), (-1, 2)], &[(3, 10), (1, 5)]]);
        let r = daugavet_report(&t, exact());
        assert_eq!(r.opnorm, q(1, 1));
        assert_eq!(r.norm_id_plus, q(2, 1));
        assert_eq!(r.defect, q(0, 1));
        assert!(r.star);
        assert!(r.double_star);
    }

    #[test]
    fn report_negative_attaining_row() {
        let t = qop(&[&[(-1, 2), (1, 2)], &[(1, 5), (1, 5)]]);
        let r = daugavet_report(&t, exact());
        assert_eq!(r.defect, q(3, 5));
        assert!(!r.star);
        assert!(!r.double_star);
        assert_eq!(r.defect_bound, q(3, 5));
        assert_eq!(r.rows[0].d, q(-1, 2));
        assert_eq!(r.rows[0].r, q(1, 2));
        assert!(r.rows[0].attains);
        assert!(!r.rows[1].attains);
    }

    #[test]
    fn star_and_double_star_examples() {
        let diag = qop(&[&[(1, 2), (0, 1)], &[(0, 1), (1, 5)]]);
        assert!(check_star(&diag, exact()));
        let t = qop(&[&[(-1, 2), (1, 2)], &[(1, 5), (4, 5)]]);
        assert!(!check_star(&t, exact()));
        assert!(check_double_star(&t, exact()));
        assert_eq!(daugavet_report(&t, exact()).defect, q(0, 1));
        let minus_id = qop(&[&[(-1, 1), (0, 1)], &[(0, 1), (-1, 1)]]);
        assert!(!check_star(&minus_id, exact()));
        assert!(!check_double_star(&minus_id, exact()));
    }

    #[test]
    fn positive_kernels_have_zero_defect() {
        let t = KernelOperator::from_matrix(vec![vec![0.3, 0.9], vec![0.0, 0.25]]).unwrap();
        let r = daugavet_report(&t, Tolerance::default());
        assert!(r.holds(Tolerance::default()));
        assert!(r.star);
        assert!(r.defect_bound >= 0.0);
    }

    #[test]
    fn float_attainment_uses_tolerance() {
        let t = KernelOperator::from_matrix(vec![vec![-1.0, 0.0], vec![0.0, 1.0 - 1e-12]]).unwrap();
        let r = daugavet_report(&t, Tolerance::new(1e-9));
        assert!(r.rows[1].attains);
        assert!(r.double_star);
        assert!(r.holds(Tolerance::new(1e-9)));
    }

    fn rational_kernel() -> impl Strategy<Value = KernelOperator<Rational>> {
        (1usize..=5).prop_flat_map(|n| {
            prop::collection::vec(
                prop::collection::vec((-6i64..=6, 1i64..=4).prop_map(|(p, d)| q(p, d)), n),
                n,
            )
            .prop_map(|m| KernelOperator::from_matrix(m).unwrap())
        })
    }

    proptest! {
        #[test]
        fn per_row_identity(d in (-64i64..=64, 1i64..=16), r in (0i64..=64, 1i64..=16)) {
            let d = q(d.0, d.1);
            let r = q(r.0, r.1);
            let lhs = Rational::max_of((q(1, 1) + &d).abs(), (q(1, 1) - &d).abs()) + &r;
            prop_assert_eq!(lhs, q(1, 1) + d.abs() + r);
        }

        #[test]
        fn proposition_one_exact(t in rational_kernel()) {
            let r = daugavet_report(&t, exact());
            prop_assert_eq!(
                Rational::max_of(r.norm_id_plus.clone(), r.norm_id_minus.clone()),
                q(1, 1) + r.opnorm.clone()
            );
        }

        #[test]
        fn report_invariants(t in rational_kernel()) {
            let r = daugavet_report(&t, exact());
            prop_assert!(r.defect >= q(0, 1));
            prop_assert_eq!(r.defect == q(0, 1), r.double_star);
            prop_assert!(!r.star || r.double_star);
            prop_assert_eq!(&r.defect, &r.defect_bound);
            prop_assert_eq!(r.defect_bound.clone(), defect_upper_bound(&t));
            prop_assert_eq!(r.star, check_star(&t, exact()));
            prop_assert_eq!(r.double_star, check_double_star(&t, exact()));
            for row in &r.rows {
                prop_assert_eq!(row.rownorm.clone(), row.d.abs() + row.r.clone());
            }
            prop_assert_eq!(r.norm_id_plus.clone(), norm_id_plus_scaled(&t, &q(1, 1)));
            prop_assert_eq!(r.norm_id_minus.clone(), norm_id_plus_scaled(&t, &q(-1, 1)));
        }
    }
}
