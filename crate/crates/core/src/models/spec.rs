//! Resolution-independent kernel descriptions and their grid discretization.
//!
//! Level `n` splits `[0, 1]` into cells `C_i = [i/n, (i+1)/n)` and uses the
//! midpoints `g_i = (2i+1)/(2n)` as evaluation points, so no grid point sits
//! on `0` or `1`. For odd `n` the point `1/2` is the midpoint of the middle
//! cell and never a cell boundary; atoms at `1/2` are therefore always
//! resolvable at odd levels. Tripling a level keeps every old midpoint (cell
//! `i` becomes cells `3i..3i+3` with middle `3i+1`).
//!
//! Row `i` of the discretized operator aggregates `μ_{g_i}` by cells:
//! densities contribute `expr(g_i, g_j)/n` (midpoint rule) and atoms add their
//! weight to the column of the cell that contains them. An atom exactly on a
//! cell boundary is an error rather than being split between cells.

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measure::DiscreteSpace;
use crate::models::expr::Expr;
use crate::operator::KernelOperator;
use crate::scalar::{format_rational, Rational, Scalar};

/// A fixed measure on `[0, 1]` (one factor `ρ_n`).
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    /// Density in `t`.
    Density(Expr),
    Atoms(Vec<FixedAtom>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedAtom {
    pub location: Rational,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorTerm {
    /// Coefficient `ν_s(n)` as a function of `s`.
    pub coef: Expr,
    pub measure: MeasureSpec,
}

/// An atom whose weight depends on the row point `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelAtom {
    pub location: Rational,
    pub weight: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `μ_s` has density `t ↦ expr(s, t)`.
    Density(Expr),
    /// `μ_s = shape(s)·ρ`.
    RankOne {
        shape: Expr,
        measure: MeasureSpec,
    },
    /// `μ_s = Σ_n coef_n(s)·ρ_n`.
    C0Factored(Vec<FactorTerm>),
    Atomic(Vec<KernelAtom>),
}

/// The midpoint grid at level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridModel {
    pub level: usize,
}

impl GridModel {
    pub fn new(level: usize) -> Result<Self> {
        if level < 2 {
            return Err(Error::InvalidLevel(level));
        }
        Ok(GridModel { level })
    }

    pub fn point<S: Scalar>(&self, i: usize) -> S {
        S::from_ratio(2 * i as i64 + 1, 2 * self.level as i64)
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.level).map(|i| self.point::<f64>(i)).collect()
    }

    pub fn space(&self) -> DiscreteSpace {
        DiscreteSpace::with_coords(self.coords()).expect("midpoints are increasing in (0, 1)")
    }

    /// Index of the cell containing `x`, or an error if `x` is a cell boundary.
    pub fn cell_of(&self, x: &Rational) -> Result<usize> {
        let scaled = x * Rational::from_integer(self.level.into());
        if scaled.is_integer() {
            return Err(Error::AtomOnBoundary {
                location: format_rational(x),
                level: self.level,
            });
        }
        Ok(scaled
            .floor()
            .to_integer()
            .to_usize()
            .expect("location in [0, 1]"))
    }
}

fn check_location(x: &Rational) -> Result<()> {
    if *x < Rational::zero() || *x > Rational::from_int(1) {
        return Err(Error::LocationOutOfRange(format_rational(x)));
    }
    Ok(())
}

impl MeasureSpec {
    fn locations(&self) -> Vec<&Rational> {
        match self {
            MeasureSpec::Density(_) => vec![],
            MeasureSpec::Atoms(a) => a.iter().map(|a| &a.location).collect(),
        }
    }

    /// Mass of cell `j` at the given grid.
    fn cell_mass<S: Scalar>(&self, grid: &GridModel, j: usize) -> Result<S> {
        match self {
            MeasureSpec::Density(e) => {
                let t = grid.point::<S>(j);
                Ok(e.eval(&S::zero(), &t)? / S::from_int(grid.level as i64))
            }
            MeasureSpec::Atoms(atoms) => {
                let mut acc = S::zero();
                for a in atoms {
                    if grid.cell_of(&a.location)? == j {
                        acc = acc + scalar_from_rational::<S>(&a.weight);
                    }
                }
                Ok(acc)
            }
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, MeasureSpec::Atoms(_))
    }
}

fn scalar_from_rational<S: Scalar>(r: &Rational) -> S {
    if S::EXACT {
        // Route through the exact ratio when it fits.
        if let (Some(p), Some(q)) = (r.numer().to_i64(), r.denom().to_i64()) {
            return S::from_ratio(p, q);
        }
    }
    S::from_f64(Scalar::to_f64(r))
}

impl KernelSpec {
    pub fn density(expr: Expr) -> Self {
        KernelSpec::Density(expr)
    }

    /// All atom locations it mentions.
    pub fn atom_locations(&self) -> Vec<&Rational> {
        match self {
            KernelSpec::Density(_) => vec![],
            KernelSpec::RankOne { measure, .. } => measure.locations(),
            KernelSpec::C0Factored(terms) => {
                terms.iter().flat_map(|t| t.measure.locations()).collect()
            }
            KernelSpec::Atomic(atoms) => atoms.iter().map(|a| &a.location).collect(),
        }
    }

    /// True when every factor measure is purely atomic.
    pub fn is_purely_atomic(&self) -> bool {
        match self {
            KernelSpec::Density(_) => false,
            KernelSpec::RankOne { measure, .. } => measure.is_atomic(),
            KernelSpec::C0Factored(terms) => terms.iter().all(|t| t.measure.is_atomic()),
            KernelSpec::Atomic(_) => true,
        }
    }

    /// Checks locations lie in `[0, 1]` and avoid the cell boundaries of `grid`.
    pub fn validate(&self, grid: &GridModel) -> Result<()> {
        for x in self.atom_locations() {
            check_location(x)?;
            grid.cell_of(x)?;
        }
        Ok(())
    }

    /// Entry `(i, j)` of the discretization at `grid`.
    pub fn entry<S: Scalar>(&self, grid: &GridModel, i: usize, j: usize) -> Result<S> {
        let s = grid.point::<S>(i);
        match self {
            KernelSpec::Density(e) => {
                let t = grid.point::<S>(j);
                Ok(e.eval(&s, &t)? / S::from_int(grid.level as i64))
            }
            KernelSpec::RankOne { shape, measure } => {
                let mass = measure.cell_mass::<S>(grid, j)?;
                if mass.is_zero() {
                    return Ok(mass);
                }
                Ok(shape.eval(&s, &S::zero())? * mass)
            }
            KernelSpec::C0Factored(terms) => {
                let mut acc = S::zero();
                for term in terms {
                    let mass = term.measure.cell_mass::<S>(grid, j)?;
                    if !mass.is_zero() {
                        acc = acc + term.coef.eval(&s, &S::zero())? * mass;
                    }
                }
                Ok(acc)
            }
            KernelSpec::Atomic(atoms) => {
                let mut acc = S::zero();
                for a in atoms {
                    if grid.cell_of(&a.location)? == j {
                        acc = acc + a.weight.eval(&s, &S::zero())?;
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Discretizes at level `n`.
    pub fn discretize<S: Scalar>(&self, n: usize) -> Result<KernelOperator<S>> {
        let grid = GridModel::new(n)?;
        self.validate(&grid)?;
        let matrix = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| self.entry::<S>(&grid, i, j))
                    .collect::<Result<Vec<S>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        KernelOperator::from_matrix_on(grid.space(), matrix)
    }
}

/// Points carrying no atom of any row: `{t : μ_s({t}) = 0 for all s}`.
pub fn zero_atom_points<S: Scalar>(t: &KernelOperator<S>) -> Vec<usize> {
    (0..t.n())
        .filter(|&c| t.rows().iter().all(|row| row.weights()[c].is_zero()))
        .collect()
}

/// Named specifications used by the refinement experiments.
pub mod presets {
    use super::*;
    use crate::models::expr::parse_expression;
    use crate::scalar::parse_rational;

    fn expr(text: &str) -> Expr {
        parse_expression(text).expect("preset expression parses")
    }

    fn loc(text: &str) -> Rational {
        parse_rational(text).expect("preset location parses")
    }

    /// `μ_s = −δ_{1/2}` for every `s`.
    pub fn neg_dirac_half() -> KernelSpec {
        KernelSpec::C0Factored(vec![FactorTerm {
            coef: expr("-1"),
            measure: MeasureSpec::Atoms(vec![FixedAtom {
                location: loc("1/2"),
                weight: loc("1"),
            }]),
        }])
    }

    /// `μ_s = −δ_a + s·δ_{1/2} − (1 − s)·δ_b` with `a`, `b` the nearest
    /// doubles to `1/3`, `2/3`. Every row has norm 2.
    ///
    /// The exact thirds are cell boundaries at every level `3^k`, so the
    /// atoms sit at the double-precision literals just below them.
    pub fn three_atom_factored() -> KernelSpec {
        let term = |coef: &str, at: &str| FactorTerm {
            coef: expr(coef),
            measure: MeasureSpec::Atoms(vec![FixedAtom {
                location: loc(at),
                weight: loc("1"),
            }]),
        };
        KernelSpec::C0Factored(vec![
            term("-1", "0.3333333333333333"),
            term("s", "1/2"),
            term("-(1 - s)", "0.6666666666666666"),
        ])
    }

    pub fn cos_kernel() -> KernelSpec {
        KernelSpec::Density(expr("cos(pi*(s+t))"))
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;
    use crate::daugavet::{check_double_star, daugavet_report};
    use crate::models::expr::parse_expression;
    use crate::scalar::Tolerance;
    use proptest::prelude::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    #[test]
    fn constant_density() {
        let spec = KernelSpec::Density(parse_expression("1").unwrap());
        let t = spec.discretize::<f64>(4).unwrap();
        assert!(t.to_matrix().iter().flatten().all(|&x| x == 0.25));
        assert_eq!(t.sup_operator_norm(), 1.0);
    }

    #[test]
    fn cos_kernel_norm_near_two_over_pi() {
        // ∫₀¹ |cos(π(s+t))| dt = 2/π for every s (integrate |cos| over a full half-period).
        let oracle = {
            let m = 200_000;
            (0..m)
                .map(|k| {
                    ((k as f64 + 0.5) / m as f64 * std::f64::consts::PI)
                        .cos()
                        .abs()
                })
                .sum::<f64>()
                / m as f64
        };
        assert!((oracle - 2.0 / std::f64::consts::PI).abs() < 1e-6);
        let t = cos_kernel().discretize::<f64>(64).unwrap();
        assert!((t.sup_operator_norm() - oracle).abs() < 0.01);
    }

    #[test]
    fn neg_dirac_half_at_odd_levels() {
        for n in [3, 5, 9, 27] {
            let t = neg_dirac_half().discretize::<Rational>(n).unwrap();
            let mid = (n - 1) / 2;
            for (i, row) in t.to_matrix().iter().enumerate() {
                for (j, w) in row.iter().enumerate() {
                    let expected = if j == mid { q(-1, 1) } else { q(0, 1) };
                    assert_eq!(*w, expected, "entry ({i}, {j}) at n={n}");
                }
            }
            assert!(check_double_star(&t, Tolerance::exact()));
            assert_eq!(daugavet_report(&t, Tolerance::exact()).defect, q(0, 1));
            let zeros = zero_atom_points(&t);
            assert_eq!(zeros.len(), n - 1);
            assert!(!zeros.contains(&mid));
        }
    }

    #[test]
    fn boundary_atoms_are_rejected() {
        assert!(matches!(
            neg_dirac_half().discretize::<f64>(4),
            Err(Error::AtomOnBoundary { level: 4, .. })
        ));
        let third = KernelSpec::Atomic(vec![KernelAtom {
            location: q(1, 3),
            weight: parse_expression("1").unwrap(),
        }]);
        assert!(third.discretize::<f64>(9).is_err());
        assert!(third.discretize::<f64>(5).is_ok());
        let outside = KernelSpec::Atomic(vec![KernelAtom {
            location: q(3, 2),
            weight: parse_expression("1").unwrap(),
        }]);
        assert!(matches!(
            outside.discretize::<f64>(5),
            Err(Error::LocationOutOfRange(_))
        ));
        assert!(matches!(
            KernelSpec::density(parse_expression("1").unwrap()).discretize::<f64>(1),
            Err(Error::InvalidLevel(1))
        ));
    }

    #[test]
    fn three_atom_preset_rows_have_norm_two() {
        for n in [3, 9, 27, 81] {
            let t = three_atom_factored().discretize::<Rational>(n).unwrap();
            let r = daugavet_report(&t, Tolerance::exact());
            assert_eq!(r.defect, q(0, 1), "level {n}");
            if n > 3 {
                assert!(r.rows.iter().all(|row| row.rownorm == q(2, 1)));
            }
        }
    }

    #[test]
    fn zero_atom_examples() {
        let z = KernelOperator::<f64>::zero(4).unwrap();
        assert_eq!(zero_atom_points(&z), vec![0, 1, 2, 3]);
        let id = KernelOperator::<f64>::identity(4).unwrap();
        assert!(zero_atom_points(&id).is_empty());
    }

    #[test]
    fn exact_mode_rejects_transcendentals() {
        assert_eq!(
            cos_kernel().discretize::<Rational>(4).unwrap_err(),
            Error::NotExact("pi")
        );
    }

    #[test]
    fn rank_one_density_measure() {
        let spec = KernelSpec::RankOne {
            shape: parse_expression("s").unwrap(),
            measure: MeasureSpec::Density(parse_expression("2*t").unwrap()),
        };
        let t = spec.discretize::<Rational>(2).unwrap();
        // g = (1/4, 3/4); entry (i, j) = g_i · 2 g_j / 2
        assert_eq!(
            t.to_matrix(),
            vec![vec![q(1, 16), q(3, 16)], vec![q(3, 16), q(9, 16)]]
        );
    }

    #[test]
    fn grid_midpoints() {
        let g = GridModel::new(4).unwrap();
        assert_eq!(g.coords(), vec![0.125, 0.375, 0.625, 0.875]);
        let odd = GridModel::new(5).unwrap();
        assert_eq!(odd.point::<Rational>(2), q(1, 2));
        assert_eq!(odd.cell_of(&q(1, 2)).unwrap(), 2);
        // Tripling keeps old midpoints.
        let fine = GridModel::new(15).unwrap();
        for i in 0..5 {
            assert_eq!(odd.point::<Rational>(i), fine.point::<Rational>(3 * i + 1));
        }
    }

    fn poly() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..50).prop_map(|k| Expr::Num(k as f64 / 10.0)),
            Just(Expr::Var(crate::models::expr::Var::S)),
            Just(Expr::Var(crate::models::expr::Var::T)),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                inner.prop_map(|a| Expr::Neg(Box::new(a))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn discretize_is_linear(a in poly(), b in poly(), n in 2usize..7) {
            let sum = KernelSpec::Density(Expr::Add(Box::new(a.clone()), Box::new(b.clone())));
            let ta = KernelSpec::Density(a).discretize::<Rational>(n).unwrap();
            let tb = KernelSpec::Density(b).discretize::<Rational>(n).unwrap();
            prop_assert_eq!(sum.discretize::<Rational>(n).unwrap(), ta.add(&tb).unwrap());
        }

        #[test]
        fn factored_atomic_columns(
            locs in prop::collection::vec((1i64..200).prop_map(|k| q(2 * k - 1, 400)), 1..4),
            n in prop::sample::select(vec![3usize, 5, 7, 9, 11, 13]),
        ) {
            let terms: Vec<FactorTerm> = locs
                .iter()
                .enumerate()
                .map(|(k, l)| FactorTerm {
                    coef: parse_expression(if k % 2 == 0 { "s - 2" } else { "1 + s*s" }).unwrap(),
                    measure: MeasureSpec::Atoms(vec![FixedAtom { location: l.clone(), weight: q(1, 1) }]),
                })
                .collect();
            let spec = KernelSpec::C0Factored(terms);
            let t = match spec.discretize::<Rational>(n) {
                Ok(t) => t,
                Err(Error::AtomOnBoundary { .. }) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let grid = GridModel::new(n).unwrap();
            let atom_cells: Vec<usize> = locs.iter().map(|l| grid.cell_of(l).unwrap()).collect();
            let zeros = zero_atom_points(&t);
            prop_assert!(zeros.len() >= n - locs.len());
            for i in 0..n {
                if !atom_cells.contains(&i) {
                    prop_assert!(t.entry(i, i).unwrap().is_zero());
                }
            }
        }

        #[test]
        fn density_diagonals_bounded(e in poly(), n in 2usize..12) {
            let m = e.abs_bound();
            let t = KernelSpec::Density(e).discretize::<f64>(n).unwrap();
            let r = daugavet_report(&t, Tolerance::default());
            let bound = 2.0 * m / n as f64;
            prop_assert!(r.max_abs_diagonal() <= m / n as f64 + 1e-12);
            prop_assert!(r.defect <= bound + 1e-9);
        }
    }
}
