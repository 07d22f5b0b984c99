//! Scalar fields used by measures and kernels.
//!
//! Two real fields are supported: exact rationals ([`Rational`], a
//! `BigRational`) and binary `f64`. Every comparison that decides set
//! membership (norm attainment, sign of a self-atom, "defect is zero") goes
//! through [`Tolerance`], which applies the float tolerance and ignores it for
//! exact scalars.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Complex scalar over a real field.
pub type ComplexScalar<S> = Complex<S>;

/// Default comparison tolerance for float mode.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A real scalar field.
pub trait Scalar:
    Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static + Weight<Real = Self>
{
    /// True when arithmetic and comparison are exact.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    /// Converts a finite double. Exact scalars take its full binary expansion.
    fn from_f64(v: f64) -> Self;

    /// Converts a literal double through its shortest decimal form, so that
    /// `0.1` becomes `1/10` in exact fields.
    fn from_decimal(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Square root when it is representable in the field.
    fn sqrt_exact(&self) -> Option<Self>;

    /// `sin`/`cos`/`pi`; `None` for exact fields.
    fn sin(&self) -> Option<Self>;
    fn cos(&self) -> Option<Self>;
    fn pi() -> Option<Self>;

    /// `self >= other - tol`. Exact scalars ignore `tol`.
    fn ge_tol(&self, other: &Self, tol: f64) -> bool;

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn from_decimal(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(self.sqrt())
        }
    }

    fn sin(&self) -> Option<Self> {
        Some(f64::sin(*self))
    }

    fn cos(&self) -> Option<Self> {
        Some(f64::cos(*self))
    }

    fn pi() -> Option<Self> {
        Some(std::f64::consts::PI)
    }

    fn ge_tol(&self, other: &Self, tol: f64) -> bool {
        *self >= *other - tol
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        <Rational as FromPrimitive>::from_f64(v).expect("finite double")
    }

    fn from_decimal(v: f64) -> Self {
        parse_rational(&format!("{v}")).expect("finite double")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        // Ratio keeps lowest terms, so numerator and denominator must both be squares.
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &n * &n == *self.numer() && &d * &d == *self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }

    fn sin(&self) -> Option<Self> {
        None
    }

    fn cos(&self) -> Option<Self> {
        None
    }

    fn pi() -> Option<Self> {
        None
    }

    fn ge_tol(&self, other: &Self, _tol: f64) -> bool {
        self >= other
    }
}

/// The shared comparison routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(tol: f64) -> Self {
        assert!(
            tol >= 0.0 && tol.is_finite(),
            "tolerance must be finite and nonnegative"
        );
        Tolerance(tol)
    }

    /// Zero tolerance; the only sensible choice for exact scalars.
    pub fn exact() -> Self {
        Tolerance(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn ge<S: Scalar>(self, a: &S, b: &S) -> bool {
        a.ge_tol(b, self.0)
    }

    pub fn le<S: Scalar>(self, a: &S, b: &S) -> bool {
        b.ge_tol(a, self.0)
    }

    pub fn gt<S: Scalar>(self, a: &S, b: &S) -> bool {
        !self.le(a, b)
    }

    pub fn lt<S: Scalar>(self, a: &S, b: &S) -> bool {
        !self.ge(a, b)
    }

    pub fn eq<S: Scalar>(self, a: &S, b: &S) -> bool {
        self.ge(a, b) && self.le(a, b)
    }

    pub fn is_zero<S: Scalar>(self, a: &S) -> bool {
        self.eq(a, &S::zero())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_TOL)
    }
}

/// Weight of an atomic measure: a real scalar or a complex scalar over one.
///
/// Exact complex weights must have a rational modulus; [`Weight::try_modulus`]
/// reports `None` otherwise and measure constructors reject such weights.
pub trait Weight:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + Zero
    + num_traits::One
{
    type Real: Scalar;

    fn from_real(r: Self::Real) -> Self;
    fn try_modulus(&self) -> Option<Self::Real>;
    fn modulus_squared(&self) -> Self::Real;

    fn modulus(&self) -> Self::Real {
        self.try_modulus()
            .expect("weight modulus is not representable in its field")
    }
}

macro_rules! real_weight {
    ($t:ty) => {
        impl Weight for $t {
            type Real = $t;

            fn from_real(r: Self::Real) -> Self {
                r
            }

            fn try_modulus(&self) -> Option<Self::Real> {
                Some(Signed::abs(self))
            }

            fn modulus_squared(&self) -> Self::Real {
                self.clone() * self.clone()
            }
        }
    };
}

macro_rules! complex_weight {
    ($t:ty) => {
        impl Weight for Complex<$t> {
            type Real = $t;

            fn from_real(r: Self::Real) -> Self {
                Complex::new(r, <$t as Zero>::zero())
            }

            fn try_modulus(&self) -> Option<Self::Real> {
                if Zero::is_zero(&self.im) {
                    return Some(Signed::abs(&self.re));
                }
                if Zero::is_zero(&self.re) {
                    return Some(Signed::abs(&self.im));
                }
                self.norm_sqr().sqrt_exact()
            }

            fn modulus_squared(&self) -> Self::Real {
                self.norm_sqr()
            }
        }
    };
}

real_weight!(f64);
real_weight!(Rational);
complex_weight!(f64);
complex_weight!(Rational);

/// A number of the form `sqrt(radicand) + offset` with `radicand >= 0`.
///
/// Moduli such as `|1 + λ·d|` for exact complex `λ, d` are generally
/// irrational; storing the square keeps comparisons exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Surd<S: Scalar> {
    pub radicand: S,
    pub offset: S,
}

impl<S: Scalar> Surd<S> {
    pub fn new(radicand: S, offset: S) -> Self {
        debug_assert!(!radicand.is_negative());
        Surd { radicand, offset }
    }

    pub fn rational(value: S) -> Self {
        Surd {
            radicand: S::zero(),
            offset: value,
        }
    }

    /// The value as a field element, when the square root is representable.
    pub fn to_scalar(&self) -> Option<S> {
        self.radicand.sqrt_exact().map(|r| r + self.offset.clone())
    }

    pub fn to_f64(&self) -> f64 {
        self.radicand.to_f64().sqrt() + self.offset.to_f64()
    }

    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        if !S::EXACT {
            return self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal);
        }
        let e = other.offset.clone() - self.offset.clone();
        cmp_sqrt_vs_sqrt_plus(&self.radicand, &other.radicand, &e)
    }

    /// Equality under the shared tolerance (exact for exact scalars).
    pub fn eq_within(&self, other: &Self, tol: Tolerance) -> bool {
        if S::EXACT {
            self.cmp_exact(other) == Ordering::Equal
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol.value()
        }
    }
}

// Orders sqrt(a) against sqrt(c) + e.
fn cmp_sqrt_vs_sqrt_plus<S: Scalar>(a: &S, c: &S, e: &S) -> Ordering {
    if e.is_negative() {
        // sqrt(a) - e vs sqrt(c)  <=>  reverse of (sqrt(c) vs sqrt(a) + (-e))
        return cmp_sqrt_vs_sqrt_plus(c, a, &-e.clone()).reverse();
    }
    // Both sides are nonnegative; square once.
    let f = a.clone() - c.clone() - e.clone() * e.clone();
    if f.is_negative() {
        return Ordering::Less;
    }
    let lhs = f.clone() * f;
    let rhs = S::from_int(4) * e.clone() * e.clone() * c.clone();
    lhs.partial_cmp(&rhs).unwrap_or(Ordering::Equal)
}

/// Parses `"p/q"`, `"p"`, or a decimal literal (with optional exponent) exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Formats an exact rational as `"p/q"` in lowest terms (denominator always shown).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
