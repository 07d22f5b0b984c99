//! Seeded random kernels.
//!
//! The stream is SplitMix64 with its 64-bit state initialised to the seed
//! (state += 0x9e3779b97f4a7c15, then the standard finalizer). Draws are
//! derived from `next_u64` only:
//!
//! * `below(m) = next_u64() % m`
//! * `unit() = (next_u64() >> 11) · 2⁻⁵³`, uniform in `[0, 1)`
//!
//! Entries are drawn in row-major order. Per entry:
//!
//! * signed: `magnitude · (2·unit() − 1)`
//! * positive: `magnitude · unit()`
//! * rational-signed: `q = 1 + below(64)`, `b = ⌊magnitude·q⌋`,
//!   `p = below(2b + 1) − b`, entry `p/q`
//! * complex: `k = below(6)`, `swap = below(2)`, `sr = below(2)`,
//!   `si = below(2)`, then a rational-signed modulus `p/q` as above; the
//!   entry is `(p/q)·(±a/c ± i·b/c)` for the `k`-th Pythagorean triple
//!   `(a, b, c)`, with `a`, `b` exchanged when `swap = 1` and a sign flipped
//!   when the corresponding bit is 1.

use num_complex::Complex;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::operator::KernelOperator;
use crate::scalar::{Scalar, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RandomClass {
    Signed,
    Positive,
    RationalSigned,
}

impl RandomClass {
    pub fn name(self) -> &'static str {
        match self {
            RandomClass::Signed => "signed",
            RandomClass::Positive => "positive",
            RandomClass::RationalSigned => "rational-signed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "signed" => Some(RandomClass::Signed),
            "positive" => Some(RandomClass::Positive),
            "rational-signed" => Some(RandomClass::RationalSigned),
            _ => None,
        }
    }
}

/// Largest denominator drawn by the rational classes.
pub const MAX_DENOMINATOR: u64 = 64;

const TRIPLES: [(i64, i64, i64); 6] = [
    (1, 0, 1),
    (3, 4, 5),
    (5, 12, 13),
    (8, 15, 17),
    (7, 24, 25),
    (20, 21, 29),
];

/// The documented draw stream.
#[derive(Debug, Clone)]
pub struct Stream(SplitMix64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn below(&mut self, m: u64) -> u64 {
        self.next_u64() % m
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// `(p, q)` with `q ≤ 64` and `|p/q| ≤ magnitude`.
    pub fn ratio(&mut self, magnitude: f64) -> (i64, i64) {
        let q = 1 + self.below(MAX_DENOMINATOR);
        let b = (magnitude * q as f64).floor().max(0.0) as u64;
        let p = self.below(2 * b + 1) as i64 - b as i64;
        (p, q as i64)
    }
}

pub fn random_kernel<S: Scalar>(
    class: RandomClass,
    n: usize,
    seed: u64,
    magnitude: f64,
) -> KernelOperator<S> {
    assert!(n >= 1, "random kernels need n >= 1");
    let mut rng = Stream::new(seed);
    let matrix = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| match class {
                    RandomClass::Signed => S::from_f64(magnitude * (2.0 * rng.unit() - 1.0)),
                    RandomClass::Positive => S::from_f64(magnitude * rng.unit()),
                    RandomClass::RationalSigned => {
                        let (p, q) = rng.ratio(magnitude);
                        S::from_ratio(p, q)
                    }
                })
                .collect()
        })
        .collect();
    KernelOperator::from_matrix(matrix).expect("square by construction")
}

/// Complex kernels whose entries have rational modulus, so exact-mode norms
/// stay rational.
pub fn random_complex_kernel<S>(n: usize, seed: u64, magnitude: f64) -> KernelOperator<Complex<S>>
where
    S: Scalar,
    Complex<S>: Weight<Real = S>,
{
    assert!(n >= 1, "random kernels need n >= 1");
    let mut rng = Stream::new(seed);
    let matrix = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let (mut a, mut b, c) = TRIPLES[rng.below(TRIPLES.len() as u64) as usize];
                    if rng.below(2) == 1 {
                        std::mem::swap(&mut a, &mut b);
                    }
                    if rng.below(2) == 1 {
                        a = -a;
                    }
                    if rng.below(2) == 1 {
                        b = -b;
                    }
                    let (p, q) = rng.ratio(magnitude);
                    Complex::new(S::from_ratio(p * a, q * c), S::from_ratio(p * b, q * c))
                })
                .collect()
        })
        .collect();
    KernelOperator::from_matrix(matrix).expect("square with rational moduli")
}
