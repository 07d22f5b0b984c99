//! Seeded property searches and small exhaustive scans.
//!
//! Trial `i` of a search draws its kernel from `random_kernel(class, n,
//! seed + i, magnitude)` (wrapping add), so any finding can be replayed from
//! the configuration alone.

use rayon::prelude::*;

use crate::daugavet::{daugavet_report, DaugavetReport};
use crate::error::{Error, Result};
use crate::models::{random_kernel, RandomClass};
use crate::operator::KernelOperator;
use crate::scalar::{Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// `max(‖I + T‖, ‖I − T‖) = 1 + ‖T‖`.
    PlusMinusIdentity,
    /// `defect = 0 ⟺ double_star`.
    DefectIffDoubleStar,
    /// Nonnegative kernels have zero defect.
    PositiveDefectZero,
    /// Nonnegative self-atoms everywhere force zero defect.
    StarImpliesDefectZero,
    /// Plain `defect = 0`; false in general on finite spaces.
    DefectZero,
}

impl Predicate {
    pub const ALL: [Predicate; 5] = [
        Predicate::PlusMinusIdentity,
        Predicate::DefectIffDoubleStar,
        Predicate::PositiveDefectZero,
        Predicate::StarImpliesDefectZero,
        Predicate::DefectZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::PlusMinusIdentity => "prop1-identity",
            Predicate::DefectIffDoubleStar => "lemma5-biconditional",
            Predicate::PositiveDefectZero => "positive-defect-zero",
            Predicate::StarImpliesDefectZero => "star-implies-defect-zero",
            Predicate::DefectZero => "defect-zero",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Predicates that are theorems; a finding means a bug.
    pub fn is_theorem(self) -> bool {
        self != Predicate::DefectZero
    }

    /// Exact equalities that float rounding could break.
    pub fn requires_exact(self) -> bool {
        matches!(
            self,
            Predicate::PlusMinusIdentity | Predicate::DefectIffDoubleStar
        )
    }

    pub fn holds<S: Scalar>(
        self,
        t: &KernelOperator<S>,
        report: &DaugavetReport<S>,
        tol: Tolerance,
    ) -> bool {
        let zero = report.holds(tol);
        match self {
            Predicate::PlusMinusIdentity => {
                let lhs = S::max_of(report.norm_id_plus.clone(), report.norm_id_minus.clone());
                tol.eq(&lhs, &(S::one() + report.opnorm.clone()))
            }
            Predicate::DefectIffDoubleStar => zero == report.double_star,
            Predicate::PositiveDefectZero => {
                let positive = t
                    .rows()
                    .iter()
                    .all(|r| r.weights().iter().all(|x| !x.is_negative()));
                !positive || zero
            }
            Predicate::StarImpliesDefectZero => !report.star || zero,
            Predicate::DefectZero => zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub class: RandomClass,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub magnitude: f64,
    pub predicate: Predicate,
    pub tol: Tolerance,
}

impl SearchConfig {
    pub fn new(class: RandomClass, n: usize, trials: u64, seed: u64, predicate: Predicate) -> Self {
        SearchConfig {
            class,
            n,
            trials,
            seed,
            magnitude: 1.0,
            predicate,
            tol: Tolerance::default(),
        }
    }

    pub fn trial_seed(&self, trial: u64) -> u64 {
        self.seed.wrapping_add(trial)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding<S: Scalar> {
    pub trial: u64,
    pub kernel: Vec<Vec<S>>,
    pub report: DaugavetReport<S>,
    pub predicate: Predicate,
}

/// Runs the trials in parallel; findings come back sorted by trial.
pub fn search_counterexamples<S: Scalar>(config: &SearchConfig) -> Result<Vec<Finding<S>>> {
    if config.trials == 0 {
        return Err(Error::Input("trials must be at least 1".into()));
    }
    if config.n == 0 {
        return Err(Error::Input("n must be at least 1".into()));
    }
    if config.predicate.requires_exact() && !S::EXACT {
        return Err(Error::Input(format!(
            "predicate {} needs exact scalars",
            config.predicate.name()
        )));
    }
    let tol = if S::EXACT {
        Tolerance::exact()
    } else {
        config.tol
    };
    let mut findings: Vec<Finding<S>> = (0..config.trials)
        .into_par_iter()
        .filter_map(|trial| {
            let t = random_kernel::<S>(
                config.class,
                config.n,
                config.trial_seed(trial),
                config.magnitude,
            );
            let report = daugavet_report(&t, tol);
            (!config.predicate.holds(&t, &report, tol)).then(|| Finding {
                trial,
                kernel: t.to_matrix(),
                report,
                predicate: config.predicate,
            })
        })
        .collect();
    findings.sort_by_key(|f| f.trial);
    Ok(findings)
}

/// Largest number of matrices an exhaustive scan will visit.
pub const SCAN_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanSummary {
    pub total: u64,
    pub defect_zero: u64,
    pub star: u64,
    pub double_star: u64,
    /// Instances breaking the ±1 identity or the biconditional.
    pub violations: u64,
}

impl ScanSummary {
    fn merge(mut self, o: ScanSummary) -> ScanSummary {
        self.total += o.total;
        self.defect_zero += o.defect_zero;
        self.star += o.star;
        self.double_star += o.double_star;
        self.violations += o.violations;
        self
    }
}

/// Matrix number `k` in base-`|E|` row-major order.
pub fn scan_matrix<S: Scalar>(entries: &[S], n: usize, mut k: u64) -> Vec<Vec<S>> {
    let base = entries.len() as u64;
    let mut m = vec![vec![S::zero(); n]; n];
    for cell in m.iter_mut().flatten() {
        *cell = entries[(k % base) as usize].clone();
        k /= base;
    }
    m
}

/// Visits every `n × n` matrix over `entries`, cross-checking the
/// `max(‖I + T‖, ‖I − T‖) = 1 + ‖T‖` and the defect/double-star biconditional.
pub fn exhaustive_scan<S: Scalar>(entries: &[S], n: usize, tol: Tolerance) -> Result<ScanSummary> {
    if entries.is_empty() || n == 0 {
        return Err(Error::Input("need a nonempty entry set and n >= 1".into()));
    }
    let total = (entries.len() as u64)
        .checked_pow((n * n) as u32)
        .filter(|&c| c <= SCAN_LIMIT)
        .ok_or_else(|| Error::SizeGuard(format!("|E|^(n^2) exceeds {SCAN_LIMIT}")))?;
    let tol = if S::EXACT { Tolerance::exact() } else { tol };
    Ok((0..total)
        .into_par_iter()
        .map(|k| {
            let t = KernelOperator::from_matrix(scan_matrix(entries, n, k)).expect("square");
            let r = daugavet_report(&t, tol);
            let ok = Predicate::PlusMinusIdentity.holds(&t, &r, tol)
                && Predicate::DefectIffDoubleStar.holds(&t, &r, tol);
            ScanSummary {
                total: 1,
                defect_zero: r.holds(tol) as u64,
                star: r.star as u64,
                double_star: r.double_star as u64,
                violations: (!ok) as u64,
            }
        })
        .reduce(ScanSummary::default, ScanSummary::merge))
}
