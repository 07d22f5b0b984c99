//! Refinement studies: Daugavet reports of one spec across grid levels.
//!
//! Weak compactness has no finite counterpart. What the continuum argument
//! actually uses is that continuous atom functions force self-atoms to vanish
//! under refinement, and that is what a study certifies: for a density with
//! `|expr| ≤ M` every diagonal entry is at most `M/n` in modulus, and since the
//! defect is `min_s(‖T‖ − ‖μ_s‖ + 2·min(1, (−d_s)₊))`, an attaining row gives
//! `defect ≤ 2·max|d_s| ≤ 2M/n`. Studies check the first inequality at
//! every level; they never assume the defect is monotone in `n`.

use rayon::prelude::*;

use crate::daugavet::daugavet_report;
use crate::error::{Error, Result};
use crate::models::KernelSpec;
use crate::operator::KernelOperator;
use crate::scalar::{Scalar, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult<S: Scalar> {
    pub level: usize,
    pub opnorm: S,
    pub defect: S,
    pub defect_bound: S,
    pub max_abs_diagonal: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementStudy<S: Scalar> {
    pub spec: KernelSpec,
    pub dual: bool,
    pub results: Vec<LevelResult<S>>,
    /// Slope of `log(defect_bound)` against `log(n)` over levels with a
    /// nonzero bound; `None` with fewer than two such levels.
    pub decay_exponent: Option<f64>,
}

impl<S: Scalar> RefinementStudy<S> {
    pub fn levels(&self) -> Vec<usize> {
        self.results.iter().map(|r| r.level).collect()
    }
}

pub fn refinement_study<S: Scalar>(
    spec: &KernelSpec,
    levels: &[usize],
    tol: Tolerance,
) -> Result<RefinementStudy<S>> {
    study(spec, levels, tol, false)
}

/// The same pipeline on `transpose(discretize(spec, n))`, the finite `ℓ1` shadow.
pub fn dual_study<S: Scalar>(
    spec: &KernelSpec,
    levels: &[usize],
    tol: Tolerance,
) -> Result<RefinementStudy<S>> {
    study(spec, levels, tol, true)
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Input("at least one level is required".into()));
    }
    if let Some(&bad) = levels.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidLevel(bad));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input("levels must be strictly increasing".into()));
    }
    Ok(())
}

fn study<S: Scalar>(
    spec: &KernelSpec,
    levels: &[usize],
    tol: Tolerance,
    dual: bool,
) -> Result<RefinementStudy<S>> {
    check_levels(levels)?;
    let results = levels
        .par_iter()
        .map(|&n| level_result::<S>(spec, n, tol, dual))
        .collect::<Result<Vec<_>>>()?;
    let decay_exponent = fit_decay(&results);
    Ok(RefinementStudy {
        spec: spec.clone(),
        dual,
        results,
        decay_exponent,
    })
}

fn level_result<S: Scalar>(
    spec: &KernelSpec,
    n: usize,
    tol: Tolerance,
    dual: bool,
) -> Result<LevelResult<S>> {
    let t: KernelOperator<S> = spec.discretize(n)?;
    let t = if dual { t.transpose() } else { t };
    let report = daugavet_report(&t, tol);
    let max_abs_diagonal = report.max_abs_diagonal();
    if matches!(spec, KernelSpec::Density(_)) {
        let bound = S::from_int(2) * max_abs_diagonal.clone();
        if !tol.le(&report.defect, &bound) {
            return Err(Error::DiffuseBoundViolated { level: n });
        }
    }
    Ok(LevelResult {
        level: n,
        opnorm: report.opnorm,
        defect: report.defect,
        defect_bound: report.defect_bound,
        max_abs_diagonal,
    })
}

/// Least squares slope on log-log points with positive bound.
fn fit_decay<S: Scalar>(results: &[LevelResult<S>]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = results
        .iter()
        .map(|r| (r.level as f64, r.defect_bound.to_f64()))
        .filter(|&(_, b)| b > 0.0)
        .map(|(n, b)| (n.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}
