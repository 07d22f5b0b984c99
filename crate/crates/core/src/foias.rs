//! Escalation along a negative-diagonal patch.
//!
//! Given atoms `μ_s({t})` that are below `−2β` on the diagonal of some patch
//! `U`, the procedure picks distinct points `s_0, s_1, …` with
//! `s_{m+1} ∈ U_{m+1} = {s ∈ U_m : |μ_s({s_m}) − μ_{s_m}({s_m})| < β}`.
//! Every later point then has `μ_{s_k}({s_j}) < −β` for all `j < k`, so
//! `‖μ_{s_k}‖ ≥ kβ`, and a claimed bound `B` is contradicted after at most
//! `⌈B/β⌉ + 1` points. If the sets run dry the outcome is a stall, which is
//! the honest finite verdict: the atom functions are not continuous at any
//! resolution we can reach.
//!
//! Open neighbourhoods are grid points of the current level satisfying the
//! strict inequalities. Level `k` is the midpoint grid with `3^(k+1)` cells,
//! so refining never moves an old point. Membership in `U_{m+1}` is checked
//! against every earlier point, not only `s_m`: the sets are nested and the
//! mass estimate needs all of them.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{GridModel, KernelSpec};
use crate::scalar::{Rational, Scalar};

/// Grid point `index` of level `level` (`3^(level+1)` cells).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub level: usize,
    pub index: usize,
}

pub fn cells_at(level: usize) -> usize {
    3usize.pow(level as u32 + 1)
}

impl GridPoint {
    pub fn new(level: usize, index: usize) -> Self {
        assert!(index < cells_at(level), "grid index out of range");
        GridPoint { level, index }
    }

    pub fn coordinate(&self) -> Rational {
        Rational::from_ratio(2 * self.index as i64 + 1, 2 * cells_at(self.level) as i64)
    }

    /// The same point on a finer level.
    pub fn at_level(&self, level: usize) -> GridPoint {
        assert!(level >= self.level);
        let f = 3usize.pow((level - self.level) as u32);
        GridPoint {
            level,
            index: self.index * f + (f - 1) / 2,
        }
    }

    fn cmp_coord(&self, other: &GridPoint) -> Ordering {
        let l = self.level.max(other.level);
        self.at_level(l).index.cmp(&other.at_level(l).index)
    }

    fn same(&self, other: &GridPoint) -> bool {
        self.cmp_coord(other) == Ordering::Equal
    }
}

/// Atom queries `μ_s({t})`. No continuity is assumed.
pub trait KernelOracle<S: Scalar>: Sync {
    fn atom(&self, s: &GridPoint, t: &GridPoint) -> S;
}

/// Built-in oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mock {
    /// `μ_s({t}) = −1/4` for all `s`, `t`.
    ConstNegQuarter,
    /// `−1/4` on the diagonal, `0` elsewhere, at every resolution.
    DiagNegQuarter,
    /// `1` on the diagonal, `0` elsewhere.
    Identity,
}

impl Mock {
    pub const NAMES: [&'static str; 3] = ["const-neg-quarter", "diag-neg-quarter", "identity"];

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "const-neg-quarter" => Some(Mock::ConstNegQuarter),
            "diag-neg-quarter" => Some(Mock::DiagNegQuarter),
            "identity" => Some(Mock::Identity),
            _ => None,
        }
    }
}

impl<S: Scalar> KernelOracle<S> for Mock {
    fn atom(&self, s: &GridPoint, t: &GridPoint) -> S {
        match self {
            Mock::ConstNegQuarter => S::from_ratio(-1, 4),
            Mock::DiagNegQuarter if s.same(t) => S::from_ratio(-1, 4),
            Mock::Identity if s.same(t) => S::one(),
            _ => S::zero(),
        }
    }
}

/// Oracle read off a spec: the discretized entry at the finer of the two
/// points' levels (atom weights in `t`'s cell plus the density cell mass).
#[derive(Debug, Clone)]
pub struct SpecOracle {
    spec: KernelSpec,
}

impl SpecOracle {
    /// Checks every level up to `max_level` can be discretized in mode `S`.
    pub fn new<S: Scalar>(spec: KernelSpec, max_level: usize) -> Result<Self> {
        for level in 0..=max_level {
            let grid = GridModel::new(cells_at(level))?;
            spec.validate(&grid)?;
            spec.entry::<S>(&grid, 0, 0)?;
        }
        Ok(SpecOracle { spec })
    }
}

impl<S: Scalar> KernelOracle<S> for SpecOracle {
    fn atom(&self, s: &GridPoint, t: &GridPoint) -> S {
        let level = s.level.max(t.level);
        let grid = GridModel {
            level: cells_at(level),
        };
        self.spec
            .entry(&grid, s.at_level(level).index, t.at_level(level).index)
            .expect("validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuityMode {
    /// `|μ_s({s_m}) − μ_{s_m}({s_m})| < β`.
    Atom,
    /// `‖μ_s − μ_{s_m}‖ < β`, measured on the grid of the candidate's level.
    Norm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscalationParams<S: Scalar> {
    pub beta: S,
    /// Claimed `sup_s ‖μ_s‖`.
    pub bound: S,
    pub mode: ContinuityMode,
    pub max_level: usize,
}

/// The members of `U_m` at the level where `s_m` was chosen, as index runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberSet {
    pub step: usize,
    pub level: usize,
    /// Inclusive index ranges.
    pub runs: Vec<(usize, usize)>,
}

impl MemberSet {
    pub fn len(&self) -> usize {
        self.runs.iter().map(|(a, b)| b - a + 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = GridPoint> + '_ {
        self.runs
            .iter()
            .flat_map(move |&(a, b)| (a..=b).map(move |i| GridPoint::new(self.level, i)))
    }

    fn contains(&self, p: &GridPoint) -> bool {
        if p.level > self.level {
            return false;
        }
        let i = p.at_level(self.level).index;
        self.runs.iter().any(|&(a, b)| a <= i && i <= b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessChain<S: Scalar> {
    pub beta: S,
    pub mode: ContinuityMode,
    /// Closed patch interval `[lo, hi]`.
    pub patch: (Rational, Rational),
    pub points: Vec<GridPoint>,
    /// `U_1, …, U_k`.
    pub members: Vec<MemberSet>,
    /// `Σ_{j<k} |μ_{s_k}({s_j})|`.
    pub certified_mass: S,
}

impl<S: Scalar> WitnessChain<S> {
    pub fn empty(beta: S, mode: ContinuityMode) -> Self {
        WitnessChain {
            beta,
            mode,
            patch: (Rational::from_int(0), Rational::from_int(1)),
            points: Vec::new(),
            members: Vec::new(),
            certified_mass: S::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StallReason {
    /// `U_{m+1}` holds no point but `s_m` even at the deepest level.
    EmptyRefinementSet,
    /// `U_{m+1}` has other points, all already used.
    ResolutionExhausted,
}

impl StallReason {
    pub fn name(self) -> &'static str {
        match self {
            StallReason::EmptyRefinementSet => "empty-refinement-set",
            StallReason::ResolutionExhausted => "resolution-exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EscalationOutcome<S: Scalar> {
    BoundViolated(WitnessChain<S>),
    Stalled {
        step: usize,
        reason: StallReason,
        chain: WitnessChain<S>,
    },
    NoNegativePatch,
}

fn in_patch(p: &GridPoint, patch: &(Rational, Rational)) -> bool {
    let x = p.coordinate();
    patch.0 <= x && x <= patch.1
}

fn patch_condition<S: Scalar>(oracle: &dyn KernelOracle<S>, p: &GridPoint, beta: &S) -> bool {
    oracle.atom(p, p) < -(S::from_int(2) * beta.clone())
}

fn norm_distance<S: Scalar>(
    oracle: &dyn KernelOracle<S>,
    a: &GridPoint,
    b: &GridPoint,
    level: usize,
) -> S {
    (0..cells_at(level))
        .map(|u| {
            let u = GridPoint::new(level, u);
            (oracle.atom(a, &u) - oracle.atom(b, &u)).abs()
        })
        .fold(S::zero(), |acc, x| acc + x)
}

/// `p ∈ U_{m+1}` relative to the earlier points `prior = s_0..s_m`.
fn member<S: Scalar>(
    oracle: &dyn KernelOracle<S>,
    p: &GridPoint,
    prior: &[GridPoint],
    beta: &S,
    mode: ContinuityMode,
) -> bool {
    prior.iter().all(|q| {
        let atom_ok = (oracle.atom(p, q) - oracle.atom(q, q)).abs() < *beta;
        atom_ok && (mode == ContinuityMode::Atom || norm_distance(oracle, p, q, p.level) < *beta)
    })
}

fn to_runs(indices: &[usize]) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for &i in indices {
        match runs.last_mut() {
            Some((_, b)) if *b + 1 == i => *b = i,
            _ => runs.push((i, i)),
        }
    }
    runs
}

fn mass<S: Scalar>(oracle: &dyn KernelOracle<S>, points: &[GridPoint]) -> S {
    match points.split_last() {
        Some((last, prior)) => prior
            .iter()
            .map(|q| oracle.atom(last, q).abs())
            .fold(S::zero(), |acc, x| acc + x),
        None => S::zero(),
    }
}

pub fn escalate<S: Scalar>(
    oracle: &dyn KernelOracle<S>,
    params: &EscalationParams<S>,
) -> Result<EscalationOutcome<S>> {
    let beta = &params.beta;
    if !beta.is_positive() {
        return Err(Error::Input("beta must be positive".into()));
    }
    let mode = params.mode;

    // Patch: the first level with a point below −2β; the run around the
    // smallest such point.
    let mut found = None;
    for level in 0..=params.max_level {
        let n = cells_at(level);
        let ok: Vec<bool> = (0..n)
            .into_par_iter()
            .map(|i| patch_condition(oracle, &GridPoint::new(level, i), beta))
            .collect();
        if let Some(first) = ok.iter().position(|&b| b) {
            let hi = (first..n).take_while(|&i| ok[i]).last().unwrap_or(first);
            let patch = (
                Rational::from_ratio(first as i64, n as i64),
                Rational::from_ratio(hi as i64 + 1, n as i64),
            );
            found = Some((GridPoint::new(level, first), patch));
            break;
        }
    }
    let Some((s0, patch)) = found else {
        return Ok(EscalationOutcome::NoNegativePatch);
    };

    let mut chain = WitnessChain {
        beta: beta.clone(),
        mode,
        patch,
        points: vec![s0],
        members: Vec::new(),
        certified_mass: S::zero(),
    };
    let mut level = s0.level;
    loop {
        let step = chain.points.len();
        let mut next = None;
        let mut last_members = Vec::new();
        for l in level..=params.max_level {
            let members: Vec<usize> = (0..cells_at(l))
                .into_par_iter()
                .filter(|&i| {
                    let p = GridPoint::new(l, i);
                    in_patch(&p, &chain.patch)
                        && patch_condition(oracle, &p, beta)
                        && member(oracle, &p, &chain.points, beta, mode)
                })
                .collect();
            let pick = members
                .iter()
                .map(|&i| GridPoint::new(l, i))
                .find(|p| !chain.points.iter().any(|q| q.same(p)));
            if let Some(p) = pick {
                next = Some((
                    p,
                    MemberSet {
                        step,
                        level: l,
                        runs: to_runs(&members),
                    },
                ));
                break;
            }
            last_members = members;
        }
        let Some((p, set)) = next else {
            let prev = chain.points[step - 1];
            let top = params.max_level;
            let only_prev = last_members
                .iter()
                .all(|&i| GridPoint::new(top, i).same(&prev));
            let reason = if only_prev {
                StallReason::EmptyRefinementSet
            } else {
                StallReason::ResolutionExhausted
            };
            return Ok(EscalationOutcome::Stalled {
                step,
                reason,
                chain,
            });
        };
        level = p.level;
        chain.points.push(p);
        chain.members.push(set);
        chain.certified_mass = mass(oracle, &chain.points);
        if chain.certified_mass > params.bound {
            return Ok(EscalationOutcome::BoundViolated(chain));
        }
    }
}

/// Re-checks a chain with fresh oracle queries.
pub fn verify_chain<S: Scalar>(oracle: &dyn KernelOracle<S>, chain: &WitnessChain<S>) -> bool {
    let beta = &chain.beta;
    let pts = &chain.points;
    if pts.is_empty() {
        return chain.certified_mass.is_zero() && chain.members.is_empty();
    }
    if !beta.is_positive() || chain.members.len() != pts.len() - 1 {
        return false;
    }
    for (a, p) in pts.iter().enumerate() {
        if pts[..a].iter().any(|q| q.same(p)) {
            return false;
        }
        if !in_patch(p, &chain.patch) || !patch_condition(oracle, p, beta) {
            return false;
        }
        if a > 0 && !member(oracle, p, &pts[..a], beta, chain.mode) {
            return false;
        }
    }
    for (m, set) in chain.members.iter().enumerate() {
        let step = m + 1;
        if set.step != step || !set.contains(&pts[step]) {
            return false;
        }
        let ok = set.points().collect::<Vec<_>>().par_iter().all(|p| {
            in_patch(p, &chain.patch)
                && patch_condition(oracle, p, beta)
                && member(oracle, p, &pts[..step], beta, chain.mode)
        });
        if !ok {
            return false;
        }
    }
    let k = pts.len() - 1;
    let recomputed = mass(oracle, pts);
    recomputed == chain.certified_mass && recomputed >= S::from_int(k as i64) * beta.clone()
}
