//! Corpora, operator-norm estimation, and the identity / inequality /
//! refinement suites.
//!
//! Every suite returns a [`VerificationReport`]. Exact suites record a
//! failure whenever an inequality is violated beyond its tolerance;
//! empirical suites record their suprema in [`VerificationReport::stats`]
//! and fail only on non-finite values.

mod corpus;
mod norms;
mod ratios;
mod refinement;
mod suites;

use std::collections::BTreeMap;

use crate::grid::Cube;

pub use corpus::{build_corpus, weight_label, Corpus, CorpusSizes, Member, Symbol};
pub use norms::{apply_operator, estimate_operator_norm, target_norm, weighted_lp_norm, NormEstimate, OperatorTag};
pub use ratios::{
    stability_experiment, verify_lemma21_pointwise, verify_lemma22_oscillation, verify_lemma24_domination,
    verify_lemma25_ratios, verify_operator_norms, StabilityConfig,
};
pub use refinement::{fit_slope, refinement_experiment, Profile, RefinementConfig, RefinementRow, RefinementTable};
pub use suites::{
    verify_a1_consistency, verify_commutator_identity, verify_converse_chain, verify_holder_monotonicity,
    verify_mean_split, verify_pointwise_domination, verify_restriction_identities,
};

/// Tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for multi-step inequality chains.
pub const CHAIN_TOL: f64 = 1e-10;
/// Relative slack for the Hölder monotonicity checks.
pub const MONOTONE_TOL: f64 = 1e-9;
/// Allowed change of an empirical constant under one refinement.
pub const REFINEMENT_FACTOR: f64 = 2.0;

/// Maximum number of failures stored verbatim in a report.
const FAILURE_CAP: usize = 64;

/// One violated (or tightest) check.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub check: String,
    pub cube: Option<Cube>,
    pub point: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub context: String,
}

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub cases: usize,
    pub failure_count: usize,
    /// The first failures in deterministic order (capped).
    pub failures: Vec<Failure>,
    /// Smallest relative slack `(rhs − lhs) / max(|lhs|, |rhs|)` seen.
    pub worst_slack: f64,
    pub worst: Option<Failure>,
    /// Informational counters (control violations, infeasible cases, ...).
    pub counters: BTreeMap<String, usize>,
    /// Empirical constants and other real-valued outputs.
    pub stats: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(suite: &str) -> VerificationReport {
        VerificationReport {
            suite: suite.to_string(),
            cases: 0,
            failure_count: 0,
            failures: Vec::new(),
            worst_slack: f64::INFINITY,
            worst: None,
            counters: BTreeMap::new(),
            stats: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub(crate) fn absorb(&mut self, tally: Tally) {
        self.cases += tally.cases;
        self.failure_count += tally.failure_count;
        for f in tally.failures {
            if self.failures.len() < FAILURE_CAP {
                self.failures.push(f);
            }
        }
        if tally.worst_slack < self.worst_slack {
            self.worst_slack = tally.worst_slack;
            self.worst = tally.worst;
        }
        for (k, v) in tally.counters {
            *self.counters.entry(k.to_string()).or_insert(0) += v;
        }
    }

    pub(crate) fn count(&mut self, key: &str, n: usize) {
        *self.counters.entry(key.to_string()).or_insert(0) += n;
    }

    pub(crate) fn stat_max(&mut self, key: &str, v: f64) {
        let e = self.stats.entry(key.to_string()).or_insert(v);
        if v > *e {
            *e = v;
        }
    }

    /// Records a failure outside of a [`Tally`].
    pub(crate) fn fail(&mut self, failure: Failure) {
        self.cases += 1;
        self.failure_count += 1;
        if self.failures.len() < FAILURE_CAP {
            self.failures.push(failure);
        }
    }

    /// Merges another report into this one (used by combined runs).
    pub fn merge(&mut self, other: VerificationReport) {
        self.cases += other.cases;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < FAILURE_CAP {
                self.failures.push(f);
            }
        }
        if other.worst_slack < self.worst_slack {
            self.worst_slack = other.worst_slack;
            self.worst = other.worst;
        }
        for (k, v) in other.counters {
            *self.counters.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.stats {
            self.stats.insert(k, v);
        }
        self.notes.extend(other.notes);
    }
}

/// Partial results of a suite, built per work item and merged in order.
#[derive(Debug, Default)]
pub(crate) struct Tally {
    cases: usize,
    failure_count: usize,
    failures: Vec<Failure>,
    worst_slack: f64,
    worst: Option<Failure>,
    counters: BTreeMap<&'static str, usize>,
}

/// Where a check happened.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Site<'a> {
    pub cube: Option<Cube>,
    pub point: Option<usize>,
    pub context: &'a str,
}

impl<'a> Site<'a> {
    pub fn new(context: &'a str) -> Site<'a> {
        Site { cube: None, point: None, context }
    }

    pub fn cube(self, cube: Cube) -> Site<'a> {
        Site { cube: Some(cube), ..self }
    }

    pub fn point(self, point: usize) -> Site<'a> {
        Site { point: Some(point), ..self }
    }
}

impl Tally {
    pub fn new() -> Tally {
        Tally { worst_slack: f64::INFINITY, ..Default::default() }
    }

    /// Records a check whose outcome was decided by the caller.
    pub fn check(&mut self, check: &str, lhs: f64, rhs: f64, ok: bool, site: Site<'_>) {
        self.cases += 1;
        let scale = lhs.abs().max(rhs.abs());
        let slack = if scale == 0.0 { 0.0 } else { (rhs - lhs) / scale };
        let make = || Failure {
            check: check.to_string(),
            cube: site.cube,
            point: site.point,
            lhs,
            rhs,
            context: site.context.to_string(),
        };
        if slack < self.worst_slack || !slack.is_finite() && self.worst.is_none() {
            self.worst_slack = slack;
            self.worst = Some(make());
        }
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < FAILURE_CAP {
                self.failures.push(make());
            }
        }
    }

    /// Asserts `lhs ≤ rhs + tol · max(|lhs|, |rhs|, floor)`.
    pub fn le(&mut self, check: &str, lhs: f64, rhs: f64, tol: f64, floor: f64, site: Site<'_>) -> bool {
        let ok = leq(lhs, rhs, tol, floor);
        self.check(check, lhs, rhs, ok, site);
        ok
    }

    /// Asserts `|lhs − rhs| ≤ tol · max(|lhs|, |rhs|, floor)`.
    pub fn eq(&mut self, check: &str, lhs: f64, rhs: f64, tol: f64, floor: f64, site: Site<'_>) -> bool {
        let ok = (lhs - rhs).abs() <= tol * lhs.abs().max(rhs.abs()).max(floor);
        self.cases += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < FAILURE_CAP {
                self.failures.push(Failure {
                    check: check.to_string(),
                    cube: site.cube,
                    point: site.point,
                    lhs,
                    rhs,
                    context: site.context.to_string(),
                });
            }
        }
        ok
    }

    pub fn count(&mut self, key: &'static str) {
        *self.counters.entry(key).or_insert(0) += 1;
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.cases += other.cases;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < FAILURE_CAP {
                self.failures.push(f);
            }
        }
        if other.worst_slack < self.worst_slack {
            self.worst_slack = other.worst_slack;
            self.worst = other.worst;
        }
        for (k, v) in other.counters {
            *self.counters.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// `lhs ≤ rhs + tol · max(|lhs|, |rhs|, floor)`.
pub(crate) fn leq(lhs: f64, rhs: f64, tol: f64, floor: f64) -> bool {
    lhs <= rhs + tol * lhs.abs().max(rhs.abs()).max(floor)
}

/// Folds per-item tallies in item order.
pub(crate) fn merge_all(tallies: Vec<Tally>) -> Tally {
    tallies.into_iter().fold(Tally::new(), Tally::merge)
}
