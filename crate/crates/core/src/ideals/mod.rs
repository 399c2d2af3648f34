//! Computable ideals on the naturals and finite-horizon membership.
//!
//! Two ideals are supported: `Fin` (finite sets) and `DensityZero` (sets of
//! natural density zero). Membership of a materialized index set `S` over
//! `1..=N` is estimated from the full density `|S|/N` and the tail density
//! `|S ∩ (N - w N, N]| / (w N)`, where `w` is the tail window fraction. Both
//! statistics are monotone in `S`, so subsets of consistent sets stay
//! consistent.

mod implications;
mod verdict;

use serde::Serialize;

pub use implications::{
    equivalence_suite, implication_suite, CheckOutcome, ContainmentReport, HypothesisStatus,
    ImplicationCheck, ImplicationReport, SuiteParams, Theorem,
};
pub use verdict::{
    exceptional_sets, ideal_verdict, IdealVerdict, ProbeVerdict, Status, VerdictMode,
    VerdictParams, MIN_INDEX_ENTRIES, MIN_TRACE_HORIZON,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IdealKind {
    /// Finite subsets of N; I-convergence is ordinary convergence.
    Fin,
    /// Subsets of natural density zero; I-convergence is statistical convergence.
    DensityZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ideal {
    pub kind: IdealKind,
    pub density_threshold: f64,
    pub tail_window: f64,
}

impl Ideal {
    pub const DEFAULT_THRESHOLD: f64 = 0.05;
    pub const DEFAULT_TAIL_WINDOW: f64 = 0.5;

    pub fn fin() -> Self {
        Self {
            kind: IdealKind::Fin,
            density_threshold: Self::DEFAULT_THRESHOLD,
            tail_window: Self::DEFAULT_TAIL_WINDOW,
        }
    }

    pub fn density_zero() -> Self {
        Self {
            kind: IdealKind::DensityZero,
            ..Self::fin()
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.density_threshold = threshold;
        self
    }

    pub fn with_tail_window(mut self, w: f64) -> Self {
        self.tail_window = w;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = |v: f64| v > 0.0 && v < 1.0;
        if !ok(self.density_threshold) {
            return Err(crate::Error::InvalidParameter {
                name: "threshold",
                reason: format!("{} not in (0, 1)", self.density_threshold),
            });
        }
        if !(self.tail_window > 0.0 && self.tail_window <= 1.0) {
            return Err(crate::Error::InvalidParameter {
                name: "tail_window",
                reason: format!("{} not in (0, 1]", self.tail_window),
            });
        }
        Ok(())
    }

    /// First index of the tail window `(start, N]`.
    fn tail_start(&self, n: usize) -> usize {
        let len = ((n as f64) * self.tail_window).ceil() as usize;
        n - len.clamp(1, n)
    }
}

/// Indicator of a subset of `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexSet {
    members: Vec<bool>,
}

impl IndexSet {
    pub fn empty(horizon: usize) -> Self {
        Self {
            members: vec![false; horizon],
        }
    }

    pub fn from_fn(horizon: usize, f: impl Fn(usize) -> bool) -> Self {
        Self {
            members: (1..=horizon).map(f).collect(),
        }
    }

    pub fn from_indices(horizon: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(horizon);
        for i in indices {
            if (1..=horizon).contains(&i) {
                s.members[i - 1] = true;
            }
        }
        s
    }

    pub fn horizon(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && self.members.get(i - 1).copied().unwrap_or(false)
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    /// Members in `(lo, hi]`.
    pub fn count_in(&self, lo: usize, hi: usize) -> usize {
        self.members[lo..hi].iter().filter(|&&b| b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|e| *e.1)
            .map(|e| e.0 + 1)
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Members of `self` missing from `other`.
    pub fn difference(&self, other: &IndexSet) -> Vec<usize> {
        self.iter().filter(|&i| !other.contains(i)).collect()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let n = self.horizon().max(other.horizon());
        IndexSet::from_fn(n, |i| self.contains(i) || other.contains(i))
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet {
            members: self.members.iter().map(|b| !b).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    InIdealConsistent,
    NotInIdealConsistent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipEstimate {
    pub status: Membership,
    pub horizon: usize,
    pub count: usize,
    pub full_density: f64,
    pub tail_members: usize,
    pub tail_density: f64,
}

/// Horizons below this use the tail-window rule for either ideal.
pub const MIN_DENSITY_HORIZON: usize = 20;

/// Finite-horizon estimate of `S ∈ I`.
///
/// * `Fin`: consistent iff `S` has no member in the tail window.
/// * `DensityZero` (N >= 20): consistent iff full and tail densities are both
///   below the threshold, not consistent iff both are at or above it,
///   inconclusive otherwise. Shorter horizons fall back to the tail rule
///   (empty tail: in; full tail: not in; else inconclusive).
pub fn member_estimate(ideal: &Ideal, set: &IndexSet) -> MembershipEstimate {
    let n = set.horizon();
    let count = set.count();
    if n == 0 {
        return MembershipEstimate {
            status: Membership::InIdealConsistent,
            horizon: 0,
            count: 0,
            full_density: 0.0,
            tail_members: 0,
            tail_density: 0.0,
        };
    }
    let start = ideal.tail_start(n);
    let tail_len = n - start;
    let tail_members = set.count_in(start, n);
    let full_density = count as f64 / n as f64;
    let tail_density = tail_members as f64 / tail_len as f64;
    let status = match ideal.kind {
        IdealKind::Fin => {
            if tail_members == 0 {
                Membership::InIdealConsistent
            } else {
                Membership::NotInIdealConsistent
            }
        }
        IdealKind::DensityZero if n < MIN_DENSITY_HORIZON => {
            if tail_members == 0 {
                Membership::InIdealConsistent
            } else if tail_members == tail_len {
                Membership::NotInIdealConsistent
            } else {
                Membership::Inconclusive
            }
        }
        IdealKind::DensityZero => {
            let thr = ideal.density_threshold;
            match (full_density < thr, tail_density < thr) {
                (true, true) => Membership::InIdealConsistent,
                (false, false) => Membership::NotInIdealConsistent,
                _ => Membership::Inconclusive,
            }
        }
    };
    MembershipEstimate {
        status,
        horizon: n,
        count,
        full_density,
        tail_members,
        tail_density,
    }
}

/// Estimate of `M ∈ F(I)`, the dual filter: computed from the indices
/// missing from `M`, so `M` is a filter member exactly when `N \ M` is an
/// ideal member.
pub fn filter_estimate(ideal: &Ideal, set: &IndexSet) -> Membership {
    member_estimate(ideal, &set.complement()).status
}
