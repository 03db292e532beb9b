//! Cutoff profiles and the matchings they induce.
//!
//! A profile holds one rank threshold per (college, resource) entry. Student
//! `s` may take `(c, r)` when `rank(c, s) <= K[c][r]`; each student picks their
//! best eligible pair. The empty-resource entry of a college never sits below
//! any other entry of that college.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocking::audit;
use crate::market::{
    is_feasible, CollegeId, Contract, Loads, Market, Matching, Pair, ResourceId, StudentId,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CutoffError {
    #[error("profile shape {rows}x{cols} does not match the market")]
    Shape { rows: usize, cols: usize },
    #[error("cutoff of ({college},{resource}) exceeds the number of students")]
    OutOfRange { college: CollegeId, resource: ResourceId },
    #[error("cutoff of ({college},{resource}) is above the empty-resource cutoff of {college}")]
    EmptyNotDominant { college: CollegeId, resource: ResourceId },
    #[error("cutoff of ({college},{resource}) is already maximal")]
    Maximal { college: CollegeId, resource: ResourceId },
    #[error("matching is not direct-envy stable")]
    NotDirectEnvyStable,
    #[error("cannot audit matching: {0}")]
    Audit(#[from] crate::blocking::AuditError),
}

/// Rank thresholds, one row per college, empty resource in column 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CutoffProfile {
    students: u32,
    cutoffs: Vec<Vec<u32>>,
}

impl CutoffProfile {
    pub fn zeros(m: &Market) -> Self {
        Self::filled(m, 0)
    }

    pub fn maximal(m: &Market) -> Self {
        Self::filled(m, m.n_students() as u32)
    }

    fn filled(m: &Market, value: u32) -> Self {
        CutoffProfile {
            students: m.n_students() as u32,
            cutoffs: vec![vec![value; m.n_resource_ids()]; m.n_colleges()],
        }
    }

    pub fn from_rows(m: &Market, rows: Vec<Vec<u32>>) -> Result<Self, CutoffError> {
        let profile = CutoffProfile {
            students: m.n_students() as u32,
            cutoffs: rows,
        };
        profile.check(m)?;
        Ok(profile)
    }

    /// Verifies shape, range and empty-resource dominance.
    pub fn check(&self, m: &Market) -> Result<(), CutoffError> {
        let cols = self.cutoffs.first().map_or(m.n_resource_ids(), Vec::len);
        if self.students as usize != m.n_students()
            || self.cutoffs.len() != m.n_colleges()
            || self.cutoffs.iter().any(|row| row.len() != m.n_resource_ids())
        {
            return Err(CutoffError::Shape {
                rows: self.cutoffs.len(),
                cols,
            });
        }
        for (c, row) in self.cutoffs.iter().enumerate() {
            let college = CollegeId(c as u32);
            for (r, &k) in row.iter().enumerate() {
                let resource = ResourceId(r as u32);
                if k > self.students {
                    return Err(CutoffError::OutOfRange { college, resource });
                }
                if k > row[0] {
                    return Err(CutoffError::EmptyNotDominant { college, resource });
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, c: CollegeId, r: ResourceId) -> u32 {
        self.cutoffs[c.index()][r.index()]
    }

    fn set(&mut self, c: CollegeId, r: ResourceId, value: u32) {
        self.cutoffs[c.index()][r.index()] = value;
    }

    pub fn is_maximal(&self, c: CollegeId, r: ResourceId) -> bool {
        self.get(c, r) == self.students
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.cutoffs
    }

    pub fn is_eligible(&self, m: &Market, s: StudentId, (c, r): Pair) -> bool {
        m.rank(c, s) <= self.get(c, r)
    }

    /// Raises every listed entry of `c` by one. Used by trace replay, so the
    /// caller is trusted to keep the profile valid.
    pub(crate) fn raise(&mut self, c: CollegeId, resources: &[ResourceId]) {
        for &r in resources {
            let v = self.get(c, r);
            self.set(c, r, v + 1);
        }
    }
}

/// `(s, c, r)` with `rank(c, s) <= K[c][r]` and `(c, r)` acceptable to `s`.
pub fn eligible_contracts(m: &Market, k: &CutoffProfile) -> Result<Vec<Contract>, CutoffError> {
    k.check(m)?;
    Ok(m
        .acceptable_contracts()
        .filter(|x| k.is_eligible(m, x.student, x.pair()))
        .collect())
}

fn best_eligible(m: &Market, k: &CutoffProfile, s: StudentId) -> Option<Pair> {
    m.preferences(s)
        .iter()
        .copied()
        .find(|&pair| k.is_eligible(m, s, pair))
}

/// Each student independently takes their best eligible pair. The result can
/// be infeasible.
pub fn induced_matching(m: &Market, k: &CutoffProfile) -> Matching {
    let mut mu = Matching::empty(m.n_students());
    for s in m.students() {
        mu.assign(s, best_eligible(m, k, s));
    }
    mu
}

/// Entries that move together when `(c, r)` is raised by one: the empty
/// entry follows whenever it sits at the same value.
fn coupled(k: &CutoffProfile, c: CollegeId, r: ResourceId) -> Vec<ResourceId> {
    if !r.is_empty() && k.get(c, r) == k.get(c, ResourceId::EMPTY) {
        vec![r, ResourceId::EMPTY]
    } else {
        vec![r]
    }
}

/// One-unit increase of `K[c][r]`, lifting `K[c][r0]` along when they are equal.
pub fn increment(
    m: &Market,
    k: &CutoffProfile,
    c: CollegeId,
    r: ResourceId,
) -> Result<CutoffProfile, CutoffError> {
    k.check(m)?;
    if c.index() >= m.n_colleges() || r.index() >= m.n_resource_ids() {
        return Err(CutoffError::Shape {
            rows: m.n_colleges(),
            cols: m.n_resource_ids(),
        });
    }
    if k.is_maximal(c, r) {
        return Err(CutoffError::Maximal {
            college: c,
            resource: r,
        });
    }
    let mut next = k.clone();
    next.raise(c, &coupled(k, c, r));
    Ok(next)
}

/// The induced matching is feasible and every single increment breaks it.
pub fn is_optimal(m: &Market, k: &CutoffProfile) -> bool {
    if k.check(m).is_err() || !is_feasible(m, &induced_matching(m, k)) {
        return false;
    }
    m.colleges().all(|c| {
        m.resources().all(|r| {
            k.is_maximal(c, r)
                || !is_feasible(
                    m,
                    &induced_matching(m, &increment(m, k, c, r).expect("entry is not maximal")),
                )
        })
    })
}

/// The profile that induces a direct-envy stable matching: each entry stops
/// just short of the best-ranked student who would rather have that pair, or
/// is maximal when nobody would.
pub fn cutoffs_of(m: &Market, mu: &Matching) -> Result<CutoffProfile, CutoffError> {
    if !audit(m, mu)?.flags.direct_envy_stable {
        return Err(CutoffError::NotDirectEnvyStable);
    }
    let mut k = CutoffProfile::maximal(m);
    for c in m.colleges() {
        for r in m.resources() {
            let envious = m
                .priority(c)
                .iter()
                .position(|&s| m.prefers(s, Some((c, r)), mu.get(s)));
            if let Some(pos) = envious {
                k.set(c, r, pos as u32);
            }
        }
        // A student who only wants (c, r0) bounds the whole row.
        let empty = k.get(c, ResourceId::EMPTY);
        for r in m.resources().skip(1) {
            if k.get(c, r) > empty {
                k.set(c, r, empty);
            }
        }
    }
    Ok(k)
}

/// A profile together with its induced matching, kept feasible.
///
/// Raising entries at value `v` of college `c` only makes the student ranked
/// `v + 1` at `c` eligible for new pairs, so each move changes at most one
/// student and feasibility is a constant-time delta check.
#[derive(Clone, Debug)]
pub(crate) struct CutoffState<'m> {
    m: &'m Market,
    profile: CutoffProfile,
    matching: Matching,
    loads: Loads,
}

/// Outcome of a feasible raise.
#[derive(Clone, Debug)]
pub(crate) struct RaisePlan {
    pub college: CollegeId,
    pub resources: Vec<ResourceId>,
    pub switch: Option<(StudentId, Pair)>,
}

impl<'m> CutoffState<'m> {
    pub(crate) fn new(m: &'m Market) -> Self {
        let matching = Matching::empty(m.n_students());
        CutoffState {
            m,
            profile: CutoffProfile::zeros(m),
            loads: Loads::of(m, &matching),
            matching,
        }
    }

    #[cfg(test)]
    fn matching(&self) -> &Matching {
        &self.matching
    }

    pub(crate) fn profile(&self) -> &CutoffProfile {
        &self.profile
    }

    /// Plans raising `resources` of `c` (all at the same value) by one, with
    /// the empty entry coupled in when needed. `None` if the induced matching
    /// would become infeasible.
    pub(crate) fn plan(&self, c: CollegeId, resources: &[ResourceId]) -> Option<RaisePlan> {
        let v = self.profile.get(c, resources[0]);
        debug_assert!(resources.iter().all(|&r| self.profile.get(c, r) == v));
        debug_assert!(v < self.profile.students);
        let mut raised = resources.to_vec();
        let lifts_empty = resources.iter().any(|r| !r.is_empty())
            && self.profile.get(c, ResourceId::EMPTY) == v;
        if lifts_empty && !raised.contains(&ResourceId::EMPTY) {
            raised.push(ResourceId::EMPTY);
        }
        raised.sort();

        let s = self.m.student_at_rank(c, v + 1);
        let current = self.matching.get(s);
        let mut best = current;
        for &r in &raised {
            if self.m.prefers(s, Some((c, r)), best) {
                best = Some((c, r));
            }
        }
        let switch = match best {
            Some(pair) if best != current => {
                if !self.loads.admits(self.m, pair, &[current]) {
                    return None;
                }
                Some((s, pair))
            }
            _ => None,
        };
        Some(RaisePlan {
            college: c,
            resources: raised,
            switch,
        })
    }

    pub(crate) fn apply(&mut self, plan: &RaisePlan) {
        self.profile.raise(plan.college, &plan.resources);
        if let Some((s, pair)) = plan.switch {
            if let Some(old) = self.matching.assign(s, Some(pair)) {
                self.loads.remove(old);
            }
            self.loads.add(pair);
        }
    }

    /// Plan for `increment(c, r)`.
    pub(crate) fn plan_increment(&self, c: CollegeId, r: ResourceId) -> Option<RaisePlan> {
        if self.profile.is_maximal(c, r) {
            return None;
        }
        self.plan(c, &[r])
    }

    pub(crate) fn into_parts(self) -> (CutoffProfile, Matching) {
        (self.profile, self.matching)
    }
}
