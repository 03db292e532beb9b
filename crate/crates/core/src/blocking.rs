//! Blocking contracts and the stability notions built from them.
//!
//! Only contracts a student strictly prefers to their current outcome can block,
//! so the audit walks each student's list down to their current contract and
//! classifies every pair above it. Post-swap feasibility is a delta check on
//! the loads of the matching.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{
    is_feasible, is_individually_rational, references_market, Contract, Loads, Market, Matching,
    ResourceId, StudentId,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockClass {
    SeatWaste,
    ResourceWaste,
    DirectEnvy,
    IndirectEnvy,
}

impl fmt::Display for BlockClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockClass::SeatWaste => "seat",
            BlockClass::ResourceWaste => "resource",
            BlockClass::DirectEnvy => "direct-envy",
            BlockClass::IndirectEnvy => "indirect-envy",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("matching references ids outside the market")]
    ForeignMatching,
    #[error("matching is not feasible")]
    Infeasible,
    #[error("matching is not individually rational")]
    NotIndividuallyRational,
    #[error("{0} is already part of the matching")]
    AlreadyMatched(Contract),
    #[error("{0} is not acceptable to its student")]
    Unacceptable(Contract),
    #[error("{0} does not waste-block the matching")]
    NotWasteBlocking(Contract),
    #[error("{0} references ids outside the market")]
    ForeignContract(Contract),
}

/// Blocking-contract counts in table column order. `total` is the row sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingCounts {
    pub resource: usize,
    pub seat: usize,
    pub direct_envy: usize,
    pub indirect_envy: usize,
    pub total: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityFlags {
    pub stable: bool,
    pub envy_free: bool,
    pub direct_envy_free: bool,
    pub non_wasteful: bool,
    pub seat_efficient: bool,
    pub resource_efficient: bool,
    pub weakly_stable: bool,
    pub direct_envy_stable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvyWitness {
    pub contract: Contract,
    pub victims: Vec<Contract>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witnesses {
    pub resource: Vec<Contract>,
    pub seat: Vec<Contract>,
    pub direct_envy: Vec<EnvyWitness>,
    pub indirect_envy: Vec<EnvyWitness>,
    /// Waste-blocking contracts no other contract dominates.
    pub undominated: Vec<Contract>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingReport {
    pub counts: BlockingCounts,
    pub flags: StabilityFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Witnesses>,
}

impl BlockingReport {
    /// Same report without witness lists.
    pub fn summary(&self) -> BlockingReport {
        BlockingReport {
            counts: self.counts,
            flags: self.flags,
            witnesses: None,
        }
    }

    pub fn to_json(&self, verbose_witnesses: bool) -> String {
        if verbose_witnesses {
            serde_json::to_string_pretty(self)
        } else {
            serde_json::to_string_pretty(&self.summary())
        }
        .expect("report serializes")
    }
}

/// A feasible matching with the indexes needed for blocking checks.
struct Scan<'a> {
    m: &'a Market,
    mu: &'a Matching,
    loads: Loads,
    members: Vec<Vec<StudentId>>,
}

impl<'a> Scan<'a> {
    fn new(m: &'a Market, mu: &'a Matching) -> Self {
        let mut members = vec![Vec::new(); m.n_colleges()];
        for x in mu.contracts() {
            members[x.college.index()].push(x.student);
        }
        Scan {
            m,
            mu,
            loads: Loads::of(m, mu),
            members,
        }
    }

    fn improves(&self, x: &Contract) -> bool {
        self.m
            .prefers(x.student, Some(x.pair()), self.mu.get(x.student))
    }

    fn envy_victims(&self, x: &Contract) -> Vec<Contract> {
        if !self.improves(x) {
            return Vec::new();
        }
        let own = self.mu.get(x.student);
        let rank = self.m.rank(x.college, x.student);
        self.members[x.college.index()]
            .iter()
            .filter(|&&other| other != x.student && rank < self.m.rank(x.college, other))
            .filter_map(|&other| {
                let theirs = self.mu.get(other);
                self.loads
                    .admits(self.m, x.pair(), &[own, theirs])
                    .then(|| Contract::from_pair(other, theirs.expect("member is matched")))
            })
            .collect()
    }

    fn waste_class(&self, x: &Contract) -> Option<BlockClass> {
        if !self.improves(x) {
            return None;
        }
        let own = self.mu.get(x.student);
        if !self.loads.admits(self.m, x.pair(), &[own]) {
            return None;
        }
        Some(match own {
            Some((c, _)) if c == x.college => BlockClass::ResourceWaste,
            _ => BlockClass::SeatWaste,
        })
    }

    fn is_direct_envy(&self, x: &Contract) -> bool {
        self.envy_victims(x)
            .iter()
            .any(|v| is_direct_victim(x, v))
    }

    /// Contracts strictly preferred by their students to the current outcome.
    fn improving_contracts(&self) -> impl Iterator<Item = Contract> + '_ {
        self.m.students().flat_map(move |s| {
            let list = self.m.preferences(s);
            let end = self
                .mu
                .get(s)
                .and_then(|pair| self.m.position(s, pair))
                .unwrap_or(list.len());
            list[..end].iter().map(move |&pair| Contract::from_pair(s, pair))
        })
    }

    /// Finds `x'` at the college of `x` that is neither waste- nor
    /// direct-envy-blocking now but direct-envy-blocks once `x` is executed.
    fn dominating(&self, x: &Contract, blocking_now: &HashSet<Contract>) -> Option<Contract> {
        let mut swapped = self.mu.clone();
        swapped.assign(x.student, Some(x.pair()));
        let after = Scan::new(self.m, &swapped);
        self.m.students().find_map(|s| {
            let list = self.m.preferences(s);
            let end = swapped
                .get(s)
                .and_then(|pair| self.m.position(s, pair))
                .unwrap_or(list.len());
            list[..end]
                .iter()
                .filter(|pair| pair.0 == x.college)
                .map(|&pair| Contract::from_pair(s, pair))
                .find(|cand| {
                    !self.mu.contains(cand)
                        && !blocking_now.contains(cand)
                        && after.is_direct_envy(cand)
                })
        })
    }
}

fn is_direct_victim(x: &Contract, victim: &Contract) -> bool {
    x.resource == victim.resource || x.resource == ResourceId::EMPTY
}

fn check_matching(m: &Market, mu: &Matching) -> Result<(), AuditError> {
    if !references_market(m, mu) {
        return Err(AuditError::ForeignMatching);
    }
    if !is_feasible(m, mu) {
        return Err(AuditError::Infeasible);
    }
    if !is_individually_rational(m, mu) {
        return Err(AuditError::NotIndividuallyRational);
    }
    Ok(())
}

fn check_outside(m: &Market, mu: &Matching, x: &Contract) -> Result<(), AuditError> {
    check_matching(m, mu)?;
    if x.student.index() >= m.n_students()
        || x.college.index() >= m.n_colleges()
        || x.resource.index() >= m.n_resource_ids()
    {
        return Err(AuditError::ForeignContract(*x));
    }
    if mu.contains(x) {
        return Err(AuditError::AlreadyMatched(*x));
    }
    Ok(())
}

/// Contracts of `mu` through which `x` envy-blocks; empty when it does not.
pub fn envy_blocks(m: &Market, mu: &Matching, x: &Contract) -> Result<Vec<Contract>, AuditError> {
    check_outside(m, mu, x)?;
    if !m.is_acceptable(x.student, x.pair()) {
        return Err(AuditError::Unacceptable(*x));
    }
    Ok(Scan::new(m, mu).envy_victims(x))
}

/// Victims through which `x` envy-blocks directly: the demanded resource is
/// the victim's own or the empty one. Empty when `x` is not direct.
pub fn direct_envy_victims(
    m: &Market,
    mu: &Matching,
    x: &Contract,
) -> Result<Vec<Contract>, AuditError> {
    Ok(envy_blocks(m, mu, x)?
        .into_iter()
        .filter(|v| is_direct_victim(x, v))
        .collect())
}

pub fn is_direct_envy_block(m: &Market, mu: &Matching, x: &Contract) -> Result<bool, AuditError> {
    Ok(!direct_envy_victims(m, mu, x)?.is_empty())
}

/// `SeatWaste` when `x` moves its student to a new college, `ResourceWaste`
/// when it swaps resources in place, `None` when it does not waste-block.
pub fn waste_block_class(
    m: &Market,
    mu: &Matching,
    x: &Contract,
) -> Result<Option<BlockClass>, AuditError> {
    check_outside(m, mu, x)?;
    Ok(Scan::new(m, mu).waste_class(x))
}

/// Returns a contract dominating the waste-blocking `x`, if any.
pub fn is_dominated(
    m: &Market,
    mu: &Matching,
    x: &Contract,
) -> Result<Option<Contract>, AuditError> {
    check_outside(m, mu, x)?;
    let scan = Scan::new(m, mu);
    if scan.waste_class(x).is_none() {
        return Err(AuditError::NotWasteBlocking(*x));
    }
    let blocking_now = scan
        .improving_contracts()
        .filter(|c| scan.waste_class(c).is_some() || scan.is_direct_envy(c))
        .collect();
    Ok(scan.dominating(x, &blocking_now))
}

/// Classifies every blocking contract of `mu` and derives all stability flags.
pub fn audit(m: &Market, mu: &Matching) -> Result<BlockingReport, AuditError> {
    check_matching(m, mu)?;
    let scan = Scan::new(m, mu);
    let mut w = Witnesses::default();
    let mut blocking_now = HashSet::new();
    let mut waste = Vec::new();

    for x in scan.improving_contracts() {
        let class = scan.waste_class(&x);
        match class {
            Some(BlockClass::SeatWaste) => w.seat.push(x),
            Some(BlockClass::ResourceWaste) => w.resource.push(x),
            _ => {}
        }
        if class.is_some() {
            waste.push(x);
            blocking_now.insert(x);
        }
        let victims = scan.envy_victims(&x);
        if victims.is_empty() {
            continue;
        }
        let witness = EnvyWitness {
            contract: x,
            victims,
        };
        if witness.victims.iter().any(|v| is_direct_victim(&x, v)) {
            blocking_now.insert(x);
            w.direct_envy.push(witness);
        } else {
            w.indirect_envy.push(witness);
        }
    }

    for x in &waste {
        if scan.dominating(x, &blocking_now).is_none() {
            w.undominated.push(*x);
        }
    }

    let counts = BlockingCounts {
        resource: w.resource.len(),
        seat: w.seat.len(),
        direct_envy: w.direct_envy.len(),
        indirect_envy: w.indirect_envy.len(),
        total: w.resource.len() + w.seat.len() + w.direct_envy.len() + w.indirect_envy.len(),
    };
    let direct_envy_free = counts.direct_envy == 0;
    let envy_free = direct_envy_free && counts.indirect_envy == 0;
    let seat_efficient = counts.seat == 0;
    let resource_efficient = counts.resource == 0;
    let non_wasteful = seat_efficient && resource_efficient;
    let exhausted = |r: ResourceId| !r.is_empty() && scan.loads.resource(r) == m.resource_quota(r);
    let flags = StabilityFlags {
        stable: envy_free && non_wasteful,
        envy_free,
        direct_envy_free,
        non_wasteful,
        seat_efficient,
        resource_efficient,
        weakly_stable: direct_envy_free && waste.iter().all(|x| exhausted(x.resource)),
        direct_envy_stable: direct_envy_free && w.undominated.is_empty(),
    };
    Ok(BlockingReport {
        counts,
        flags,
        witnesses: Some(w),
    })
}
