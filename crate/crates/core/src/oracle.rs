//! Brute-force ground truth for small markets.
//!
//! Everything here enumerates: feasible individually rational matchings,
//! cutoff profiles, misreports and processing orders. Search spaces are
//! checked against a bound before any work starts.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::blocking::{audit, AuditError, StabilityFlags};
use crate::cutoff::{is_optimal, CutoffProfile};
use crate::market::{Loads, Market, MarketError, Matching, Pair, StudentId};
use crate::mechanisms::{MechanismKind, OrderDomain, Schedule};

/// Default cap on candidate assignments, profiles, or probe runs.
pub const DEFAULT_BOUND: u128 = 10_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("search space of {size} candidates exceeds the bound of {bound}; use a smaller market")]
    SearchSpace { size: u128, bound: u128 },
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

fn check_bound(size: u128, bound: u128) -> Result<(), OracleError> {
    if size > bound {
        Err(OracleError::SearchSpace { size, bound })
    } else {
        Ok(())
    }
}

/// Product over students of (acceptable pairs + 1).
pub fn search_space(m: &Market) -> u128 {
    m.students()
        .map(|s| m.preferences(s).len() as u128 + 1)
        .fold(1u128, u128::saturating_mul)
}

pub fn enumerate_matchings(m: &Market) -> Result<Vec<Matching>, OracleError> {
    enumerate_matchings_bounded(m, DEFAULT_BOUND)
}

/// Every feasible individually rational matching, each exactly once.
///
/// Students are assigned in index order, each either unmatched or to one of
/// their listed pairs; branches that break a quota are cut immediately.
pub fn enumerate_matchings_bounded(m: &Market, bound: u128) -> Result<Vec<Matching>, OracleError> {
    check_bound(search_space(m), bound)?;
    let mut out = Vec::new();
    let mut current = Matching::empty(m.n_students());
    let mut loads = Loads::of(m, &current);
    descend(m, 0, &mut current, &mut loads, &mut out);
    Ok(out)
}

fn descend(m: &Market, s: usize, current: &mut Matching, loads: &mut Loads, out: &mut Vec<Matching>) {
    if s == m.n_students() {
        out.push(current.clone());
        return;
    }
    let student = StudentId(s as u32);
    descend(m, s + 1, current, loads, out);
    for &pair in m.preferences(student) {
        if loads.admits(m, pair, &[]) {
            loads.add(pair);
            current.assign(student, Some(pair));
            descend(m, s + 1, current, loads, out);
            current.assign(student, None);
            loads.remove(pair);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusEntry {
    pub matching: Matching,
    pub flags: StabilityFlags,
    pub pareto_efficient: bool,
}

/// Audit flags for every feasible individually rational matching.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityCensus {
    pub entries: Vec<CensusEntry>,
}

pub fn census(m: &Market) -> Result<StabilityCensus, OracleError> {
    census_bounded(m, DEFAULT_BOUND)
}

pub fn census_bounded(m: &Market, bound: u128) -> Result<StabilityCensus, OracleError> {
    let matchings = enumerate_matchings_bounded(m, bound)?;
    let ranks: Vec<Vec<usize>> = matchings.iter().map(|mu| outcome_ranks(m, mu)).collect();
    let mut entries = Vec::with_capacity(matchings.len());
    for (i, mu) in matchings.into_iter().enumerate() {
        let flags = audit(m, &mu)?.flags;
        let pareto_efficient = !ranks.iter().any(|other| dominates(other, &ranks[i]));
        entries.push(CensusEntry {
            matching: mu,
            flags,
            pareto_efficient,
        });
    }
    Ok(StabilityCensus { entries })
}

/// Position of each student's outcome in their list, unmatched ranked last.
fn outcome_ranks(m: &Market, mu: &Matching) -> Vec<usize> {
    m.students()
        .map(|s| match mu.get(s) {
            Some(pair) => m.position(s, pair).unwrap_or(usize::MAX),
            None => m.preferences(s).len(),
        })
        .collect()
}

/// Everyone weakly better off under `a`, someone strictly.
fn dominates(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Whether no feasible matching makes every student weakly better off and
/// some student strictly better off than `mu`.
pub fn is_pareto_efficient(m: &Market, mu: &Matching) -> Result<bool, OracleError> {
    let own = outcome_ranks(m, mu);
    Ok(!enumerate_matchings(m)?
        .iter()
        .any(|other| dominates(&outcome_ranks(m, other), &own)))
}

impl StabilityCensus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn matchings(&self) -> impl Iterator<Item = &Matching> {
        self.entries.iter().map(|e| &e.matching)
    }

    fn select(&self, keep: impl Fn(&CensusEntry) -> bool) -> Vec<&Matching> {
        self.entries.iter().filter(|e| keep(e)).map(|e| &e.matching).collect()
    }

    pub fn stable(&self) -> Vec<&Matching> {
        self.select(|e| e.flags.stable)
    }

    pub fn direct_envy_stable(&self) -> Vec<&Matching> {
        self.select(|e| e.flags.direct_envy_stable)
    }

    pub fn weakly_stable(&self) -> Vec<&Matching> {
        self.select(|e| e.flags.weakly_stable)
    }

    pub fn envy_free(&self) -> Vec<&Matching> {
        self.select(|e| e.flags.envy_free)
    }

    pub fn pareto_efficient(&self) -> Vec<&Matching> {
        self.select(|e| e.pareto_efficient)
    }

    pub fn entry(&self, mu: &Matching) -> Option<&CensusEntry> {
        self.entries.iter().find(|e| &e.matching == mu)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("census serializes")
    }

    /// Plain-text report: one line per matching followed by the derived sets.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mark = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(out, "feasible individually rational matchings: {}", self.len());
        for e in &self.entries {
            let f = &e.flags;
            let _ = writeln!(
                out,
                "  {}  stable={} des={} weak={} envy_free={} non_wasteful={} pareto={}",
                e.matching,
                mark(f.stable),
                mark(f.direct_envy_stable),
                mark(f.weakly_stable),
                mark(f.envy_free),
                mark(f.non_wasteful),
                mark(e.pareto_efficient),
            );
        }
        for (label, set) in [
            ("stable set", self.stable()),
            ("direct-envy stable set", self.direct_envy_stable()),
            ("weakly stable set", self.weakly_stable()),
            ("envy-free set", self.envy_free()),
            ("pareto-efficient set", self.pareto_efficient()),
        ] {
            if set.is_empty() {
                let _ = writeln!(out, "{label}: empty");
            } else {
                let items: Vec<String> = set.iter().map(|mu| mu.to_string()).collect();
                let _ = writeln!(out, "{label}: {}", items.join(" "));
            }
        }
        out
    }
}

/// Number of profiles [`optimal_profiles`] would visit.
pub fn profile_space(m: &Market) -> u128 {
    let n = m.n_students() as u128;
    let per_college: u128 = (0..=n)
        .map(|k0| (k0 + 1).saturating_pow(m.n_resources() as u32))
        .fold(0u128, u128::saturating_add);
    per_college.saturating_pow(m.n_colleges() as u32)
}

/// Every optimal cutoff profile, found by visiting all valid profiles.
pub fn optimal_profiles(m: &Market, bound: u128) -> Result<Vec<CutoffProfile>, OracleError> {
    check_bound(profile_space(m), bound)?;
    let n = m.n_students() as u32;
    let ids = m.n_resource_ids();
    let mut rows: Vec<Vec<u32>> = vec![vec![0; ids]; m.n_colleges()];
    let mut out = Vec::new();
    loop {
        let profile = CutoffProfile::from_rows(m, rows.clone()).expect("enumerated profiles are valid");
        if is_optimal(m, &profile) {
            out.push(profile);
        }
        // odometer over (college, resource), each digit bounded by its row's empty entry
        let mut carried = true;
        'digits: for row in rows.iter_mut() {
            for r in (0..ids).rev() {
                let cap = if r == 0 { n } else { row[0] };
                if row[r] < cap {
                    row[r] += 1;
                    row[r + 1..].fill(0);
                    carried = false;
                    break 'digits;
                }
            }
            row.fill(0);
        }
        if carried {
            return Ok(out);
        }
    }
}

/// College-proposing deferred acceptance over `(college, empty)` pairs.
/// Non-empty resources are ignored.
pub fn deferred_acceptance(m: &Market) -> Matching {
    let mut held: Vec<Option<crate::market::CollegeId>> = vec![None; m.n_students()];
    let mut holding = vec![0u32; m.n_colleges()];
    let mut next = vec![0usize; m.n_colleges()];
    let empty = crate::market::ResourceId::EMPTY;
    loop {
        let mut proposed = false;
        for c in m.colleges() {
            while holding[c.index()] < m.college_quota(c) && next[c.index()] < m.n_students() {
                let s = m.priority(c)[next[c.index()]];
                next[c.index()] += 1;
                proposed = true;
                let offer = Some((c, empty));
                let current = held[s.index()].map(|h| (h, empty));
                if m.is_acceptable(s, (c, empty)) && m.prefers(s, offer, current) {
                    if let Some(prev) = held[s.index()] {
                        holding[prev.index()] -= 1;
                    }
                    held[s.index()] = Some(c);
                    holding[c.index()] += 1;
                }
            }
        }
        if !proposed {
            break;
        }
    }
    let mut mu = Matching::empty(m.n_students());
    for s in m.students() {
        mu.assign(s, held[s.index()].map(|c| (c, empty)));
    }
    mu
}

/// How the probe resolves the mechanism's internal randomness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeScope {
    /// Compare outcomes under this one schedule.
    Pointwise(Schedule),
    /// Compare outcome distributions over every fixed processing order.
    AllOrders,
}

/// A report that beats truth-telling for `student`.
///
/// Outcome vectors count runs per position in the true list, with the final
/// slot for staying unmatched.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub mechanism: MechanismKind,
    pub student: StudentId,
    pub report: Vec<Pair>,
    pub truthful: Vec<u64>,
    pub misreport: Vec<u64>,
}

/// Count of strict orders over subsets of a list of length `len`.
pub fn misreport_space(len: usize) -> u128 {
    let mut total = 1u128;
    let mut arrangements = 1u128;
    for k in 0..len {
        arrangements = arrangements.saturating_mul((len - k) as u128);
        total = total.saturating_add(arrangements);
    }
    total
}

fn order_keys(m: &Market, kind: MechanismKind) -> usize {
    match kind.order_domain() {
        OrderDomain::Entries => m.n_colleges() * m.n_resource_ids(),
        OrderDomain::Colleges => m.n_colleges(),
        OrderDomain::Students => m.n_students(),
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).fold(1u128, u128::saturating_mul)
}

/// All strict orders over subsets of `items`, shortest first.
pub fn misreports(items: &[Pair]) -> Vec<Vec<Pair>> {
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..items.len() {
        let mut grown = Vec::new();
        for prefix in &frontier {
            for i in 0..items.len() {
                if !prefix.contains(&i) {
                    let mut next = prefix.clone();
                    next.push(i);
                    grown.push(next);
                }
            }
        }
        out.extend(grown.iter().map(|ix| ix.iter().map(|&i| items[i]).collect::<Vec<_>>()));
        frontier = grown;
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    // Heap's algorithm
    let mut c = vec![0usize; n];
    out.push(current.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                current.swap(0, i);
            } else {
                current.swap(c[i], i);
            }
            out.push(current.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Outcome counts of `student` under each schedule, indexed by true list
/// position with unmatched last.
fn outcome_counts(
    truth: &Market,
    reported: &Market,
    kind: MechanismKind,
    student: StudentId,
    schedules: &[Schedule],
) -> Vec<u64> {
    let len = truth.preferences(student).len();
    let mut counts = vec![0u64; len + 1];
    for schedule in schedules {
        let outcome = kind.run(reported, schedule).matching.get(student);
        let slot = outcome.and_then(|pair| truth.position(student, pair)).unwrap_or(len);
        counts[slot] += 1;
    }
    counts
}

/// `a` first-order stochastically dominates `b`: every top-k prefix of the
/// true list is reached at least as often.
fn sd_dominates(a: &[u64], b: &[u64]) -> bool {
    let (mut sa, mut sb) = (0u64, 0u64);
    for (x, y) in a.iter().zip(b).take(a.len() - 1) {
        sa += x;
        sb += y;
        if sa < sb {
            return false;
        }
    }
    true
}

/// Searches for a report of `student` that beats reporting truthfully.
///
/// Reports range over strict orders of subsets of the true list. Under
/// [`ProbeScope::AllOrders`] the misreport must fail to be stochastically
/// dominated by truth-telling across all processing orders.
pub fn strategyproofness_probe(
    m: &Market,
    kind: MechanismKind,
    student: StudentId,
    scope: &ProbeScope,
    bound: u128,
) -> Result<Option<Counterexample>, OracleError> {
    let truthful_list = m.preferences(student).to_vec();
    let reports = misreport_space(truthful_list.len());
    let schedules: Vec<Schedule> = match scope {
        ProbeScope::Pointwise(schedule) => {
            check_bound(reports, bound)?;
            vec![schedule.clone()]
        }
        ProbeScope::AllOrders => {
            let keys = order_keys(m, kind);
            check_bound(reports.saturating_mul(factorial(keys)), bound)?;
            permutations(keys).into_iter().map(Schedule::Fixed).collect()
        }
    };
    let truthful = outcome_counts(m, m, kind, student, &schedules);
    for report in misreports(&truthful_list) {
        if report == truthful_list {
            continue;
        }
        let reported = m.with_preferences(student, report.clone())?;
        let misreport = outcome_counts(m, &reported, kind, student, &schedules);
        if !sd_dominates(&truthful, &misreport) {
            return Ok(Some(Counterexample {
                mechanism: kind,
                student,
                report,
                truthful,
                misreport,
            }));
        }
    }
    Ok(None)
}
