//! Market instances, contracts and matchings.
//!
//! A market holds students, colleges with seat quotas, and non-empty resources
//! whose units may only be handed out by colleges inside the resource's
//! region. Resource id 0 is the empty resource: admission without any unit.
//! It is never stored; its region is every college and its quota is the
//! number of students.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense 0-based student index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StudentId(pub u32);

/// Dense 0-based college index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CollegeId(pub u32);

/// Resource index; 0 is the empty resource, `1..=R` are the non-empty ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceId(pub u32);

impl StudentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl CollegeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ResourceId {
    pub const EMPTY: ResourceId = ResourceId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0 + 1)
    }
}

impl fmt::Display for CollegeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0 + 1)
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// A (college, resource) pair as ranked by a student.
pub type Pair = (CollegeId, ResourceId);

/// A (student, college, resource) triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Contract {
    pub student: StudentId,
    pub college: CollegeId,
    pub resource: ResourceId,
}

impl Contract {
    pub fn new(student: u32, college: u32, resource: u32) -> Self {
        Contract {
            student: StudentId(student),
            college: CollegeId(college),
            resource: ResourceId(resource),
        }
    }

    pub fn from_pair(student: StudentId, pair: Pair) -> Self {
        Contract {
            student,
            college: pair.0,
            resource: pair.1,
        }
    }

    pub fn pair(&self) -> Pair {
        (self.college, self.resource)
    }
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.student, self.college, self.resource)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollegeSpec {
    pub quota: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceSpec {
    pub quota: u32,
    pub region: Vec<CollegeId>,
}

/// On-disk form of a market. Field order is the canonical key order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketDoc {
    pub students: u32,
    pub colleges: Vec<CollegeSpec>,
    pub resources: Vec<ResourceSpec>,
    /// Per college, student ids best first.
    pub priorities: Vec<Vec<StudentId>>,
    /// Per student, acceptable (college, resource) pairs best first.
    pub preferences: Vec<Vec<Pair>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// A single finding of [`validate_market`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    CollegeQuotaNotPositive { college: CollegeId },
    ResourceQuotaNotPositive { resource: ResourceId },
    EmptyRegion { resource: ResourceId },
    RegionCollegeOutOfRange { resource: ResourceId, college: CollegeId },
    DuplicateRegionCollege { resource: ResourceId, college: CollegeId },
    PriorityCount { expected: usize, found: usize },
    PriorityNotPermutation { college: CollegeId },
    PreferenceCount { expected: usize, found: usize },
    PairOutOfRange { student: StudentId, college: CollegeId, resource: ResourceId },
    DuplicatePair { student: StudentId, college: CollegeId, resource: ResourceId },
    /// `(c, r)` is acceptable but `(c, r0)` is not.
    MissingEmptyFallback { student: StudentId, college: CollegeId, resource: ResourceId },
    /// `(c, r0)` is ranked above `(c, r)`.
    EmptyResourceRankedFirst { student: StudentId, college: CollegeId, resource: ResourceId },
}

impl Issue {
    pub fn severity(&self) -> Severity {
        match self {
            Issue::MissingEmptyFallback { .. } | Issue::EmptyResourceRankedFirst { .. } => {
                Severity::Warning
            }
            _ => Severity::Error,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity() == Severity::Error
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::CollegeQuotaNotPositive { college } => {
                write!(f, "{college}: quota must be positive")
            }
            Issue::ResourceQuotaNotPositive { resource } => {
                write!(f, "{resource}: quota must be positive")
            }
            Issue::EmptyRegion { resource } => write!(f, "{resource}: region must not be empty"),
            Issue::RegionCollegeOutOfRange { resource, college } => {
                write!(f, "{resource}: region references unknown college {college}")
            }
            Issue::DuplicateRegionCollege { resource, college } => {
                write!(f, "{resource}: region lists {college} twice")
            }
            Issue::PriorityCount { expected, found } => {
                write!(f, "expected {expected} priority orders, found {found}")
            }
            Issue::PriorityNotPermutation { college } => {
                write!(f, "{college}: priority order is not a permutation of all students")
            }
            Issue::PreferenceCount { expected, found } => {
                write!(f, "expected {expected} preference lists, found {found}")
            }
            Issue::PairOutOfRange { student, college, resource } => {
                write!(f, "{student}: pair ({college},{resource}) references unknown ids")
            }
            Issue::DuplicatePair { student, college, resource } => {
                write!(f, "{student}: pair ({college},{resource}) listed twice")
            }
            Issue::MissingEmptyFallback { student, college, resource } => write!(
                f,
                "{student}: ({college},{resource}) acceptable but ({college},r0) is not"
            ),
            Issue::EmptyResourceRankedFirst { student, college, resource } => write!(
                f,
                "{student}: ({college},r0) ranked above ({college},{resource})"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("invalid market: {}", join_issues(.0))]
    Invalid(Vec<Issue>),
    #[error("malformed market document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0} is out of range for this market")]
    UnknownStudent(StudentId),
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks every structural invariant of a market document.
///
/// Errors make the document unusable; warnings flag preference lists where a
/// non-empty resource at a college is not followed by the same college
/// without a resource.
pub fn validate_market(doc: &MarketDoc) -> Vec<Issue> {
    let mut issues = Vec::new();
    let n_students = doc.students as usize;
    let n_colleges = doc.colleges.len();
    let n_resource_ids = doc.resources.len() + 1;

    for (c, spec) in doc.colleges.iter().enumerate() {
        if spec.quota == 0 {
            issues.push(Issue::CollegeQuotaNotPositive {
                college: CollegeId(c as u32),
            });
        }
    }
    for (i, spec) in doc.resources.iter().enumerate() {
        let resource = ResourceId(i as u32 + 1);
        if spec.quota == 0 {
            issues.push(Issue::ResourceQuotaNotPositive { resource });
        }
        if spec.region.is_empty() {
            issues.push(Issue::EmptyRegion { resource });
        }
        let mut seen = HashSet::new();
        for &college in &spec.region {
            if college.index() >= n_colleges {
                issues.push(Issue::RegionCollegeOutOfRange { resource, college });
            } else if !seen.insert(college) {
                issues.push(Issue::DuplicateRegionCollege { resource, college });
            }
        }
    }

    if doc.priorities.len() != n_colleges {
        issues.push(Issue::PriorityCount {
            expected: n_colleges,
            found: doc.priorities.len(),
        });
    }
    for (c, order) in doc.priorities.iter().enumerate() {
        let mut seen = vec![false; n_students];
        let ok = order.len() == n_students
            && order.iter().all(|s| {
                s.index() < n_students && !std::mem::replace(&mut seen[s.index()], true)
            });
        if !ok {
            issues.push(Issue::PriorityNotPermutation {
                college: CollegeId(c as u32),
            });
        }
    }

    if doc.preferences.len() != n_students {
        issues.push(Issue::PreferenceCount {
            expected: n_students,
            found: doc.preferences.len(),
        });
    }
    for (s, list) in doc.preferences.iter().enumerate() {
        let student = StudentId(s as u32);
        let mut position = std::collections::HashMap::new();
        for (pos, &(college, resource)) in list.iter().enumerate() {
            if college.index() >= n_colleges || resource.index() >= n_resource_ids {
                issues.push(Issue::PairOutOfRange { student, college, resource });
            } else if position.insert((college, resource), pos).is_some() {
                issues.push(Issue::DuplicatePair { student, college, resource });
            }
        }
        for &(college, resource) in list {
            if resource.is_empty() {
                continue;
            }
            let Some(&pos) = position.get(&(college, resource)) else {
                continue;
            };
            match position.get(&(college, ResourceId::EMPTY)) {
                None => issues.push(Issue::MissingEmptyFallback { student, college, resource }),
                Some(&empty_pos) if empty_pos < pos => {
                    issues.push(Issue::EmptyResourceRankedFirst { student, college, resource })
                }
                Some(_) => {}
            }
        }
    }
    issues
}

/// A validated market instance. Immutable once built.
#[derive(Clone, Debug)]
pub struct Market {
    n_students: usize,
    college_quota: Vec<u32>,
    resource_quota: Vec<u32>,
    // in_region[r - 1][c]
    in_region: Vec<Vec<bool>>,
    priority: Vec<Vec<StudentId>>,
    // rank[c][s], 1-based
    rank: Vec<Vec<u32>>,
    prefs: Vec<Vec<Pair>>,
    // pref_pos[s][c * n_resource_ids + r]
    pref_pos: Vec<Vec<u32>>,
    warnings: Vec<Issue>,
}

const NOT_LISTED: u32 = u32::MAX;

impl Market {
    pub fn from_doc(doc: &MarketDoc) -> Result<Market, MarketError> {
        let issues = validate_market(doc);
        let (errors, warnings): (Vec<_>, Vec<_>) = issues.into_iter().partition(Issue::is_error);
        if !errors.is_empty() {
            return Err(MarketError::Invalid(errors));
        }

        let n_students = doc.students as usize;
        let n_colleges = doc.colleges.len();
        let n_resource_ids = doc.resources.len() + 1;

        let in_region = doc
            .resources
            .iter()
            .map(|spec| {
                let mut row = vec![false; n_colleges];
                for c in &spec.region {
                    row[c.index()] = true;
                }
                row
            })
            .collect();

        let rank = doc
            .priorities
            .iter()
            .map(|order| {
                let mut row = vec![0u32; n_students];
                for (pos, s) in order.iter().enumerate() {
                    row[s.index()] = pos as u32 + 1;
                }
                row
            })
            .collect();

        let pref_pos = doc
            .preferences
            .iter()
            .map(|list| {
                let mut row = vec![NOT_LISTED; n_colleges * n_resource_ids];
                for (pos, (c, r)) in list.iter().enumerate() {
                    row[c.index() * n_resource_ids + r.index()] = pos as u32;
                }
                row
            })
            .collect();

        Ok(Market {
            n_students,
            college_quota: doc.colleges.iter().map(|c| c.quota).collect(),
            resource_quota: doc.resources.iter().map(|r| r.quota).collect(),
            in_region,
            priority: doc.priorities.clone(),
            rank,
            prefs: doc.preferences.clone(),
            pref_pos,
            warnings,
        })
    }

    pub fn to_doc(&self) -> MarketDoc {
        MarketDoc {
            students: self.n_students as u32,
            colleges: self
                .college_quota
                .iter()
                .map(|&quota| CollegeSpec { quota })
                .collect(),
            resources: (1..self.n_resource_ids())
                .map(|r| {
                    let r = ResourceId(r as u32);
                    ResourceSpec {
                        quota: self.resource_quota(r),
                        region: self.region(r),
                    }
                })
                .collect(),
            priorities: self.priority.clone(),
            preferences: self.prefs.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Market, MarketError> {
        let doc: MarketDoc = serde_json::from_str(text)?;
        Market::from_doc(&doc)
    }

    /// Compact canonical JSON followed by a newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string(&self.to_doc()).expect("market document serializes");
        out.push('\n');
        out
    }

    pub fn n_students(&self) -> usize {
        self.n_students
    }

    pub fn n_colleges(&self) -> usize {
        self.college_quota.len()
    }

    /// Number of non-empty resources.
    pub fn n_resources(&self) -> usize {
        self.resource_quota.len()
    }

    /// Number of resource ids including the empty resource.
    pub fn n_resource_ids(&self) -> usize {
        self.resource_quota.len() + 1
    }

    pub fn students(&self) -> impl Iterator<Item = StudentId> + '_ {
        (0..self.n_students as u32).map(StudentId)
    }

    pub fn colleges(&self) -> impl Iterator<Item = CollegeId> + '_ {
        (0..self.n_colleges() as u32).map(CollegeId)
    }

    /// All resource ids, empty resource first.
    pub fn resources(&self) -> impl Iterator<Item = ResourceId> + '_ {
        (0..self.n_resource_ids() as u32).map(ResourceId)
    }

    pub fn college_quota(&self, c: CollegeId) -> u32 {
        self.college_quota[c.index()]
    }

    pub fn resource_quota(&self, r: ResourceId) -> u32 {
        if r.is_empty() {
            self.n_students as u32
        } else {
            self.resource_quota[r.index() - 1]
        }
    }

    pub fn region_contains(&self, r: ResourceId, c: CollegeId) -> bool {
        r.is_empty() || self.in_region[r.index() - 1][c.index()]
    }

    pub fn region(&self, r: ResourceId) -> Vec<CollegeId> {
        self.colleges()
            .filter(|&c| self.region_contains(r, c))
            .collect()
    }

    /// Position of `s` in the priority order of `c`, 1 = best.
    pub fn rank(&self, c: CollegeId, s: StudentId) -> u32 {
        self.rank[c.index()][s.index()]
    }

    /// Student holding rank `k` (1-based) at `c`.
    pub fn student_at_rank(&self, c: CollegeId, k: u32) -> StudentId {
        self.priority[c.index()][k as usize - 1]
    }

    pub fn priority(&self, c: CollegeId) -> &[StudentId] {
        &self.priority[c.index()]
    }

    pub fn preferences(&self, s: StudentId) -> &[Pair] {
        &self.prefs[s.index()]
    }

    /// 0-based position of `pair` in the list of `s`, `None` if unacceptable.
    pub fn position(&self, s: StudentId, pair: Pair) -> Option<usize> {
        let p = self.pref_pos[s.index()][self.pair_index(pair)];
        (p != NOT_LISTED).then_some(p as usize)
    }

    pub fn is_acceptable(&self, s: StudentId, pair: Pair) -> bool {
        self.position(s, pair).is_some()
    }

    /// Total order key: acceptable pairs by position, then unmatched, then
    /// every unacceptable pair.
    fn outcome_key(&self, s: StudentId, outcome: Option<Pair>) -> usize {
        let len = self.prefs[s.index()].len();
        match outcome {
            None => len,
            Some(pair) => self.position(s, pair).unwrap_or(len + 1),
        }
    }

    /// Whether `s` strictly prefers outcome `a` to outcome `b`; `None` is
    /// being unmatched.
    pub fn prefers(&self, s: StudentId, a: Option<Pair>, b: Option<Pair>) -> bool {
        self.outcome_key(s, a) < self.outcome_key(s, b)
    }

    pub(crate) fn pair_index(&self, (c, r): Pair) -> usize {
        c.index() * self.n_resource_ids() + r.index()
    }

    /// Warnings found while building the market.
    pub fn warnings(&self) -> &[Issue] {
        &self.warnings
    }

    /// Copy of this market in which `s` reports `list` instead.
    pub fn with_preferences(&self, s: StudentId, list: Vec<Pair>) -> Result<Market, MarketError> {
        if s.index() >= self.n_students {
            return Err(MarketError::UnknownStudent(s));
        }
        let mut doc = self.to_doc();
        doc.preferences[s.index()] = list;
        Market::from_doc(&doc)
    }

    /// Every contract acceptable to its student, in student then list order.
    pub fn acceptable_contracts(&self) -> impl Iterator<Item = Contract> + '_ {
        self.students().flat_map(move |s| {
            self.preferences(s)
                .iter()
                .map(move |&pair| Contract::from_pair(s, pair))
        })
    }

    pub(crate) fn contains_contract(&self, x: &Contract) -> bool {
        x.student.index() < self.n_students
            && x.college.index() < self.n_colleges()
            && x.resource.index() < self.n_resource_ids()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("{0} appears in more than one contract")]
    DuplicateStudent(StudentId),
    #[error("{0} is out of range")]
    StudentOutOfRange(StudentId),
}

/// A set of contracts with at most one contract per student.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assignment: Vec<Option<Pair>>,
}

impl Matching {
    pub fn empty(n_students: usize) -> Self {
        Matching {
            assignment: vec![None; n_students],
        }
    }

    pub fn from_contracts(
        n_students: usize,
        contracts: impl IntoIterator<Item = Contract>,
    ) -> Result<Self, MatchingError> {
        let mut mu = Matching::empty(n_students);
        for x in contracts {
            let slot = mu
                .assignment
                .get_mut(x.student.index())
                .ok_or(MatchingError::StudentOutOfRange(x.student))?;
            if slot.replace(x.pair()).is_some() {
                return Err(MatchingError::DuplicateStudent(x.student));
            }
        }
        Ok(mu)
    }

    pub fn n_students(&self) -> usize {
        self.assignment.len()
    }

    pub fn get(&self, s: StudentId) -> Option<Pair> {
        self.assignment[s.index()]
    }

    pub fn contract_of(&self, s: StudentId) -> Option<Contract> {
        self.get(s).map(|pair| Contract::from_pair(s, pair))
    }

    pub fn contains(&self, x: &Contract) -> bool {
        self.assignment.get(x.student.index()).copied().flatten() == Some(x.pair())
    }

    /// Contracts in student order.
    pub fn contracts(&self) -> impl Iterator<Item = Contract> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(s, pair)| pair.map(|p| Contract::from_pair(StudentId(s as u32), p)))
    }

    pub fn at_college(&self, c: CollegeId) -> impl Iterator<Item = Contract> + '_ {
        self.contracts().filter(move |x| x.college == c)
    }

    pub fn with_resource(&self, r: ResourceId) -> impl Iterator<Item = Contract> + '_ {
        self.contracts().filter(move |x| x.resource == r)
    }

    pub fn len(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.iter().all(Option::is_none)
    }

    /// Sets the outcome of `s`, returning the previous one.
    pub fn assign(&mut self, s: StudentId, pair: Option<Pair>) -> Option<Pair> {
        std::mem::replace(&mut self.assignment[s.index()], pair)
    }

    pub fn assignment(&self) -> &[Option<Pair>] {
        &self.assignment
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.contracts().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct MatchingDoc {
    students: usize,
    contracts: Vec<Contract>,
}

impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatchingDoc {
            students: self.n_students(),
            contracts: self.contracts().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matching {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = MatchingDoc::deserialize(deserializer)?;
        Matching::from_contracts(doc.students, doc.contracts).map_err(serde::de::Error::custom)
    }
}

/// Per-college and per-resource occupancy of a matching.
#[derive(Clone, Debug)]
pub(crate) struct Loads {
    college: Vec<u32>,
    resource: Vec<u32>,
}

impl Loads {
    pub(crate) fn of(m: &Market, mu: &Matching) -> Loads {
        let mut loads = Loads {
            college: vec![0; m.n_colleges()],
            resource: vec![0; m.n_resource_ids()],
        };
        for x in mu.contracts() {
            loads.add(x.pair());
        }
        loads
    }

    pub(crate) fn add(&mut self, (c, r): Pair) {
        self.college[c.index()] += 1;
        self.resource[r.index()] += 1;
    }

    pub(crate) fn remove(&mut self, (c, r): Pair) {
        self.college[c.index()] -= 1;
        self.resource[r.index()] -= 1;
    }

    pub(crate) fn college(&self, c: CollegeId) -> u32 {
        self.college[c.index()]
    }

    pub(crate) fn resource(&self, r: ResourceId) -> u32 {
        self.resource[r.index()]
    }

    /// Whether a feasible matching stays feasible after dropping `released`
    /// and adding `pair`. Only the constraints touched by `pair` can break.
    pub(crate) fn admits(&self, m: &Market, pair: Pair, released: &[Option<Pair>]) -> bool {
        let (c, r) = pair;
        let freed_seats = released.iter().flatten().filter(|p| p.0 == c).count() as u32;
        if self.college(c) + 1 > m.college_quota(c) + freed_seats {
            return false;
        }
        if r.is_empty() {
            return true;
        }
        if !m.region_contains(r, c) {
            return false;
        }
        let freed_units = released.iter().flatten().filter(|p| p.1 == r).count() as u32;
        self.resource(r) < m.resource_quota(r) + freed_units
    }
}

/// Every college within quota, every non-empty resource within quota and only
/// used inside its region.
pub fn is_feasible(m: &Market, mu: &Matching) -> bool {
    if mu.n_students() != m.n_students() {
        return false;
    }
    let loads = Loads::of(m, mu);
    m.colleges().all(|c| loads.college(c) <= m.college_quota(c))
        && m
            .resources()
            .skip(1)
            .all(|r| loads.resource(r) <= m.resource_quota(r))
        && mu.contracts().all(|x| m.region_contains(x.resource, x.college))
}

/// Every contract is acceptable to its student.
pub fn is_individually_rational(m: &Market, mu: &Matching) -> bool {
    mu.contracts().all(|x| m.is_acceptable(x.student, x.pair()))
}

/// Whether every contract of `mu` references ids of `m`.
pub(crate) fn references_market(m: &Market, mu: &Matching) -> bool {
    mu.n_students() == m.n_students() && mu.contracts().all(|x| m.contains_contract(&x))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn c(c: u32, r: u32) -> Pair {
        (CollegeId(c), ResourceId(r))
    }

    /// Two students, two colleges, one resource shared by both colleges,
    /// everything with unit quota.
    pub(crate) fn no_stable() -> Market {
        Market::from_doc(&MarketDoc {
            students: 2,
            colleges: vec![CollegeSpec { quota: 1 }, CollegeSpec { quota: 1 }],
            resources: vec![ResourceSpec {
                quota: 1,
                region: vec![CollegeId(0), CollegeId(1)],
            }],
            priorities: vec![
                vec![StudentId(1), StudentId(0)],
                vec![StudentId(0), StudentId(1)],
            ],
            preferences: vec![vec![c(0, 1), c(1, 1)], vec![c(1, 1), c(0, 1)]],
        })
        .unwrap()
    }

    #[test]
    fn example1_has_no_errors() {
        let doc = no_stable().to_doc();
        let issues = validate_market(&doc);
        assert!(issues.iter().all(|i| !i.is_error()), "{issues:?}");
    }

    #[test]
    fn zero_college_quota_is_an_error() {
        let mut doc = no_stable().to_doc();
        doc.colleges[1].quota = 0;
        let issues = validate_market(&doc);
        assert_eq!(
            issues.iter().filter(|i| i.is_error()).cloned().collect::<Vec<_>>(),
            vec![Issue::CollegeQuotaNotPositive { college: CollegeId(1) }]
        );
        assert!(issues[0].to_string().contains("quota must be positive"));
        assert!(matches!(Market::from_doc(&doc), Err(MarketError::Invalid(_))));
    }

    #[test]
    fn missing_fallback_is_only_a_warning() {
        let mut doc = no_stable().to_doc();
        doc.preferences[0] = vec![c(0, 1)];
        let issues = validate_market(&doc);
        assert!(issues.contains(&Issue::MissingEmptyFallback {
            student: StudentId(0),
            college: CollegeId(0),
            resource: ResourceId(1)
        }));
        assert!(issues.iter().all(|i| i.severity() == Severity::Warning));
        assert!(Market::from_doc(&doc).is_ok());
    }

    #[test]
    fn empty_before_resource_warns() {
        let mut doc = no_stable().to_doc();
        doc.preferences[0] = vec![c(0, 0), c(0, 1)];
        let issues: Vec<Issue> = validate_market(&doc)
            .into_iter()
            .filter(|i| matches!(i, Issue::EmptyResourceRankedFirst { .. }))
            .collect();
        assert_eq!(
            issues,
            vec![Issue::EmptyResourceRankedFirst {
                student: StudentId(0),
                college: CollegeId(0),
                resource: ResourceId(1)
            }]
        );
    }

    #[test]
    fn structural_errors_are_reported() {
        let mut doc = no_stable().to_doc();
        doc.priorities[0] = vec![StudentId(0), StudentId(0)];
        doc.preferences[1] = vec![c(1, 1), c(1, 1), c(5, 0)];
        doc.resources[0].region = vec![];
        let issues = validate_market(&doc);
        assert!(issues.contains(&Issue::PriorityNotPermutation { college: CollegeId(0) }));
        assert!(issues.contains(&Issue::EmptyRegion { resource: ResourceId(1) }));
        assert!(issues
            .iter()
            .any(|i| matches!(i, Issue::DuplicatePair { .. })));
        assert!(issues
            .iter()
            .any(|i| matches!(i, Issue::PairOutOfRange { .. })));
    }

    #[test]
    fn feasibility_of_example1_matchings() {
        let m = no_stable();
        let one = Matching::from_contracts(2, [Contract::new(0, 0, 1)]).unwrap();
        assert!(is_feasible(&m, &one));
        let both = Matching::from_contracts(2, [Contract::new(0, 0, 1), Contract::new(1, 1, 1)])
            .unwrap();
        assert!(!is_feasible(&m, &both));
        assert!(is_feasible(&m, &Matching::empty(2)));
    }

    #[test]
    fn individual_rationality() {
        let m = no_stable();
        assert!(is_individually_rational(&m, &Matching::empty(2)));
        let top = Matching::from_contracts(2, [Contract::new(0, 0, 1)]).unwrap();
        assert!(is_individually_rational(&m, &top));
        let unlisted = Matching::from_contracts(2, [Contract::new(0, 0, 0)]).unwrap();
        assert!(!is_individually_rational(&m, &unlisted));
    }

    #[test]
    fn ranks_follow_priorities() {
        let m = no_stable();
        assert_eq!(m.rank(CollegeId(0), StudentId(1)), 1);
        assert_eq!(m.rank(CollegeId(1), StudentId(1)), 2);
        for col in m.colleges() {
            let mut ranks: Vec<_> = m.students().map(|s| m.rank(col, s)).collect();
            ranks.sort();
            assert_eq!(ranks, vec![1, 2]);
            assert_eq!(m.student_at_rank(col, 1), m.priority(col)[0]);
        }
    }

    #[test]
    fn prefers_is_a_strict_total_order() {
        let m = no_stable();
        let s1 = StudentId(0);
        assert!(m.prefers(s1, Some(c(0, 1)), Some(c(1, 1))));
        assert!(!m.prefers(s1, Some(c(0, 1)), Some(c(0, 1))));
        assert!(m.prefers(s1, Some(c(1, 1)), None));
        // unacceptable pair is worse than staying unmatched
        assert!(m.prefers(s1, None, Some(c(0, 0))));
        assert!(!m.prefers(s1, Some(c(0, 0)), Some(c(1, 0))));
    }

    #[test]
    fn duplicate_student_rejected() {
        let err = Matching::from_contracts(2, [Contract::new(0, 0, 1), Contract::new(0, 1, 1)]);
        assert_eq!(err, Err(MatchingError::DuplicateStudent(StudentId(0))));
        let err = Matching::from_contracts(2, [Contract::new(4, 0, 1)]);
        assert_eq!(err, Err(MatchingError::StudentOutOfRange(StudentId(4))));
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let m = no_stable();
        let text = m.to_json();
        assert_eq!(
            text,
            "{\"students\":2,\"colleges\":[{\"quota\":1},{\"quota\":1}],\"resources\":[{\"quota\":1,\"region\":[0,1]}],\"priorities\":[[1,0],[0,1]],\"preferences\":[[[0,1],[1,1]],[[1,1],[0,1]]]}\n"
        );
        let again = Market::from_json(&text).unwrap().to_json();
        assert_eq!(text, again);
    }

    #[test]
    fn matching_serde_round_trip() {
        let mu = Matching::from_contracts(3, [Contract::new(2, 0, 1)]).unwrap();
        let text = serde_json::to_string(&mu).unwrap();
        let back: Matching = serde_json::from_str(&text).unwrap();
        assert_eq!(mu, back);
        assert_eq!(mu.to_string(), "{(s3,c1,r1)}");
    }
}
