//! Small hand-built markets with known properties.
//!
//! Each fixture ships as a market file under `fixtures/`. Its documented
//! properties are recomputed by the oracle on every [`Fixture::verify`] call.

use std::fmt;

use serde::Serialize;

use crate::blocking::audit;
use crate::market::{is_feasible, CollegeId, Contract, Market, Matching, ResourceId, StudentId};
use crate::mechanisms::{MechanismKind, Schedule};
use crate::oracle::{census, OracleError};

pub const NAMES: [&str; 7] = [
    "no_stable",
    "heredity_gap",
    "wasteful_des",
    "seat_blocked_des",
    "two_des",
    "cutoff_misses_stable",
    "truncation_gain",
];

const NO_STABLE: &str = include_str!("../fixtures/no_stable.json");
const HEREDITY_GAP: &str = include_str!("../fixtures/heredity_gap.json");
const WASTEFUL_DES: &str = include_str!("../fixtures/wasteful_des.json");
const TWO_DES: &str = include_str!("../fixtures/two_des.json");
const CUTOFF_MISSES_STABLE: &str = include_str!("../fixtures/cutoff_misses_stable.json");
const TRUNCATION_GAIN: &str = include_str!("../fixtures/truncation_gain.json");

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    pub market: Market,
    source: &'static str,
}

/// Outcome of one documented property.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.label, self.detail)
    }
}

fn check(label: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        label: label.to_string(),
        passed,
        detail: detail.into(),
    }
}

pub fn get(name: &str) -> Option<Fixture> {
    let (name, summary, source) = match name {
        "no_stable" => ("no_stable", "two students competing for one resource unit; no stable matching", NO_STABLE),
        "heredity_gap" => ("heredity_gap", "feasibility is not monotone in admission counts", HEREDITY_GAP),
        "wasteful_des" => ("wasteful_des", "unique direct-envy stable matching, which wastes the resource", WASTEFUL_DES),
        "seat_blocked_des" => ("seat_blocked_des", "every direct-envy stable matching has a seat-blocking contract", NO_STABLE),
        "two_des" => ("two_des", "two direct-envy stable matchings, neither envy-free", TWO_DES),
        "cutoff_misses_stable" => ("cutoff_misses_stable", "cutoff mechanisms can miss the unique stable matching", CUTOFF_MISSES_STABLE),
        "truncation_gain" => ("truncation_gain", "truncating a list to one college improves the outcome", TRUNCATION_GAIN),
        _ => return None,
    };
    let market = Market::from_json(source).expect("shipped fixtures are valid");
    Some(Fixture {
        name,
        summary,
        market,
        source,
    })
}

pub fn all() -> Vec<Fixture> {
    NAMES.iter().map(|name| get(name).expect("listed fixture exists")).collect()
}

fn matching(n: usize, xs: &[(u32, u32, u32)]) -> Matching {
    Matching::from_contracts(n, xs.iter().map(|&(s, c, r)| Contract::new(s, c, r)))
        .expect("fixture matchings name distinct students")
}

fn show(set: &[&Matching]) -> String {
    if set.is_empty() {
        return "empty".to_string();
    }
    set.iter().map(|mu| mu.to_string()).collect::<Vec<_>>().join(" ")
}

fn same_set(found: &[&Matching], expected: &[Matching]) -> bool {
    found.len() == expected.len() && expected.iter().all(|mu| found.contains(&mu))
}

/// Processing order under which every cutoff mechanism treats college 1
/// before college 2, entry by entry for IRC.
pub fn college_first_order(m: &Market, kind: MechanismKind, resource: ResourceId) -> Schedule {
    if kind == MechanismKind::Irc {
        Schedule::entries(m, &[(CollegeId(0), resource), (CollegeId(1), resource)])
    } else {
        Schedule::colleges(&[CollegeId(0), CollegeId(1)])
    }
}

impl Fixture {
    /// The market file as shipped.
    pub fn json(&self) -> &'static str {
        self.source
    }

    /// Recomputes every documented property.
    pub fn verify(&self) -> Result<Vec<Check>, OracleError> {
        let m = &self.market;
        let n = m.n_students();
        let mut checks = Vec::new();
        match self.name {
            "no_stable" => {
                let c = census(m)?;
                checks.push(check(
                    "five feasible individually rational matchings",
                    c.len() == 5,
                    format!("found {}", c.len()),
                ));
                checks.push(check("stable set is empty", c.stable().is_empty(), show(&c.stable())));
            }
            "heredity_gap" => {
                let small = matching(n, &[(0, 0, 0), (1, 0, 0), (2, 0, 0)]);
                let smaller = matching(n, &[(3, 0, 1), (4, 0, 1)]);
                checks.push(check("three seats without the resource are feasible", is_feasible(m, &small), small.to_string()));
                checks.push(check(
                    "two seats that both need the resource are infeasible",
                    !is_feasible(m, &smaller),
                    smaller.to_string(),
                ));
                let all = census(m)?;
                let hereditary = all.matchings().all(|mu| {
                    mu.contracts().all(|x| {
                        let mut sub = mu.clone();
                        sub.assign(x.student, None);
                        is_feasible(m, &sub)
                    })
                });
                checks.push(check("feasible matchings stay feasible after removals", hereditary, format!("{} matchings", all.len())));
            }
            "wasteful_des" => {
                let c = census(m)?;
                let expected = matching(n, &[(0, 0, 0), (2, 1, 0)]);
                let des = c.direct_envy_stable();
                checks.push(check("unique direct-envy stable matching", same_set(&des, std::slice::from_ref(&expected)), show(&des)));
                let wasteful = c.entry(&expected).is_some_and(|e| !e.flags.resource_efficient);
                checks.push(check("it is not resource-efficient", wasteful, expected.to_string()));
            }
            "seat_blocked_des" => {
                let c = census(m)?;
                let des = c.direct_envy_stable();
                let seat_blocked = des
                    .iter()
                    .all(|mu| c.entry(mu).is_some_and(|e| !e.flags.seat_efficient));
                checks.push(check(
                    "every direct-envy stable matching is seat-blocked",
                    !des.is_empty() && seat_blocked,
                    show(&des),
                ));
            }
            "two_des" => {
                let c = census(m)?;
                let expected = [
                    matching(n, &[(0, 2, 0), (1, 1, 1), (2, 0, 0)]),
                    matching(n, &[(0, 0, 0), (1, 1, 0), (2, 2, 1)]),
                ];
                let des = c.direct_envy_stable();
                checks.push(check("exactly the two listed direct-envy stable matchings", same_set(&des, &expected), show(&des)));
                let none_envy_free = des
                    .iter()
                    .all(|mu| c.entry(mu).is_some_and(|e| !e.flags.envy_free));
                checks.push(check("neither is envy-free", none_envy_free, show(&des)));
            }
            "cutoff_misses_stable" => {
                let c = census(m)?;
                let stable = matching(n, &[(1, 1, 1)]);
                checks.push(check("unique stable matching", same_set(&c.stable(), std::slice::from_ref(&stable)), show(&c.stable())));
                let reached = matching(n, &[(0, 0, 1)]);
                for kind in MechanismKind::CUTOFF {
                    let schedule = college_first_order(m, kind, ResourceId(1));
                    let out = kind.run(m, &schedule).matching;
                    checks.push(check(
                        &format!("{kind} with college 1 first misses it"),
                        out == reached,
                        out.to_string(),
                    ));
                }
            }
            "truncation_gain" => {
                let truthful = matching(n, &[(0, 0, 0), (1, 1, 0)]);
                let lied = matching(n, &[(0, 1, 0), (1, 0, 0)]);
                let s1 = StudentId(0);
                let report = vec![(CollegeId(1), ResourceId::EMPTY)];
                let misreported = m.with_preferences(s1, report)?;
                for kind in MechanismKind::CUTOFF {
                    let schedule = college_first_order(m, kind, ResourceId::EMPTY);
                    let honest = kind.run(m, &schedule).matching;
                    let gamed = kind.run(&misreported, &schedule).matching;
                    let improves = honest == truthful
                        && gamed == lied
                        && m.prefers(s1, gamed.get(s1), honest.get(s1));
                    checks.push(check(
                        &format!("{kind}: reporting only college 2 helps student 1"),
                        improves,
                        format!("{honest} -> {gamed}"),
                    ));
                }
            }
            other => unreachable!("unknown fixture {other}"),
        }
        for mu in census(m)?.matchings() {
            let flags = audit(m, mu)?.flags;
            if flags.direct_envy_stable && !flags.weakly_stable {
                checks.push(check(
                    "direct-envy stable implies weakly stable",
                    false,
                    format!("counterexample {mu}"),
                ));
                break;
            }
        }
        Ok(checks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_loads() {
        for f in all() {
            assert_eq!(Market::from_json(f.json()).unwrap().to_json(), f.market.to_json());
        }
        assert!(get("nope").is_none());
    }

    #[test]
    fn example1_checks_pass() {
        let checks = get("no_stable").unwrap().verify().unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }

    #[test]
    fn heredity_fixture_checks_pass() {
        let checks = get("heredity_gap").unwrap().verify().unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }
}
