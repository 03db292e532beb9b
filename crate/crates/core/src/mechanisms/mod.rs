//! Matching mechanisms.
//!
//! Four cutoff mechanisms start from the all-zero profile and raise cutoffs
//! while the induced matching stays feasible. Two serial dictatorships add
//! one contract at a time. Every run is deterministic given its [`Schedule`].

mod cutoffs;
mod serial;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutoff::{induced_matching, CutoffProfile};
use crate::market::{CollegeId, Contract, Market, Matching, ResourceId, StudentId};

pub use cutoffs::{run_idc, run_imc, run_irc, run_iuc};
pub use serial::{run_csd, run_rsd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Irc,
    Imc,
    Idc,
    Iuc,
    Rsd,
    Csd,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 6] = [
        MechanismKind::Irc,
        MechanismKind::Imc,
        MechanismKind::Idc,
        MechanismKind::Iuc,
        MechanismKind::Rsd,
        MechanismKind::Csd,
    ];

    pub const CUTOFF: [MechanismKind; 4] = [
        MechanismKind::Irc,
        MechanismKind::Imc,
        MechanismKind::Idc,
        MechanismKind::Iuc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Irc => "irc",
            MechanismKind::Imc => "imc",
            MechanismKind::Idc => "idc",
            MechanismKind::Iuc => "iuc",
            MechanismKind::Rsd => "rsd",
            MechanismKind::Csd => "csd",
        }
    }

    pub fn is_cutoff(self) -> bool {
        Self::CUTOFF.contains(&self)
    }

    /// What the keys of a [`Schedule::Fixed`] order refer to.
    pub fn order_domain(self) -> OrderDomain {
        match self {
            MechanismKind::Irc | MechanismKind::Idc => OrderDomain::Entries,
            MechanismKind::Imc | MechanismKind::Iuc => OrderDomain::Colleges,
            MechanismKind::Rsd | MechanismKind::Csd => OrderDomain::Students,
        }
    }

    pub fn run(self, m: &Market, schedule: &Schedule) -> MechanismRun {
        match self {
            MechanismKind::Irc => run_irc(m, schedule),
            MechanismKind::Imc => run_imc(m, schedule),
            MechanismKind::Idc => run_idc(m, schedule),
            MechanismKind::Iuc => run_iuc(m, schedule),
            MechanismKind::Rsd => run_rsd(m, schedule),
            MechanismKind::Csd => run_csd(m, schedule),
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown mechanism `{0}` (expected one of irc, imc, idc, iuc, rsd, csd)")]
pub struct UnknownMechanism(pub String);

impl FromStr for MechanismKind {
    type Err = UnknownMechanism;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MechanismKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownMechanism(s.to_string()))
    }
}

/// Parses a comma-separated mechanism list such as `irc,imc,csd`.
pub fn parse_mechanisms(list: &str) -> Result<Vec<MechanismKind>, UnknownMechanism> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderDomain {
    /// `college * (R + 1) + resource`
    Entries,
    Colleges,
    Students,
}

/// Source of every random choice a mechanism makes.
///
/// `Fixed` lists keys in priority order: permutations become this order and
/// uniform picks become the earliest listed candidate. Keys not listed rank
/// after listed ones, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Seeded(u64),
    Fixed(Vec<usize>),
}

impl Schedule {
    pub fn colleges(order: &[CollegeId]) -> Self {
        Schedule::Fixed(order.iter().map(|c| c.index()).collect())
    }

    pub fn students(order: &[StudentId]) -> Self {
        Schedule::Fixed(order.iter().map(|s| s.index()).collect())
    }

    pub fn entries(m: &Market, order: &[(CollegeId, ResourceId)]) -> Self {
        Schedule::Fixed(order.iter().map(|&pair| m.pair_index(pair)).collect())
    }

    pub(crate) fn sequencer(&self) -> Sequencer {
        match self {
            Schedule::Seeded(seed) => Sequencer::Random(Box::new(ChaCha8Rng::seed_from_u64(*seed))),
            Schedule::Fixed(order) => Sequencer::Fixed(
                order
                    .iter()
                    .enumerate()
                    .map(|(pos, &key)| (key, pos))
                    .rev()
                    .collect(),
                order.len(),
            ),
        }
    }
}

pub(crate) enum Sequencer {
    Random(Box<ChaCha8Rng>),
    Fixed(HashMap<usize, usize>, usize),
}

impl Sequencer {
    fn position(positions: &HashMap<usize, usize>, listed: usize, key: usize) -> usize {
        positions.get(&key).copied().unwrap_or(listed + key)
    }

    pub(crate) fn permute(&mut self, keys: &mut [usize]) {
        match self {
            Sequencer::Random(rng) => keys.shuffle(rng),
            Sequencer::Fixed(pos, listed) => {
                keys.sort_by_key(|&k| Self::position(pos, *listed, k))
            }
        }
    }

    /// Index into `keys` of the chosen key. `keys` must be non-empty.
    pub(crate) fn pick(&mut self, keys: &[usize]) -> usize {
        match self {
            Sequencer::Random(rng) => rng.random_range(0..keys.len()),
            Sequencer::Fixed(pos, listed) => (0..keys.len())
                .min_by_key(|&i| Self::position(pos, *listed, keys[i]))
                .expect("non-empty candidate list"),
        }
    }

    pub(crate) fn is_random(&self) -> bool {
        matches!(self, Sequencer::Random(_))
    }
}

/// One accepted step of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    /// Entries of `college` raised by one, coupled empty entry included.
    Raise {
        college: CollegeId,
        resources: Vec<ResourceId>,
    },
    /// Contract added by a serial dictatorship.
    Assign(Contract),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTrace {
    pub mechanism: MechanismKind,
    pub schedule: Schedule,
    pub moves: Vec<Move>,
    pub matching: Matching,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("move {index} does not fit the market")]
    BadMove { index: usize },
    #[error("replayed matching differs from the recorded one")]
    Mismatch,
}

impl RunTrace {
    /// Rebuilds the final matching from the moves alone.
    pub fn replay(&self, m: &Market) -> Result<Matching, ReplayError> {
        let mut profile = CutoffProfile::zeros(m);
        let mut added = Vec::new();
        for (index, mv) in self.moves.iter().enumerate() {
            match mv {
                Move::Raise { college, resources } => {
                    let fits = college.index() < m.n_colleges()
                        && resources.iter().all(|r| {
                            r.index() < m.n_resource_ids() && !profile.is_maximal(*college, *r)
                        });
                    if !fits {
                        return Err(ReplayError::BadMove { index });
                    }
                    profile.raise(*college, resources);
                }
                Move::Assign(x) => added.push(*x),
            }
        }
        if self.mechanism.is_cutoff() {
            profile
                .check(m)
                .map_err(|_| ReplayError::BadMove { index: self.moves.len() })?;
            Ok(induced_matching(m, &profile))
        } else {
            Matching::from_contracts(m.n_students(), added)
                .map_err(|_| ReplayError::BadMove { index: self.moves.len() })
        }
    }

    /// Replays and compares against the recorded matching.
    pub fn verify(&self, m: &Market) -> Result<(), ReplayError> {
        if self.replay(m)? == self.matching {
            Ok(())
        } else {
            Err(ReplayError::Mismatch)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Output of a mechanism run.
#[derive(Clone, Debug)]
pub struct MechanismRun {
    pub matching: Matching,
    pub trace: RunTrace,
    /// Final cutoff profile, cutoff mechanisms only.
    pub profile: Option<CutoffProfile>,
}
