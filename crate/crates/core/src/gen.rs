//! Random market generators.
//!
//! Colleges and resources are indexed so that a higher index means a more
//! desirable option in the aligned regimes. Every draw comes from one
//! ChaCha stream seeded by the caller, so a `(GenConfig, seed)` pair fixes the
//! market byte for byte.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{CollegeId, CollegeSpec, Market, MarketDoc, Pair, ResourceId, ResourceSpec, StudentId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    #[default]
    None,
    StudentSemi,
    StudentFull,
    CollegeFull,
    StudentAndCollegeFull,
}

impl Alignment {
    pub const ALL: [Alignment; 5] = [
        Alignment::None,
        Alignment::StudentSemi,
        Alignment::StudentFull,
        Alignment::CollegeFull,
        Alignment::StudentAndCollegeFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Alignment::None => "none",
            Alignment::StudentSemi => "student_semi",
            Alignment::StudentFull => "student_full",
            Alignment::CollegeFull => "college_full",
            Alignment::StudentAndCollegeFull => "student_and_college_full",
        }
    }

    fn colleges_aligned(self) -> bool {
        matches!(self, Alignment::CollegeFull | Alignment::StudentAndCollegeFull)
    }
}

impl std::fmt::Display for Alignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Total supply relative to the number of students.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Supply {
    #[default]
    Balanced,
    Up,
    Down,
}

impl Supply {
    /// `n`, `2n` or `n / 2` rounded down.
    pub fn budget(self, n_students: u32) -> u32 {
        match self {
            Supply::Balanced => n_students,
            Supply::Up => 2 * n_students,
            Supply::Down => n_students / 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegionScheme {
    /// Every resource usable at every college.
    #[default]
    AllColleges,
    /// Each resource gets its own uniform subset of `size` colleges.
    RandomSubset { size: u32 },
    /// Colleges dealt at random into disjoint regions, one per resource.
    Partition,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotaSplit {
    /// Equal shares, remainder to the lowest-indexed colleges.
    #[default]
    Equal,
    /// Uniform composition into positive parts.
    Random,
}

/// Whether the resource budget covers all resources together or each one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceBudget {
    /// Quotas of all non-empty resources sum to the budget.
    #[default]
    Shared,
    /// Every non-empty resource gets the whole budget.
    Each,
}

/// How the semi-aligned sampler picks the next frontier contract.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemiSampler {
    /// College drawn with probability proportional to its quality `i + 1`.
    #[default]
    QualityWeighted,
    UniformFrontier,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Keep a prefix of uniform length in `0..=len`.
    #[default]
    UniformSuffix,
    /// Every contract acceptable.
    Off,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub students: u32,
    pub colleges: u32,
    /// Non-empty resources.
    pub resources: u32,
    #[serde(default)]
    pub alignment: Alignment,
    #[serde(default)]
    pub seats: Supply,
    #[serde(default)]
    pub resource_supply: Supply,
    #[serde(default)]
    pub resource_budget: ResourceBudget,
    #[serde(default)]
    pub regions: RegionScheme,
    #[serde(default)]
    pub quota_split: QuotaSplit,
    #[serde(default)]
    pub semi_sampler: SemiSampler,
    #[serde(default)]
    pub truncation: Truncation,
}

impl GenConfig {
    pub fn balanced(students: u32, colleges: u32, resources: u32, alignment: Alignment) -> Self {
        GenConfig {
            students,
            colleges,
            resources,
            alignment,
            seats: Supply::Balanced,
            resource_supply: Supply::Balanced,
            resource_budget: ResourceBudget::Shared,
            regions: RegionScheme::AllColleges,
            quota_split: QuotaSplit::Equal,
            semi_sampler: SemiSampler::QualityWeighted,
            truncation: Truncation::UniformSuffix,
        }
    }

    pub fn check(&self) -> Result<(), GenError> {
        if self.students == 0 || self.colleges == 0 {
            return Err(GenError::EmptySide);
        }
        let seats = self.seats.budget(self.students);
        if seats < self.colleges {
            return Err(GenError::SeatBudget {
                budget: seats,
                colleges: self.colleges,
            });
        }
        let units = self.resource_supply.budget(self.students);
        let needed = match self.resource_budget {
            ResourceBudget::Shared => self.resources,
            ResourceBudget::Each => self.resources.min(1),
        };
        if units < needed {
            return Err(GenError::ResourceBudget {
                budget: units,
                resources: self.resources,
            });
        }
        match self.regions {
            RegionScheme::RandomSubset { size } if size == 0 || size > self.colleges => {
                Err(GenError::RegionSize { size, colleges: self.colleges })
            }
            RegionScheme::Partition if self.resources > self.colleges => Err(GenError::Partition {
                resources: self.resources,
                colleges: self.colleges,
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("a market needs at least one student and one college")]
    EmptySide,
    #[error("seat budget {budget} cannot give each of {colleges} colleges a seat")]
    SeatBudget { budget: u32, colleges: u32 },
    #[error("resource budget {budget} cannot give each of {resources} resources a unit")]
    ResourceBudget { budget: u32, resources: u32 },
    #[error("region size {size} must lie in 1..={colleges}")]
    RegionSize { size: u32, colleges: u32 },
    #[error("cannot partition {colleges} colleges into {resources} non-empty regions")]
    Partition { resources: u32, colleges: u32 },
}

/// Mixes `master` and `index` into an independent 64-bit seed (SplitMix64).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn truncate<R: Rng>(rng: &mut R, mut list: Vec<Pair>, truncation: Truncation) -> Vec<Pair> {
    if truncation == Truncation::UniformSuffix {
        let keep = rng.random_range(0..=list.len());
        list.truncate(keep);
    }
    list
}

fn all_pairs(colleges: u32, resource_ids: u32) -> Vec<Pair> {
    (0..colleges)
        .flat_map(|c| (0..resource_ids).map(move |r| (CollegeId(c), ResourceId(r))))
        .collect()
}

/// Uniform order over all pairs with every `(c, r)` ahead of `(c, empty)`.
fn unaligned_order<R: Rng>(rng: &mut R, colleges: u32, resources: u32) -> Vec<Pair> {
    let mut order = all_pairs(colleges, resources + 1);
    order.shuffle(rng);
    let mut last = vec![0usize; colleges as usize];
    let mut empty_at = vec![0usize; colleges as usize];
    for (i, &(c, r)) in order.iter().enumerate() {
        last[c.index()] = i;
        if r.is_empty() {
            empty_at[c.index()] = i;
        }
    }
    for c in 0..colleges as usize {
        order.swap(empty_at[c], last[c]);
    }
    order
}

/// Student lists for the unaligned regime.
pub fn gen_preferences_none<R: Rng>(rng: &mut R, config: &GenConfig) -> Vec<Vec<Pair>> {
    (0..config.students)
        .map(|_| {
            let order = unaligned_order(rng, config.colleges, config.resources);
            truncate(rng, order, config.truncation)
        })
        .collect()
}

/// A linear extension of the college-by-resource grid, best contract first,
/// grown from a frontier of contracts whose better neighbours are all placed.
fn frontier_order<R: Rng>(rng: &mut R, colleges: u32, resources: u32, sampler: SemiSampler) -> Vec<Pair> {
    let ids = resources + 1;
    // placed better neighbours per cell; a cell joins the frontier once all are placed
    let mut placed_above = vec![0u8; (colleges * ids) as usize];
    let needed = |c: u32, r: u32| (c + 1 < colleges) as u8 + (r + 1 < ids) as u8;
    let mut frontier: Vec<(u32, u32)> = vec![(colleges - 1, ids - 1)];
    let mut out = Vec::with_capacity(placed_above.len());
    while !frontier.is_empty() {
        // at most one frontier cell per college, since each college is a chain
        let pick = match sampler {
            SemiSampler::UniformFrontier => rng.random_range(0..frontier.len()),
            SemiSampler::QualityWeighted => {
                let total: u32 = frontier.iter().map(|&(c, _)| c + 1).sum();
                let mut ticket = rng.random_range(0..total);
                frontier
                    .iter()
                    .position(|&(c, _)| {
                        if ticket < c + 1 {
                            true
                        } else {
                            ticket -= c + 1;
                            false
                        }
                    })
                    .expect("ticket falls inside the total")
            }
        };
        let (c, r) = frontier.swap_remove(pick);
        out.push((CollegeId(c), ResourceId(r)));
        for (lc, lr) in [(c.wrapping_sub(1), r), (c, r.wrapping_sub(1))] {
            if lc < colleges && lr < ids {
                let cell = (lc * ids + lr) as usize;
                placed_above[cell] += 1;
                if placed_above[cell] == needed(lc, lr) {
                    frontier.push((lc, lr));
                }
            }
        }
    }
    out
}

/// Student lists for the semi-aligned regime.
pub fn gen_preferences_student_semi<R: Rng>(rng: &mut R, config: &GenConfig) -> Vec<Vec<Pair>> {
    (0..config.students)
        .map(|_| {
            let order = frontier_order(rng, config.colleges, config.resources, config.semi_sampler);
            truncate(rng, order, config.truncation)
        })
        .collect()
}

/// Uniform linear extension of the grid, best contract first.
///
/// Linear extensions of a product of two chains are standard Young tableaux
/// of rectangular shape; the hook walk samples those uniformly.
fn uniform_grid_extension<R: Rng>(rng: &mut R, colleges: u32, resources: u32) -> Vec<Pair> {
    let rows = colleges as usize;
    let cols = resources as usize + 1;
    // row i = college (colleges - 1 - i), column j = resource (cols - 1 - j)
    let mut lengths = vec![cols; rows];
    let mut label = vec![vec![0usize; cols]; rows];
    for n in (0..rows * cols).rev() {
        let cells: Vec<(usize, usize)> = (0..rows)
            .flat_map(|i| (0..lengths[i]).map(move |j| (i, j)))
            .collect();
        let (mut i, mut j) = cells[rng.random_range(0..cells.len())];
        loop {
            let arm = lengths[i] - j - 1;
            let leg = (i + 1..rows).take_while(|&k| lengths[k] > j).count();
            if arm + leg == 0 {
                break;
            }
            let step = rng.random_range(0..arm + leg);
            if step < arm {
                j += step + 1;
            } else {
                i += step - arm + 1;
            }
        }
        label[i][j] = n;
        lengths[i] -= 1;
    }
    let mut out = vec![(CollegeId(0), ResourceId(0)); rows * cols];
    for (i, row) in label.iter().enumerate() {
        for (j, &n) in row.iter().enumerate() {
            out[n] = (CollegeId((rows - 1 - i) as u32), ResourceId((cols - 1 - j) as u32));
        }
    }
    out
}

/// Student lists for the fully aligned regimes: `(c + 1, r)` above `(c, r)`
/// and `(c, r + 1)` above `(c, r)`, cross comparisons uniform.
pub fn gen_preferences_full<R: Rng>(rng: &mut R, config: &GenConfig) -> Vec<Vec<Pair>> {
    (0..config.students)
        .map(|_| {
            let order = uniform_grid_extension(rng, config.colleges, config.resources);
            truncate(rng, order, config.truncation)
        })
        .collect()
}

/// College priorities: a shared order with the highest-indexed student first
/// when colleges are aligned, independent uniform orders otherwise.
pub fn gen_priorities<R: Rng>(rng: &mut R, config: &GenConfig) -> Vec<Vec<StudentId>> {
    let common: Vec<StudentId> = (0..config.students).rev().map(StudentId).collect();
    (0..config.colleges)
        .map(|_| {
            let mut order = common.clone();
            if !config.alignment.colleges_aligned() {
                order.shuffle(rng);
            }
            order
        })
        .collect()
}

fn split<R: Rng>(rng: &mut R, budget: u32, parts: u32, scheme: QuotaSplit) -> Vec<u32> {
    match scheme {
        QuotaSplit::Equal => (0..parts)
            .map(|i| budget / parts + u32::from(i < budget % parts))
            .collect(),
        QuotaSplit::Random => {
            let mut cuts: Vec<u32> = rand::seq::index::sample(rng, (budget - 1) as usize, (parts - 1) as usize)
                .into_iter()
                .map(|i| i as u32 + 1)
                .collect();
            cuts.sort_unstable();
            cuts.push(budget);
            let mut prev = 0;
            cuts.into_iter()
                .map(|cut| {
                    let part = cut - prev;
                    prev = cut;
                    part
                })
                .collect()
        }
    }
}

/// College specs plus resource specs with their regions.
pub fn gen_quotas<R: Rng>(rng: &mut R, config: &GenConfig) -> Result<(Vec<CollegeSpec>, Vec<ResourceSpec>), GenError> {
    config.check()?;
    let colleges = split(rng, config.seats.budget(config.students), config.colleges, config.quota_split)
        .into_iter()
        .map(|quota| CollegeSpec { quota })
        .collect();
    let units = config.resource_supply.budget(config.students);
    let quotas = match config.resource_budget {
        ResourceBudget::Shared if config.resources > 0 => split(rng, units, config.resources, config.quota_split),
        ResourceBudget::Shared => Vec::new(),
        ResourceBudget::Each => vec![units; config.resources as usize],
    };
    let all: Vec<CollegeId> = (0..config.colleges).map(CollegeId).collect();
    let regions: Vec<Vec<CollegeId>> = match config.regions {
        RegionScheme::AllColleges => vec![all; config.resources as usize],
        RegionScheme::RandomSubset { size } => (0..config.resources)
            .map(|_| {
                let mut region: Vec<CollegeId> = all.choose_multiple(rng, size as usize).copied().collect();
                region.sort_unstable();
                region
            })
            .collect(),
        RegionScheme::Partition if config.resources == 0 => Vec::new(),
        RegionScheme::Partition => {
            let mut shuffled = all;
            shuffled.shuffle(rng);
            let mut regions = vec![Vec::new(); config.resources as usize];
            for (i, c) in shuffled.into_iter().enumerate() {
                regions[i % config.resources as usize].push(c);
            }
            for region in &mut regions {
                region.sort_unstable();
            }
            regions
        }
    };
    let resources = regions
        .into_iter()
        .zip(quotas)
        .map(|(region, quota)| ResourceSpec { quota, region })
        .collect();
    Ok((colleges, resources))
}

/// Builds one market. Draw order: quotas and regions, priorities, lists.
pub fn generate_market(config: &GenConfig, seed: u64) -> Result<Market, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (colleges, resources) = gen_quotas(&mut rng, config)?;
    let priorities = gen_priorities(&mut rng, config);
    let preferences = match config.alignment {
        Alignment::None | Alignment::CollegeFull => gen_preferences_none(&mut rng, config),
        Alignment::StudentSemi => gen_preferences_student_semi(&mut rng, config),
        Alignment::StudentFull | Alignment::StudentAndCollegeFull => gen_preferences_full(&mut rng, config),
    };
    let doc = MarketDoc {
        students: config.students,
        colleges,
        resources,
        priorities,
        preferences,
    };
    Ok(Market::from_doc(&doc).expect("generated markets are structurally valid"))
}
