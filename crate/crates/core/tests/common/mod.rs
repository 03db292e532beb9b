//! Random market builders shared by the integration tests.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rrc::gen::{generate_market, Alignment, GenConfig, QuotaSplit, RegionScheme, Truncation};
use rrc::market::{CollegeSpec, ResourceSpec};
use rrc::{CollegeId, Market, MarketDoc, ResourceId, StudentId};

/// Arbitrary valid market: any subsets and orders, warnings allowed.
pub fn free_market(seed: u64, students: u32, colleges: u32, resources: u32) -> Market {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all_colleges: Vec<CollegeId> = (0..colleges).map(CollegeId).collect();
    let resource_specs = (0..resources)
        .map(|_| {
            let size = rng.random_range(1..=colleges as usize);
            let mut region: Vec<CollegeId> = all_colleges.choose_multiple(&mut rng, size).copied().collect();
            region.sort();
            ResourceSpec { quota: rng.random_range(1..=2), region }
        })
        .collect();
    let priorities = (0..colleges)
        .map(|_| {
            let mut order: Vec<StudentId> = (0..students).map(StudentId).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect();
    let pairs: Vec<(CollegeId, ResourceId)> = all_colleges
        .iter()
        .flat_map(|&c| (0..=resources).map(move |r| (c, ResourceId(r))))
        .collect();
    let preferences = (0..students)
        .map(|_| {
            let mut list: Vec<_> = pairs.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
            list.shuffle(&mut rng);
            list
        })
        .collect();
    let doc = MarketDoc {
        students,
        colleges: (0..colleges).map(|_| CollegeSpec { quota: rng.random_range(1..=2) }).collect(),
        resources: resource_specs,
        priorities,
        preferences,
    };
    Market::from_doc(&doc).expect("constructed valid")
}

pub fn generated_market(seed: u64, students: u32, colleges: u32, resources: u32, variant: u8) -> Option<Market> {
    let alignment = Alignment::ALL[variant as usize % 5];
    let mut config = GenConfig::balanced(students, colleges, resources, alignment);
    config.regions = match variant / 5 % 3 {
        0 => RegionScheme::AllColleges,
        1 => RegionScheme::RandomSubset { size: 1 },
        _ => RegionScheme::Partition,
    };
    if variant / 15 % 2 == 1 {
        config.quota_split = QuotaSplit::Random;
        config.truncation = Truncation::Off;
    }
    config.check().ok()?;
    Some(generate_market(&config, seed).expect("checked config"))
}
