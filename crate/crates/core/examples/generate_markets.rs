//! Draws one market per alignment regime and summarises its preference
//! lists.
//!
//! ```text
//! cargo run --example generate_markets
//! ```

use rrc::gen::{derive_seed, generate_market, Alignment, GenConfig};
use rrc::StudentId;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let master = 2024;
    for (i, alignment) in Alignment::ALL.into_iter().enumerate() {
        let config = GenConfig::balanced(12, 3, 2, alignment);
        let m = generate_market(&config, derive_seed(master, i as u64))?;
        let lengths: Vec<usize> = m.students().map(|s| m.preferences(s).len()).collect();
        let quotas: Vec<u32> = m.colleges().map(|c| m.college_quota(c)).collect();
        let resources: Vec<u32> = m.resources().filter(|r| !r.is_empty()).map(|r| m.resource_quota(r)).collect();
        println!("[{alignment}] seats {quotas:?} resources {resources:?} warnings {}", m.warnings().len());
        println!("  list lengths {lengths:?}");
        println!("  student 0 top: {:?}", &m.preferences(StudentId(0))[..m.preferences(StudentId(0)).len().min(4)]);
        let tops: Vec<StudentId> = m.colleges().map(|c| m.priority(c)[0]).collect();
        println!("  top student per college {tops:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
