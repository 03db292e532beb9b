//! Without non-empty resources every cutoff mechanism reduces to
//! college-proposing deferred acceptance.
//!
//! ```text
//! cargo run --example deferred_acceptance
//! ```

use rrc::gen::{generate_market, Alignment, GenConfig};
use rrc::oracle::deferred_acceptance;
use rrc::{audit, MechanismKind, Schedule};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = GenConfig::balanced(15, 4, 0, Alignment::None);
    for seed in 0..3 {
        let m = generate_market(&config, seed)?;
        let da = deferred_acceptance(&m);
        println!("market {seed}: deferred acceptance {da}");
        for kind in MechanismKind::CUTOFF {
            let out = kind.run(&m, &Schedule::Seeded(seed + 100)).matching;
            let stable = audit(&m, &out)?.flags.stable;
            println!("  {kind}: same={} stable={stable}", out == da);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
