//! Searches for profitable misreports: cutoff mechanisms can be gamed,
//! random serial dictatorship cannot.
//!
//! ```text
//! cargo run --release --example strategyproofness
//! ```

use rrc::fixtures::{self, college_first_order};
use rrc::oracle::{strategyproofness_probe, ProbeScope, DEFAULT_BOUND};
use rrc::{MechanismKind, ResourceId, StudentId};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = fixtures::get("truncation_gain").expect("bundled").market;
    for kind in MechanismKind::CUTOFF {
        let scope = ProbeScope::Pointwise(college_first_order(&m, kind, ResourceId::EMPTY));
        match strategyproofness_probe(&m, kind, StudentId(0), &scope, DEFAULT_BOUND)? {
            Some(cx) => println!("{kind}: report {:?} beats truth ({:?} vs {:?})", cx.report, cx.misreport, cx.truthful),
            None => println!("{kind}: no profitable report"),
        }
    }
    for s in m.students() {
        let found = strategyproofness_probe(&m, MechanismKind::Rsd, s, &ProbeScope::AllOrders, DEFAULT_BOUND)?;
        println!("rsd, {s}: {}", if found.is_some() { "manipulable" } else { "no profitable report" });
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
