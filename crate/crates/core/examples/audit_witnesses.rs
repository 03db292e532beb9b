//! Classifies every blocking contract of a matching and prints the witnesses.
//!
//! ```text
//! cargo run --example audit_witnesses
//! ```

use rrc::{audit, fixtures, Contract, Matching};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = fixtures::get("two_des").expect("bundled").market;
    let mu = Matching::from_contracts(
        m.n_students(),
        [Contract::new(0, 2, 0), Contract::new(1, 1, 1), Contract::new(2, 0, 0)],
    )?;
    let report = audit(&m, &mu)?;
    println!("matching {mu}");
    println!("counts {:?}", report.counts);
    println!("flags {:?}", report.flags);
    println!("{}", report.to_json(true));

    // The same audit on a matching that leaves everyone out.
    let empty = Matching::empty(m.n_students());
    let report = audit(&m, &empty)?;
    println!("empty matching: total={} non_wasteful={}", report.counts.total, report.flags.non_wasteful);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
