//! Builds a market by hand, validates it, and checks feasibility and
//! individual rationality of a few matchings.
//!
//! ```text
//! cargo run --example market_basics
//! ```

use rrc::market::{validate_market, CollegeSpec, ResourceSpec};
use rrc::{is_feasible, is_individually_rational, CollegeId, Contract, Market, MarketDoc, Matching, ResourceId, StudentId};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (c0, c1) = (CollegeId(0), CollegeId(1));
    let (r0, r1) = (ResourceId::EMPTY, ResourceId(1));
    let doc = MarketDoc {
        students: 3,
        colleges: vec![CollegeSpec { quota: 2 }, CollegeSpec { quota: 1 }],
        // One unit of r1, usable at either college.
        resources: vec![ResourceSpec { quota: 1, region: vec![c0, c1] }],
        priorities: vec![
            vec![StudentId(0), StudentId(1), StudentId(2)],
            vec![StudentId(2), StudentId(0), StudentId(1)],
        ],
        preferences: vec![
            vec![(c0, r1), (c0, r0), (c1, r0)],
            vec![(c0, r1), (c1, r1)],
            vec![(c1, r0), (c0, r1), (c0, r0)],
        ],
    };

    // The second student accepts seats only together with r1: warnings, not
    // errors. Display names are 1-based.
    for issue in validate_market(&doc) {
        println!("{:?}: {issue}", issue.severity());
    }
    let m = Market::from_doc(&doc)?;
    println!(
        "{} students, {} colleges, {} non-empty resource(s)",
        m.n_students(),
        m.n_colleges(),
        m.n_resources()
    );

    let candidates = [
        vec![Contract::new(0, 0, 1), Contract::new(2, 1, 0)],
        vec![Contract::new(0, 0, 1), Contract::new(1, 0, 1)],
        vec![Contract::new(1, 1, 0)],
    ];
    for contracts in candidates {
        let mu = Matching::from_contracts(m.n_students(), contracts)?;
        println!(
            "{mu}: feasible={} individually_rational={}",
            is_feasible(&m, &mu),
            is_individually_rational(&m, &mu)
        );
    }

    let mut broken = doc.clone();
    broken.colleges[1].quota = 0;
    match Market::from_doc(&broken) {
        Ok(_) => println!("unexpectedly valid"),
        Err(err) => println!("rejected: {err}"),
    }
    println!("round trip: {}", Market::from_json(&m.to_json())?.to_json() == m.to_json());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
