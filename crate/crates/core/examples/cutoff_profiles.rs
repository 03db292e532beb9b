//! Cutoff profiles: the matching a profile induces, recovering a profile
//! from a matching, and exhaustive search for optimal profiles.
//!
//! ```text
//! cargo run --example cutoff_profiles
//! ```

use rrc::oracle::{census, optimal_profiles, DEFAULT_BOUND};
use rrc::{cutoffs_of, fixtures, induced_matching, is_optimal, CutoffProfile};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = fixtures::get("two_des").expect("bundled").market;

    let zero = CutoffProfile::zeros(&m);
    println!("zero profile induces {}", induced_matching(&m, &zero));

    let optimal = optimal_profiles(&m, DEFAULT_BOUND)?;
    println!("{} optimal profile(s)", optimal.len());
    for k in &optimal {
        let mu = induced_matching(&m, k);
        let back = cutoffs_of(&m, &mu)?;
        println!(
            "  {:?} -> {mu}; recovered {:?} optimal={}",
            k.rows(),
            back.rows(),
            is_optimal(&m, &back)
        );
    }

    let des = census(&m)?;
    println!("direct-envy stable matchings:");
    for mu in des.direct_envy_stable() {
        println!("  {mu}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
