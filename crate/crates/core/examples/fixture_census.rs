//! Recomputes the documented properties of every bundled fixture market and
//! prints the full stability census of the smallest one.
//!
//! ```text
//! cargo run --example fixture_census
//! ```

use rrc::fixtures;
use rrc::oracle::census;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let no_stable = fixtures::get("no_stable").expect("bundled");
    print!("{}", census(&no_stable.market)?.to_text());

    for fixture in fixtures::all() {
        println!("\n[{}] {}", fixture.name, fixture.summary);
        for check in fixture.verify()? {
            println!("  {check}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
