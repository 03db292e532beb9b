//! Every example doubles as a smoke test.

#[path = "../examples/audit_witnesses.rs"]
mod audit_witnesses;

#[path = "../examples/cutoff_profiles.rs"]
mod cutoff_profiles;

#[path = "../examples/deferred_acceptance.rs"]
mod deferred_acceptance;

#[path = "../examples/fixture_census.rs"]
mod fixture_census;

#[path = "../examples/generate_markets.rs"]
mod generate_markets;

#[path = "../examples/market_basics.rs"]
mod market_basics;

#[path = "../examples/run_mechanisms.rs"]
mod run_mechanisms;

#[path = "../examples/simulate_table.rs"]
mod simulate_table;

#[path = "../examples/strategyproofness.rs"]
mod strategyproofness;

#[test]
fn example_audit_witnesses() {
    audit_witnesses::run_example().expect("example runs");
}

#[test]
fn example_cutoff_profiles() {
    cutoff_profiles::run_example().expect("example runs");
}

#[test]
fn example_deferred_acceptance() {
    deferred_acceptance::run_example().expect("example runs");
}

#[test]
fn example_fixture_census() {
    fixture_census::run_example().expect("example runs");
}

#[test]
fn example_generate_markets() {
    generate_markets::run_example().expect("example runs");
}

#[test]
fn example_market_basics() {
    market_basics::run_example().expect("example runs");
}

#[test]
fn example_run_mechanisms() {
    run_mechanisms::run_example().expect("example runs");
}

#[test]
fn example_simulate_table() {
    simulate_table::run_example().expect("example runs");
}

#[test]
fn example_strategyproofness() {
    strategyproofness::run_example().expect("example runs");
}
