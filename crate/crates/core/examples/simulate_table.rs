//! End-to-end experiment: generate replica markets, run mechanisms and
//! aggregate the blocking table, all inside a scratch directory.
//!
//! ```text
//! cargo run --release --example simulate_table
//! ```

use rrc::gen::{Alignment, GenConfig};
use rrc::sim::{cmd_run, cmd_table, generate_into, table_text, ExperimentConfig, TABLE_CSV_FILE};
use rrc::MechanismKind;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig {
        name: "example".into(),
        seed: 99,
        replicas: 4,
        seeds_per_market: 2,
        mechanisms: MechanismKind::ALL.to_vec(),
        alignments: vec![Alignment::None, Alignment::CollegeFull],
        market: GenConfig::balanced(24, 4, 2, Alignment::None),
    };
    print!("{}", config.to_toml());

    let dir = tempfile::tempdir()?;
    let manifest = generate_into(&config, dir.path(), 2)?;
    println!("generated {} markets", manifest.markets.len());
    let results = cmd_run(dir.path(), None, 2, false)?;
    println!("{} audited runs", results.len());
    let rows = cmd_table(dir.path())?;
    print!("{}", table_text(&rows));
    println!("{}", std::fs::read_to_string(dir.path().join(TABLE_CSV_FILE))?.lines().next().unwrap_or(""));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
