//! Runs a JSON-configured sweep and prints the CSV.
//!
//! ```text
//! cargo run --release --example energy_sweep -- crates/core/examples/configs/point_sweep.json
//! ```

use coupled_strings::sweep::{sweep, SweepConfig};

fn main() -> coupled_strings::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/point_sweep.json").into());
    let config = SweepConfig::load(path.as_ref())?;
    let report = sweep(&config)?;
    print!("{}", report.csv);
    eprint!("{}", report.summary);
    Ok(())
}
