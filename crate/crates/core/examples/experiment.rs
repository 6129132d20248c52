//! Runs a batch experiment from a JSON config (default `examples/configs/rotated3.json`),
//! writing the CSV, metadata and artifacts into a directory.

use std::path::PathBuf;

use fpn::experiment::{rows_to_csv, run_experiment, ExperimentConfig};

fn main() -> fpn::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/rotated3.json"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("fpn-experiment"));
    let text = std::fs::read_to_string(&config).map_err(|e| fpn::Error::Io { path: config.clone(), source: e })?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    cfg.csv = Some(out.join("ber.csv"));
    cfg.metadata = Some(out.join("metadata.json"));
    cfg.artifacts = Some(out.join("artifacts"));
    let result = run_experiment(&cfg)?;
    print!("{}", rows_to_csv(&result.rows));
    println!("outputs in {}", out.display());
    Ok(())
}
