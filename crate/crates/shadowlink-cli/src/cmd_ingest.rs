//! `shadowlink ingest`: packet log CSV in, binned-sample CSV out.

use std::fs;
use std::path::Path;

use shadowlink::ingest::{self, BinningOptions, LinkConfig};

use crate::out::{sig6, write_atomic, ManifestBuilder};
use crate::{CliError, CliResult};

pub fn run(log: &Path, config: Option<&Path>, out: &Path, bin_seconds: f64) -> CliResult {
    let cfg: LinkConfig = match config {
        Some(p) => {
            let body = fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&body)
                .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
        }
        None => LinkConfig::default(),
    };
    cfg.validate().map_err(CliError::config)?;

    let file = fs::File::open(log)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", log.display())))?;
    let records = ingest::parse_log(file).map_err(CliError::parse)?;
    let opts = BinningOptions {
        bin_s: bin_seconds,
        ..Default::default()
    };
    let bins = ingest::bin_samples(&records, &cfg, &opts).map_err(CliError::parse)?;

    fs::create_dir_all(out)?;
    let mut csv_bytes = Vec::new();
    ingest::write_binned_csv(&bins, sig6, &mut csv_bytes)?;
    write_atomic(&out.join("bins.csv"), &csv_bytes)?;

    let mut manifest = ManifestBuilder::new("ingest", 0);
    manifest.arg("bin_seconds", bin_seconds);
    manifest.input_file(log)?;
    if let Some(p) = config {
        manifest.input_file(p)?;
    }
    manifest.output("bins.csv");
    manifest.write(out)?;

    let censored = bins.iter().filter(|b| b.censored).count();
    let interpolated = records
        .iter()
        .filter(|r| r.tx_pos.is_none() || r.rx_pos.is_none())
        .count();
    println!(
        "ingest: {} packets -> {} bins ({} censored), censor bound {} dB",
        records.len(),
        bins.len(),
        censored,
        sig6(ingest::censor_threshold_gain(&cfg))
    );
    if interpolated > 0 {
        println!(
            "note: distances for {interpolated} packets without GPS rows were interpolated from neighbors"
        );
    }
    Ok(())
}
