//! `shadowlink estimate`: fit pathloss parameters from binned samples and
//! export the fit, a table-style summary row, and the residual series.

use std::fs;
use std::path::Path;

use shadowlink::correlate;
use shadowlink::estimate::{self, FitResult, FittedParams};
use shadowlink::ingest::{self, BinnedSample, Condition, LinkConfig};
use shadowlink::PathlossModel;

use crate::out::{sig6, write_atomic, ManifestBuilder};
use crate::{
    CliError, CliResult, ConditionArg, FormatArg, GeomArgs, MethodArg, EXIT_NONCONVERGED,
};

pub fn run(
    samples_path: &Path,
    condition: ConditionArg,
    method: MethodArg,
    config: Option<&Path>,
    geom_args: &GeomArgs,
    format: FormatArg,
    out: &Path,
) -> CliResult {
    let file = fs::File::open(samples_path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", samples_path.display())))?;
    let all = ingest::read_binned_csv(file).map_err(CliError::parse)?;
    let seg = ingest::segment_by_condition(&all);
    let (samples, cond) = match condition {
        ConditionArg::Los => (seg.los, Condition::Los),
        ConditionArg::Olos => (seg.olos, Condition::Olos),
    };
    if samples.is_empty() {
        return Err(CliError::parse(format!(
            "no {cond} samples in {}",
            samples_path.display()
        )));
    }

    let link_cfg: Option<LinkConfig> = match config {
        Some(p) => {
            let body = fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
            Some(
                serde_json::from_str(&body)
                    .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?,
            )
        }
        None => None,
    };
    let censor_bound = censor_bound_for(&samples, link_cfg.as_ref());
    let geom = geom_args.geometry();

    let mut extra_warnings: Vec<String> = Vec::new();
    let fit: FitResult = match (method, condition) {
        (MethodArg::Ols, _) => {
            let censored = samples.iter().filter(|s| s.censored).count();
            if censored > 0 {
                extra_warnings.push(format!(
                    "OLS ignores the {censored} censored samples; the slope will be biased low"
                ));
            }
            estimate::fit_single_slope_ols(&samples).map_err(CliError::parse)?
        }
        (MethodArg::Ml, ConditionArg::Olos) => {
            estimate::fit_single_slope_ml(&samples, censor_bound).map_err(CliError::parse)?
        }
        (MethodArg::Ml, ConditionArg::Los) => {
            estimate::fit_two_ray_ml(&samples, &geom, censor_bound).map_err(CliError::parse)?
        }
    };

    // Outputs: fit + model JSON, residual export, manifest.
    fs::create_dir_all(out)?;
    let model = match fit.params {
        FittedParams::SingleSlope(p) => PathlossModel::SingleSlope(p),
        FittedParams::TwoRay(p) => PathlossModel::TwoRay(p),
    };

    #[derive(serde::Serialize)]
    struct FitDocument<'a> {
        condition: String,
        method: &'a str,
        censor_bound_db: f64,
        #[serde(flatten)]
        fit: &'a FitResult,
        extra_warnings: &'a [String],
    }
    let doc = FitDocument {
        condition: cond.to_string(),
        method: match method {
            MethodArg::Ols => "ols",
            MethodArg::Ml => "ml",
        },
        censor_bound_db: censor_bound,
        fit: &fit,
        extra_warnings: &extra_warnings,
    };
    let mut fit_json = serde_json::to_string_pretty(&doc).expect("fit serializes");
    fit_json.push('\n');
    write_atomic(&out.join("fit.json"), fit_json.as_bytes())?;

    let mut model_json = serde_json::to_string_pretty(&model).expect("model serializes");
    model_json.push('\n');
    write_atomic(&out.join("model.json"), model_json.as_bytes())?;

    let residuals = correlate::residuals(&samples, &model, &geom).map_err(CliError::parse)?;
    let mut resid_csv = String::from("traveled_m,residual_db\n");
    for i in 0..residuals.len() {
        resid_csv.push_str(&format!(
            "{},{}\n",
            sig6(residuals.traveled_m[i]),
            sig6(residuals.residual_db[i])
        ));
    }
    write_atomic(&out.join("residuals.csv"), resid_csv.as_bytes())?;

    let mut manifest = ManifestBuilder::new("estimate", 0);
    manifest
        .arg("condition", cond)
        .arg("method", doc.method)
        .arg("censor_bound", censor_bound)
        .arg("h_tx", geom.h_tx_m)
        .arg("h_rx", geom.h_rx_m);
    manifest.input_file(samples_path)?;
    if let Some(p) = config {
        manifest.input_file(p)?;
    }
    manifest
        .output("fit.json")
        .output("model.json")
        .output("residuals.csv");
    manifest.write(out)?;

    match format {
        FormatArg::Csv => print_row(&fit, cond),
        FormatArg::Json => println!("{}", fit_json.trim_end()),
    }
    for w in fit.warnings.iter().chain(extra_warnings.iter()) {
        eprintln!("warning: {w}");
    }

    if !fit.converged {
        return Err(CliError {
            code: EXIT_NONCONVERGED,
            message: "fit did not converge (results written, flagged)".into(),
        });
    }
    Ok(())
}

/// Censoring bound in gain domain: from the link config when given, else
/// recovered from censored samples (they carry the bound), else the default
/// compensation.
fn censor_bound_for(samples: &[BinnedSample], cfg: Option<&LinkConfig>) -> f64 {
    if let Some(cfg) = cfg {
        return ingest::censor_threshold_gain(cfg);
    }
    samples
        .iter()
        .filter(|s| s.censored)
        .map(|s| s.gain_db)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(ingest::censor_threshold_gain(&LinkConfig::default()))
}

/// One summary row in the layout of the bundled parameter tables.
fn print_row(fit: &FitResult, cond: Condition) {
    let q = &fit.quality;
    let quality = if q.pass() { "pass" } else { "fail" };
    match &fit.params {
        FittedParams::TwoRay(p) => println!(
            "{} two-ray | m={} m_c={} d_min={} d_max={} | g_los_db={} gain_ratio_db={} delta_phi_deg={} sigma_db={} | quality: {}",
            cond,
            fit.m,
            fit.m_c,
            sig6(q.d_min_m),
            sig6(q.d_max_m),
            sig6(p.g_los_db),
            sig6(p.gain_ratio_db),
            sig6(p.delta_phi_deg),
            sig6(p.sigma_db),
            quality
        ),
        FittedParams::SingleSlope(p) => println!(
            "{} single-slope | m={} m_c={} d_min={} d_max={} | pl_d0_db={} alpha={} sigma_db={} | quality: {}",
            cond,
            fit.m,
            fit.m_c,
            sig6(q.d_min_m),
            sig6(q.d_max_m),
            sig6(p.pl_d0_db),
            sig6(p.alpha),
            sig6(p.sigma_db),
            quality
        ),
    }
}
