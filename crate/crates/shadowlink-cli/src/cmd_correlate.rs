//! `shadowlink correlate`: autocorrelation of one residual series or
//! cross-correlation of two aligned series, with model fits.

use std::fs;
use std::path::{Path, PathBuf};

use shadowlink::correlate::{
    self, AutocorrFit, CorrelateError, LinearCrossModel, ResidualSeries, CROSS_FIT_RANGE_M,
};
use shadowlink::ingest::Condition;
use shadowlink::PathlossModel;

use crate::out::{sig6, write_atomic, ManifestBuilder};
use crate::{CliError, CliResult, FormatArg, GeomArgs, ModeArg, EXIT_UNDEFINED_CORR};

pub struct Args {
    pub mode: ModeArg,
    pub residuals: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub series_b: Option<PathBuf>,
    pub separation: Option<PathBuf>,
    pub bin_m: f64,
    pub max_lag_m: f64,
    pub geom: GeomArgs,
    pub format: FormatArg,
    pub out: PathBuf,
}

pub fn run(args: Args) -> CliResult {
    match args.mode {
        ModeArg::Auto => run_auto(&args),
        ModeArg::Cross => run_cross(&args),
    }
}

fn map_corr_err(e: CorrelateError) -> CliError {
    match e {
        CorrelateError::ZeroVariance => CliError {
            code: EXIT_UNDEFINED_CORR,
            message: e.to_string(),
        },
        other => CliError::parse(other),
    }
}

fn load_residual_csv(path: &Path) -> Result<ResidualSeries, CliError> {
    let body = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = body.lines().enumerate();
    match lines.next() {
        Some((_, "traveled_m,residual_db")) => {}
        Some((_, other)) => {
            return Err(CliError::parse(format!(
                "{}: expected header `traveled_m,residual_db`, got `{other}`",
                path.display()
            )))
        }
        None => return Err(CliError::parse(format!("{}: empty file", path.display()))),
    }
    let mut traveled = Vec::new();
    let mut resid = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let t: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CliError::parse(format!("{}:{}: bad traveled_m", path.display(), i + 1)))?;
        let r: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CliError::parse(format!("{}:{}: bad residual_db", path.display(), i + 1)))?;
        traveled.push(t);
        resid.push(r);
    }
    ResidualSeries::new(traveled, resid, Condition::Los).map_err(CliError::parse)
}

fn load_residuals_arg(args: &Args) -> Result<ResidualSeries, CliError> {
    if let Some(p) = &args.residuals {
        return load_residual_csv(p);
    }
    // Raw samples plus a model id.
    let (samples_path, model_path) = match (&args.samples, &args.model) {
        (Some(s), Some(m)) => (s, m),
        _ => {
            return Err(CliError::config(
                "provide --residuals, or --samples together with --model",
            ))
        }
    };
    let file = fs::File::open(samples_path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", samples_path.display())))?;
    let samples = shadowlink::ingest::read_binned_csv(file).map_err(CliError::parse)?;
    let body = fs::read_to_string(model_path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", model_path.display())))?;
    let model: PathlossModel = serde_json::from_str(&body)
        .map_err(|e| CliError::config(format!("{}: {e}", model_path.display())))?;
    correlate::residuals(&samples, &model, &args.geom.geometry()).map_err(map_corr_err)
}

fn run_auto(args: &Args) -> CliResult {
    let series = load_residuals_arg(args)?;
    let ac = correlate::autocorrelation_windowed(&series, args.bin_m, args.max_lag_m)
        .map_err(map_corr_err)?;

    let single = correlate::fit_single_exp(&ac, 100.0f64.min(args.max_lag_m));
    let double = correlate::fit_double_exp(&ac, 500.0f64.min(args.max_lag_m));

    fs::create_dir_all(&args.out)?;
    let mut csv = Vec::new();
    ac.write_csv(sig6, &mut csv)?;
    write_atomic(&args.out.join("autocorr.csv"), &csv)?;

    #[derive(serde::Serialize)]
    struct Fits {
        sigma_hat_db: f64,
        single_exp: Option<AutocorrFit>,
        double_exp: Option<AutocorrFit>,
    }
    let fits = Fits {
        sigma_hat_db: ac.sigma_hat_db,
        single_exp: single.as_ref().ok().cloned(),
        double_exp: double.as_ref().ok().cloned(),
    };
    let mut body = serde_json::to_string_pretty(&fits).expect("fits serialize");
    body.push('\n');
    write_atomic(&args.out.join("autocorr_fit.json"), body.as_bytes())?;

    let mut manifest = ManifestBuilder::new("correlate-auto", 0);
    manifest.arg("bin_m", args.bin_m).arg("max_lag_m", args.max_lag_m);
    for p in [&args.residuals, &args.samples, &args.model].into_iter().flatten() {
        manifest.input_file(p)?;
    }
    manifest.output("autocorr.csv").output("autocorr_fit.json");
    manifest.write(&args.out)?;

    if matches!(args.format, FormatArg::Json) {
        println!("{}", body.trim_end());
        return Ok(());
    }
    println!(
        "autocorrelation: {} bins, sigma_hat={} dB",
        ac.bins.len(),
        sig6(ac.sigma_hat_db)
    );
    match &single {
        Ok(fit) => {
            let d_c = fit.model.decorrelation_distance_m();
            println!(
                "single-exp fit (0..{} m): d_c={} m, rmse={}{}",
                sig6(fit.fit_range_m),
                sig6(d_c),
                sig6(fit.rmse),
                if fit.warnings.is_empty() { "" } else { " [flagged]" }
            );
            for w in &fit.warnings {
                eprintln!("warning: {w}");
            }
        }
        Err(e) => eprintln!("single-exp fit unavailable: {e}"),
    }
    match &double {
        Ok(fit) => {
            println!(
                "double-exp fit (0..{} m): {:?}, rmse={}",
                sig6(fit.fit_range_m),
                fit.model,
                sig6(fit.rmse)
            );
            for w in &fit.warnings {
                eprintln!("warning: {w}");
            }
        }
        Err(e) => eprintln!("double-exp fit unavailable: {e}"),
    }

    Ok(())
}

fn run_cross(args: &Args) -> CliResult {
    let a = load_residuals_arg(args)?;
    let b_path = args
        .series_b
        .as_ref()
        .ok_or_else(|| CliError::config("cross mode requires --series-b"))?;
    let b = load_residual_csv(b_path)?;
    let sep_path = args
        .separation
        .as_ref()
        .ok_or_else(|| CliError::config("cross mode requires --separation"))?;
    let sep = load_separation_csv(sep_path)?;

    let cc = correlate::cross_correlation(&a, &b, &sep, args.bin_m).map_err(map_corr_err)?;

    fs::create_dir_all(&args.out)?;
    let mut csv = Vec::new();
    cc.write_csv(sig6, &mut csv)?;
    write_atomic(&args.out.join("crosscorr.csv"), &csv)?;

    let fit = correlate::fit_linear_cross(&cc, CROSS_FIT_RANGE_M);
    #[derive(serde::Serialize)]
    struct CrossDoc<'a> {
        pairing: &'a str,
        omitted: &'a [(f64, usize)],
        model: Option<LinearCrossModel>,
        warnings: Vec<String>,
    }
    let (model, warnings) = match &fit {
        Ok((m, w)) => (Some(*m), w.clone()),
        Err(e) => (None, vec![e.to_string()]),
    };
    let doc = CrossDoc {
        pairing: &cc.pairing,
        omitted: &cc.omitted,
        model,
        warnings: warnings.clone(),
    };
    let mut body = serde_json::to_string_pretty(&doc).expect("cross doc serializes");
    body.push('\n');
    write_atomic(&args.out.join("crosscorr_fit.json"), body.as_bytes())?;

    let mut manifest = ManifestBuilder::new("correlate-cross", 0);
    manifest.arg("bin_m", args.bin_m);
    for p in [&args.residuals, &args.samples, &args.model].into_iter().flatten() {
        manifest.input_file(p)?;
    }
    manifest.input_file(b_path)?;
    manifest.input_file(sep_path)?;
    manifest.output("crosscorr.csv").output("crosscorr_fit.json");
    manifest.write(&args.out)?;

    if matches!(args.format, FormatArg::Json) {
        println!("{}", body.trim_end());
        return Ok(());
    }
    println!("cross-correlation: {} bins ({} omitted)", cc.bins.len(), cc.omitted.len());
    for (center, n) in &cc.omitted {
        eprintln!("warning: subgroup at {} m omitted, only {n} pairs", sig6(*center));
    }
    if let Some(m) = &model {
        println!(
            "linear model: rho = {} + {}*dd, cutoff {} m (valid to {} m)",
            sig6(m.intercept),
            sig6(m.slope_per_m),
            sig6(m.cutoff_m),
            sig6(m.validity_limit_m)
        );
        match m.decorrelation_distance_m() {
            Ok(dc) => println!("de-correlation distance: {} m", sig6(dc)),
            Err(e) => eprintln!("warning: {e}"),
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn load_separation_csv(path: &Path) -> Result<Vec<f64>, CliError> {
    let body = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = body.lines().enumerate();
    match lines.next() {
        Some((_, "delta_d_rx_m")) => {}
        Some((_, other)) => {
            return Err(CliError::parse(format!(
                "{}: expected header `delta_d_rx_m`, got `{other}`",
                path.display()
            )))
        }
        None => return Err(CliError::parse(format!("{}: empty file", path.display()))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v: f64 = line.trim().parse().map_err(|_| {
            CliError::parse(format!("{}:{}: bad delta_d_rx_m", path.display(), i + 1))
        })?;
        out.push(v);
    }
    Ok(out)
}
