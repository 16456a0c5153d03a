//! Pipeline orchestration: calibration → design-prior operating
//! characteristics → payoff optimization → table emission.
//!
//! Every stage is deterministic for a fixed (config, seed) regardless of
//! worker count: all randomness flows through per-replication counter
//! streams and every reduction runs in index order.

use std::fs;
use std::path::Path;

use cadence_core::calib::{calibrate, calibrate_full, CalibrationResult};
use cadence_core::exec::Executor;
use cadence_core::payoff::{estimate_design_prior_rates, optimize_from_rates, DesignPriorRates};
use cadence_core::rng::Purpose;
use cadence_core::sim::{make_historical, run_ehss_batch, HistoricalDataset};
use cadence_core::TruthScenario;

use crate::config_file::StudySettings;
use crate::csv_out;
use crate::error::CliError;

/// Stderr progress reporter; standard output stays machine-readable.
pub struct Progress {
    level: i8,
}

impl Progress {
    pub fn new(quiet: bool, verbose: u8) -> Progress {
        Progress { level: if quiet { -1 } else { i8::try_from(verbose).unwrap_or(i8::MAX) } }
    }

    pub fn stage(&self, msg: &str) {
        if self.level >= 0 {
            eprintln!("[cadence] {msg}");
        }
    }

    pub fn detail(&self, msg: &str) {
        if self.level >= 1 {
            eprintln!("[cadence]   {msg}");
        }
    }
}

/// Marker file present while a report directory is being written; its
/// presence marks partial output from an aborted run.
pub const INCOMPLETE_MARKER: &str = "_INCOMPLETE";

fn historical_for(settings: &StudySettings) -> HistoricalDataset {
    make_historical(
        settings.config.n01,
        settings.config.n02,
        settings.historical_delta0,
        settings.historical_sd,
        settings.config.seed,
    )
}

/// Calibrates thresholds at every interim time on the grid.
pub fn calibrate_grid<E: Executor>(
    exec: &E,
    settings: &StudySettings,
    historical: &HistoricalDataset,
    progress: &Progress,
) -> Result<Vec<CalibrationResult>, CliError> {
    let config = &settings.config;
    let mut calibs = Vec::with_capacity(config.ia_grid.len());
    for &n_prime in &config.ia_grid {
        let result = if settings.search_all {
            let pl = settings.pl_grid.as_deref().expect("validated");
            let p0 = settings.p0_grid.as_deref().expect("validated");
            calibrate_full(
                exec,
                config,
                historical,
                n_prime,
                &settings.pu_grid,
                pl,
                p0,
                settings.alt_delta,
                config.n_rep,
                settings.power_floor,
            )
        } else {
            calibrate(
                exec,
                config,
                historical,
                n_prime,
                &settings.pu_grid,
                settings.alt_delta,
                config.n_rep,
                settings.power_floor,
            )
        }
        .map_err(|e| match CliError::from(e) {
            CliError::Runtime(m) => {
                CliError::Runtime(format!("calibration stage (interim {n_prime}): {m}"))
            }
            other => other,
        })?;
        progress.detail(&format!(
            "interim {:2}: p_u {:.3}, type1 {:.3}, power {:.3}{}",
            n_prime,
            result.selected.p_u,
            result.type1.value,
            result.power.value,
            if result.admissible { "" } else { " (not admissible)" }
        ));
        calibs.push(result);
    }
    Ok(calibs)
}

fn require_admissible(calibs: &[CalibrationResult]) -> Result<(), CliError> {
    if calibs.iter().any(|c| c.admissible) {
        Ok(())
    } else {
        Err(CliError::Calibration(
            "no admissible design: no interim time reached the target type I error within \
             tolerance (and the power floor, if set)"
                .into(),
        ))
    }
}

/// `calibrate` command: thresholds table only.
pub fn run_calibrate_cmd<E: Executor>(
    exec: &E,
    settings: &StudySettings,
    out_dir: &Path,
    progress: &Progress,
) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(INCOMPLETE_MARKER), b"run in progress\n")?;
    progress.stage(&format!(
        "calibrating {} interim times x {} thresholds",
        settings.config.ia_grid.len(),
        settings.pu_grid.len()
    ));
    let historical = historical_for(settings);
    let calibs = calibrate_grid(exec, settings, &historical, progress)?;
    require_admissible(&calibs)?;
    let tables = vec![csv_out::write_calibration(out_dir, &calibs, settings.config.n_total())?];
    fs::remove_file(out_dir.join(INCOMPLETE_MARKER))?;
    Ok(tables)
}

/// `study` command: the full pipeline.
pub fn run_study_cmd<E: Executor>(
    exec: &E,
    settings: &StudySettings,
    out_dir: &Path,
    progress: &Progress,
) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(INCOMPLETE_MARKER), b"run in progress\n")?;
    let config = &settings.config;
    let n_total = config.n_total();
    let grid = &config.ia_grid;
    let historical = historical_for(settings);
    let mut tables = Vec::new();

    progress.stage(&format!(
        "stage 1/4: calibrating {} interim times x {} thresholds ({} replications each)",
        grid.len(),
        settings.pu_grid.len(),
        config.n_rep
    ));
    let calibs = calibrate_grid(exec, settings, &historical, progress)?;
    require_admissible(&calibs)?;
    tables.push(csv_out::write_calibration(out_dir, &calibs, n_total)?);

    progress.stage(&format!(
        "stage 2/4: design-prior operating characteristics ({} priors x {} interim times)",
        settings.priors.len(),
        grid.len()
    ));
    let mut rates: Vec<Vec<DesignPriorRates>> = Vec::with_capacity(settings.priors.len());
    for (p, named) in settings.priors.iter().enumerate() {
        let mut per_prior = Vec::with_capacity(grid.len());
        for c in &calibs {
            let r = estimate_design_prior_rates(
                exec,
                config,
                &historical,
                &named.prior,
                p as u8,
                c.n_prime,
                &c.selected,
                config.n_rep,
            )
            .map_err(|e| {
                CliError::Runtime(format!(
                    "design-prior stage (prior {}, interim {}): {e}",
                    named.name, c.n_prime
                ))
            })?;
            progress.detail(&format!(
                "prior {} interim {:2}: stop {:.3}, ess {:.2}",
                named.name, c.n_prime, r.p_stop.value, r.expected_ss.value
            ));
            per_prior.push(r);
        }
        rates.push(per_prior);
    }

    for (named, per_prior) in settings.priors.iter().zip(&rates) {
        tables.push(csv_out::write_oc(out_dir, &named.name, &calibs, per_prior, n_total)?);
    }
    let prior_names: Vec<String> = settings.priors.iter().map(|p| p.name.clone()).collect();
    let ehss_means: Vec<Vec<[f64; 2]>> =
        rates.iter().map(|per| per.iter().map(|r| r.ehss_mean).collect()).collect();
    tables.push(csv_out::write_ehss(out_dir, "ehss.csv", &prior_names, grid, &ehss_means, n_total)?);
    tables.push(csv_out::write_ess(out_dir, &prior_names, &rates, n_total)?);

    progress.stage(&format!(
        "stage 3/4: payoff curves ({} modes x {} priors x {} weights)",
        settings.modes.len(),
        settings.priors.len(),
        settings.weights.len()
    ));
    let mut curves = Vec::new();
    for mode in &settings.modes {
        for (named, per_prior) in settings.priors.iter().zip(&rates) {
            for &w in &settings.weights {
                let curve = optimize_from_rates(config, mode, w, &calibs, per_prior).map_err(
                    |e| {
                        CliError::Runtime(format!(
                            "payoff stage (mode {}, prior {}, w {w}): {e}",
                            mode.label(),
                            named.name
                        ))
                    },
                )?;
                progress.detail(&format!(
                    "mode {} prior {} w {:.2}: best interim {}",
                    mode.label(),
                    named.name,
                    w,
                    curve.best_n_prime()
                ));
                curves.push((mode.label().to_string(), named.name.clone(), curve));
            }
        }
    }
    tables.push(csv_out::write_payoff_curves(out_dir, &curves)?);
    tables.push(csv_out::write_optima(out_dir, &curves)?);

    if !settings.ehss_variants.is_empty() {
        progress.stage(&format!(
            "stage 4/4: historical-size sensitivity ({} variants)",
            settings.ehss_variants.len()
        ));
        for pair in &settings.ehss_variants {
            tables.push(run_ehss_variant(exec, settings, *pair, out_dir, progress)?);
        }
    } else {
        progress.stage("stage 4/4: historical-size sensitivity (none configured)");
    }

    fs::remove_file(out_dir.join(INCOMPLETE_MARKER))?;
    Ok(tables)
}

/// One borrowing-sensitivity table: the historical study redrawn at a
/// different per-arm size, EHSS tabulated over the grid and priors.  Truth
/// and data streams are shared with the main run, so variants differ only
/// through the historical dataset (common random numbers).
fn run_ehss_variant<E: Executor>(
    exec: &E,
    settings: &StudySettings,
    n0_pair: [u32; 2],
    out_dir: &Path,
    progress: &Progress,
) -> Result<String, CliError> {
    let config = &settings.config;
    let historical = make_historical(
        n0_pair[0],
        n0_pair[1],
        settings.historical_delta0,
        settings.historical_sd,
        config.seed,
    );
    let grid = &config.ia_grid;
    let mut means: Vec<Vec<[f64; 2]>> = Vec::with_capacity(settings.priors.len());
    for (p, named) in settings.priors.iter().enumerate() {
        let scenario = TruthScenario::FromPrior(named.prior);
        let mut per_prior = Vec::with_capacity(grid.len());
        for &n_prime in grid {
            let batch = run_ehss_batch(
                exec,
                config,
                &historical,
                &scenario,
                n_prime,
                config.n_rep,
                Purpose::DesignPrior,
                p as u8,
            )
            .map_err(|e| {
                CliError::Runtime(format!(
                    "borrowing-sensitivity stage (historical {}/{}, prior {}, interim {n_prime}): {e}",
                    n0_pair[0], n0_pair[1], named.name
                ))
            })?;
            let n = batch.len() as f64;
            let sum = batch.iter().fold([0.0_f64; 2], |acc, e| [acc[0] + e[0], acc[1] + e[1]]);
            per_prior.push([sum[0] / n, sum[1] / n]);
        }
        progress.detail(&format!("historical {}/{} prior {} done", n0_pair[0], n0_pair[1], named.name));
        means.push(per_prior);
    }
    let prior_names: Vec<String> = settings.priors.iter().map(|p| p.name.clone()).collect();
    let file = format!("ehss_hss_{}_{}.csv", n0_pair[0], n0_pair[1]);
    csv_out::write_ehss(out_dir, &file, &prior_names, grid, &means, config.n_total())
}
