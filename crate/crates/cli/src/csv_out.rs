//! CSV table writers.
//!
//! Schemas are fixed — column set and order never depend on the data, only
//! on the configured prior names — and all floating-point cells use six
//! decimal places, so identical runs produce byte-identical files.
//!
//! Files:
//! * `calibration.csv` — selected thresholds and operating rates per
//!   interim time.
//! * `oc_<prior>.csv` — per-design-prior operating characteristics (the
//!   shared fixed-truth columns plus prior-specific stopping and borrowing
//!   columns).
//! * `ehss.csv` / `ehss_hss_<n01>_<n02>.csv` — mean effective historical
//!   sample size per arm, interim grid × design priors.
//! * `payoff.csv` — long-format payoff curves (mode × prior × weight ×
//!   interim time).
//! * `optima.csv` — the argmax row per mode × prior × weight.
//! * `ess.csv` — expected sample size and savings per prior × interim time.

use std::path::Path;

use cadence_core::calib::CalibrationResult;
use cadence_core::payoff::{DesignPriorRates, PayoffCurve};

use crate::error::CliError;

/// Fixed-precision float cell: six decimals, enough to carry Monte Carlo
/// resolution while keeping files diff-stable.
fn fx(v: f64) -> String {
    format!("{v:.6}")
}

/// Interim time as a fraction of full enrollment, two decimals.
fn fraction(n_prime: u32, n_total: u32) -> String {
    format!("{:.2}", f64::from(n_prime) / f64::from(n_total))
}

fn open(dir: &Path, name: &str) -> Result<csv::Writer<std::fs::File>, CliError> {
    Ok(csv::Writer::from_path(dir.join(name))?)
}

pub fn write_calibration(
    dir: &Path,
    calibs: &[CalibrationResult],
    n_total: u32,
) -> Result<String, CliError> {
    let name = "calibration.csv";
    let mut w = open(dir, name)?;
    w.write_record([
        "n_prime",
        "fraction",
        "p_u",
        "p_l",
        "p_0",
        "type1",
        "type1_se",
        "type1_early",
        "type1_final",
        "power",
        "power_se",
        "futility_null",
        "futility_null_se",
        "earlywin_alt",
        "earlywin_alt_se",
        "admissible",
        "tolerance",
    ])?;
    for c in calibs {
        w.write_record([
            c.n_prime.to_string(),
            fraction(c.n_prime, n_total),
            fx(c.selected.p_u),
            fx(c.selected.p_l),
            fx(c.selected.p_0),
            fx(c.type1.value),
            fx(c.type1.se),
            fx(c.type1_early),
            fx(c.type1_final),
            fx(c.power.value),
            fx(c.power.se),
            fx(c.p_futility_null.value),
            fx(c.p_futility_null.se),
            fx(c.p_earlywin_alt.value),
            fx(c.p_earlywin_alt.se),
            c.admissible.to_string(),
            fx(c.tolerance),
        ])?;
    }
    w.flush()?;
    Ok(name.to_string())
}

/// Per-prior operating characteristics: fixed-truth columns (futility under
/// the null, early win under the alternative, type I error, power) are
/// shared across priors by construction; the stopping probability and EHSS
/// columns are specific to this prior.
pub fn write_oc(
    dir: &Path,
    prior_name: &str,
    calibs: &[CalibrationResult],
    rates: &[DesignPriorRates],
    n_total: u32,
) -> Result<String, CliError> {
    let name = format!("oc_{prior_name}.csv");
    let mut w = open(dir, &name)?;
    w.write_record([
        "n_prime",
        "fraction",
        "p1_futility_null",
        "p1_se",
        "p2_earlywin_alt",
        "p2_se",
        "ia_stop",
        "ia_stop_se",
        "type1",
        "type1_se",
        "power",
        "power_se",
        "p_u",
        "p_l",
        "p_0",
        "ehss_placebo",
        "ehss_treated",
    ])?;
    for (c, r) in calibs.iter().zip(rates) {
        w.write_record([
            c.n_prime.to_string(),
            fraction(c.n_prime, n_total),
            fx(c.p_futility_null.value),
            fx(c.p_futility_null.se),
            fx(c.p_earlywin_alt.value),
            fx(c.p_earlywin_alt.se),
            fx(r.p_stop.value),
            fx(r.p_stop.se),
            fx(c.type1.value),
            fx(c.type1.se),
            fx(c.power.value),
            fx(c.power.se),
            fx(c.selected.p_u),
            fx(c.selected.p_l),
            fx(c.selected.p_0),
            fx(r.ehss_mean[0]),
            fx(r.ehss_mean[1]),
        ])?;
    }
    w.flush()?;
    Ok(name)
}

/// EHSS table: one row per interim time, a `<prior>_placebo` /
/// `<prior>_treated` column pair per design prior, in configured order.
pub fn write_ehss(
    dir: &Path,
    file_name: &str,
    prior_names: &[String],
    grid: &[u32],
    means: &[Vec<[f64; 2]>],
    n_total: u32,
) -> Result<String, CliError> {
    let mut w = open(dir, file_name)?;
    let mut header = vec!["n_prime".to_string(), "fraction".to_string()];
    for p in prior_names {
        header.push(format!("{p}_placebo"));
        header.push(format!("{p}_treated"));
    }
    w.write_record(&header)?;
    for (i, &n_prime) in grid.iter().enumerate() {
        let mut row = vec![n_prime.to_string(), fraction(n_prime, n_total)];
        for per_prior in means {
            row.push(fx(per_prior[i][0]));
            row.push(fx(per_prior[i][1]));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(file_name.to_string())
}

/// Long-format payoff curves: one row per (mode, prior, weight, interim).
pub fn write_payoff_curves(
    dir: &Path,
    curves: &[(String, String, PayoffCurve)],
) -> Result<String, CliError> {
    let name = "payoff.csv";
    let mut w = open(dir, name)?;
    w.write_record(["mode", "prior", "w", "n_prime", "fraction", "payoff", "payoff_se"])?;
    for (mode, prior, curve) in curves {
        for p in &curve.points {
            w.write_record([
                mode.clone(),
                prior.clone(),
                fx(curve.w),
                p.n_prime.to_string(),
                format!("{:.2}", p.fraction),
                fx(p.payoff.value),
                fx(p.payoff.se),
            ])?;
        }
    }
    w.flush()?;
    Ok(name.to_string())
}

/// Optimal interim time per (mode, prior, weight).
pub fn write_optima(
    dir: &Path,
    curves: &[(String, String, PayoffCurve)],
) -> Result<String, CliError> {
    let name = "optima.csv";
    let mut w = open(dir, name)?;
    w.write_record([
        "mode",
        "prior",
        "w",
        "best_n_prime",
        "best_fraction",
        "best_payoff",
        "best_payoff_se",
    ])?;
    for (mode, prior, curve) in curves {
        let b = curve.best();
        w.write_record([
            mode.clone(),
            prior.clone(),
            fx(curve.w),
            b.n_prime.to_string(),
            format!("{:.2}", b.fraction),
            fx(b.payoff.value),
            fx(b.payoff.se),
        ])?;
    }
    w.flush()?;
    Ok(name.to_string())
}

/// Expected sample size and relative savings per prior × interim time.
pub fn write_ess(
    dir: &Path,
    prior_names: &[String],
    rates: &[Vec<DesignPriorRates>],
    n_total: u32,
) -> Result<String, CliError> {
    let name = "ess.csv";
    let mut w = open(dir, name)?;
    w.write_record(["prior", "n_prime", "fraction", "ess", "ess_se", "savings_pct"])?;
    for (p, per_prior) in prior_names.iter().zip(rates) {
        for r in per_prior {
            let savings = 100.0 * (f64::from(n_total) - r.expected_ss.value) / f64::from(n_total);
            w.write_record([
                p.clone(),
                r.n_prime.to_string(),
                fraction(r.n_prime, n_total),
                fx(r.expected_ss.value),
                fx(r.expected_ss.se),
                fx(savings),
            ])?;
        }
    }
    w.flush()?;
    Ok(name.to_string())
}
