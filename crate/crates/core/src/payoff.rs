//! Payoff evaluation and interim-timing optimization.
//!
//! Once every candidate interim time has calibrated thresholds, the design
//! question left is *when* to look.  This module scores each candidate with
//! one of three payoffs and picks the argmax over the grid:
//!
//! * **Frequentist** — `(w·P1 + (1−w)·P2) / (P̂·n′ + (1−P̂)·n)`, where `P1`
//!   is the early-futility rate under the point null, `P2` the early-win
//!   rate under the point alternative, and `P̂` the design-prior stopping
//!   probability.  Numerator and denominator deliberately come from
//!   different truth regimes.
//! * **Bayesian** — the same ratio with `P1` and `P2` also measured under
//!   the design prior, so all three rates share one batch.
//! * **Net gain** — a monetary score
//!   `P1·a1 + P2·b1 + P3·b2 + P4·a2 − C·[(P1+P2)·n′ + (P3+P4)·n]` over the
//!   four mutually exclusive trial outcomes, minus per-patient costs.
//!
//! All Monte Carlo rates carry binomial standard errors and every payoff
//! reports a delta-method standard error, so the curves emitted downstream
//! can show uncertainty bands.

use alloc::vec::Vec;
use core::fmt;

use libm::sqrt;

use crate::calib::CalibrationResult;
use crate::exec::Executor;
use crate::model::{
    DesignConfig, DesignPrior, Estimate, ReplicationOutcome, Thresholds, TruthScenario,
};
use crate::rng::Purpose;
use crate::sim::{run_batch, BatchError, DecisionCounts, HistoricalDataset};

/// Tolerance for "rates sum to one" checks on Monte Carlo count ratios.
const RATE_SUM_TOL: f64 = 1e-6;

/// Slack allowed on the single-batch consistency check `P1 + P2 ≤ P̂`.
const STOP_RATE_TOL: f64 = 1e-9;

/// Payoff evaluation failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayoffError {
    /// A rate was outside [0, 1] or not finite.
    InvalidProbability,
    /// The weight `w` was outside [0, 1] or not finite.
    InvalidWeight,
    /// The full sample size was zero.
    ZeroSampleSize,
    /// The interim size exceeded the full size.
    InterimExceedsTotal,
    /// Single-batch rates violated `P1 + P2 ≤ P̂`.
    StopRateInconsistent,
    /// Monetary gains violated `a2 < a1` or `b2 < b1`, or were not finite.
    MisorderedGains,
    /// Outcome rates did not sum to one.
    RatesNotNormalized,
}

impl fmt::Display for PayoffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            PayoffError::InvalidProbability => "rate outside [0, 1]",
            PayoffError::InvalidWeight => "weight outside [0, 1]",
            PayoffError::ZeroSampleSize => "full sample size is zero",
            PayoffError::InterimExceedsTotal => "interim size exceeds full size",
            PayoffError::StopRateInconsistent => {
                "early-stop components exceed the stopping probability"
            }
            PayoffError::MisorderedGains => "gains must satisfy a2 < a1 and b2 < b1 and be finite",
            PayoffError::RatesNotNormalized => "outcome rates must sum to one",
        };
        f.write_str(msg)
    }
}

impl core::error::Error for PayoffError {}

fn is_rate(p: f64) -> bool {
    p.is_finite() && (0.0..=1.0).contains(&p)
}

/// Validated argument bundle for the ratio payoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffInputs {
    /// Early-futility rate (null-truth in frequentist mode, design-prior in
    /// fully-Bayesian mode).
    pub p_hat_1: f64,
    /// Early-win rate (alternative-truth or design-prior, per mode).
    pub p_hat_2: f64,
    /// Design-prior probability of stopping at the interim.
    pub p_hat_stop: f64,
    pub n_prime: u32,
    pub n: u32,
    pub w: f64,
}

impl PayoffInputs {
    /// Checks ranges; `single_batch` additionally enforces
    /// `p_hat_1 + p_hat_2 ≤ p_hat_stop`, which must hold when all three
    /// rates are measured on the same replications.
    pub fn validate(&self, single_batch: bool) -> Result<(), PayoffError> {
        if ![self.p_hat_1, self.p_hat_2, self.p_hat_stop].iter().all(|p| is_rate(*p)) {
            return Err(PayoffError::InvalidProbability);
        }
        if !is_rate(self.w) {
            return Err(PayoffError::InvalidWeight);
        }
        if self.n == 0 {
            return Err(PayoffError::ZeroSampleSize);
        }
        if self.n_prime > self.n {
            return Err(PayoffError::InterimExceedsTotal);
        }
        if single_batch && self.p_hat_1 + self.p_hat_2 > self.p_hat_stop + STOP_RATE_TOL {
            return Err(PayoffError::StopRateInconsistent);
        }
        Ok(())
    }

    /// The expected sample size `P̂·n′ + (1−P̂)·n` (the payoff denominator).
    pub fn denominator(&self) -> f64 {
        self.p_hat_stop * f64::from(self.n_prime)
            + (1.0 - self.p_hat_stop) * f64::from(self.n)
    }

    /// The ratio payoff `(w·P1 + (1−w)·P2) / (P̂·n′ + (1−P̂)·n)`.
    pub fn value(&self) -> f64 {
        (self.w * self.p_hat_1 + (1.0 - self.w) * self.p_hat_2) / self.denominator()
    }
}

/// Frequentist payoff: `P1` under the null, `P2` under the alternative,
/// `P̂` under the design prior.  The three rates come from independent
/// batches, so the delta-method variance is a sum of squared sensitivities.
pub fn payoff_frequentist(
    p1_null: Estimate,
    p2_alt: Estimate,
    p_stop: Estimate,
    n_prime: u32,
    n: u32,
    w: f64,
) -> Result<Estimate, PayoffError> {
    let inputs = PayoffInputs {
        p_hat_1: p1_null.value,
        p_hat_2: p2_alt.value,
        p_hat_stop: p_stop.value,
        n_prime,
        n,
        w,
    };
    inputs.validate(false)?;
    let d = inputs.denominator();
    let numer = w * p1_null.value + (1.0 - w) * p2_alt.value;
    let dd_dp = f64::from(n_prime) - f64::from(n); // ∂D/∂P̂
    let var = (w / d) * (w / d) * p1_null.se * p1_null.se
        + ((1.0 - w) / d) * ((1.0 - w) / d) * p2_alt.se * p2_alt.se
        + (numer * dd_dp / (d * d)) * (numer * dd_dp / (d * d)) * p_stop.se * p_stop.se;
    Ok(Estimate { value: inputs.value(), se: sqrt(var.max(0.0)) })
}

/// Fully-Bayesian payoff: all three rates measured under the design prior
/// on one batch of `n_rep` replications.  The standard error accounts for
/// the within-batch covariance of numerator and denominator, both of which
/// are means of per-replication multinomial indicators.
pub fn payoff_bayesian(
    p1: Estimate,
    p2: Estimate,
    p_stop: Estimate,
    n_prime: u32,
    n: u32,
    w: f64,
    n_rep: u32,
) -> Result<Estimate, PayoffError> {
    let inputs = PayoffInputs {
        p_hat_1: p1.value,
        p_hat_2: p2.value,
        p_hat_stop: p_stop.value,
        n_prime,
        n,
        w,
    };
    inputs.validate(true)?;
    let d = inputs.denominator();
    let f = inputs.value();
    let numer = w * p1.value + (1.0 - w) * p2.value;
    let (np, nf) = (f64::from(n_prime), f64::from(n));
    // Per-replication numerator A ∈ {w, 1−w, 0} and cost B ∈ {n′, n}.
    let var_a = w * w * p1.value + (1.0 - w) * (1.0 - w) * p2.value - numer * numer;
    let var_b = np * np * p_stop.value + nf * nf * (1.0 - p_stop.value) - d * d;
    let cov_ab = numer * (np - d);
    let var_f = (var_a - 2.0 * f * cov_ab + f * f * var_b) / (f64::from(n_rep.max(1)) * d * d);
    Ok(Estimate { value: f, se: sqrt(var_f.max(0.0)) })
}

/// Monetary gains and per-patient cost for the net-gain payoff.
///
/// `a1` rewards a correct early futility stop, `b1` a correct early win,
/// `b2` a win at the final analysis, `a2` a trial that runs to completion
/// without a winner; `c` is the cost per enrolled patient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetGainParams {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
}

impl NetGainParams {
    /// Early outcomes must be worth more than their late counterparts:
    /// `a2 < a1` and `b2 < b1`.
    pub fn validate(&self) -> Result<(), PayoffError> {
        let finite = [self.a1, self.a2, self.b1, self.b2, self.c].iter().all(|v| v.is_finite());
        if finite && self.a2 < self.a1 && self.b2 < self.b1 {
            Ok(())
        } else {
            Err(PayoffError::MisorderedGains)
        }
    }
}

/// Expected net monetary gain over the four exclusive trial outcomes
/// (early futility, early win, final win, final no-winner), minus expected
/// enrollment cost.  The four rates must partition the batch.
pub fn expected_net_gain(
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
    params: &NetGainParams,
    n_prime: u32,
    n: u32,
) -> Result<f64, PayoffError> {
    params.validate()?;
    if ![p1, p2, p3, p4].iter().all(|p| is_rate(*p)) {
        return Err(PayoffError::InvalidProbability);
    }
    if (p1 + p2 + p3 + p4 - 1.0).abs() > RATE_SUM_TOL {
        return Err(PayoffError::RatesNotNormalized);
    }
    if n == 0 {
        return Err(PayoffError::ZeroSampleSize);
    }
    if n_prime > n {
        return Err(PayoffError::InterimExceedsTotal);
    }
    let (np, nf) = (f64::from(n_prime), f64::from(n));
    Ok(p1 * params.a1 + p2 * params.b1 + p3 * params.b2 + p4 * params.a2
        - params.c * ((p1 + p2) * np + (p3 + p4) * nf))
}

/// [`expected_net_gain`] with a multinomial delta-method standard error:
/// each replication realizes one of four gain-minus-cost values, so the
/// batch mean's variance follows from the outcome rates alone.
pub fn net_gain_estimate(
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
    params: &NetGainParams,
    n_prime: u32,
    n: u32,
    n_rep: u32,
) -> Result<Estimate, PayoffError> {
    let value = expected_net_gain(p1, p2, p3, p4, params, n_prime, n)?;
    let (np, nf) = (f64::from(n_prime), f64::from(n));
    let gains = [
        params.a1 - params.c * np,
        params.b1 - params.c * np,
        params.b2 - params.c * nf,
        params.a2 - params.c * nf,
    ];
    let second_moment = p1 * gains[0] * gains[0]
        + p2 * gains[1] * gains[1]
        + p3 * gains[2] * gains[2]
        + p4 * gains[3] * gains[3];
    let var = (second_moment - value * value).max(0.0);
    Ok(Estimate { value, se: sqrt(var / f64::from(n_rep.max(1))) })
}

/// Expected sample size `P̂·n′ + (1−P̂)·n`; its Monte Carlo standard error
/// is `(n − n′)·se(P̂)` because per-replication cost is a two-point variable.
pub fn expected_sample_size(p_stop: Estimate, n_prime: u32, n: u32) -> Estimate {
    let value = p_stop.value * f64::from(n_prime) + (1.0 - p_stop.value) * f64::from(n);
    Estimate { value, se: (f64::from(n) - f64::from(n_prime)) * p_stop.se }
}

/// Design-prior operating rates at one interim time, with the borrowing
/// diagnostics averaged over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPriorRates {
    pub n_prime: u32,
    /// P̂: fraction of replications stopped at the interim.
    pub p_stop: Estimate,
    /// Early-futility fraction (P̂₁ in fully-Bayesian mode).
    pub p1_early_futility: Estimate,
    /// Early-win fraction (P̂₂ in fully-Bayesian mode).
    pub p2_early_win: Estimate,
    /// Final-analysis winner fraction (P̂₃).
    pub p3_final_win: Estimate,
    /// Residual: completed with no winner (P̂₄ = 1 − P̂₁ − P̂₂ − P̂₃).
    pub p4_final_futility: Estimate,
    /// Mean effective historical sample size per arm at the interim.
    pub ehss_mean: [f64; 2],
    /// Fraction of replications whose summed EHSS exceeded twice the
    /// interim sample size (excess-borrowing diagnostic).
    pub ehss_flag_rate: f64,
    pub expected_ss: Estimate,
    pub n_rep: u32,
}

impl DesignPriorRates {
    /// Builds the rate set from a completed batch of outcomes.
    pub fn from_outcomes(outcomes: &[ReplicationOutcome], n_prime: u32, n: u32) -> Self {
        let counts = DecisionCounts::from_outcomes(outcomes);
        let total = counts.total();
        let p_stop = Estimate::proportion(counts.stopped_early(), total);
        let mut ehss_sum = [0.0_f64; 2];
        let mut flags = 0_u32;
        for o in outcomes {
            ehss_sum[0] += o.ehss[0];
            ehss_sum[1] += o.ehss[1];
            flags += u32::from(o.ehss_flag);
        }
        let denom = f64::from(total.max(1));
        DesignPriorRates {
            n_prime,
            p_stop,
            p1_early_futility: Estimate::proportion(counts.early_futility, total),
            p2_early_win: Estimate::proportion(counts.early_win, total),
            p3_final_win: Estimate::proportion(counts.final_win, total),
            p4_final_futility: Estimate::proportion(counts.no_win, total),
            ehss_mean: [ehss_sum[0] / denom, ehss_sum[1] / denom],
            ehss_flag_rate: f64::from(flags) / denom,
            expected_ss: expected_sample_size(p_stop, n_prime, n),
            n_rep: total,
        }
    }
}

/// Runs a design-prior batch at calibrated thresholds and summarizes the
/// marginal stopping/winner rates, EHSS averages, and expected sample size.
/// `prior_index` keeps the random streams of different priors disjoint.
#[allow(clippy::too_many_arguments)]
pub fn estimate_design_prior_rates<E: Executor>(
    exec: &E,
    config: &DesignConfig,
    historical: &HistoricalDataset,
    prior: &DesignPrior,
    prior_index: u8,
    n_prime: u32,
    thresholds: &Thresholds,
    n_rep: u32,
) -> Result<DesignPriorRates, BatchError> {
    let scenario = TruthScenario::FromPrior(*prior);
    let outcomes = run_batch(
        exec,
        config,
        historical,
        &scenario,
        n_prime,
        thresholds,
        n_rep,
        Purpose::DesignPrior,
        prior_index,
    )?;
    Ok(DesignPriorRates::from_outcomes(&outcomes, n_prime, config.n_total()))
}

/// Which payoff scores the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PayoffMode {
    Frequentist,
    Bayesian,
    NetGain(NetGainParams),
}

impl PayoffMode {
    /// Stable lowercase label for reports and file names.
    pub fn label(&self) -> &'static str {
        match self {
            PayoffMode::Frequentist => "frequentist",
            PayoffMode::Bayesian => "bayesian",
            PayoffMode::NetGain(_) => "net_gain",
        }
    }
}

/// One scored grid point: the payoff plus everything needed to plot the
/// payoff and expected-sample-size curves.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffPoint {
    pub n_prime: u32,
    /// Interim fraction `n′ / n`.
    pub fraction: f64,
    pub payoff: Estimate,
    pub rates: DesignPriorRates,
}

/// The full scored grid with its argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffCurve {
    pub w: f64,
    pub points: Vec<PayoffPoint>,
    /// Index of the best point; ties resolve to the smallest `n′` because
    /// the grid is scanned in ascending order with strict improvement.
    pub best_index: usize,
}

impl PayoffCurve {
    pub fn best(&self) -> &PayoffPoint {
        &self.points[self.best_index]
    }

    /// The optimal interim time.
    pub fn best_n_prime(&self) -> u32 {
        self.best().n_prime
    }
}

/// Optimization failures.
#[derive(Debug, Clone, PartialEq)]
pub enum OptError {
    Batch(BatchError),
    Payoff(PayoffError),
    /// Calibrations/rates were not aligned with the interim grid.
    GridMismatch,
}

impl fmt::Display for OptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptError::Batch(e) => write!(f, "design-prior batch failed: {e}"),
            OptError::Payoff(e) => write!(f, "payoff evaluation failed: {e}"),
            OptError::GridMismatch => {
                write!(f, "per-grid-point inputs do not match the interim grid")
            }
        }
    }
}

impl core::error::Error for OptError {}

impl From<BatchError> for OptError {
    fn from(e: BatchError) -> Self {
        OptError::Batch(e)
    }
}

impl From<PayoffError> for OptError {
    fn from(e: PayoffError) -> Self {
        OptError::Payoff(e)
    }
}

/// Scores one grid point under the chosen mode.  The frequentist numerator
/// rates come from the calibration's fixed-truth batches; everything else
/// comes from the design-prior rates.
pub fn evaluate_payoff(
    mode: &PayoffMode,
    w: f64,
    calibration: &CalibrationResult,
    rates: &DesignPriorRates,
    n: u32,
) -> Result<Estimate, PayoffError> {
    match mode {
        PayoffMode::Frequentist => payoff_frequentist(
            calibration.p_futility_null,
            calibration.p_earlywin_alt,
            rates.p_stop,
            rates.n_prime,
            n,
            w,
        ),
        PayoffMode::Bayesian => payoff_bayesian(
            rates.p1_early_futility,
            rates.p2_early_win,
            rates.p_stop,
            rates.n_prime,
            n,
            w,
            rates.n_rep,
        ),
        PayoffMode::NetGain(params) => net_gain_estimate(
            rates.p1_early_futility.value,
            rates.p2_early_win.value,
            rates.p3_final_win.value,
            rates.p4_final_futility.value,
            params,
            rates.n_prime,
            n,
            rates.n_rep,
        ),
    }
}

/// Deterministic reduction over already-computed per-grid-point inputs:
/// scores every point and returns the curve with its argmax (ties toward
/// smaller `n′`).  `calibrations` and `rates` must be aligned with the
/// config's interim grid, in order.
pub fn optimize_from_rates(
    config: &DesignConfig,
    mode: &PayoffMode,
    w: f64,
    calibrations: &[CalibrationResult],
    rates: &[DesignPriorRates],
) -> Result<PayoffCurve, OptError> {
    let grid = &config.ia_grid;
    if calibrations.len() != grid.len() || rates.len() != grid.len() {
        return Err(OptError::GridMismatch);
    }
    let aligned = grid
        .iter()
        .zip(calibrations)
        .zip(rates)
        .all(|((&g, c), r)| c.n_prime == g && r.n_prime == g);
    if !aligned {
        return Err(OptError::GridMismatch);
    }

    let n = config.n_total();
    let mut points = Vec::with_capacity(grid.len());
    for (c, r) in calibrations.iter().zip(rates) {
        let payoff = evaluate_payoff(mode, w, c, r, n)?;
        points.push(PayoffPoint {
            n_prime: r.n_prime,
            fraction: f64::from(r.n_prime) / f64::from(n),
            payoff,
            rates: r.clone(),
        });
    }
    let mut best_index = 0;
    for (i, p) in points.iter().enumerate() {
        if p.payoff.value > points[best_index].payoff.value {
            best_index = i;
        }
    }
    Ok(PayoffCurve { w, points, best_index })
}

/// End-to-end timing optimization for one design prior: runs the
/// design-prior batch at every grid point (at that point's calibrated
/// thresholds), scores the requested payoff, and returns the argmax plus
/// the full curve.
#[allow(clippy::too_many_arguments)]
pub fn optimize_ia_timing<E: Executor>(
    exec: &E,
    config: &DesignConfig,
    historical: &HistoricalDataset,
    prior: &DesignPrior,
    prior_index: u8,
    w: f64,
    mode: &PayoffMode,
    calibrations: &[CalibrationResult],
    n_rep: u32,
) -> Result<(u32, PayoffCurve), OptError> {
    if calibrations.len() != config.ia_grid.len() {
        return Err(OptError::GridMismatch);
    }
    let mut rates = Vec::with_capacity(calibrations.len());
    for c in calibrations {
        rates.push(estimate_design_prior_rates(
            exec,
            config,
            historical,
            prior,
            prior_index,
            c.n_prime,
            &c.selected,
            n_rep,
        )?);
    }
    let curve = optimize_from_rates(config, mode, w, calibrations, &rates)?;
    Ok((curve.best_n_prime(), curve))
}
