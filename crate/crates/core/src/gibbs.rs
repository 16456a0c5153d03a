//! Gibbs sampler for the commensurate-prior normal model and its
//! current-data-only reference variant.
//!
//! The full model ties each current-trial arm mean to its historical
//! counterpart:
//!
//! ```text
//! Y_kj  ~ N(theta_k, 1/omega)      current trial, arm k, j = 1..n'_k
//! Y0_kj ~ N(theta0_k, 1/omega0)    historical study, arm k
//! theta_k | theta0_k, tau_k ~ N(theta0_k, 1/tau_k)
//! theta0_k ~ N(0, sigma0^2)
//! tau_k ~ Gamma(tau_shape, tau_rate)        commensurability precision
//! omega, omega0 ~ Gamma(omega_shape, omega_rate)
//! ```
//!
//! Every full conditional is conjugate (normal or gamma), so the sampler is
//! a fixed sequence of exact draws — no tuning, no accept/reject.  The
//! current-data-only variant drops the historical layer and places the vague
//! `N(0, sigma0^2)` prior directly on `theta_k`; the ratio of posterior
//! precisions between the two fits is what the borrowing diagnostic
//! ([`crate::rules::ehss`]) consumes.
//!
//! Determinism: a chain owns one [`ChaCha8Rng`] stream fixed by
//! [`ChainConfig`]; identical `(spec, data, chain)` triples produce
//! bit-identical draws on every platform (all math goes through `libm`).

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::model::{DesignConfig, PosteriorDraws, TrialData, ARM_TREATMENT};
use crate::rng::StreamKey;

/// Prior hyperparameters shared by both model variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub sigma0: f64,
    pub tau_shape: f64,
    pub tau_rate: f64,
    pub omega_shape: f64,
    pub omega_rate: f64,
}

impl Hyper {
    pub fn from_config(config: &DesignConfig) -> Hyper {
        Hyper {
            sigma0: config.sigma0,
            tau_shape: config.tau_shape,
            tau_rate: config.tau_rate,
            omega_shape: config.omega_shape,
            omega_rate: config.omega_rate,
        }
    }

    fn is_valid(&self) -> bool {
        [self.sigma0, self.tau_shape, self.tau_rate, self.omega_shape, self.omega_rate]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
    }
}

/// Which likelihood the sampler fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelVariant {
    /// Hierarchical model over current and historical data.
    FullCommensurate,
    /// Current data only, `theta_k ~ N(0, sigma0^2)`; ignores historical
    /// observations entirely.
    CurrentOnly,
}

/// Freezes the precision parameters at constants, turning the theta layer
/// into an exactly solvable multivariate normal.  Test instrumentation: the
/// conjugate-oracle suite validates the sampler against closed-form moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPrecisions {
    pub tau: [f64; 2],
    pub omega: f64,
    pub omega0: f64,
}

/// Model variant plus priors; the immutable description of one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub variant: ModelVariant,
    pub hyper: Hyper,
    /// `Some` only in the fixed-precision test mode.
    pub fixed: Option<FixedPrecisions>,
}

impl ModelSpec {
    pub fn full(hyper: Hyper) -> ModelSpec {
        ModelSpec { variant: ModelVariant::FullCommensurate, hyper, fixed: None }
    }

    pub fn current_only(hyper: Hyper) -> ModelSpec {
        ModelSpec { variant: ModelVariant::CurrentOnly, hyper, fixed: None }
    }
}

/// Chain length, burn-in policy, and the RNG stream the chain owns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    /// Total iterations, including burn-in.
    pub iters: u32,
    /// Fraction of the chain discarded from the front.
    pub burn_frac: f64,
    /// Master seed of the enclosing study.
    pub master_seed: u64,
    /// Packed stream id; see [`crate::rng`].
    pub stream: u64,
}

impl ChainConfig {
    pub fn new(iters: u32, burn_frac: f64, master_seed: u64, key: StreamKey) -> ChainConfig {
        ChainConfig { iters, burn_frac, master_seed, stream: key.stream_id() }
    }

    /// Retained draws: `floor(iters * (1 - burn_frac))`.
    pub fn draws(&self) -> u32 {
        libm::floor(f64::from(self.iters) * (1.0 - self.burn_frac)) as u32
    }

    fn validate(&self) -> Result<(), GibbsError> {
        if self.iters < 100 {
            return Err(GibbsError::InvalidChain("iters must be at least 100"));
        }
        if !(self.burn_frac > 0.0 && self.burn_frac < 1.0) {
            return Err(GibbsError::InvalidChain("burn_frac must lie in (0, 1)"));
        }
        if self.draws() < 2 {
            return Err(GibbsError::InvalidChain("fewer than two retained draws"));
        }
        Ok(())
    }
}

/// Failure modes of a fit or of a posterior summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GibbsError {
    /// Full model with no observations anywhere: nothing identifies the
    /// hierarchy.
    DegenerateModel,
    /// An observation was NaN or infinite.
    NonFiniteData,
    /// Chain configuration violates its invariants.
    InvalidChain(&'static str),
    /// Hyperparameters must be finite and positive.
    InvalidHyper,
    /// A summary required variation the chain does not have.
    DegenerateChain,
}

impl fmt::Display for GibbsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GibbsError::DegenerateModel => {
                write!(f, "degenerate model: no current or historical observations")
            }
            GibbsError::NonFiniteData => write!(f, "data contain a non-finite observation"),
            GibbsError::InvalidChain(why) => write!(f, "invalid chain configuration: {why}"),
            GibbsError::InvalidHyper => {
                write!(f, "hyperparameters must be finite and positive")
            }
            GibbsError::DegenerateChain => {
                write!(f, "degenerate chain: posterior draws have zero variance")
            }
        }
    }
}

impl core::error::Error for GibbsError {}

/// Sufficient statistics of one arm.
struct ArmStats {
    n: f64,
    sum: f64,
    mean: f64,
    /// Centered sum of squares, `sum_j (y_j - mean)^2`.
    css: f64,
}

fn arm_stats(y: &[f64]) -> ArmStats {
    if y.is_empty() {
        return ArmStats { n: 0.0, sum: 0.0, mean: 0.0, css: 0.0 };
    }
    let n = y.len() as f64;
    let sum: f64 = y.iter().sum();
    let mean = sum / n;
    let css: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    ArmStats { n, sum, mean, css }
}

#[inline]
fn draw_normal(rng: &mut ChaCha8Rng, mean: f64, precision: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + z / libm::sqrt(precision)
}

/// Gamma draw with the given rate, from a sampler parameterized at scale 1.
/// Clamped away from zero: shapes below ~0.02 underflow to 0.0 with small
/// but non-negligible probability, and precisions must stay positive.
#[inline]
fn draw_gamma(sampler: &Gamma<f64>, rate: f64, rng: &mut ChaCha8Rng) -> f64 {
    let x: f64 = sampler.sample(rng) / rate;
    x.max(f64::MIN_POSITIVE)
}

fn unit_gamma(shape: f64) -> Gamma<f64> {
    Gamma::new(shape, 1.0).expect("validated shape must be positive")
}

/// Runs one chain and returns the post-burn-in draws.
///
/// The update sweep is fixed: `theta_1, theta_2, theta0_1, theta0_2, tau_1,
/// tau_2, omega, omega0` (the current-only variant keeps just `theta_k` and
/// `omega`).  Empty current arms are legal — the `theta_k` conditional then
/// collapses onto the prior layer — which is what makes an interim look at
/// zero enrollment well-defined.
pub fn gibbs_run(
    spec: &ModelSpec,
    data: &TrialData,
    chain: &ChainConfig,
) -> Result<PosteriorDraws, GibbsError> {
    chain.validate()?;
    if !spec.hyper.is_valid() {
        return Err(GibbsError::InvalidHyper);
    }
    if data.has_non_finite() {
        return Err(GibbsError::NonFiniteData);
    }
    if spec.variant == ModelVariant::FullCommensurate
        && data.n_current() == 0
        && data.n_historical() == 0
    {
        return Err(GibbsError::DegenerateModel);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(chain.master_seed);
    rng.set_stream(chain.stream);

    match spec.variant {
        ModelVariant::FullCommensurate => run_full(spec, data, chain, &mut rng),
        ModelVariant::CurrentOnly => run_current_only(spec, data, chain, &mut rng),
    }
}

fn run_full(
    spec: &ModelSpec,
    data: &TrialData,
    chain: &ChainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PosteriorDraws, GibbsError> {
    let h = &spec.hyper;
    let cur = [arm_stats(&data.current[0]), arm_stats(&data.current[1])];
    let hist = [arm_stats(&data.historical[0]), arm_stats(&data.historical[1])];
    let inv_s0sq = 1.0 / (h.sigma0 * h.sigma0);

    // Posterior gamma shapes never change across iterations; only rates do.
    let tau_sampler = unit_gamma(h.tau_shape + 0.5);
    let omega_sampler = unit_gamma(h.omega_shape + (cur[0].n + cur[1].n) / 2.0);
    let omega0_sampler = unit_gamma(h.omega_shape + (hist[0].n + hist[1].n) / 2.0);

    let prior_floor = 1e-6;
    let mut th = [pick_mean(&cur[0]), pick_mean(&cur[1])];
    let mut th0 = [pick_mean(&hist[0]), pick_mean(&hist[1])];
    let mut tau = [(h.tau_shape / h.tau_rate).max(prior_floor); 2];
    let mut om = (h.omega_shape / h.omega_rate).max(prior_floor);
    let mut om0 = om;
    if let Some(fixed) = spec.fixed {
        tau = fixed.tau;
        om = fixed.omega;
        om0 = fixed.omega0;
    }

    let total = chain.iters;
    let keep = chain.draws();
    let burn = total - keep;
    let cap = keep as usize;
    let mut out_th = [Vec::with_capacity(cap), Vec::with_capacity(cap)];
    let mut out_th0 = [Vec::with_capacity(cap), Vec::with_capacity(cap)];
    let mut out_tau = [Vec::with_capacity(cap), Vec::with_capacity(cap)];
    let mut out_om = Vec::with_capacity(cap);
    let mut out_om0 = Vec::with_capacity(cap);

    for it in 0..total {
        for k in 0..2 {
            let prec = tau[k] + cur[k].n * om;
            let mean = (tau[k] * th0[k] + om * cur[k].sum) / prec;
            th[k] = draw_normal(rng, mean, prec);
        }
        for k in 0..2 {
            let prec = inv_s0sq + hist[k].n * om0 + tau[k];
            let mean = (om0 * hist[k].sum + tau[k] * th[k]) / prec;
            th0[k] = draw_normal(rng, mean, prec);
        }
        if spec.fixed.is_none() {
            for k in 0..2 {
                let dev = th[k] - th0[k];
                tau[k] = draw_gamma(&tau_sampler, h.tau_rate + 0.5 * dev * dev, rng);
            }
            let sse_cur = sse_about(&cur[0], th[0]) + sse_about(&cur[1], th[1]);
            om = draw_gamma(&omega_sampler, h.omega_rate + 0.5 * sse_cur, rng);
            let sse_hist = sse_about(&hist[0], th0[0]) + sse_about(&hist[1], th0[1]);
            om0 = draw_gamma(&omega0_sampler, h.omega_rate + 0.5 * sse_hist, rng);
        }
        if it >= burn {
            for k in 0..2 {
                out_th[k].push(th[k]);
                out_th0[k].push(th0[k]);
                out_tau[k].push(tau[k]);
            }
            out_om.push(om);
            out_om0.push(om0);
        }
    }

    Ok(PosteriorDraws {
        theta: out_th,
        theta0: Some(out_th0),
        tau: Some(out_tau),
        omega: out_om,
        omega0: Some(out_om0),
    })
}

fn run_current_only(
    spec: &ModelSpec,
    data: &TrialData,
    chain: &ChainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PosteriorDraws, GibbsError> {
    let h = &spec.hyper;
    let cur = [arm_stats(&data.current[0]), arm_stats(&data.current[1])];
    let inv_s0sq = 1.0 / (h.sigma0 * h.sigma0);
    let omega_sampler = unit_gamma(h.omega_shape + (cur[0].n + cur[1].n) / 2.0);

    let mut th = [pick_mean(&cur[0]), pick_mean(&cur[1])];
    let mut om = (h.omega_shape / h.omega_rate).max(1e-6);
    if let Some(fixed) = spec.fixed {
        om = fixed.omega;
    }

    let total = chain.iters;
    let keep = chain.draws();
    let burn = total - keep;
    let cap = keep as usize;
    let mut out_th = [Vec::with_capacity(cap), Vec::with_capacity(cap)];
    let mut out_om = Vec::with_capacity(cap);

    for it in 0..total {
        for k in 0..2 {
            let prec = inv_s0sq + cur[k].n * om;
            let mean = om * cur[k].sum / prec;
            th[k] = draw_normal(rng, mean, prec);
        }
        if spec.fixed.is_none() {
            let sse = sse_about(&cur[0], th[0]) + sse_about(&cur[1], th[1]);
            om = draw_gamma(&omega_sampler, h.omega_rate + 0.5 * sse, rng);
        }
        if it >= burn {
            out_th[0].push(th[0]);
            out_th[1].push(th[1]);
            out_om.push(om);
        }
    }

    Ok(PosteriorDraws { theta: out_th, theta0: None, tau: None, omega: out_om, omega0: None })
}

fn pick_mean(s: &ArmStats) -> f64 {
    if s.n > 0.0 {
        s.mean
    } else {
        0.0
    }
}

/// `sum_j (y_j - center)^2` via the shifted decomposition around the mean.
#[inline]
fn sse_about(s: &ArmStats, center: f64) -> f64 {
    let shift = s.mean - center;
    s.css + s.n * shift * shift
}

/// Fraction of draws with the treatment mean above the control mean.
///
/// Panics on empty draws (callers always fit with at least two retained
/// iterations; see [`ChainConfig::validate`]).
pub fn prob_superiority(draws: &PosteriorDraws) -> f64 {
    assert!(!draws.is_empty(), "posterior draws must be nonempty");
    let hits = draws.theta[1]
        .iter()
        .zip(&draws.theta[0])
        .filter(|(t, c)| t > c)
        .count();
    hits as f64 / draws.len() as f64
}

/// Fraction of draws with the treatment mean above `threshold`.
pub fn prob_above(draws: &PosteriorDraws, threshold: f64) -> f64 {
    assert!(!draws.is_empty(), "posterior draws must be nonempty");
    let hits = draws.theta[ARM_TREATMENT].iter().filter(|t| **t > threshold).count();
    hits as f64 / draws.len() as f64
}

/// Reciprocal of the sample variance (divisor `G - 1`) of the `theta` draws
/// for one arm.
pub fn posterior_precision(draws: &PosteriorDraws, arm: usize) -> Result<f64, GibbsError> {
    let x = &draws.theta[arm];
    assert!(x.len() >= 2, "posterior precision needs at least two draws");
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let css: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let var = css / (n - 1.0);
    if var > 0.0 && var.is_finite() {
        Ok(1.0 / var)
    } else {
        Err(GibbsError::DegenerateChain)
    }
}
