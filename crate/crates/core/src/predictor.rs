//! Interference predictors behind a common interface.
//!
//! The EKF treats the linear-scale interference power (watts) as the hidden
//! state and the linear SINR reconstructed from a delivered CQI report as the
//! observation `y = S / (I + σ²)`. State transitions blend the two most
//! recent posterior estimates with a Bessel correlation factor.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bounds applied to the transition weight.
pub const ALPHA_MIN: f64 = 1e-6;
pub const ALPHA_MAX: f64 = 0.999_999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Ekf,
    Ma,
    Genie,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 3] = [PredictorKind::Ekf, PredictorKind::Ma, PredictorKind::Genie];

    pub fn as_str(self) -> &'static str {
        match self {
            PredictorKind::Ekf => "ekf",
            PredictorKind::Ma => "ma",
            PredictorKind::Genie => "genie",
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ekf" => Ok(PredictorKind::Ekf),
            "ma" => Ok(PredictorKind::Ma),
            "genie" => Ok(PredictorKind::Genie),
            other => Err(Error::InvalidConfig(format!("unknown predictor `{other}` (expected ekf, ma or genie)"))),
        }
    }
}

/// Interpretation of the process-noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessNoiseMode {
    /// Absolute variance in W².
    Linear,
    /// Variance relative to the squared prior mean.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DssmConfig {
    pub process_noise_var: f64,
    pub process_noise_mode: ProcessNoiseMode,
    /// CQI mapping error variance.
    pub cqi_map_error_var: f64,
    /// ESM/quantization error variance. Derived from the CQI settings when unset.
    pub quant_error_var: Option<f64>,
    /// Predict across the reporting delay before handing the estimate to LA.
    pub delay_compensation: bool,
    /// Forgetting factor of the moving-average baseline.
    pub ma_smoothing: f64,
}

impl Default for DssmConfig {
    fn default() -> Self {
        Self {
            process_noise_var: 0.0042,
            process_noise_mode: ProcessNoiseMode::Linear,
            cqi_map_error_var: 2e-9,
            quant_error_var: None,
            delay_compensation: true,
            ma_smoothing: 0.01,
        }
    }
}

impl DssmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("dssm: {m}")));
        if !(self.process_noise_var > 0.0) {
            return bad("process_noise_var must be positive");
        }
        if !(self.cqi_map_error_var > 0.0) {
            return bad("cqi_map_error_var must be positive");
        }
        if matches!(self.quant_error_var, Some(v) if !(v > 0.0)) {
            return bad("quant_error_var must be positive");
        }
        if !(self.ma_smoothing > 0.0 && self.ma_smoothing < 1.0) {
            return bad("ma_smoothing must be in (0, 1)");
        }
        Ok(())
    }
}

/// `J₀(x)`, the zeroth-order Bessel function of the first kind.
///
/// Evaluates `(1/2π)∫ cos(x sin θ) dθ` over a full period with the
/// trapezoidal rule, which converges geometrically once the node count
/// exceeds `|x|`. The aliasing error is bounded by `2|J_N(x)|`.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 1.0;
    }
    // J_N(x) is below 1e-17 once N exceeds x by a few times x^(1/3) + 30.
    let nodes = ((ax + 6.0 * ax.cbrt() + 40.0) as usize).next_multiple_of(4);
    // The integrand is symmetric about π/2 and π, so sum a quarter period.
    let quarter = nodes / 4;
    let h = TAU / nodes as f64;
    let mut acc = 0.5 * ((ax * 0.0f64.sin()).cos() + (ax * (quarter as f64 * h).sin()).cos());
    for k in 1..quarter {
        acc += (ax * (k as f64 * h).sin()).cos();
    }
    acc / quarter as f64
}

/// Mean Bessel correlation `(1/N)·Σ J₀(2π f_d τ)`, clamped into `(0, 1)`.
pub fn correlation_factor(tti: f64, dopplers: &[f64]) -> Result<f64> {
    if dopplers.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mean = dopplers.iter().map(|fd| bessel_j0(TAU * fd * tti)).sum::<f64>() / dopplers.len() as f64;
    Ok(mean.clamp(ALPHA_MIN, ALPHA_MAX))
}

/// Derivative of `S / (I + σ²)` with respect to `I`.
pub fn measurement_jacobian(signal_power: f64, ipv: f64, noise: f64) -> Result<f64> {
    let denom = ipv + noise;
    if !(denom > 0.0) {
        return Err(Error::DegenerateDenominator(denom));
    }
    Ok(-signal_power / (denom * denom))
}

/// Variance of the product of the two marginal Gaussian error terms.
pub fn measurement_noise_variance(quant_var: f64, map_var: f64) -> f64 {
    quant_var * map_var / (quant_var + map_var)
}

/// Posterior of the scalar filter after the latest update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkfState {
    /// Most recent posterior IPV estimate, W.
    pub est_prev: f64,
    /// The estimate before that, W.
    pub est_prev2: f64,
    /// Posterior error covariance, W².
    pub cov: f64,
    pub alpha: f64,
}

/// Predicted mean and covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prior {
    pub mean: f64,
    pub cov: f64,
}

/// Quantities computed by one measurement update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateTrace {
    pub prior: Prior,
    pub jacobian: f64,
    pub innovation: f64,
    pub innovation_var: f64,
    pub gain: f64,
    pub posterior_cov: f64,
}

impl UpdateTrace {
    pub fn cov_contracted(&self) -> bool {
        self.posterior_cov <= self.prior.cov
    }
}

/// Fixed filter parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkfParams {
    pub alpha: f64,
    pub process_noise_var: f64,
    pub process_noise_mode: ProcessNoiseMode,
    /// Observation noise variance.
    pub measurement_var: f64,
}

impl EkfParams {
    pub fn from_config(cfg: &DssmConfig, alpha: f64, quant_var: f64) -> Self {
        Self {
            alpha,
            process_noise_var: cfg.process_noise_var,
            process_noise_mode: cfg.process_noise_mode,
            measurement_var: measurement_noise_variance(quant_var, cfg.cqi_map_error_var),
        }
    }

    fn process_noise(&self, mean: f64) -> f64 {
        match self.process_noise_mode {
            ProcessNoiseMode::Linear => self.process_noise_var,
            ProcessNoiseMode::Normalized => self.process_noise_var * mean * mean,
        }
    }
}

impl EkfState {
    /// Both estimates at the noise floor, covariance at the process noise.
    pub fn warm_start(noise: f64, params: &EkfParams) -> Self {
        Self {
            est_prev: noise,
            est_prev2: noise,
            cov: params.process_noise(noise),
            alpha: params.alpha,
        }
    }
}

/// Two-tap transition of the mean and covariance propagation.
pub fn ekf_predict(state: &EkfState, params: &EkfParams) -> Prior {
    let a = state.alpha;
    let mean = a * state.est_prev + (1.0 - a) * state.est_prev2;
    Prior {
        mean,
        cov: a * a * state.cov + params.process_noise(mean),
    }
}

/// Measurement update against an observed linear SINR.
pub fn ekf_update(
    state: &EkfState,
    prior: Prior,
    observed_sinr: f64,
    signal_power: f64,
    noise: f64,
    params: &EkfParams,
) -> Result<(EkfState, UpdateTrace)> {
    let g = measurement_jacobian(signal_power, prior.mean, noise)?;
    let predicted = signal_power / (prior.mean + noise);
    kalman_correct(state, prior, observed_sinr - predicted, g, params.measurement_var)
}

/// Scalar Kalman correction for a linearized observation with slope `g`
/// and noise variance `r`. The posterior mean is kept non-negative.
pub fn kalman_correct(
    state: &EkfState,
    prior: Prior,
    innovation: f64,
    g: f64,
    r: f64,
) -> Result<(EkfState, UpdateTrace)> {
    if !(prior.cov >= 0.0) {
        return Err(Error::NumericalBreakdown(prior.cov));
    }
    let s = g * prior.cov * g + r;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::NumericalBreakdown(s));
    }
    let gain = prior.cov * g / s;
    let kg = gain * g;
    debug_assert!((0.0..=1.0 + 1e-12).contains(&kg), "K·G = {kg}");
    let mean = (prior.mean + gain * innovation).max(0.0);
    // (1 − K·G)·Σ written as Σ·R/S, which cannot round below zero.
    let cov = prior.cov * r / s;
    let next = EkfState {
        est_prev: mean,
        est_prev2: state.est_prev,
        cov,
        alpha: state.alpha,
    };
    Ok((
        next,
        UpdateTrace {
            prior,
            jacobian: g,
            innovation,
            innovation_var: s,
            gain,
            posterior_cov: cov,
        },
    ))
}

/// Propagates the mean `steps` TTIs ahead without touching the filter.
pub fn extrapolate(state: &EkfState, steps: usize) -> f64 {
    let (mut cur, mut prev) = (state.est_prev, state.est_prev2);
    for _ in 0..steps {
        let next = state.alpha * cur + (1.0 - state.alpha) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Moving-average recursion `a·I(t−2) + (1−a)·Î(t−1)`.
pub fn ma_predict(delayed_ipv: f64, prev_estimate: f64, smoothing: f64) -> f64 {
    smoothing * delayed_ipv + (1.0 - smoothing) * prev_estimate
}

/// The genie sees the true SINR.
pub fn genie_sinr(true_sinr: f64) -> f64 {
    true_sinr
}

/// Everything a predictor may be offered at one TTI. Each predictor reads
/// only the fields it is entitled to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub tti: usize,
    pub noise: f64,
    /// Signal power of the current TTI, known at the AP.
    pub signal_power: f64,
    /// Report delivered this TTI: reconstructed linear SINR and the signal
    /// power at its measurement time.
    pub report: Option<DeliveredReport>,
    /// True IPV two TTIs ago, when it exists.
    pub delayed_ipv: Option<f64>,
    /// True IPV of the current TTI.
    pub true_ipv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveredReport {
    pub sinr: f64,
    pub signal_power: f64,
    pub tti_measured: usize,
}

/// Online interference predictor for one device.
pub trait InterferencePredictor: Send {
    fn kind(&self) -> PredictorKind;

    /// Consumes the information available at `obs.tti` and returns the IPV
    /// estimate used for link adaptation at that TTI.
    fn predict(&mut self, obs: &Observation) -> Result<f64>;
}

/// Running count of filter updates and covariance-contraction failures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EkfDiagnostics {
    pub updates: u64,
    pub contraction_violations: u64,
}

impl std::ops::AddAssign for EkfDiagnostics {
    fn add_assign(&mut self, rhs: Self) {
        self.updates += rhs.updates;
        self.contraction_violations += rhs.contraction_violations;
    }
}

#[derive(Debug, Clone)]
pub struct EkfPredictor {
    params: EkfParams,
    state: EkfState,
    lookahead: usize,
    diagnostics: EkfDiagnostics,
}

impl EkfPredictor {
    /// `lookahead` is the number of TTIs the estimate is extrapolated past
    /// the latest report, normally the reporting delay.
    pub fn new(params: EkfParams, noise: f64, lookahead: usize) -> Self {
        Self {
            state: EkfState::warm_start(noise, &params),
            params,
            lookahead,
            diagnostics: EkfDiagnostics::default(),
        }
    }

    pub fn state(&self) -> &EkfState {
        &self.state
    }

    pub fn diagnostics(&self) -> EkfDiagnostics {
        self.diagnostics
    }
}

impl InterferencePredictor for EkfPredictor {
    fn kind(&self) -> PredictorKind {
        PredictorKind::Ekf
    }

    fn predict(&mut self, obs: &Observation) -> Result<f64> {
        if let Some(report) = obs.report {
            let prior = ekf_predict(&self.state, &self.params);
            let (next, trace) = ekf_update(&self.state, prior, report.sinr, report.signal_power, obs.noise, &self.params)?;
            self.diagnostics.updates += 1;
            if !trace.cov_contracted() {
                self.diagnostics.contraction_violations += 1;
            }
            self.state = next;
        }
        Ok(extrapolate(&self.state, self.lookahead))
    }
}

#[derive(Debug, Clone)]
pub struct MovingAveragePredictor {
    smoothing: f64,
    estimate: Option<f64>,
    floor: f64,
}

impl MovingAveragePredictor {
    /// Before any delayed measurement exists the estimate sits at `floor`.
    pub fn new(smoothing: f64, floor: f64) -> Self {
        Self {
            smoothing,
            estimate: None,
            floor,
        }
    }
}

impl InterferencePredictor for MovingAveragePredictor {
    fn kind(&self) -> PredictorKind {
        PredictorKind::Ma
    }

    fn predict(&mut self, obs: &Observation) -> Result<f64> {
        if let Some(delayed) = obs.delayed_ipv {
            let next = match self.estimate {
                Some(prev) => ma_predict(delayed, prev, self.smoothing),
                None => delayed,
            };
            self.estimate = Some(next);
        }
        Ok(self.estimate.unwrap_or(self.floor))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GeniePredictor;

impl InterferencePredictor for GeniePredictor {
    fn kind(&self) -> PredictorKind {
        PredictorKind::Genie
    }

    fn predict(&mut self, obs: &Observation) -> Result<f64> {
        Ok(obs.true_ipv)
    }
}
