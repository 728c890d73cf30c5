//! Per-link channel: InF-DL pathloss, Gauss-Markov shadowing, sum-of-sinusoids
//! small-scale fading and smoothed LOS/NLOS blending.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{db_to_linear, Error, Result};

/// Smallest distance fed to the pathloss formulas.
pub const MIN_DISTANCE: f64 = 1.0;
pub const BETA_MIN: f64 = 0.001;
pub const BETA_MAX: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
    /// Maximum Doppler frequency in Hz.
    pub doppler_freq: f64,
    pub shadow_std_los: f64,
    pub shadow_std_nlos: f64,
    /// Shadowing decorrelation distance in meters.
    pub decorrelation_distance: f64,
    /// Rician K-factor of the LOS fading process, dB.
    pub rician_k_db: f64,
    /// Time constant of the LOS blend factor, in TTIs.
    pub los_blend_time_constant: f64,
    /// TTIs between re-draws of the LOS indicator.
    pub los_update_interval: u64,
    pub n_sinusoids: usize,
    /// InF clutter density used by the LOS probability.
    pub clutter_density: f64,
    /// InF clutter size in meters used by the LOS probability.
    pub clutter_size: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            carrier_freq: 6e9,
            doppler_freq: 80.0,
            shadow_std_los: 4.0,
            shadow_std_nlos: 7.2,
            decorrelation_distance: 10.0,
            rician_k_db: 7.0,
            los_blend_time_constant: 50.0,
            los_update_interval: 100,
            n_sinusoids: 16,
            clutter_density: 0.6,
            clutter_size: 2.0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("channel: {m}")));
        if !(0.5e9..=100e9).contains(&self.carrier_freq) {
            return bad("carrier_freq must lie in [0.5, 100] GHz");
        }
        if !(self.doppler_freq >= 0.0 && self.doppler_freq.is_finite()) {
            return bad("doppler_freq must be non-negative");
        }
        if !(self.shadow_std_los >= 0.0 && self.shadow_std_nlos >= 0.0) {
            return bad("shadowing standard deviations must be non-negative");
        }
        if !(self.decorrelation_distance > 0.0) {
            return bad("decorrelation_distance must be positive");
        }
        if !self.rician_k_db.is_finite() {
            return bad("rician_k_db must be finite");
        }
        if !(self.los_blend_time_constant > 0.0) {
            return bad("los_blend_time_constant must be positive");
        }
        if self.los_update_interval == 0 {
            return bad("los_update_interval must be at least 1");
        }
        if self.n_sinusoids < 8 {
            return bad("n_sinusoids must be at least 8");
        }
        if !(self.clutter_density > 0.0 && self.clutter_density < 1.0 && self.clutter_size > 0.0) {
            return bad("clutter_density must be in (0, 1) and clutter_size positive");
        }
        Ok(())
    }

    pub fn rician_k(&self) -> f64 {
        db_to_linear(self.rician_k_db)
    }
}

/// InF pathloss in dB. `los = false` gives the dense-clutter, low-BS
/// (InF-DL) NLOS value, which never drops below the LOS or InF-SL values.
pub fn pathloss_db(distance: f64, carrier_freq: f64, los: bool) -> f64 {
    let d = distance.max(MIN_DISTANCE).log10();
    let f = (carrier_freq / 1e9).log10();
    let pl_los = 31.84 + 21.5 * d + 19.0 * f;
    if los {
        return pl_los;
    }
    let pl_sl = 33.0 + 25.5 * d + 20.0 * f;
    let pl_dl = 18.6 + 35.7 * d + 20.0 * f;
    pl_dl.max(pl_sl).max(pl_los)
}

/// InF-DL LOS probability `exp(-d / k)` with `k = -d_clutter / ln(1 - r)`.
pub fn los_probability(distance: f64, cfg: &ChannelConfig) -> f64 {
    let k = -cfg.clutter_size / (1.0 - cfg.clutter_density).ln();
    (-distance.max(0.0) / k).exp()
}

/// Sum-of-sinusoids fading process (Zheng-Xiao) with an optional rotating
/// specular component (Xiao-Zheng-Beaulieu Rician model). Unit mean power.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingGenerator {
    omega_tti: f64,
    /// `cos α_n` for the in-phase branch.
    cos_alpha: Vec<f64>,
    /// `sin α_n` for the quadrature branch.
    sin_alpha: Vec<f64>,
    phase_i: Vec<f64>,
    phase_q: Vec<f64>,
    rician_k: f64,
    los_cos_theta: f64,
    los_phase: f64,
    tick: u64,
}

impl FadingGenerator {
    /// `rician_k = 0` yields Rayleigh fading.
    pub fn new<R: Rng + ?Sized>(doppler_freq: f64, tti: f64, n_sinusoids: usize, rician_k: f64, rng: &mut R) -> Self {
        let uniform_phase = |rng: &mut R| rng.random::<f64>() * TAU - PI;
        let theta = uniform_phase(rng);
        let m = n_sinusoids as f64;
        let alphas: Vec<f64> = (1..=n_sinusoids)
            .map(|n| (TAU * n as f64 - PI + theta) / (4.0 * m))
            .collect();
        let phase_i = (0..n_sinusoids).map(|_| uniform_phase(rng)).collect();
        let phase_q = (0..n_sinusoids).map(|_| uniform_phase(rng)).collect();
        let los_cos_theta = uniform_phase(rng).cos();
        let los_phase = uniform_phase(rng);
        Self {
            omega_tti: TAU * doppler_freq * tti,
            cos_alpha: alphas.iter().map(|a| a.cos()).collect(),
            sin_alpha: alphas.iter().map(|a| a.sin()).collect(),
            phase_i,
            phase_q,
            rician_k,
            los_cos_theta,
            los_phase,
            tick: 0,
        }
    }

    /// Complex gain `(re, im)` at the current tick.
    pub fn value(&self) -> (f64, f64) {
        let wt = self.omega_tti * self.tick as f64;
        let scale = (1.0 / self.cos_alpha.len() as f64).sqrt();
        let re: f64 = self
            .cos_alpha
            .iter()
            .zip(&self.phase_i)
            .map(|(c, p)| (wt * c + p).cos())
            .sum::<f64>()
            * scale;
        let im: f64 = self
            .sin_alpha
            .iter()
            .zip(&self.phase_q)
            .map(|(s, p)| (wt * s + p).cos())
            .sum::<f64>()
            * scale;
        if self.rician_k == 0.0 {
            return (re, im);
        }
        let spec = wt * self.los_cos_theta + self.los_phase;
        let k = self.rician_k;
        let norm = (1.0 + k).sqrt();
        ((re + k.sqrt() * spec.cos()) / norm, (im + k.sqrt() * spec.sin()) / norm)
    }

    pub fn power(&self) -> f64 {
        let (re, im) = self.value();
        re * re + im * im
    }

    pub fn advance(&mut self) {
        self.tick += 1;
    }
}

/// Channel state of one (transmitter AP, receiving device) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannel {
    pub fading_los: FadingGenerator,
    pub fading_nlos: FadingGenerator,
    pub shadow_los_db: f64,
    pub shadow_nlos_db: f64,
    pub los_indicator: bool,
    pub beta: f64,
    ttis: u64,
}

impl LinkChannel {
    /// Fresh link at `distance`. Shadowing starts from its stationary law and
    /// the blend factor from the settled value of the drawn LOS state.
    pub fn new<R: Rng + ?Sized>(
        cfg: &ChannelConfig,
        tti: f64,
        distance: f64,
        fading_rng: &mut R,
        shadow_rng: &mut R,
        los_rng: &mut R,
    ) -> Self {
        let fading_los = FadingGenerator::new(cfg.doppler_freq, tti, cfg.n_sinusoids, cfg.rician_k(), fading_rng);
        let fading_nlos = FadingGenerator::new(cfg.doppler_freq, tti, cfg.n_sinusoids, 0.0, fading_rng);
        let shadow_los_db = cfg.shadow_std_los * shadow_rng.sample::<f64, _>(StandardNormal);
        let shadow_nlos_db = cfg.shadow_std_nlos * shadow_rng.sample::<f64, _>(StandardNormal);
        let los_indicator = los_rng.random_bool(los_probability(distance, cfg));
        Self {
            fading_los,
            fading_nlos,
            shadow_los_db,
            shadow_nlos_db,
            los_indicator,
            beta: if los_indicator { BETA_MAX } else { BETA_MIN },
            ttis: 0,
        }
    }

    /// Re-draws the LOS indicator every `los_update_interval` TTIs and moves
    /// the blend factor toward it by exponential smoothing.
    pub fn step_los_state<R: Rng + ?Sized>(&mut self, p_los: f64, cfg: &ChannelConfig, rng: &mut R) {
        self.ttis += 1;
        if self.ttis.is_multiple_of(cfg.los_update_interval) {
            self.los_indicator = rng.random_bool(p_los.clamp(0.0, 1.0));
        }
        self.beta = smooth_beta(self.beta, self.los_indicator, cfg.los_blend_time_constant);
    }

    /// Gauss-Markov update of both shadowing states for a link endpoint
    /// displacement in meters.
    pub fn step_shadowing<R: Rng + ?Sized>(&mut self, displacement: f64, cfg: &ChannelConfig, rng: &mut R) {
        let rho = shadow_correlation(displacement, cfg.decorrelation_distance);
        let innovation = (1.0 - rho * rho).sqrt();
        let w_los: f64 = rng.sample(StandardNormal);
        let w_nlos: f64 = rng.sample(StandardNormal);
        self.shadow_los_db = rho * self.shadow_los_db + cfg.shadow_std_los * innovation * w_los;
        self.shadow_nlos_db = rho * self.shadow_nlos_db + cfg.shadow_std_nlos * innovation * w_nlos;
    }

    pub fn step_fading(&mut self) {
        self.fading_los.advance();
        self.fading_nlos.advance();
    }

    /// Consolidated linear power gain at `distance`.
    pub fn gain(&self, distance: f64, cfg: &ChannelConfig) -> f64 {
        let los = self.fading_los.power()
            * db_to_linear(-(pathloss_db(distance, cfg.carrier_freq, true) + self.shadow_los_db));
        let nlos = self.fading_nlos.power()
            * db_to_linear(-(pathloss_db(distance, cfg.carrier_freq, false) + self.shadow_nlos_db));
        blend_gain(self.beta, los, nlos)
    }
}

/// Shadowing correlation between positions `displacement` meters apart.
pub fn shadow_correlation(displacement: f64, decorrelation_distance: f64) -> f64 {
    (-displacement.max(0.0) / decorrelation_distance).exp()
}

/// One smoothing step of the blend factor, clamped to `[BETA_MIN, BETA_MAX]`.
pub fn smooth_beta(beta: f64, los: bool, time_constant: f64) -> f64 {
    let target = if los { 1.0 } else { 0.0 };
    let a = 1.0 - (-1.0 / time_constant).exp();
    (beta + a * (target - beta)).clamp(BETA_MIN, BETA_MAX)
}

/// `β·|H_LOS|² + √(1−β²)·|H_NLOS|²`. The weights are not normalized.
pub fn blend_gain(beta: f64, los_gain: f64, nlos_gain: f64) -> f64 {
    beta * los_gain + (1.0 - beta * beta).sqrt() * nlos_gain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    #[test]
    fn inf_los_spot_value() {
        let pl = pathloss_db(10.0, 6e9, true);
        assert!((pl - 68.1249).abs() < 1e-3, "{pl}");
    }

    #[test]
    fn distance_is_clamped_to_one_meter() {
        for los in [true, false] {
            assert_eq!(pathloss_db(0.5, 6e9, los), pathloss_db(1.0, 6e9, los));
            assert_eq!(pathloss_db(0.0, 6e9, los), pathloss_db(1.0, 6e9, los));
        }
    }

    #[test]
    fn nlos_never_below_los() {
        for fc in [0.5e9, 6e9, 28e9, 100e9] {
            for i in 0..100 {
                let d = 0.5 + i as f64 * 2.0;
                assert!(pathloss_db(d, fc, false) >= pathloss_db(d, fc, true));
            }
        }
    }

    #[test]
    fn los_probability_shape() {
        let cfg = ChannelConfig::default();
        assert_eq!(los_probability(0.0, &cfg), 1.0);
        let mut prev = 1.0;
        for i in 1..400 {
            let p = los_probability(i as f64 * 0.25, &cfg);
            assert!(p <= prev && p > 0.0);
            prev = p;
        }
        assert!(los_probability(10.0, &cfg) <= los_probability(5.0, &cfg));
        assert!(los_probability(1e4, &cfg) < 1e-12);
    }

    #[test]
    fn beta_converges_to_clamps() {
        let cfg = ChannelConfig::default();
        let mut beta = 0.5;
        for _ in 0..2000 {
            beta = smooth_beta(beta, true, cfg.los_blend_time_constant);
        }
        assert_eq!(beta, BETA_MAX);
        for _ in 0..2000 {
            beta = smooth_beta(beta, false, cfg.los_blend_time_constant);
        }
        assert_eq!(beta, BETA_MIN);
    }

    #[test]
    fn beta_follows_exponential_trajectory() {
        let mut beta = 0.5;
        for _ in 0..50 {
            beta = smooth_beta(beta, true, 50.0);
        }
        let expected = 0.5 + 0.5 * (1.0 - (-1f64).exp());
        assert!((beta - expected).abs() < 1e-12, "{beta} vs {expected}");
    }

    #[test]
    fn los_state_with_zero_probability_settles_low() {
        let cfg = ChannelConfig::default();
        let mut r = SimRng::seed_from_u64(1);
        let mut link = LinkChannel::new(&cfg, 1e-4, 1.0, &mut r.clone(), &mut r.clone(), &mut r);
        link.los_indicator = true;
        link.beta = 0.5;
        for _ in 0..5000 {
            link.step_los_state(0.0, &cfg, &mut r);
            assert!(link.beta > 0.0 && link.beta < 1.0);
        }
        assert_eq!(link.beta, BETA_MIN);
    }

    #[test]
    fn shadow_correlation_at_default_step() {
        let rho = shadow_correlation(2e-4, 10.0);
        assert!((rho - (-2e-5f64).exp()).abs() < 1e-15);
        assert!((rho - 0.99998).abs() < 1e-9);
        assert_eq!(shadow_correlation(0.0, 10.0), 1.0);
    }

    #[test]
    fn zero_displacement_keeps_shadowing() {
        let cfg = ChannelConfig::default();
        let mut r = SimRng::seed_from_u64(2);
        let mut link = LinkChannel::new(&cfg, 1e-4, 5.0, &mut r.clone(), &mut r.clone(), &mut r);
        let (a, b) = (link.shadow_los_db, link.shadow_nlos_db);
        link.step_shadowing(0.0, &cfg, &mut r);
        assert_eq!((link.shadow_los_db, link.shadow_nlos_db), (a, b));
    }

    #[test]
    fn shadowing_is_stationary() {
        let cfg = ChannelConfig::default();
        let mut r = SimRng::seed_from_u64(3);
        let mut link = LinkChannel::new(&cfg, 1e-4, 5.0, &mut r.clone(), &mut r.clone(), &mut r);
        let n = 1_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            // One decorrelation distance per step keeps the run long in
            // effective samples.
            link.step_shadowing(cfg.decorrelation_distance, &cfg, &mut r);
            s1 += link.shadow_los_db;
            s2 += link.shadow_los_db * link.shadow_los_db;
        }
        let mean = s1 / n as f64;
        let std = (s2 / n as f64 - mean * mean).sqrt();
        assert!((std / 4.0 - 1.0).abs() < 0.03, "std {std}");
    }

    #[test]
    fn zero_doppler_freezes_fading() {
        let mut r = SimRng::seed_from_u64(4);
        let mut g = FadingGenerator::new(0.0, 1e-4, 16, 0.0, &mut r);
        let first = g.value();
        for _ in 0..100 {
            g.advance();
            assert_eq!(g.value(), first);
        }
    }

    fn mean_power(k: f64, seed: u64) -> f64 {
        let mut r = SimRng::seed_from_u64(seed);
        let mut g = FadingGenerator::new(80.0, 1e-4, 16, k, &mut r);
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += g.power();
            g.advance();
        }
        acc / n as f64
    }

    #[test]
    fn fading_has_unit_power() {
        for seed in [5, 6] {
            let rayleigh = mean_power(0.0, seed);
            let rician = mean_power(db_to_linear(7.0), seed);
            assert!((rayleigh - 1.0).abs() < 0.02, "{rayleigh}");
            assert!((rician - 1.0).abs() < 0.02, "{rician}");
        }
    }

    #[test]
    fn fading_lag_one_correlation_of_real_part() {
        let mut r = SimRng::seed_from_u64(7);
        let mut g = FadingGenerator::new(80.0, 1e-4, 16, 0.0, &mut r);
        let n = 1_000_000;
        let mut prev = g.value().0;
        let (mut c0, mut c1, mut mean) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            g.advance();
            let x = g.value().0;
            c0 += prev * prev;
            c1 += prev * x;
            mean += prev;
            prev = x;
        }
        let mean = mean / n as f64;
        let rho = (c1 / n as f64 - mean * mean) / (c0 / n as f64 - mean * mean);
        assert!((0.997..=1.0).contains(&rho), "{rho}");
    }

    #[test]
    fn blend_is_verbatim() {
        let (a, b) = (3.7e-7, 1.1e-8);
        for beta in [0.001, 0.25, 0.5, 0.9, 0.999] {
            assert_eq!(blend_gain(beta, a, b), beta * a + (1.0 - beta * beta).sqrt() * b);
        }
        // |h_LOS|²=2, |h_NLOS|²=1, 60 dB on both branches, β=0.5.
        let g = blend_gain(0.5, 2.0 * 1e-6, 1.0 * 1e-6);
        assert!((g - 1.8660254e-6).abs() < 1e-12);
    }

    #[test]
    fn settled_los_gain_matches_pathloss() {
        let cfg = ChannelConfig::default();
        let mut r = SimRng::seed_from_u64(8);
        let mut link = LinkChannel::new(&cfg, 1e-4, 5.0, &mut r.clone(), &mut r.clone(), &mut r);
        link.beta = BETA_MAX;
        link.shadow_los_db = 0.0;
        link.shadow_nlos_db = 0.0;
        let d = 5.0;
        let expected = BETA_MAX * link.fading_los.power() * db_to_linear(-pathloss_db(d, cfg.carrier_freq, true))
            + (1.0 - BETA_MAX * BETA_MAX).sqrt()
                * link.fading_nlos.power()
                * db_to_linear(-pathloss_db(d, cfg.carrier_freq, false));
        assert!((link.gain(d, &cfg) / expected - 1.0).abs() < 1e-12);
        assert!(link.gain(d, &cfg) > 0.0);
    }
}
