//! Synthetic observed prices `Y = X + U`.
//!
//! The efficient log-price `X` is an Ornstein-Uhlenbeck process (exact
//! transition) or a mean-reverting price with square-root stochastic variance
//! (full-truncation Euler). The noise `U` is an iid Gaussian component plus a
//! stationary Gaussian AR(1) component, indexed by observation count.
//!
//! Every simulator is a pure function of its configuration and seed. Price
//! and noise draw from separate ChaCha streams of the same seed, so either
//! can be regenerated without touching the other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::NeumaierSum;
use crate::series::TickSeries;

/// Seconds in one unit of simulated horizon (a 6.5 hour session).
pub const SESSION_SECONDS: f64 = 23_400.0;

const PRICE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuConfig {
    /// Variance rate per unit of time.
    pub sigma2: f64,
    /// Mean-reversion speed.
    pub delta: f64,
    pub mu: f64,
    pub x0: f64,
}

impl OuConfig {
    /// σ² = 6e-5, δ = 0.5, μ = 1.6, started at μ.
    pub fn benchmark() -> Self {
        Self {
            sigma2: 6e-5,
            delta: 0.5,
            mu: 1.6,
            x0: 1.6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::param("sigma2", format!("must be > 0, got {}", self.sigma2)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::param("delta", format!("must be >= 0, got {}", self.delta)));
        }
        if !self.mu.is_finite() || !self.x0.is_finite() {
            return Err(Error::param("mu", "mu and x0 must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvConfig {
    pub delta: f64,
    pub mu1: f64,
    pub kappa: f64,
    pub mu2: f64,
    pub gamma_vol: f64,
    pub rho_lev: f64,
    pub sig2_0: f64,
}

impl SvConfig {
    /// Daily-scale parameters: κ = 5/252, μ₂ = 0.04/252, γ = 0.05/252,
    /// leverage -0.5, variance started at μ₂.
    pub fn appendix() -> Self {
        Self {
            delta: 0.5,
            mu1: 1.6,
            kappa: 5.0 / 252.0,
            mu2: 0.04 / 252.0,
            gamma_vol: 0.05 / 252.0,
            rho_lev: -0.5,
            sig2_0: 0.04 / 252.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kappa", self.kappa), ("mu2", self.mu2), ("gamma_vol", self.gamma_vol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.sig2_0 > 0.0 && self.sig2_0.is_finite()) {
            return Err(Error::param("sig2_0", format!("must be > 0, got {}", self.sig2_0)));
        }
        if !(self.rho_lev.abs() <= 1.0) {
            return Err(Error::param(
                "rho_lev",
                format!("must lie in [-1, 1], got {}", self.rho_lev),
            ));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) || !self.mu1.is_finite() {
            return Err(Error::param("delta", "delta must be >= 0 and mu1 finite"));
        }
        Ok(())
    }
}

/// `U_i = V_i + ε_i`, `V` iid N(0, var_v), `ε` stationary AR(1) with
/// variance `var_eps` and coefficient `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1NoiseConfig {
    pub var_v: f64,
    pub var_eps: f64,
    pub rho: f64,
}

impl Ar1NoiseConfig {
    /// E V² = 2.9e-8, E ε² = 4.3e-8.
    pub fn benchmark(rho: f64) -> Self {
        Self {
            var_v: 2.9e-8,
            var_eps: 4.3e-8,
            rho,
        }
    }

    /// Noise levels of the stochastic-volatility design: 1.9e-7 and 1.3e-7.
    pub fn appendix(rho: f64) -> Self {
        Self {
            var_v: 1.9e-7,
            var_eps: 1.3e-7,
            rho,
        }
    }

    pub fn none() -> Self {
        Self {
            var_v: 0.0,
            var_eps: 0.0,
            rho: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::param("rho", format!("|rho| must be < 1, got {}", self.rho)));
        }
        if !(self.var_v >= 0.0 && self.var_v.is_finite()) {
            return Err(Error::param("var_v", format!("must be >= 0, got {}", self.var_v)));
        }
        if !(self.var_eps >= 0.0 && self.var_eps.is_finite()) {
            return Err(Error::param("var_eps", format!("must be >= 0, got {}", self.var_eps)));
        }
        Ok(())
    }

    pub fn var_u(&self) -> f64 {
        self.var_v + self.var_eps
    }

    /// Model autocovariance γ(j).
    pub fn autocov(&self, j: usize) -> f64 {
        if j == 0 {
            self.var_u()
        } else {
            self.var_eps * self.rho.powi(j as i32)
        }
    }

    pub fn acf(&self, j: usize) -> f64 {
        let v = self.var_u();
        if v == 0.0 {
            0.0
        } else {
            self.autocov(j) / v
        }
    }

    /// Long-run variance `Var(U) + 2 Σ_{j≥1} γ(j)` in closed form.
    pub fn sigma2_u(&self) -> f64 {
        self.var_v + self.var_eps * (1.0 + self.rho) / (1.0 - self.rho)
    }

    /// `Var(U) + 2 Σ_{j=1}^{i_n} γ(j)`.
    pub fn truncated_sigma2_u(&self, i_n: usize) -> f64 {
        self.var_u() + 2.0 * (1..=i_n).map(|j| self.autocov(j)).sum::<f64>()
    }
}

pub fn model_sigma2_u(cfg: &Ar1NoiseConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.sigma2_u())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PriceModel {
    Ou(OuConfig),
    Sv(SvConfig),
}

impl PriceModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            PriceModel::Ou(c) => c.validate(),
            PriceModel::Sv(c) => c.validate(),
        }
    }
}

/// SplitMix64 finaliser applied to `base + (index + 1)·φ`; used to derive
/// per-replication seeds.
pub fn split_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn price_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PRICE_STREAM);
    rng
}

pub fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    rng
}

#[inline]
fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Exact one-step OU transition over a fixed time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuTransition {
    pub mu: f64,
    /// `e^{-δΔ}`
    pub decay: f64,
    /// Conditional standard deviation.
    pub sd: f64,
}

impl OuTransition {
    pub fn new(cfg: &OuConfig, dt: f64) -> Self {
        let (decay, var) = if cfg.delta == 0.0 {
            (1.0, cfg.sigma2 * dt)
        } else {
            let decay = (-cfg.delta * dt).exp();
            // 1 - e^{-2δΔ} without cancellation
            let var = cfg.sigma2 * (-(-2.0 * cfg.delta * dt).exp_m1()) / (2.0 * cfg.delta);
            (decay, var)
        };
        Self {
            mu: cfg.mu,
            decay,
            sd: var.sqrt(),
        }
    }

    #[inline]
    pub fn conditional_mean(&self, x: f64) -> f64 {
        self.mu + (x - self.mu) * self.decay
    }

    #[inline]
    pub fn step(&self, x: f64, z: f64) -> f64 {
        self.conditional_mean(x) + self.sd * z
    }
}

fn regular_grid(n_obs: usize, horizon: f64) -> Result<Vec<f64>> {
    if n_obs < 2 {
        return Err(Error::param(
            "n_obs",
            format!("need at least 2 observations, got {n_obs}"),
        ));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("horizon", format!("must be > 0, got {horizon}")));
    }
    let dt = horizon / (n_obs - 1) as f64;
    Ok((0..n_obs).map(|i| i as f64 * dt).collect())
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::param("times", "need at least 2 grid points"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("times", "grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// OU path on the regular grid `t_i = i·horizon/(n_obs-1)`.
pub fn simulate_ou(cfg: &OuConfig, n_obs: usize, horizon: f64, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let grid = regular_grid(n_obs, horizon)?;
    let step = OuTransition::new(cfg, grid[1] - grid[0]);
    let mut rng = price_rng(seed);
    let mut xs = Vec::with_capacity(n_obs);
    let mut x = cfg.x0;
    xs.push(x);
    for _ in 1..n_obs {
        x = step.step(x, std_normal(&mut rng));
        xs.push(x);
    }
    Ok(xs)
}

/// OU path observed at arbitrary increasing times.
pub fn simulate_ou_on_grid(cfg: &OuConfig, times: &[f64], seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_grid(times)?;
    let mut rng = price_rng(seed);
    let mut xs = Vec::with_capacity(times.len());
    let mut x = cfg.x0;
    xs.push(x);
    for w in times.windows(2) {
        x = OuTransition::new(cfg, w[1] - w[0]).step(x, std_normal(&mut rng));
        xs.push(x);
    }
    Ok(xs)
}

/// Stochastic-volatility path on the regular grid. Returns the log-price and
/// the (truncated, hence nonnegative) variance path.
pub fn simulate_sv(cfg: &SvConfig, n_obs: usize, horizon: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = regular_grid(n_obs, horizon)?;
    simulate_sv_on_grid(cfg, &grid, seed)
}

pub fn simulate_sv_on_grid(cfg: &SvConfig, times: &[f64], seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    check_grid(times)?;
    let mut rng = price_rng(seed);
    let n_obs = times.len();
    let rho_perp = (1.0 - cfg.rho_lev * cfg.rho_lev).max(0.0).sqrt();
    let mut xs = Vec::with_capacity(n_obs);
    let mut vs = Vec::with_capacity(n_obs);
    let mut x = cfg.mu1;
    let mut v = cfg.sig2_0;
    xs.push(x);
    vs.push(v.max(0.0));
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let sq = dt.sqrt();
        let z_w = std_normal(&mut rng);
        let z_b = cfg.rho_lev * z_w + rho_perp * std_normal(&mut rng);
        let vp = v.max(0.0);
        let vol = vp.sqrt();
        x += -cfg.delta * (x - cfg.mu1) * dt + vol * sq * z_w;
        v += cfg.kappa * (cfg.mu2 - vp) * dt + cfg.gamma_vol * vol * sq * z_b;
        xs.push(x);
        vs.push(v.max(0.0));
    }
    Ok((xs, vs))
}

fn fill_noise(cfg: &Ar1NoiseConfig, n_obs: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sd_v = cfg.var_v.sqrt();
    let sd_eps = cfg.var_eps.sqrt();
    let sd_innov = ((1.0 - cfg.rho * cfg.rho) * cfg.var_eps).sqrt();
    let mut us = Vec::with_capacity(n_obs);
    let mut eps = 0.0;
    for i in 0..n_obs {
        let z_eps = std_normal(rng);
        let z_v = std_normal(rng);
        eps = if i == 0 {
            sd_eps * z_eps
        } else {
            cfg.rho * eps + sd_innov * z_eps
        };
        us.push(sd_v * z_v + eps);
    }
    us
}

pub fn simulate_noise(cfg: &Ar1NoiseConfig, n_obs: usize, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    if n_obs < 1 {
        return Err(Error::param("n_obs", "need at least 1 observation"));
    }
    Ok(fill_noise(cfg, n_obs, &mut noise_rng(seed)))
}

/// A simulated observed path with its benchmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPath {
    pub series: TickSeries,
    pub efficient: Vec<f64>,
    /// ∫σ² over the horizon along this path.
    pub true_iv: f64,
    pub true_sigma2_u: f64,
    /// Variance path for stochastic-volatility designs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<Vec<f64>>,
}

pub fn simulate_observed(
    price: &PriceModel,
    noise: &Ar1NoiseConfig,
    n_obs: usize,
    horizon: f64,
    seed: u64,
) -> Result<SimPath> {
    simulate_observed_with_seeds(price, noise, n_obs, horizon, seed, seed)
}

/// As [`simulate_observed`] with separate seeds for the price and the noise.
pub fn simulate_observed_with_seeds(
    price: &PriceModel,
    noise: &Ar1NoiseConfig,
    n_obs: usize,
    horizon: f64,
    price_seed: u64,
    noise_seed: u64,
) -> Result<SimPath> {
    let grid = regular_grid(n_obs, horizon)?;
    build_path(price, noise, &grid, price_seed, noise_seed, true)
}

/// Observed path on an arbitrary time grid (e.g. from
/// [`crate::sampling::time_warp_grid`]); noise stays index based.
pub fn simulate_observed_on_grid(
    price: &PriceModel,
    noise: &Ar1NoiseConfig,
    times: &[f64],
    seed: u64,
) -> Result<SimPath> {
    check_grid(times)?;
    build_path(price, noise, times, seed, seed, false)
}

fn build_path(
    price: &PriceModel,
    noise: &Ar1NoiseConfig,
    grid: &[f64],
    price_seed: u64,
    noise_seed: u64,
    regular: bool,
) -> Result<SimPath> {
    price.validate()?;
    noise.validate()?;
    let n_obs = grid.len();
    let span = grid[n_obs - 1] - grid[0];
    let (efficient, variance, true_iv) = match price {
        PriceModel::Ou(cfg) => {
            let xs = if regular {
                simulate_ou(cfg, n_obs, span, price_seed)?
            } else {
                simulate_ou_on_grid(cfg, grid, price_seed)?
            };
            (xs, None, cfg.sigma2 * span)
        }
        PriceModel::Sv(cfg) => {
            let (xs, vs) = simulate_sv_on_grid(cfg, grid, price_seed)?;
            let iv: NeumaierSum = grid.windows(2).zip(&vs).map(|(w, v)| v * (w[1] - w[0])).collect();
            (xs, Some(vs), iv.value())
        }
    };
    let us = fill_noise(noise, n_obs, &mut noise_rng(noise_seed));
    let ys: Vec<f64> = efficient.iter().zip(&us).map(|(x, u)| x + u).collect();
    let ts: Vec<f64> = grid.iter().map(|t| (t - grid[0]) * SESSION_SECONDS).collect();
    let series = TickSeries::new(ts, ys, format!("sim seed={price_seed}"))?;
    Ok(SimPath {
        series,
        efficient,
        true_iv,
        true_sigma2_u: noise.sigma2_u(),
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::mean_sd;

    #[test]
    fn ou_transition_matches_closed_form() {
        let cfg = OuConfig::benchmark();
        let dt = 1.0 / 23_400.0;
        let tr = OuTransition::new(&cfg, dt);
        let x0 = 1.7;
        let mean = cfg.mu + (x0 - cfg.mu) * (-cfg.delta * dt).exp();
        let var = cfg.sigma2 * (1.0 - (-2.0 * cfg.delta * dt).exp()) / (2.0 * cfg.delta);
        assert!(((tr.conditional_mean(x0) - mean) / mean).abs() < 1e-12);
        // the naive form loses digits to cancellation, hence the looser bound
        assert!(((tr.sd * tr.sd - var) / var).abs() < 1e-9);
        // series expansion of the variance: σ²Δ(1 - δΔ + 2δ²Δ²/3)
        let series = cfg.sigma2 * dt * (1.0 - cfg.delta * dt + 2.0 * (cfg.delta * dt).powi(2) / 3.0);
        assert!(((tr.sd * tr.sd - series) / series).abs() < 1e-12);
    }

    #[test]
    fn ou_mean_matches_fine_euler() {
        let cfg = OuConfig {
            x0: 1.7,
            ..OuConfig::benchmark()
        };
        let dt = 1.0 / 23_400.0;
        let sub = 1000;
        let h = dt / sub as f64;
        // deterministic Euler of the conditional mean ODE dm = -δ(m-μ)dt
        let mut m = cfg.x0;
        for _ in 0..sub {
            m += -cfg.delta * (m - cfg.mu) * h;
        }
        let exact = OuTransition::new(&cfg, dt).conditional_mean(cfg.x0);
        assert!(((exact - m) / m).abs() < 1e-3);
        // increments rather than levels, which is the sensitive quantity
        let inc_exact = exact - cfg.x0;
        let inc_euler = m - cfg.x0;
        assert!(((inc_exact - inc_euler) / inc_exact).abs() < 1e-3);
    }

    #[test]
    fn zero_delta_is_brownian() {
        let cfg = OuConfig {
            sigma2: 4e-4,
            delta: 0.0,
            mu: 0.0,
            x0: 2.5,
        };
        let tr = OuTransition::new(&cfg, 0.25);
        assert_eq!(tr.step(2.5, 0.0), 2.5);
        assert!((tr.sd - (4e-4f64 * 0.25).sqrt()).abs() < 1e-18);
        let xs = simulate_ou(&cfg, 2, 1.0, 11).unwrap();
        assert_eq!(xs[0], 2.5);
    }

    #[test]
    fn ou_rejects_bad_input() {
        let cfg = OuConfig::benchmark();
        assert!(simulate_ou(&cfg, 1, 1.0, 0).is_err());
        assert!(simulate_ou(&cfg, 10, 0.0, 0).is_err());
        assert!(simulate_ou(&cfg, 10, -1.0, 0).is_err());
        let bad = OuConfig { sigma2: 0.0, ..cfg };
        assert!(simulate_ou(&bad, 10, 1.0, 0).is_err());
    }

    #[test]
    fn ou_realized_variance_near_sigma2() {
        let cfg = OuConfig::benchmark();
        let n = 23_401;
        let rvs: Vec<f64> = (0..40)
            .map(|s| {
                let xs = simulate_ou(&cfg, n, 1.0, s).unwrap();
                xs.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>()
            })
            .collect();
        let (m, sd) = mean_sd(&rvs).unwrap();
        let se = sd / (rvs.len() as f64).sqrt();
        assert!((m - 6e-5).abs() < 4.0 * se, "mean {m} se {se}");
    }

    #[test]
    fn sv_variance_stays_nonnegative() {
        let mut cfg = SvConfig::appendix();
        let (_, vs) = simulate_sv(&cfg, 5_000, 1.0, 3).unwrap();
        assert!(vs.iter().all(|v| *v >= 0.0));
        // violently volatile variance still truncates at zero
        cfg.gamma_vol = 5.0;
        cfg.sig2_0 = 1e-6;
        let (_, vs) = simulate_sv(&cfg, 5_000, 1.0, 3).unwrap();
        assert!(vs.iter().all(|v| *v >= 0.0));
        assert!(vs.iter().any(|v| *v == 0.0));
    }

    #[test]
    fn sv_fixed_point_without_vol_of_vol() {
        let cfg = SvConfig {
            gamma_vol: 1e-300,
            ..SvConfig::appendix()
        };
        let (_, vs) = simulate_sv(&cfg, 1_000, 1.0, 9).unwrap();
        assert!(vs.iter().all(|v| (v - cfg.mu2).abs() <= 1e-18));
    }

    #[test]
    fn sv_rejects_bad_config() {
        let bad = SvConfig {
            rho_lev: 1.5,
            ..SvConfig::appendix()
        };
        assert!(simulate_sv(&bad, 10, 1.0, 0).is_err());
        let bad = SvConfig {
            kappa: 0.0,
            ..SvConfig::appendix()
        };
        assert!(simulate_sv(&bad, 10, 1.0, 0).is_err());
    }

    #[test]
    fn noise_all_zero() {
        let us = simulate_noise(&Ar1NoiseConfig::none(), 100, 1).unwrap();
        assert!(us.iter().all(|u| *u == 0.0));
        assert!(simulate_noise(&Ar1NoiseConfig::benchmark(1.0), 10, 1).is_err());
    }

    #[test]
    fn model_long_run_variance() {
        let s = model_sigma2_u(&Ar1NoiseConfig::benchmark(-0.7)).unwrap();
        assert!((s - (2.9e-8 + 4.3e-8 * 0.3 / 1.7)).abs() < 1e-22);
        assert!((s - 3.659e-8).abs() < 1e-11);
        let s0 = model_sigma2_u(&Ar1NoiseConfig::benchmark(0.0)).unwrap();
        assert_eq!(s0, 2.9e-8 + 4.3e-8);
        let s7 = model_sigma2_u(&Ar1NoiseConfig::appendix(0.7)).unwrap();
        assert!((s7 - 9.267e-7).abs() < 1e-10);
        assert!(model_sigma2_u(&Ar1NoiseConfig::benchmark(-1.0)).is_err());
        // geometric series oracle on the truncated sum
        let cfg = Ar1NoiseConfig::benchmark(-0.7);
        let brute: f64 = cfg.var_v + cfg.var_eps * (1.0 + 2.0 * (1..=10).map(|j| (-0.7f64).powi(j)).sum::<f64>());
        assert!((cfg.truncated_sigma2_u(10) - brute).abs() < 1e-22);
        assert!((brute - 3.7589e-8).abs() < 1e-12);
        let far = cfg.truncated_sigma2_u(400);
        assert!((far - s).abs() < 1e-20);
    }

    #[test]
    fn observed_is_sum_and_deterministic() {
        let price = PriceModel::Ou(OuConfig::benchmark());
        let noise = Ar1NoiseConfig::benchmark(-0.7);
        let a = simulate_observed(&price, &noise, 2_001, 1.0, 5).unwrap();
        let b = simulate_observed(&price, &noise, 2_001, 1.0, 5).unwrap();
        assert_eq!(a, b);
        let us = simulate_noise(&noise, 2_001, 5).unwrap();
        for ((y, x), u) in a.series.log_prices().iter().zip(&a.efficient).zip(&us) {
            assert_eq!(*y, x + u);
        }
        assert_eq!(a.true_iv, 6e-5);
        let quiet = simulate_observed(&price, &Ar1NoiseConfig::none(), 2_001, 1.0, 5).unwrap();
        assert_eq!(quiet.series.log_prices(), &quiet.efficient[..]);
    }

    #[test]
    fn price_and_noise_streams_are_independent() {
        let price = PriceModel::Ou(OuConfig::benchmark());
        let noise = Ar1NoiseConfig::benchmark(0.3);
        let a = simulate_observed_with_seeds(&price, &noise, 500, 1.0, 1, 2).unwrap();
        let b = simulate_observed_with_seeds(&price, &noise, 500, 1.0, 1, 3).unwrap();
        let c = simulate_observed_with_seeds(&price, &noise, 500, 1.0, 4, 2).unwrap();
        assert_eq!(a.efficient, b.efficient);
        assert_ne!(a.series.log_prices(), b.series.log_prices());
        let ua: Vec<f64> = a
            .series
            .log_prices()
            .iter()
            .zip(&a.efficient)
            .map(|(y, x)| y - x)
            .collect();
        let uc: Vec<f64> = c
            .series
            .log_prices()
            .iter()
            .zip(&c.efficient)
            .map(|(y, x)| y - x)
            .collect();
        for (p, q) in ua.iter().zip(&uc) {
            assert!((p - q).abs() < 1e-15);
        }
    }

    #[test]
    fn split_seed_is_spread() {
        let seeds: std::collections::HashSet<u64> = (0..10_000).map(|i| split_seed(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
        assert_ne!(split_seed(1, 0), split_seed(2, 0));
    }

    #[test]
    fn config_json_round_trip() {
        let m = PriceModel::Ou(OuConfig::benchmark());
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"model\":\"ou\""));
        assert_eq!(serde_json::from_str::<PriceModel>(&s).unwrap(), m);
        let err = serde_json::from_str::<OuConfig>(r#"{"sigma2":1.0,"delta":0.5,"mu":1.0}"#).unwrap_err();
        assert!(err.to_string().contains("x0"));
    }
}
