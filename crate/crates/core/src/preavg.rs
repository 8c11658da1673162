//! Pre-averaging over non-overlapping blocks.
//!
//! Block `m` (1-based) averages `k_n`-step increments starting at
//! `(2m-2)k_n`; the scaled power sums `PAV(Y,r) = n^{(r-2)/4} Σ_m |V̄_m|^r`
//! drive the integrated-volatility estimator `3(PAV(Y,2) - σ²_U/c²)` and its
//! asymptotic scale `τ = √(6·PAV(Y,4))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::NeumaierSum;
use crate::series::TickSeries;
use crate::stats::two_sided_z;

pub const DEFAULT_C: f64 = 0.2;

/// Which increments a block averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// `k_n + 1` increments `Y_{i+k_n} - Y_i`, `i = (2m-2)k_n ..= (2m-1)k_n`,
    /// averaged with weight `1/(k_n+1)`.
    #[default]
    Closed,
    /// `k_n` increments, `i = (2m-2)k_n .. (2m-1)k_n`, weight `1/k_n`. This
    /// variant reproduces the published Monte Carlo tables.
    HalfOpen,
}

impl Window {
    pub fn increments(self, k_n: usize) -> usize {
        match self {
            Window::Closed => k_n + 1,
            Window::HalfOpen => k_n,
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Window::Closed => "closed",
            Window::HalfOpen => "half_open",
        })
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "closed" => Ok(Window::Closed),
            "half_open" | "half-open" => Ok(Window::HalfOpen),
            other => Err(format!("unknown window `{other}` (expected closed or half_open)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PavGeometry {
    pub c: f64,
    pub k_n: usize,
    pub m_n: usize,
    /// Index of the last observation (`N - 1`).
    pub n: usize,
    #[serde(default)]
    pub window: Window,
}

impl PavGeometry {
    /// `k_n = max(1, ⌊c√n⌋)` and `m_n = ⌊n/(2k_n)⌋`, so the last block ends
    /// at or before index `n`.
    pub fn new(n: usize, c: f64, window: Window) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("c", format!("must be > 0, got {c}")));
        }
        let k_n = ((c * (n as f64).sqrt()).floor() as usize).max(1);
        let m_n = n / (2 * k_n);
        if m_n == 0 {
            return Err(Error::InfeasibleGeometry(format!(
                "n={n} is shorter than one block of 2·k_n={} (c={c})",
                2 * k_n
            )));
        }
        Ok(Self { c, k_n, m_n, n, window })
    }

    pub fn for_series(s: &TickSeries, c: f64, window: Window) -> Result<Self> {
        if s.len() < 2 {
            return Err(Error::TooShort(format!(
                "need at least 2 observations, got {}",
                s.len()
            )));
        }
        Self::new(s.n(), c, window)
    }

    /// Inclusive range of observation indices block `m` reads.
    pub fn block_span(&self, m: usize) -> (usize, usize) {
        let start = (2 * m - 2) * self.k_n;
        (start, start + self.window.increments(self.k_n) - 1 + self.k_n)
    }

    /// `n^{1/4}`
    pub fn quarter_root_n(&self) -> f64 {
        (self.n as f64).sqrt().sqrt()
    }
}

/// Same as [`PavGeometry::new`] with the closed window.
pub fn pav_geometry(n: usize, c: f64) -> Result<PavGeometry> {
    PavGeometry::new(n, c, Window::Closed)
}

fn check_fit(s: &TickSeries, g: &PavGeometry) -> Result<()> {
    if s.n() != g.n || s.len() < 2 {
        return Err(Error::param(
            "geometry",
            format!("built for n={}, series has n={}", g.n, s.n()),
        ));
    }
    Ok(())
}

#[inline]
fn block_mean(y: &[f64], g: &PavGeometry, m: usize) -> f64 {
    let k = g.k_n;
    let start = (2 * m - 2) * k;
    let count = g.window.increments(k);
    let mut acc = NeumaierSum::new();
    for i in start..start + count {
        acc.add(y[i + k] - y[i]);
    }
    acc.value() / count as f64
}

/// Pre-averaged increment `V̄_m` of block `m ∈ 1..=m_n`.
pub fn block_preaverage(s: &TickSeries, g: &PavGeometry, m: usize) -> Result<f64> {
    check_fit(s, g)?;
    if m < 1 || m > g.m_n {
        return Err(Error::param(
            "m",
            format!("block index must be in 1..={}, got {m}", g.m_n),
        ));
    }
    Ok(block_mean(s.log_prices(), g, m))
}

pub fn block_means(s: &TickSeries, g: &PavGeometry) -> Result<Vec<f64>> {
    check_fit(s, g)?;
    let y = s.log_prices();
    Ok((1..=g.m_n).map(|m| block_mean(y, g, m)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PavStats {
    pub geometry: PavGeometry,
    pub pav2: f64,
    pub pav4: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub block_means: Option<Vec<f64>>,
}

impl PavStats {
    pub fn compute(s: &TickSeries, g: &PavGeometry, keep_blocks: bool) -> Result<Self> {
        let means = block_means(s, g)?;
        let mut s2 = NeumaierSum::new();
        let mut s4 = NeumaierSum::new();
        for v in &means {
            let sq = v * v;
            s2.add(sq);
            s4.add(sq * sq);
        }
        Ok(Self {
            geometry: *g,
            pav2: s2.value(),
            pav4: (g.n as f64).sqrt() * s4.value(),
            block_means: keep_blocks.then_some(means),
        })
    }

    pub fn write_block_means_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let means = self
            .block_means
            .as_ref()
            .ok_or_else(|| Error::param("block_means", "not retained"))?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["block", "preaverage"])?;
        for (m, v) in means.iter().enumerate() {
            wr.write_record([(m + 1).to_string(), format!("{v:e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `PAV(Y, r)` for `r ∈ {2, 4}`.
pub fn pav_stat(s: &TickSeries, c: f64, r: u32, window: Window) -> Result<f64> {
    if r != 2 && r != 4 {
        return Err(Error::param("r", format!("supported powers are 2 and 4, got {r}")));
    }
    let g = PavGeometry::for_series(s, c, window)?;
    let stats = PavStats::compute(s, &g, false)?;
    Ok(if r == 2 { stats.pav2 } else { stats.pav4 })
}

/// Which estimator produced an [`IvEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Asymptotic correction only, noise moments without finite-sample
    /// correction.
    Raw,
    Step(usize),
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Raw => f.write_str("raw"),
            Stage::Step(k) => write!(f, "step{k}"),
        }
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "raw" {
            return Ok(Stage::Raw);
        }
        s.strip_prefix("step")
            .and_then(|k| k.parse().ok())
            .filter(|k| *k >= 1)
            .map(Stage::Step)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

impl Serialize for Stage {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Stage {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvEstimate {
    pub iv: f64,
    pub tau: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub alpha: f64,
    pub sigma2_u_used: f64,
    /// The subtracted σ²_U was negative and used as is.
    pub negative_sigma2_u: bool,
    pub stage: Stage,
    pub n: usize,
    pub c: f64,
}

/// IV estimate and confidence interval from precomputed pre-averaging
/// statistics.
pub fn iv_from_pav(pav: &PavStats, sigma2_u_hat: f64, alpha: f64, stage: Stage) -> Result<IvEstimate> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if !sigma2_u_hat.is_finite() {
        return Err(Error::param("sigma2_u_hat", "must be finite"));
    }
    let g = &pav.geometry;
    let c = g.c;
    let iv = 3.0 * (pav.pav2 - sigma2_u_hat / (c * c));
    let tau = (6.0 * pav.pav4).sqrt();
    let half = two_sided_z(alpha) * tau / g.quarter_root_n();
    Ok(IvEstimate {
        iv,
        tau,
        ci_low: iv - half,
        ci_high: iv + half,
        alpha,
        sigma2_u_used: sigma2_u_hat,
        negative_sigma2_u: sigma2_u_hat < 0.0,
        stage,
        n: g.n,
        c,
    })
}

/// `IV = 3(PAV(Y,2) - σ̂²_U/c²)` with a level-`alpha` CLT interval.
pub fn iv_estimate(s: &TickSeries, c: f64, window: Window, sigma2_u_hat: f64, alpha: f64) -> Result<IvEstimate> {
    let g = PavGeometry::for_series(s, c, window)?;
    let pav = PavStats::compute(s, &g, false)?;
    iv_from_pav(&pav, sigma2_u_hat, alpha, Stage::Raw)
}

/// Window constant minimising the asymptotic variance, `3√(σ²_U / IV)`.
pub fn optimal_c(sigma2_u: f64, iv: f64) -> Result<f64> {
    if !(iv > 0.0 && iv.is_finite()) {
        return Err(Error::param("iv", format!("must be > 0, got {iv}")));
    }
    if !(sigma2_u >= 0.0 && sigma2_u.is_finite()) {
        return Err(Error::param("sigma2_u", format!("must be >= 0, got {sigma2_u}")));
    }
    Ok(3.0 * (sigma2_u / iv).sqrt())
}

/// `n^{1/4}(IV - true_iv)/τ`, asymptotically standard normal.
pub fn normalized_stat(est: &IvEstimate, true_iv: f64) -> Result<f64> {
    if !(est.tau > 0.0) {
        return Err(Error::param("tau", format!("must be > 0, got {}", est.tau)));
    }
    let q = (est.n as f64).sqrt().sqrt();
    Ok(q * (est.iv - true_iv) / est.tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_floor_arithmetic() {
        let g = pav_geometry(23_400, 0.2).unwrap();
        assert_eq!((g.k_n, g.m_n), (30, 390));
        let g = pav_geometry(468_000, 0.2).unwrap();
        assert_eq!((g.k_n, g.m_n), (136, 1720));
        assert!(matches!(pav_geometry(10, 5.0), Err(Error::InfeasibleGeometry(_))));
        assert!(pav_geometry(100, 0.0).is_err());
        // tiny c still gives k_n = 1
        let g = pav_geometry(100, 1e-6).unwrap();
        assert_eq!((g.k_n, g.m_n), (1, 50));
    }

    #[test]
    fn blocks_stay_inside_the_sample() {
        for n in [40, 99, 1000, 23_400] {
            for window in [Window::Closed, Window::HalfOpen] {
                let g = PavGeometry::new(n, 0.2, window).unwrap();
                assert!(2 * g.m_n * g.k_n <= n);
                let (_, hi) = g.block_span(g.m_n);
                assert!(hi <= n);
                for m in 1..g.m_n {
                    let (_, end) = g.block_span(m);
                    let (next, _) = g.block_span(m + 1);
                    // at most the single boundary index is shared
                    assert!(end <= next);
                }
            }
        }
    }

    #[test]
    fn hand_checked_block() {
        let ys = vec![0.3, -1.2, 2.5, 0.7, 1.9, 4.0, -0.5, 0.1, 2.2];
        let s = TickSeries::from_prices(ys.clone()).unwrap();
        let g = PavGeometry {
            c: 1.0,
            k_n: 2,
            m_n: 2,
            n: 8,
            window: Window::Closed,
        };
        let expect = ((ys[2] - ys[0]) + (ys[3] - ys[1]) + (ys[4] - ys[2])) / 3.0;
        assert!((block_preaverage(&s, &g, 1).unwrap() - expect).abs() < 1e-15);
        let g = PavGeometry {
            window: Window::HalfOpen,
            ..g
        };
        let expect = ((ys[2] - ys[0]) + (ys[3] - ys[1])) / 2.0;
        assert!((block_preaverage(&s, &g, 1).unwrap() - expect).abs() < 1e-15);
        assert!(block_preaverage(&s, &g, 0).is_err());
        assert!(block_preaverage(&s, &g, 3).is_err());
    }

    #[test]
    fn constant_and_ramp() {
        let s = TickSeries::from_prices(vec![2.0; 400]).unwrap();
        for w in [Window::Closed, Window::HalfOpen] {
            let g = PavGeometry::for_series(&s, 0.5, w).unwrap();
            assert!(block_means(&s, &g).unwrap().iter().all(|v| *v == 0.0));
            assert_eq!(pav_stat(&s, 0.5, 2, w).unwrap(), 0.0);
        }
        let b = 0.25;
        let ramp = TickSeries::from_prices((0..400).map(|i| b * i as f64).collect()).unwrap();
        for w in [Window::Closed, Window::HalfOpen] {
            let g = PavGeometry::for_series(&ramp, 0.5, w).unwrap();
            for v in block_means(&ramp, &g).unwrap() {
                assert!((v - b * g.k_n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unsupported_power() {
        let s = TickSeries::from_prices((0..100).map(|i| (i as f64).cos()).collect()).unwrap();
        assert!(pav_stat(&s, 0.2, 3, Window::Closed).is_err());
        assert!(pav_stat(&s, 0.2, 6, Window::Closed).is_err());
    }

    fn pav(pav2: f64, pav4: f64, n: usize) -> PavStats {
        PavStats {
            geometry: PavGeometry::new(n, 0.2, Window::Closed).unwrap(),
            pav2,
            pav4,
            block_means: None,
        }
    }

    #[test]
    fn iv_arithmetic() {
        let p = pav(8.366e-6, 1e-9, 23_400);
        let est = iv_from_pav(&p, 0.0, 0.05, Stage::Raw).unwrap();
        assert_eq!(est.iv, 3.0 * 8.366e-6);
        let est = iv_from_pav(&p, 3.659e-8, 0.05, Stage::Step(2)).unwrap();
        assert!((est.iv - 3.0 * (8.366e-6 - 9.1475e-7)).abs() < 1e-18);
        assert!((est.iv - 2.235e-5).abs() < 1e-8);
        assert!(est.ci_low <= est.iv && est.iv <= est.ci_high);
        let z = 1.959_963_984_540_054;
        let half = z * (6e-9f64).sqrt() / 23_400f64.powf(0.25);
        assert!((est.ci_high - est.iv - half).abs() < 1e-18);
        assert!(!est.negative_sigma2_u);
        let neg = iv_from_pav(&p, -1e-9, 0.05, Stage::Step(2)).unwrap();
        assert!(neg.negative_sigma2_u);
        assert!(iv_from_pav(&p, 0.0, 1.0, Stage::Raw).is_err());
        assert!(iv_from_pav(&p, 0.0, 0.0, Stage::Raw).is_err());
    }

    #[test]
    fn optimal_window_constant() {
        assert_eq!(optimal_c(2.0, 2.0).unwrap(), 3.0);
        assert!((optimal_c(3.659e-8, 6e-5).unwrap() - 0.0741).abs() < 1e-4);
        assert!((optimal_c(1e-2, 1.0).unwrap() - 0.3).abs() < 1e-15);
        assert!(optimal_c(1.0, 0.0).is_err());
    }

    #[test]
    fn normalized_values() {
        let p = pav(1e-5, 4e-9, 10_000);
        let est = iv_from_pav(&p, 0.0, 0.05, Stage::Raw).unwrap();
        assert_eq!(normalized_stat(&est, est.iv).unwrap(), 0.0);
        let shifted = est.iv - est.tau / 10.0;
        assert!((normalized_stat(&est, shifted).unwrap() - 1.0).abs() < 1e-12);
        let flat = IvEstimate { tau: 0.0, ..est };
        assert!(normalized_stat(&flat, 0.0).is_err());
    }

    #[test]
    fn stage_strings() {
        assert_eq!(Stage::Step(3).to_string(), "step3");
        assert_eq!("raw".parse::<Stage>().unwrap(), Stage::Raw);
        assert_eq!("step2".parse::<Stage>().unwrap(), Stage::Step(2));
        assert!("step0".parse::<Stage>().is_err());
        assert_eq!(serde_json::to_string(&Stage::Step(1)).unwrap(), "\"step1\"");
        assert_eq!("half-open".parse::<Window>().unwrap(), Window::HalfOpen);
    }
}
