//! Second moments of microstructure noise from lagged realized volatility.
//!
//! With observations `Y_0..Y_n` (so `n = N - 1`), the lag-`j` realized
//! volatility
//!
//! ```text
//! RV(j) = Σ_{i=0}^{n-j} (Y_{i+j} - Y_i)² / (2(n-j+1))
//! ```
//!
//! converges to `Var(U) - γ(j)`. A large lag `j_n` gives `Var(U)`, and
//! differences give the autocovariances. In finite samples the diffusion adds
//! `j·IV / (2(n-j+1))` to `RV(j)`; passing an integrated-volatility estimate
//! removes that term.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::NeumaierSum;
use crate::series::TickSeries;

/// Tuning for dense empirical data.
pub const DENSE_J_N: usize = 30;
pub const DENSE_I_N: usize = 15;

fn check_lag(s: &TickSeries, j: usize) -> Result<usize> {
    if s.len() < 2 {
        return Err(Error::TooShort(format!(
            "need at least 2 observations, got {}",
            s.len()
        )));
    }
    let n = s.n();
    if j < 1 || j > n {
        return Err(Error::param("j", format!("lag must be in 1..={n}, got {j}")));
    }
    Ok(n)
}

/// Lag-`j` realized volatility.
pub fn rv_lag(s: &TickSeries, j: usize) -> Result<f64> {
    let n = check_lag(s, j)?;
    let y = s.log_prices();
    let mut acc = NeumaierSum::new();
    for i in 0..=n - j {
        let d = y[i + j] - y[i];
        acc.add(d * d);
    }
    Ok(acc.value() / (2 * (n - j + 1)) as f64)
}

/// `RV(1), ..., RV(max_lag)` in a single pass over the data.
///
/// Each lag keeps its own accumulator and sees its terms in the same order as
/// [`rv_lag`], so the results are bit-identical to calling it per lag.
pub fn rv_lags(s: &TickSeries, max_lag: usize) -> Result<Vec<f64>> {
    let n = check_lag(s, max_lag)?;
    let y = s.log_prices();
    let mut acc = vec![NeumaierSum::new(); max_lag];
    for i in 0..n {
        let yi = y[i];
        let hi = max_lag.min(n - i);
        let ahead = &y[i + 1..=i + hi];
        for (a, &yj) in acc[..hi].iter_mut().zip(ahead) {
            let d = yj - yi;
            a.add(d * d);
        }
    }
    Ok(acc
        .iter()
        .enumerate()
        .map(|(k, a)| a.value() / (2 * (n - k)) as f64)
        .collect())
}

/// Diffusion contribution `iv·j / (2(n-j+1))` to `RV(j)`.
#[inline]
pub fn finite_sample_bias(n: usize, j: usize, iv: f64) -> f64 {
    iv * j as f64 / (2 * (n - j + 1)) as f64
}

/// `RV(j)` with the finite-sample diffusion term removed. May be negative.
pub fn rv_lag_adjusted(s: &TickSeries, j: usize, iv_hat: f64) -> Result<f64> {
    if !(iv_hat >= 0.0 && iv_hat.is_finite()) {
        return Err(Error::param("iv_hat", format!("must be finite and >= 0, got {iv_hat}")));
    }
    let rv = rv_lag(s, j)?;
    Ok(rv - finite_sample_bias(s.n(), j, iv_hat))
}

/// Noise variance, autocovariances and long-run variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseMoments {
    pub var_u: f64,
    /// `gamma[j-1]` is the lag-`j` autocovariance, `j = 1..=max_lag`.
    pub gamma: Vec<f64>,
    pub sigma2_u: f64,
    pub j_n: usize,
    pub i_n: usize,
    /// Index of the last observation the moments were computed from.
    pub n: usize,
    pub iv_used: Option<f64>,
    pub bias_corrected: bool,
    /// Set when `var_u` or `sigma2_u` came out negative; values are kept.
    pub negative_estimate: bool,
}

/// `var_u + 2 Σ_{j=1}^{i_n} gamma[j]`, summed in lag order.
fn long_run_variance(var_u: f64, gamma: &[f64], i_n: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    for g in &gamma[..i_n] {
        acc.add(*g);
    }
    var_u + 2.0 * acc.value()
}

impl NoiseMoments {
    /// Build the moments from precomputed `RV(1..)` values (`rv[j-1] = RV(j)`),
    /// which must cover lags up to `max(j_n, max_lag)`.
    pub fn from_rv(rv: &[f64], n: usize, j_n: usize, i_n: usize, max_lag: usize, iv_hat: Option<f64>) -> Result<Self> {
        if i_n < 1 || i_n > j_n {
            return Err(Error::param(
                "i_n",
                format!("need 1 <= i_n <= j_n, got i_n={i_n}, j_n={j_n}"),
            ));
        }
        if j_n >= n {
            return Err(Error::param("j_n", format!("need j_n < n, got j_n={j_n}, n={n}")));
        }
        if max_lag < i_n || max_lag > n {
            return Err(Error::param(
                "max_lag",
                format!("need i_n <= max_lag <= n, got {max_lag} (i_n={i_n}, n={n})"),
            ));
        }
        if rv.len() < j_n.max(max_lag) {
            return Err(Error::param(
                "rv",
                format!("need {} lags, got {}", j_n.max(max_lag), rv.len()),
            ));
        }
        if let Some(iv) = iv_hat {
            if !(iv >= 0.0 && iv.is_finite()) {
                return Err(Error::param("iv_hat", format!("must be finite and >= 0, got {iv}")));
            }
        }
        let adjusted = |j: usize| -> f64 {
            let raw = rv[j - 1];
            match iv_hat {
                Some(iv) => raw - finite_sample_bias(n, j, iv),
                None => raw,
            }
        };
        let var_u = adjusted(j_n);
        let gamma: Vec<f64> = (1..=max_lag).map(|j| var_u - adjusted(j)).collect();
        let sigma2_u = long_run_variance(var_u, &gamma, i_n);
        Ok(Self {
            var_u,
            gamma,
            sigma2_u,
            j_n,
            i_n,
            n,
            iv_used: iv_hat,
            bias_corrected: iv_hat.is_some(),
            negative_estimate: var_u < 0.0 || sigma2_u < 0.0,
        })
    }

    /// Moments under the iid-noise assumption: `Var(U) = σ²_U = RV(1)` and
    /// all autocovariances zero.
    pub fn iid(rv1: f64, n: usize, j_n: usize, i_n: usize, max_lag: usize) -> Self {
        Self {
            var_u: rv1,
            gamma: vec![0.0; max_lag],
            sigma2_u: rv1,
            j_n,
            i_n,
            n,
            iv_used: None,
            bias_corrected: false,
            negative_estimate: rv1 < 0.0,
        }
    }

    pub fn max_lag(&self) -> usize {
        self.gamma.len()
    }

    /// Estimated autocorrelation at lag `j >= 1`; 0 when `var_u` is 0.
    pub fn acf(&self, j: usize) -> f64 {
        if self.var_u == 0.0 {
            0.0
        } else {
            self.gamma[j - 1] / self.var_u
        }
    }

    pub fn acf_values(&self) -> Vec<f64> {
        (1..=self.max_lag()).map(|j| self.acf(j)).collect()
    }

    pub fn write_gamma_csv<W: Write>(&self, w: W) -> Result<()> {
        write_lag_csv(w, "gamma", &self.gamma)
    }

    pub fn write_acf_csv<W: Write>(&self, w: W) -> Result<()> {
        write_lag_csv(w, "acf", &self.acf_values())
    }
}

fn write_lag_csv<W: Write>(w: W, name: &str, values: &[f64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["lag", name])?;
    for (k, v) in values.iter().enumerate() {
        wr.write_record([(k + 1).to_string(), format!("{v:e}")])?;
    }
    wr.flush()?;
    Ok(())
}

/// Noise moments of a series. With `iv_hat`, every `RV(j)` is corrected for
/// the finite-sample diffusion term before use.
pub fn estimate_noise_moments(
    s: &TickSeries,
    j_n: usize,
    i_n: usize,
    max_lag: usize,
    iv_hat: Option<f64>,
) -> Result<NoiseMoments> {
    if s.len() < 2 {
        return Err(Error::TooShort(format!(
            "need at least 2 observations, got {}",
            s.len()
        )));
    }
    let n = s.n();
    if j_n >= n || j_n < 1 {
        return Err(Error::param("j_n", format!("need 1 <= j_n < n, got j_n={j_n}, n={n}")));
    }
    if max_lag > n {
        return Err(Error::param(
            "max_lag",
            format!("need max_lag <= n, got {max_lag}, n={n}"),
        ));
    }
    let rv = rv_lags(s, j_n.max(max_lag))?;
    NoiseMoments::from_rv(&rv, n, j_n, i_n, max_lag, iv_hat)
}

/// Recompute `σ̂²_U = Var(U) + 2 Σ_{j≤i_n} γ(j)`; equals the stored value.
pub fn sigma2_u_of(nm: &NoiseMoments) -> f64 {
    long_run_variance(nm.var_u, &nm.gamma, nm.i_n)
}

const AR1_BOUND: f64 = 0.999;

fn ar1_objective(acf: &[f64], rho: f64) -> f64 {
    let mut p = 1.0;
    let mut acc = 0.0;
    for a in acf {
        p *= rho;
        acc += (a - p) * (a - p);
    }
    acc
}

/// Least-squares AR(1) coefficient for autocorrelations `acf[j-1]`,
/// `argmin_ρ Σ (acf(j) - ρ^j)²` over `ρ ∈ [-0.999, 0.999]`.
pub fn fit_ar1_to_acf(acf: &[f64]) -> f64 {
    // coarse grid guards against the local minima of odd/even powers
    let mut best = (f64::INFINITY, 0.0);
    for k in -999..=999 {
        let rho = k as f64 / 1000.0;
        let v = ar1_objective(acf, rho);
        if v < best.0 {
            best = (v, rho);
        }
    }
    let mut lo = (best.1 - 1e-3).max(-AR1_BOUND);
    let mut hi = (best.1 + 1e-3).min(AR1_BOUND);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = ar1_objective(acf, a);
    let mut fb = ar1_objective(acf, b);
    while hi - lo > 1e-9 {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = ar1_objective(acf, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = ar1_objective(acf, b);
        }
    }
    let mid = 0.5 * (lo + hi);
    if ar1_objective(acf, mid) <= best.0 {
        mid
    } else {
        best.1
    }
}

/// AR(1) coefficient fitted to the estimated autocorrelations at lags
/// `1..=max_fit_lag`.
pub fn fit_ar1_acf(nm: &NoiseMoments, max_fit_lag: usize) -> Result<f64> {
    if !(nm.var_u > 0.0) {
        return Err(Error::param(
            "var_u",
            format!("must be > 0 to form autocorrelations, got {}", nm.var_u),
        ));
    }
    if max_fit_lag < 1 || max_fit_lag > nm.max_lag() {
        return Err(Error::param(
            "max_fit_lag",
            format!("must be in 1..={}, got {max_fit_lag}", nm.max_lag()),
        ));
    }
    Ok(fit_ar1_to_acf(&nm.acf_values()[..max_fit_lag]))
}

/// Probability that an order follows one of the same sign, `(1 + ρ)/2`.
pub fn order_continuation_probability(rho: f64) -> f64 {
    (1.0 + rho) / 2.0
}

/// OLS fit of `ln acf(j)` on `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogAcfFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used_lags: Vec<usize>,
    /// Lags whose autocorrelation was not positive.
    pub excluded_lags: Vec<usize>,
}

/// Log-linear decay fit for autocorrelations `acf[j-1]`.
pub fn log_acf_fit(acf: &[f64]) -> Result<LogAcfFit> {
    let (used, excluded): (Vec<usize>, Vec<usize>) = (1..=acf.len()).partition(|&j| acf[j - 1] > 0.0);
    if used.len() < 2 {
        return Err(Error::param(
            "acf",
            format!("need at least 2 lags with positive autocorrelation, got {}", used.len()),
        ));
    }
    let m = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|&j| j as f64).collect();
    let ys: Vec<f64> = used.iter().map(|&j| acf[j - 1].ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(LogAcfFit {
        slope,
        intercept,
        r_squared,
        used_lags: used,
        excluded_lags: excluded,
    })
}

pub fn log_acf_regression(nm: &NoiseMoments, max_fit_lag: usize) -> Result<LogAcfFit> {
    if max_fit_lag > nm.max_lag() {
        return Err(Error::param(
            "max_fit_lag",
            format!("must be <= {}, got {max_fit_lag}", nm.max_lag()),
        ));
    }
    log_acf_fit(&nm.acf_values()[..max_fit_lag])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alt() -> TickSeries {
        TickSeries::from_prices(vec![0.0, 1.0, 0.0, 1.0]).unwrap()
    }

    /// Moments carrying a prescribed autocorrelation function.
    fn with_acf(acf: &[f64]) -> NoiseMoments {
        NoiseMoments {
            var_u: 1.0,
            gamma: acf.to_vec(),
            sigma2_u: 0.0,
            j_n: acf.len(),
            i_n: 1,
            n: 1000,
            iv_used: None,
            bias_corrected: false,
            negative_estimate: false,
        }
    }

    #[test]
    fn rv_by_hand() {
        assert_eq!(rv_lag(&alt(), 1).unwrap(), 0.5);
        assert_eq!(rv_lag(&alt(), 2).unwrap(), 0.0);
        assert_eq!(rv_lag(&alt(), 3).unwrap(), 1.0 / 2.0);
    }

    #[test]
    fn rv_constant_is_zero() {
        let s = TickSeries::from_prices(vec![3.2; 50]).unwrap();
        for j in 1..50 {
            assert_eq!(rv_lag(&s, j).unwrap(), 0.0);
        }
    }

    #[test]
    fn rv_lag_range() {
        assert!(rv_lag(&alt(), 0).is_err());
        assert!(rv_lag(&alt(), 4).is_err());
        let one = TickSeries::from_prices(vec![1.0]).unwrap();
        assert!(matches!(rv_lag(&one, 1), Err(Error::TooShort(_))));
    }

    #[test]
    fn rv_lags_bit_identical_to_single() {
        let ys: Vec<f64> = (0..300)
            .map(|i| ((i * 7919) % 113) as f64 * 1e-4 + (i as f64 * 0.37).sin())
            .collect();
        let s = TickSeries::from_prices(ys).unwrap();
        let all = rv_lags(&s, 40).unwrap();
        for j in 1..=40 {
            assert_eq!(all[j - 1].to_bits(), rv_lag(&s, j).unwrap().to_bits());
        }
    }

    #[test]
    fn adjusted_by_hand() {
        assert_eq!(rv_lag_adjusted(&alt(), 1, 0.0).unwrap(), 0.5);
        assert!((rv_lag_adjusted(&alt(), 1, 0.6).unwrap() - 0.4).abs() < 1e-15);
        assert!(rv_lag_adjusted(&alt(), 1, -0.1).is_err());
    }

    #[test]
    fn moments_of_constant_series() {
        let s = TickSeries::from_prices(vec![1.0; 100]).unwrap();
        let nm = estimate_noise_moments(&s, 20, 10, 25, None).unwrap();
        assert_eq!(nm.var_u, 0.0);
        assert!(nm.gamma.iter().all(|g| *g == 0.0));
        assert_eq!(nm.sigma2_u, 0.0);
        assert_eq!(nm.acf(3), 0.0);
    }

    #[test]
    fn tuning_checks() {
        let s = TickSeries::from_prices((0..30).map(|i| (i as f64).sin()).collect()).unwrap();
        assert!(estimate_noise_moments(&s, 29, 10, 10, None).is_err());
        assert!(estimate_noise_moments(&s, 10, 11, 12, None).is_err());
        assert!(estimate_noise_moments(&s, 10, 0, 12, None).is_err());
        assert!(estimate_noise_moments(&s, 10, 5, 4, None).is_err());
        assert!(estimate_noise_moments(&s, 10, 5, 30, None).is_err());
        assert!(estimate_noise_moments(&s, 10, 5, 28, None).is_ok());
    }

    #[test]
    fn sigma2_u_arithmetic() {
        let nm = NoiseMoments {
            var_u: 7.2e-8,
            gamma: vec![-3.01e-8, 5.0],
            sigma2_u: 0.0,
            j_n: 2,
            i_n: 1,
            n: 100,
            iv_used: None,
            bias_corrected: false,
            negative_estimate: false,
        };
        assert!((sigma2_u_of(&nm) - 1.18e-8).abs() < 1e-22);
        let zero = NoiseMoments {
            gamma: vec![0.0; 3],
            i_n: 3,
            ..nm
        };
        assert_eq!(sigma2_u_of(&zero), 7.2e-8);
    }

    #[test]
    fn ar1_fit_recovers_injected() {
        let acf: Vec<f64> = (1..=20).map(|j| 0.75f64.powi(j)).collect();
        let rho = fit_ar1_acf(&with_acf(&acf), 20).unwrap();
        assert!((rho - 0.75).abs() < 1e-6);
        let zero = fit_ar1_acf(&with_acf(&[0.0; 10]), 10).unwrap();
        assert!(zero.abs() < 1e-4);
        assert!((order_continuation_probability(0.75) - 0.875).abs() < 1e-15);
    }

    #[test]
    fn ar1_fit_errors() {
        let mut nm = with_acf(&[0.5, 0.25]);
        assert!(fit_ar1_acf(&nm, 3).is_err());
        assert!(fit_ar1_acf(&nm, 0).is_err());
        nm.var_u = 0.0;
        assert!(fit_ar1_acf(&nm, 2).is_err());
    }

    #[test]
    fn log_acf_exact_inputs() {
        let acf: Vec<f64> = (1..=10).map(|j| (-0.3 * j as f64).exp()).collect();
        let fit = log_acf_regression(&with_acf(&acf), 10).unwrap();
        assert!((fit.slope + 0.3).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let acf: Vec<f64> = (1..=10).map(|j| 0.75f64.powi(j)).collect();
        let fit = log_acf_fit(&acf).unwrap();
        assert!((fit.slope - 0.75f64.ln()).abs() < 1e-12);
        assert!((fit.slope + 0.2877).abs() < 1e-4);
    }

    #[test]
    fn log_acf_excludes_nonpositive() {
        let acf = [0.5, -0.2, 0.25, 0.0, 0.125];
        let fit = log_acf_fit(&acf).unwrap();
        assert_eq!(fit.used_lags, vec![1, 3, 5]);
        assert_eq!(fit.excluded_lags, vec![2, 4]);
        assert!(log_acf_fit(&[0.5, -0.1, -0.2]).is_err());
    }

    #[test]
    fn csv_export() {
        let nm = with_acf(&[0.5, 0.25]);
        let mut out = Vec::new();
        nm.write_acf_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "lag,acf\n1,5e-1\n2,2.5e-1\n");
    }
}
