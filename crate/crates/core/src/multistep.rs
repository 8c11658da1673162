//! Interlocked k-step estimation of noise moments and integrated volatility.
//!
//! Step 1 assumes iid noise (`σ̂²_U = RV(1)`). Each later step re-estimates the
//! noise moments with the finite-sample diffusion term removed, using the
//! previous step's IV, and then re-applies the asymptotic correction. The
//! pre-averaging statistics do not depend on the noise moments and are
//! computed once.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise_moments::{rv_lags, NoiseMoments, DENSE_I_N, DENSE_J_N};
use crate::preavg::{iv_from_pav, IvEstimate, PavGeometry, PavStats, Stage, Window, DEFAULT_C};
use crate::series::TickSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tuning {
    pub c: f64,
    pub j_n: usize,
    pub i_n: usize,
    /// Largest autocovariance lag reported; at least `i_n`.
    pub max_lag: usize,
    pub n_steps: usize,
    pub alpha: f64,
    pub window: Window,
}

impl Default for Tuning {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            j_n: 20,
            i_n: 10,
            max_lag: 20,
            n_steps: 2,
            alpha: 0.05,
            window: Window::Closed,
        }
    }
}

impl Tuning {
    /// Larger lags for dense empirical data.
    pub fn dense() -> Self {
        Self {
            j_n: DENSE_J_N,
            i_n: DENSE_I_N,
            max_lag: DENSE_J_N,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param("c", format!("must be > 0, got {}", self.c)));
        }
        if self.i_n < 1 || self.i_n > self.j_n {
            return Err(Error::param(
                "i_n",
                format!("need 1 <= i_n <= j_n, got i_n={}, j_n={}", self.i_n, self.j_n),
            ));
        }
        if self.max_lag < self.i_n {
            return Err(Error::param(
                "max_lag",
                format!("must be >= i_n={}, got {}", self.i_n, self.max_lag),
            ));
        }
        if self.n_steps < 1 {
            return Err(Error::param("n_steps", "must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// Number of `RV(j)` lags the pipeline needs.
    pub fn rv_lag_count(&self) -> usize {
        self.j_n.max(self.max_lag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub step: usize,
    pub noise: NoiseMoments,
    pub iv: IvEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PipelineWarning {
    /// Noise variance or long-run variance came out negative; it was used as is.
    NegativeVariance { step: usize },
    /// The previous step's IV was negative and clamped to zero before the
    /// finite-sample correction.
    NegativeIvClamped { step: usize },
}

impl fmt::Display for PipelineWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineWarning::NegativeVariance { step } => {
                write!(f, "step {step}: negative noise variance estimate")
            }
            PipelineWarning::NegativeIvClamped { step } => {
                write!(
                    f,
                    "step {step}: previous IV was negative, clamped to 0 for bias correction"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub steps: Vec<StepResult>,
    pub config: Tuning,
    pub warnings: Vec<PipelineWarning>,
    pub pav: PavStats,
    /// Asymptotic correction with uncorrected noise moments.
    pub raw_corrected: IvEstimate,
    /// `RV(1), ..., RV(rv_lag_count)`.
    pub rv: Vec<f64>,
}

impl PipelineReport {
    pub fn step(&self, k: usize) -> Option<&StepResult> {
        self.steps.get(k.checked_sub(1)?)
    }

    pub fn last(&self) -> &StepResult {
        self.steps.last().expect("report has at least one step")
    }

    /// One row per estimate: the uncorrected-moments IV, then each step.
    pub fn write_steps_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "stage", "var_u", "sigma2_u", "iv", "tau", "ci_low", "ci_high", "iv_used",
        ])?;
        let mut row = |stage: String, nm: Option<&NoiseMoments>, est: &IvEstimate| -> Result<()> {
            let (var_u, iv_used) = match nm {
                Some(nm) => (
                    format!("{:e}", nm.var_u),
                    nm.iv_used.map(|v| format!("{v:e}")).unwrap_or_default(),
                ),
                None => (String::new(), String::new()),
            };
            wr.write_record([
                stage,
                var_u,
                format!("{:e}", est.sigma2_u_used),
                format!("{:e}", est.iv),
                format!("{:e}", est.tau),
                format!("{:e}", est.ci_low),
                format!("{:e}", est.ci_high),
                iv_used,
            ])?;
            Ok(())
        };
        row("raw".into(), None, &self.raw_corrected)?;
        for st in &self.steps {
            row(st.iv.stage.to_string(), Some(&st.noise), &st.iv)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Precomputed statistics the pipeline runs on.
#[derive(Debug, Clone)]
pub struct PipelineInputs {
    pub n: usize,
    pub rv: Vec<f64>,
    pub pav: PavStats,
}

impl PipelineInputs {
    pub fn compute(s: &TickSeries, cfg: &Tuning) -> Result<Self> {
        cfg.validate()?;
        if s.len() < 2 {
            return Err(Error::TooShort(format!(
                "need at least 2 observations, got {}",
                s.len()
            )));
        }
        let n = s.n();
        if cfg.j_n >= n || cfg.max_lag > n {
            return Err(Error::param(
                "j_n",
                format!(
                    "need j_n < n and max_lag <= n, got j_n={}, max_lag={}, n={n}",
                    cfg.j_n, cfg.max_lag
                ),
            ));
        }
        let rv = rv_lags(s, cfg.rv_lag_count())?;
        let pav = match PavGeometry::new(n, cfg.c, cfg.window).and_then(|g| PavStats::compute(s, &g, false)) {
            Ok(p) => p,
            Err(e) => {
                let partial = NoiseMoments::iid(rv[0], n, cfg.j_n, cfg.i_n, cfg.max_lag);
                return Err(Error::Pipeline {
                    stage: "pre-averaging".into(),
                    partial: Some(Box::new(partial)),
                    source: Box::new(e),
                });
            }
        };
        Ok(Self { n, rv, pav })
    }
}

/// Run `cfg.n_steps` steps on a series.
pub fn run_pipeline(s: &TickSeries, cfg: &Tuning) -> Result<PipelineReport> {
    let inputs = PipelineInputs::compute(s, cfg)?;
    run_pipeline_on(inputs, cfg)
}

/// Run the pipeline on precomputed lags and pre-averaging statistics.
pub fn run_pipeline_on(inputs: PipelineInputs, cfg: &Tuning) -> Result<PipelineReport> {
    cfg.validate()?;
    let PipelineInputs { n, rv, pav } = inputs;
    let mut warnings = Vec::new();

    let stage_err = |stage: String, partial: Option<&NoiseMoments>, e: Error| Error::Pipeline {
        stage,
        partial: partial.map(|p| Box::new(p.clone())),
        source: Box::new(e),
    };

    let raw_noise = NoiseMoments::from_rv(&rv, n, cfg.j_n, cfg.i_n, cfg.max_lag, None)
        .map_err(|e| stage_err("raw".into(), None, e))?;
    let raw_corrected =
        iv_from_pav(&pav, raw_noise.sigma2_u, cfg.alpha, Stage::Raw).map_err(|e| stage_err("raw".into(), None, e))?;

    let first = NoiseMoments::iid(rv[0], n, cfg.j_n, cfg.i_n, cfg.max_lag);
    let iv1 = iv_from_pav(&pav, first.sigma2_u, cfg.alpha, Stage::Step(1))
        .map_err(|e| stage_err("step1".into(), Some(&first), e))?;
    if first.negative_estimate {
        warnings.push(PipelineWarning::NegativeVariance { step: 1 });
    }
    let mut steps = vec![StepResult {
        step: 1,
        noise: first,
        iv: iv1,
    }];

    for k in 2..=cfg.n_steps {
        let prev_iv = steps[k - 2].iv.iv;
        let iv_hat = if prev_iv < 0.0 {
            warnings.push(PipelineWarning::NegativeIvClamped { step: k });
            0.0
        } else {
            prev_iv
        };
        let partial = Some(&steps[0].noise);
        let noise = NoiseMoments::from_rv(&rv, n, cfg.j_n, cfg.i_n, cfg.max_lag, Some(iv_hat))
            .map_err(|e| stage_err(format!("step{k}"), partial, e))?;
        let iv = iv_from_pav(&pav, noise.sigma2_u, cfg.alpha, Stage::Step(k))
            .map_err(|e| stage_err(format!("step{k}"), partial, e))?;
        if noise.negative_estimate {
            warnings.push(PipelineWarning::NegativeVariance { step: k });
        }
        steps.push(StepResult { step: k, noise, iv });
    }

    Ok(PipelineReport {
        steps,
        config: *cfg,
        warnings,
        pav,
        raw_corrected,
        rv,
    })
}

/// IV with the asymptotic correction but uncorrected noise moments.
pub fn iv_raw_corrected(s: &TickSeries, cfg: &Tuning) -> Result<IvEstimate> {
    let inputs = PipelineInputs::compute(s, cfg)?;
    let nm = NoiseMoments::from_rv(&inputs.rv, inputs.n, cfg.j_n, cfg.i_n, cfg.max_lag, None)?;
    iv_from_pav(&inputs.pav, nm.sigma2_u, cfg.alpha, Stage::Raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise_moments::estimate_noise_moments;
    use crate::preavg::iv_estimate;

    fn wiggly(n: usize) -> TickSeries {
        let ys = (0..n)
            .map(|i| {
                let x = i as f64;
                1e-3 * (0.37 * x).sin() + 2e-4 * (1.91 * x).cos() + 1e-5 * x
            })
            .collect();
        TickSeries::from_prices(ys).unwrap()
    }

    #[test]
    fn single_step_is_the_submodule_composition() {
        let s = wiggly(5000);
        let cfg = Tuning {
            n_steps: 1,
            ..Tuning::default()
        };
        let rep = run_pipeline(&s, &cfg).unwrap();
        assert_eq!(rep.steps.len(), 1);
        let st = &rep.steps[0];
        let rv1 = crate::noise_moments::rv_lag(&s, 1).unwrap();
        assert_eq!(st.noise.var_u, rv1);
        assert_eq!(st.noise.sigma2_u, rv1);
        assert!(st.noise.gamma.iter().all(|g| *g == 0.0));
        let manual = iv_estimate(&s, cfg.c, cfg.window, rv1, cfg.alpha).unwrap();
        assert_eq!(st.iv.iv, manual.iv);
        assert_eq!(st.iv.tau, manual.tau);
    }

    #[test]
    fn later_steps_use_previous_iv() {
        let s = wiggly(5000);
        let cfg = Tuning {
            n_steps: 3,
            ..Tuning::default()
        };
        let rep = run_pipeline(&s, &cfg).unwrap();
        assert_eq!(rep.steps.iter().map(|s| s.step).collect::<Vec<_>>(), vec![1, 2, 3]);
        for k in 2..=3 {
            let prev = rep.step(k - 1).unwrap().iv.iv.max(0.0);
            let st = rep.step(k).unwrap();
            assert_eq!(st.noise.iv_used, Some(prev));
            let direct = estimate_noise_moments(&s, cfg.j_n, cfg.i_n, cfg.max_lag, Some(prev)).unwrap();
            assert_eq!(st.noise, direct);
        }
        let raw = iv_raw_corrected(&s, &cfg).unwrap();
        assert_eq!(raw, rep.raw_corrected);
    }

    #[test]
    fn constant_prices_give_zero() {
        let s = TickSeries::from_prices(vec![1.5; 2000]).unwrap();
        let rep = run_pipeline(&s, &Tuning::default()).unwrap();
        assert_eq!(rep.raw_corrected.iv, 0.0);
        assert!(rep.steps.iter().all(|s| s.iv.iv == 0.0));
    }

    #[test]
    fn deterministic_json() {
        let s = wiggly(3000);
        let a = serde_json::to_string(&run_pipeline(&s, &Tuning::default()).unwrap()).unwrap();
        let b = serde_json::to_string(&run_pipeline(&s, &Tuning::default()).unwrap()).unwrap();
        assert_eq!(a, b);
        let back: PipelineReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back.steps.len(), 2);
    }

    #[test]
    fn bad_tuning_and_short_series() {
        let s = wiggly(100);
        for cfg in [
            Tuning {
                n_steps: 0,
                ..Tuning::default()
            },
            Tuning {
                i_n: 0,
                ..Tuning::default()
            },
            Tuning {
                i_n: 30,
                ..Tuning::default()
            },
            Tuning {
                max_lag: 5,
                ..Tuning::default()
            },
            Tuning {
                alpha: 1.5,
                ..Tuning::default()
            },
            Tuning {
                c: -1.0,
                ..Tuning::default()
            },
        ] {
            assert!(matches!(run_pipeline(&s, &cfg), Err(Error::InvalidParameter { .. })));
        }
        assert!(run_pipeline(&wiggly(15), &Tuning::default()).is_err());
    }

    #[test]
    fn infeasible_geometry_keeps_partial_moments() {
        let s = wiggly(60);
        let cfg = Tuning {
            c: 10.0,
            ..Tuning::default()
        };
        match run_pipeline(&s, &cfg) {
            Err(Error::Pipeline {
                partial: Some(nm),
                source,
                ..
            }) => {
                assert!(matches!(*source, Error::InfeasibleGeometry(_)));
                assert_eq!(nm.var_u, crate::noise_moments::rv_lag(&s, 1).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn steps_csv_layout() {
        let rep = run_pipeline(&wiggly(3000), &Tuning::default()).unwrap();
        let mut buf = Vec::new();
        rep.write_steps_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("stage,var_u,sigma2_u,iv"));
        assert!(lines[1].starts_with("raw,,"));
        assert!(lines[3].starts_with("step2,"));
    }
}
