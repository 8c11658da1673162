//! Monte Carlo harness for the simulation designs.
//!
//! Replication `r` simulates with seed `split_seed(base_seed, r)` and runs the
//! pipeline once; everything downstream (tables, QQ data, RV curves, ACF
//! bands) is derived from the per-path records, so a report is a pure function
//! of its configuration regardless of how many workers ran it.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::mean_sd;
use crate::multistep::{run_pipeline_on, PipelineInputs, PipelineReport, Tuning};
use crate::noise_moments::{finite_sample_bias, NoiseMoments};
use crate::preavg::{Stage, Window};
use crate::sim::{simulate_observed, split_seed, Ar1NoiseConfig, OuConfig, PriceModel, SvConfig};
use crate::stats::{inverse_normal_cdf, ks_pvalue, ks_statistic_normal, quantile_sorted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Tables,
    Qq,
    AcfBands,
    RvCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    #[serde(default)]
    pub label: String,
    pub price: PriceModel,
    pub noise: Ar1NoiseConfig,
    /// Observations per path, `N = n + 1`.
    pub n_obs: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    pub n_reps: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub tuning: Tuning,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    /// Worker threads; `None` uses all cores.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_horizon() -> f64 {
    1.0
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Tables]
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reps < 1 {
            return Err(Error::param("n_reps", "must be >= 1"));
        }
        if self.n_obs < 3 {
            return Err(Error::param("n_obs", format!("must be >= 3, got {}", self.n_obs)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("horizon", format!("must be > 0, got {}", self.horizon)));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers", "must be >= 1"));
        }
        self.price.validate()?;
        self.noise.validate()?;
        self.tuning.validate()
    }

    /// Index of the last observation of each path.
    pub fn n(&self) -> usize {
        self.n_obs - 1
    }
}

/// Estimates of one stage on one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageValues {
    pub iv: f64,
    pub tau: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub var_u: f64,
    pub sigma2_u: f64,
    pub gamma: Vec<f64>,
}

impl StageValues {
    fn new(noise: &NoiseMoments, iv: &crate::preavg::IvEstimate) -> Self {
        Self {
            iv: iv.iv,
            tau: iv.tau,
            ci_low: iv.ci_low,
            ci_high: iv.ci_high,
            var_u: noise.var_u,
            sigma2_u: noise.sigma2_u,
            gamma: noise.gamma.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathValues {
    pub true_iv: f64,
    pub n: usize,
    /// `RV(1), ...` of the observed path.
    pub rv: Vec<f64>,
    pub raw: StageValues,
    pub steps: Vec<StageValues>,
    pub warnings: usize,
}

impl PathValues {
    fn from_report(rep: &PipelineReport, true_iv: f64, n: usize) -> Self {
        let raw_noise = NoiseMoments::from_rv(&rep.rv, n, rep.config.j_n, rep.config.i_n, rep.config.max_lag, None)
            .expect("raw moments were computed by the pipeline");
        Self {
            true_iv,
            n,
            rv: rep.rv.clone(),
            raw: StageValues::new(&raw_noise, &rep.raw_corrected),
            steps: rep.steps.iter().map(|s| StageValues::new(&s.noise, &s.iv)).collect(),
            warnings: rep.warnings.len(),
        }
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageValues> {
        match stage {
            Stage::Raw => Some(&self.raw),
            Stage::Step(k) => self.steps.get(k.checked_sub(1)?),
        }
    }

    /// `n^{1/4}(IV - true)/τ`; `None` when `τ` is not positive.
    pub fn normalized(&self, stage: Stage) -> Option<f64> {
        let v = self.stage(stage)?;
        (v.tau > 0.0).then(|| (self.n as f64).sqrt().sqrt() * (v.iv - self.true_iv) / v.tau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub rep: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub values: Option<PathValues>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Mean, SD (n−1 denominator) and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Option<Self> {
        let (mean, sd) = mean_sd(xs)?;
        Some(Self {
            mean,
            sd,
            se: sd / (xs.len() as f64).sqrt(),
            count: xs.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub stage: Stage,
    pub estimate: Summary,
    /// Of `estimate - true_iv` per path.
    pub error: Summary,
    /// Share of paths whose interval covers the true IV.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub stage: Stage,
    pub var_u: Summary,
    pub sigma2_u: Summary,
    /// Per-lag summaries of `gamma[j-1]`.
    pub gamma: Vec<Summary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeInfo {
    pub elapsed_secs: f64,
    pub workers: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: McConfig,
    pub n_ok: usize,
    pub n_failed: usize,
    pub true_iv: Summary,
    pub estimators: Vec<EstimatorSummary>,
    pub noise: Vec<NoiseSummary>,
    pub paths: Vec<PathRecord>,
    pub runtime: RuntimeInfo,
}

impl McReport {
    pub fn estimator(&self, stage: Stage) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.stage == stage)
    }

    pub fn ok_paths(&self) -> impl Iterator<Item = &PathValues> {
        self.paths.iter().filter_map(|p| p.values.as_ref())
    }

    /// Normalized statistics of a stage over the successful paths.
    pub fn normalized(&self, stage: Stage) -> Vec<f64> {
        self.ok_paths().filter_map(|p| p.normalized(stage)).collect()
    }

    /// Everything except the runtime metadata, for reproducibility checks.
    pub fn same_results(&self, other: &McReport) -> bool {
        self.config == other.config
            && self.n_ok == other.n_ok
            && self.n_failed == other.n_failed
            && self.true_iv == other.true_iv
            && self.estimators == other.estimators
            && self.noise == other.noise
            && self.paths == other.paths
    }

    pub fn stages(&self) -> Vec<Stage> {
        std::iter::once(Stage::Raw)
            .chain((1..=self.config.tuning.n_steps).map(Stage::Step))
            .collect()
    }

    /// Long-format estimator table.
    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        write_long_table(&[(self.config.label.clone(), self)], w)
    }
}

fn run_path(cfg: &McConfig, rep: usize) -> PathRecord {
    let seed = split_seed(cfg.base_seed, rep as u64);
    let result = simulate_observed(&cfg.price, &cfg.noise, cfg.n_obs, cfg.horizon, seed).and_then(|path| {
        let inputs = PipelineInputs::compute(&path.series, &cfg.tuning)?;
        let rep = run_pipeline_on(inputs, &cfg.tuning)?;
        Ok(PathValues::from_report(&rep, path.true_iv, path.series.n()))
    });
    match result {
        Ok(values) => PathRecord {
            rep,
            seed,
            values: Some(values),
            error: None,
        },
        Err(e) => PathRecord {
            rep,
            seed,
            values: None,
            error: Some(e.to_string()),
        },
    }
}

fn summarize<F: Fn(&PathValues) -> Option<f64>>(paths: &[&PathValues], f: F) -> Summary {
    let xs: Vec<f64> = paths.iter().filter_map(|p| f(p)).collect();
    Summary::of(&xs).unwrap_or(Summary {
        mean: f64::NAN,
        sd: f64::NAN,
        se: f64::NAN,
        count: 0,
    })
}

/// Run all replications of a design.
pub fn run_mc(cfg: &McConfig) -> Result<McReport> {
    cfg.validate()?;
    let start = Instant::now();
    let job = || -> Vec<PathRecord> { (0..cfg.n_reps).into_par_iter().map(|r| run_path(cfg, r)).collect() };
    let (paths, workers) = match cfg.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::param("workers", e.to_string()))?;
            (pool.install(job), w)
        }
        None => (job(), rayon::current_num_threads()),
    };

    let ok: Vec<&PathValues> = paths.iter().filter_map(|p| p.values.as_ref()).collect();
    let n_failed = paths.len() - ok.len();
    if n_failed > 0 {
        log::warn!("{}: {n_failed} of {} paths failed", cfg.label, cfg.n_reps);
    }
    let stages: Vec<Stage> = std::iter::once(Stage::Raw)
        .chain((1..=cfg.tuning.n_steps).map(Stage::Step))
        .collect();
    let estimators = stages
        .iter()
        .map(|&st| {
            let covered = ok
                .iter()
                .filter(|p| {
                    let v = p.stage(st).expect("stage present");
                    v.ci_low <= p.true_iv && p.true_iv <= v.ci_high
                })
                .count();
            EstimatorSummary {
                stage: st,
                estimate: summarize(&ok, |p| p.stage(st).map(|v| v.iv)),
                error: summarize(&ok, |p| p.stage(st).map(|v| v.iv - p.true_iv)),
                coverage: if ok.is_empty() {
                    f64::NAN
                } else {
                    covered as f64 / ok.len() as f64
                },
            }
        })
        .collect();
    let noise = stages
        .iter()
        .map(|&st| NoiseSummary {
            stage: st,
            var_u: summarize(&ok, |p| p.stage(st).map(|v| v.var_u)),
            sigma2_u: summarize(&ok, |p| p.stage(st).map(|v| v.sigma2_u)),
            gamma: (0..cfg.tuning.max_lag)
                .map(|k| summarize(&ok, |p| p.stage(st).map(|v| v.gamma[k])))
                .collect(),
        })
        .collect();
    Ok(McReport {
        config: cfg.clone(),
        n_ok: ok.len(),
        n_failed,
        true_iv: summarize(&ok, |p| Some(p.true_iv)),
        estimators,
        noise,
        paths,
        runtime: RuntimeInfo {
            elapsed_secs: start.elapsed().as_secs_f64(),
            workers,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// One row of an RV-versus-lag curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub j: usize,
    pub variant: String,
    pub value: f64,
    /// MC standard error of `value`; 0 for model lines.
    pub se: f64,
}

/// MC means of `RV(j)`, of `RV(j)` adjusted with each supplied IV value, the
/// diffusion-bias line `j·IV/(2(n-j+1))` at the true IV, and the noise model's
/// limit `Var(U) - γ(j)`.
pub fn rv_curve_from(report: &McReport, max_lag: usize, iv_variants: &[f64]) -> Result<Vec<CurvePoint>> {
    let ok: Vec<&PathValues> = report.ok_paths().collect();
    let first = ok
        .first()
        .ok_or_else(|| Error::param("report", "no successful paths"))?;
    if max_lag < 1 || max_lag > first.rv.len() {
        return Err(Error::param(
            "max_lag",
            format!(
                "need 1 <= max_lag <= {} (lags stored per path), got {max_lag}",
                first.rv.len()
            ),
        ));
    }
    let noise = &report.config.noise;
    let mut out = Vec::new();
    for j in 1..=max_lag {
        let rv = summarize(&ok, |p| Some(p.rv[j - 1]));
        out.push(CurvePoint {
            j,
            variant: "rv".into(),
            value: rv.mean,
            se: rv.se,
        });
        for &iv in iv_variants {
            let adj = summarize(&ok, |p| Some(p.rv[j - 1] - finite_sample_bias(p.n, j, iv)));
            out.push(CurvePoint {
                j,
                variant: format!("rv_adj@{iv:e}"),
                value: adj.mean,
                se: adj.se,
            });
        }
        let bias = summarize(&ok, |p| Some(finite_sample_bias(p.n, j, p.true_iv)));
        out.push(CurvePoint {
            j,
            variant: "diffusion_bias".into(),
            value: bias.mean,
            se: 0.0,
        });
        out.push(CurvePoint {
            j,
            variant: "model".into(),
            value: noise.var_u() - noise.autocov(j),
            se: 0.0,
        });
    }
    Ok(out)
}

/// Run a design with enough stored lags and build its RV curve.
pub fn rv_curve(cfg: &McConfig, max_lag: usize, iv_variants: &[f64]) -> Result<Vec<CurvePoint>> {
    let mut cfg = cfg.clone();
    cfg.tuning.max_lag = cfg.tuning.max_lag.max(max_lag);
    let report = run_mc(&cfg)?;
    rv_curve_from(&report, max_lag, iv_variants)
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["j", "variant", "value", "se"])?;
    for p in points {
        wr.write_record([
            p.j.to_string(),
            p.variant.clone(),
            format!("{:e}", p.value),
            format!("{:e}", p.se),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QqPair {
    pub theoretical: f64,
    pub sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqData {
    pub n: usize,
    pub pairs: Vec<QqPair>,
    /// `None` with fewer than two samples.
    pub ks: Option<f64>,
    pub ks_pvalue: Option<f64>,
    /// Least-squares slope and intercept of sample on theoretical quantiles.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

/// Sorted samples against standard-normal quantiles at `(i - 0.5)/N`.
pub fn qq_from_samples(samples: &[f64]) -> Result<QqData> {
    if samples.is_empty() {
        return Err(Error::param("samples", "no normalized statistics to compare"));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("samples", "non-finite value"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let pairs: Vec<QqPair> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| QqPair {
            theoretical: inverse_normal_cdf((i as f64 + 0.5) / n as f64),
            sample: x,
        })
        .collect();
    if n < 2 {
        return Ok(QqData {
            n,
            pairs,
            ks: None,
            ks_pvalue: None,
            slope: None,
            intercept: None,
        });
    }
    let mt = pairs.iter().map(|p| p.theoretical).sum::<f64>() / n as f64;
    let ms = xs.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in &pairs {
        sxy += (p.theoretical - mt) * (p.sample - ms);
        sxx += (p.theoretical - mt) * (p.theoretical - mt);
    }
    let slope = sxy / sxx;
    let ks = ks_statistic_normal(&xs).expect("non-empty");
    Ok(QqData {
        n,
        pairs,
        ks: Some(ks),
        ks_pvalue: Some(ks_pvalue(ks, n)),
        slope: Some(slope),
        intercept: Some(ms - slope * mt),
    })
}

/// QQ data of a stage's normalized statistics.
pub fn qq_data(report: &McReport, stage: Stage) -> Result<QqData> {
    qq_from_samples(&report.normalized(stage))
}

pub fn write_qq_csv<W: Write>(qq: &QqData, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["theoretical", "sample"])?;
    for p in &qq.pairs {
        wr.write_record([format!("{:e}", p.theoretical), format!("{:e}", p.sample)])?;
    }
    wr.flush()?;
    Ok(())
}

/// Which autocorrelation estimator the bands describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcfEstimator {
    /// No finite-sample correction.
    Rv,
    /// Corrected with the path's true IV.
    Bcrv,
    /// Corrected with the step-1 IV estimate, as in the two-step pipeline.
    BcrvTwoStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcfBand {
    pub lag: usize,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub true_acf: f64,
}

/// Per-lag mean and empirical 2.5%/97.5% quantiles of the estimated ACF.
pub fn acf_bands_from(report: &McReport, estimator: AcfEstimator) -> Result<Vec<AcfBand>> {
    let t = &report.config.tuning;
    let mut per_lag: Vec<Vec<f64>> = vec![Vec::new(); t.max_lag];
    for p in report.ok_paths() {
        let iv = match estimator {
            AcfEstimator::Rv => None,
            AcfEstimator::Bcrv => Some(p.true_iv.max(0.0)),
            AcfEstimator::BcrvTwoStep => Some(p.steps[0].iv.max(0.0)),
        };
        let nm = NoiseMoments::from_rv(&p.rv, p.n, t.j_n, t.i_n, t.max_lag, iv)?;
        for (k, a) in nm.acf_values().into_iter().enumerate() {
            per_lag[k].push(a);
        }
    }
    if per_lag.first().is_none_or(|v| v.is_empty()) {
        return Err(Error::param("report", "no successful paths"));
    }
    Ok(per_lag
        .into_iter()
        .enumerate()
        .map(|(k, mut xs)| {
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.sort_by(f64::total_cmp);
            AcfBand {
                lag: k + 1,
                mean,
                lower: quantile_sorted(&xs, 0.025).expect("non-empty"),
                upper: quantile_sorted(&xs, 0.975).expect("non-empty"),
                true_acf: report.config.noise.acf(k + 1),
            }
        })
        .collect())
}

pub fn acf_band_report(cfg: &McConfig, estimator: AcfEstimator) -> Result<Vec<AcfBand>> {
    acf_bands_from(&run_mc(cfg)?, estimator)
}

pub fn write_acf_bands_csv<W: Write>(bands: &[AcfBand], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["lag", "mean", "lower", "upper", "true_acf"])?;
    for b in bands {
        wr.write_record([
            b.lag.to_string(),
            format!("{:e}", b.mean),
            format!("{:e}", b.lower),
            format!("{:e}", b.upper),
            format!("{:e}", b.true_acf),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// `design,stage,mean,sd,se,bias,bias_sd,coverage,n_ok,n_failed`
pub fn write_long_table<W: Write>(reports: &[(String, &McReport)], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "design", "stage", "mean", "sd", "se", "bias", "bias_sd", "coverage", "n_ok", "n_failed",
    ])?;
    for (label, r) in reports {
        for e in &r.estimators {
            wr.write_record([
                label.clone(),
                e.stage.to_string(),
                format!("{:e}", e.estimate.mean),
                format!("{:e}", e.estimate.sd),
                format!("{:e}", e.estimate.se),
                format!("{:e}", e.error.mean),
                format!("{:e}", e.error.sd),
                format!("{}", e.coverage),
                r.n_ok.to_string(),
                r.n_failed.to_string(),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Estimator rows (step1, raw, step2, ...) by design columns, cells
/// `mean (sd)` in units of `scale` (e.g. `1e-5`). With `bias`, cells hold the
/// mean error against the true IV instead.
pub fn write_wide_table<W: Write>(reports: &[(String, &McReport)], scale: f64, bias: bool, w: W) -> Result<()> {
    let Some((_, first)) = reports.first() else {
        return Err(Error::param("reports", "nothing to tabulate"));
    };
    let steps = first.config.tuning.n_steps;
    let mut order = vec![Stage::Step(1), Stage::Raw];
    order.extend((2..=steps).map(Stage::Step));
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["estimator".to_string()];
    header.extend(reports.iter().map(|(l, _)| l.clone()));
    wr.write_record(&header)?;
    for st in order {
        let mut row = vec![st.to_string()];
        for (_, r) in reports {
            row.push(match r.estimator(st) {
                Some(e) => {
                    let s = if bias { e.error } else { e.estimate };
                    format!("{:.2} ({:.2})", s.mean / scale, s.sd / scale)
                }
                None => String::new(),
            });
        }
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Named experiment presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Table1,
    Table2,
    SvAppendix,
    Qq,
    RvCurve,
    AcfBands,
}

pub const RHO_GRID: [f64; 5] = [-0.7, -0.3, 0.0, 0.3, 0.7];

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "table1" => Preset::Table1,
            "table2" => Preset::Table2,
            "sv-appendix" => Preset::SvAppendix,
            "qq" => Preset::Qq,
            "rv-curve" => Preset::RvCurve,
            "acf-bands" => Preset::AcfBands,
            other => {
                return Err(format!(
                    "unknown preset `{other}` (table1, table2, sv-appendix, qq, rv-curve, acf-bands)"
                ))
            }
        })
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::SvAppendix => "sv-appendix",
            Preset::Qq => "qq",
            Preset::RvCurve => "rv-curve",
            Preset::AcfBands => "acf-bands",
        }
    }

    /// Designs of the preset. All designs share `base_seed`, so columns use
    /// common random numbers.
    pub fn designs(self, n_reps: usize, base_seed: u64) -> Vec<McConfig> {
        let tuning = table_tuning();
        let ou = |rho: f64, n_obs: usize, label: String, outputs: Vec<OutputKind>| McConfig {
            label,
            price: PriceModel::Ou(OuConfig::benchmark()),
            noise: Ar1NoiseConfig::benchmark(rho),
            n_obs,
            horizon: 1.0,
            n_reps,
            base_seed,
            tuning,
            outputs,
            workers: None,
        };
        match self {
            Preset::Table1 => RHO_GRID
                .iter()
                .map(|&r| ou(r, TABLE1_N_OBS, rho_label(r), vec![OutputKind::Tables]))
                .collect(),
            Preset::Table2 => RHO_GRID
                .iter()
                .map(|&r| ou(r, TABLE2_N_OBS, rho_label(r), vec![OutputKind::Tables]))
                .collect(),
            Preset::Qq => RHO_GRID
                .iter()
                .map(|&r| ou(r, TABLE2_N_OBS, rho_label(r), vec![OutputKind::Qq]))
                .collect(),
            Preset::AcfBands => RHO_GRID
                .iter()
                .map(|&r| ou(r, TABLE1_N_OBS, rho_label(r), vec![OutputKind::AcfBands]))
                .collect(),
            Preset::RvCurve => {
                let mut c = ou(-0.7, TABLE1_N_OBS, rho_label(-0.7), vec![OutputKind::RvCurve]);
                c.tuning.max_lag = RV_CURVE_MAX_LAG;
                vec![c]
            }
            Preset::SvAppendix => SV_CELLS
                .iter()
                .map(|&(rho, dt)| McConfig {
                    label: format!("rho={rho},dt={dt}s"),
                    price: PriceModel::Sv(SvConfig::appendix()),
                    noise: Ar1NoiseConfig::appendix(rho),
                    n_obs: (crate::sim::SESSION_SECONDS / dt).round() as usize + 1,
                    horizon: 1.0,
                    n_reps,
                    base_seed,
                    tuning,
                    outputs: vec![OutputKind::Tables, OutputKind::AcfBands],
                    workers: None,
                })
                .collect(),
        }
    }
}

pub const TABLE1_N_OBS: usize = 23_401;
pub const TABLE2_N_OBS: usize = 468_001;
pub const RV_CURVE_MAX_LAG: usize = 30;

/// `(ρ, Δ in seconds)` of the stochastic-volatility cells.
pub const SV_CELLS: [(f64, f64); 3] = [(0.7, 0.2), (0.0, 1.0), (-0.7, 0.4)];

/// Tuning of the published experiments: `c = 0.2`, `j_n = 20`, `i_n = 10`,
/// three steps, half-open pre-averaging window.
pub fn table_tuning() -> Tuning {
    Tuning {
        n_steps: 3,
        window: Window::HalfOpen,
        ..Tuning::default()
    }
}

pub fn rho_label(rho: f64) -> String {
    format!("rho={rho}")
}
