use hfvol::multistep::run_pipeline;
use hfvol::noise_moments::{estimate_noise_moments, fit_ar1_acf, log_acf_regression, LogAcfFit, NoiseMoments};
use serde::Serialize;

use super::{load_sampled, InputInfo};
use crate::args::{AcfArgs, Global};
use crate::output::{config_error, Classify, CmdResult, OutDir};

#[derive(Debug, Serialize)]
struct AcfOutput {
    input: InputInfo,
    /// `given`, `step1` or `none`.
    correction: &'static str,
    moments: NoiseMoments,
    fit_lags: usize,
    ar1_fit: Option<f64>,
    log_acf_fit: Option<LogAcfFit>,
}

pub fn run(g: &Global, a: &AcfArgs) -> CmdResult {
    let tuning = a.tuning.resolve()?;
    tuning.validate().config()?;
    if let Some(iv) = a.iv {
        if !(iv >= 0.0 && iv.is_finite()) {
            return Err(config_error(format!("--iv must be a finite value >= 0, got {iv}")));
        }
    }
    let fit_lags = a.fit_lags.unwrap_or(tuning.i_n);
    if fit_lags < 1 || fit_lags > tuning.max_lag {
        return Err(config_error(format!(
            "--fit-lags must be in 1..={} (max_lag), got {fit_lags}",
            tuning.max_lag
        )));
    }
    let (series, input) = load_sampled(&a.input, a.sampling)?;

    let (iv_hat, correction) = if a.two_step {
        let one = hfvol::multistep::Tuning { n_steps: 1, ..tuning };
        let r = run_pipeline(&series, &one).runtime()?;
        (Some(r.steps[0].iv.iv.max(0.0)), "step1")
    } else if let Some(iv) = a.iv {
        (Some(iv), "given")
    } else {
        (None, "none")
    };
    let nm = estimate_noise_moments(&series, tuning.j_n, tuning.i_n, tuning.max_lag, iv_hat).runtime()?;
    let ar1 = fit_ar1_acf(&nm, fit_lags).ok();
    let loglin = log_acf_regression(&nm, fit_lags).ok();

    let out = OutDir::new(&g.out)?;
    out.write_with("acf.csv", |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["lag", "gamma", "acf"])?;
        for j in 1..=nm.max_lag() {
            wr.write_record([
                j.to_string(),
                format!("{:e}", nm.gamma[j - 1]),
                format!("{:e}", nm.acf(j)),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })?;

    println!(
        "n = {}, var_u = {:.5e}, long-run variance = {:.5e} (j_n = {}, i_n = {}, correction: {correction}{})",
        series.n(),
        nm.var_u,
        nm.sigma2_u,
        nm.j_n,
        nm.i_n,
        iv_hat.map(|v| format!(" with IV {v:.5e}")).unwrap_or_default()
    );
    let shown = nm.max_lag().min(10);
    let acfs: Vec<String> = (1..=shown).map(|j| format!("{:.3}", nm.acf(j))).collect();
    println!("acf(1..={shown}): {}", acfs.join(" "));
    if let Some(r) = ar1 {
        println!("AR(1) fit over {fit_lags} lags: {r:.4}");
    }
    if nm.negative_estimate {
        println!("warning: negative variance estimate");
    }
    out.write_json(
        "noise.json",
        &AcfOutput {
            input,
            correction,
            moments: nm,
            fit_lags,
            ar1_fit: ar1,
            log_acf_fit: loglin,
        },
    )?;
    Ok(())
}
