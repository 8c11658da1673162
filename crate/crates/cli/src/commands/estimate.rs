use hfvol::multistep::{run_pipeline, PipelineReport};
use hfvol::noise_moments::NoiseMoments;
use serde::Serialize;

use super::{load_sampled, InputInfo, CI_CAVEAT};
use crate::args::{EstimateArgs, Global};
use crate::output::{Classify, CmdResult, Failure, OutDir};

#[derive(Debug, Serialize)]
struct EstimateOutput<'a> {
    input: InputInfo,
    caveat: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a PipelineReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<FailureInfo>,
}

#[derive(Debug, Serialize)]
struct FailureInfo {
    stage: Option<String>,
    message: String,
    /// Noise moments computed before the failure.
    partial: Option<NoiseMoments>,
}

pub fn run(g: &Global, a: &EstimateArgs) -> CmdResult {
    let mut tuning = a.tuning.resolve()?;
    if let Some(k) = a.steps {
        tuning.n_steps = k;
    }
    if let Some(alpha) = a.alpha {
        tuning.alpha = alpha;
    }
    tuning.validate().config()?;
    let (series, input) = load_sampled(&a.input, a.sampling)?;
    let out = OutDir::new(&g.out)?;

    let report = match run_pipeline(&series, &tuning) {
        Ok(r) => r,
        Err(e) => {
            let (stage, partial) = match &e {
                hfvol::Error::Pipeline { stage, partial, .. } => (Some(stage.clone()), partial.as_deref().cloned()),
                _ => (None, None),
            };
            let doc = EstimateOutput {
                input,
                caveat: CI_CAVEAT,
                report: None,
                failure: Some(FailureInfo {
                    stage,
                    message: e.to_string(),
                    partial,
                }),
            };
            out.write_json("report.json", &doc)?;
            return Err(Failure::Runtime(
                anyhow::Error::new(e).context("estimation failed; partial report in report.json"),
            ));
        }
    };

    out.write_json(
        "report.json",
        &EstimateOutput {
            input,
            caveat: CI_CAVEAT,
            report: Some(&report),
            failure: None,
        },
    )?;
    out.write_with("steps.csv", |w| report.write_steps_csv(w))?;

    let pct = 100.0 * (1.0 - tuning.alpha);
    println!(
        "n = {}, c = {}, k_n = {}, blocks = {}, j_n = {}, i_n = {}",
        series.n(),
        tuning.c,
        report.pav.geometry.k_n,
        report.pav.geometry.m_n,
        tuning.j_n,
        tuning.i_n
    );
    println!(
        "{:<6} {:>13} {:>13} {:>27}",
        "stage",
        "noise lrv",
        "IV",
        format!("{pct}% CI")
    );
    let raw = &report.raw_corrected;
    let line = |stage: String, est: &hfvol::IvEstimate| {
        println!(
            "{:<6} {:>13.5e} {:>13.5e}   [{:.5e}, {:.5e}]",
            stage, est.sigma2_u_used, est.iv, est.ci_low, est.ci_high
        );
    };
    line("raw".into(), raw);
    for st in &report.steps {
        line(st.iv.stage.to_string(), &st.iv);
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
