pub mod acf;
pub mod estimate;
pub mod ingest;
pub mod mc;
pub mod simulate;

use std::path::Path;

use anyhow::Context;
use hfvol::ingest::read_series_file;
use hfvol::sampling::{calendar_subsample, tick_filter};
use hfvol::TickSeries;
use serde::Serialize;

use crate::args::Sampling;
use crate::output::{Classify, CmdResult};

/// Caveat attached to every interval computed from data the user supplies.
pub const CI_CAVEAT: &str =
    "confidence intervals rest on mixing and moment conditions on the noise that cannot be checked on the data";

/// The series actually used for estimation and how it was obtained.
#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub sampling: String,
    pub observations_read: usize,
    pub observations_used: usize,
    pub notes: Vec<String>,
}

pub fn load_sampled(path: &Path, sampling: Sampling) -> CmdResult<(TickSeries, InputInfo)> {
    let raw = read_series_file(path)
        .with_context(|| format!("cannot read series {}", path.display()))
        .config()?;
    let read = raw.len();
    let mut notes = Vec::new();
    let series = match sampling {
        Sampling::None => raw,
        Sampling::Tick => {
            notes.push("zero returns suppressed (tick time)".to_string());
            tick_filter(&raw)
        }
        Sampling::Calendar(g) => {
            notes.push(format!(
                "calendar sampling every {g} s keeps the first observation in each cell; trade time kept as its timestamp"
            ));
            calendar_subsample(&raw, g).runtime()?
        }
    };
    let info = InputInfo {
        path: path.display().to_string(),
        sampling: sampling.to_string(),
        observations_read: read,
        observations_used: series.len(),
        notes,
    };
    Ok((series, info))
}
