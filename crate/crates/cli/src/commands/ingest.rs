use hfvol::ingest::{load_days, write_series_csv, ColumnRef, IngestSpec, PriceScale, TieRule};

use crate::args::{Global, IngestArgs};
use crate::output::{config_error, lib_error, read_json, CmdResult, OutDir};

fn build_spec(a: &IngestArgs) -> CmdResult<IngestSpec> {
    let mut spec = match &a.spec {
        Some(p) => read_json::<IngestSpec>(p)?,
        None => IngestSpec::default(),
    };
    if let Some(p) = &a.input {
        spec.path = p.clone();
    }
    if spec.path.as_os_str().is_empty() {
        return Err(config_error("no input file: give a path or set `path` in --spec"));
    }
    if let Some(d) = a.delimiter {
        spec.delimiter = d;
    }
    if a.no_header {
        spec.has_header = false;
    }
    if a.datetime {
        spec.date_column = None;
    }
    if let Some(c) = &a.date_col {
        spec.date_column = Some(ColumnRef::from(c.as_str()));
    }
    if let Some(c) = &a.time_col {
        spec.time_column = ColumnRef::from(c.as_str());
    }
    if let Some(c) = &a.price_col {
        spec.price_column = ColumnRef::from(c.as_str());
    }
    if let Some(s) = &a.session_start {
        spec.session_start = s.clone();
    }
    if let Some(s) = &a.session_end {
        spec.session_end = s.clone();
    }
    if a.log_prices {
        spec.price_scale = PriceScale::Log;
    }
    if a.jitter_ties {
        spec.ties = TieRule::Jitter;
    }
    Ok(spec)
}

pub fn run(g: &Global, a: &IngestArgs) -> CmdResult {
    let spec = build_spec(a)?;
    let got = load_days(&spec).map_err(|e| match e {
        hfvol::Error::Io(_) | hfvol::Error::Ingest(_) => crate::output::Failure::Config(e.into()),
        e => lib_error(e),
    })?;
    let out = OutDir::new(&g.out)?;
    for day in &got.days {
        out.write_with(&format!("{}.csv", day.date), |w| write_series_csv(&day.series, w))?;
        println!("{}: {} observations", day.date, day.series.len());
    }
    #[derive(serde::Serialize)]
    struct Doc<'a> {
        spec: &'a IngestSpec,
        report: &'a hfvol::ingest::IngestReport,
        days: Vec<(String, usize)>,
    }
    out.write_json(
        "ingest_report.json",
        &Doc {
            spec: &spec,
            report: &got.report,
            days: got.days.iter().map(|d| (d.date.to_string(), d.series.len())).collect(),
        },
    )?;
    let r = &got.report;
    println!(
        "{} rows read, {} kept, {} dropped ({} unparseable, {} outside session, {} nonpositive, {} duplicate timestamps, {} out of order)",
        r.rows_in,
        r.rows_kept,
        r.dropped_total(),
        r.dropped_unparseable,
        r.dropped_outside_session,
        r.dropped_nonpositive,
        r.dropped_duplicate_timestamp,
        r.dropped_out_of_order
    );
    for issue in r.issues.iter().take(5) {
        log::warn!("{issue:?}");
    }
    Ok(())
}
