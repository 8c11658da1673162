use anyhow::Context;
use hfvol::mc::{
    acf_bands_from, qq_data, run_mc, rv_curve_from, write_acf_bands_csv, write_curve_csv, write_long_table,
    write_qq_csv, write_wide_table, AcfEstimator, McConfig, McReport, OutputKind,
};
use hfvol::preavg::Stage;

use crate::args::{Global, McArgs};
use crate::output::{slug, Classify, CmdResult, OutDir};

pub const DEFAULT_REPS: usize = 1000;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Table cells are printed in units of 1e-5.
const TABLE_SCALE: f64 = 1e-5;

fn load_designs(path: &std::path::Path) -> CmdResult<Vec<McConfig>> {
    let value: serde_json::Value = crate::output::read_json(path)?;
    let ctx = || format!("config {}", path.display());
    match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                serde_json::from_value(v)
                    .with_context(|| format!("{}: design {i}", ctx()))
                    .config()
            })
            .collect(),
        v => Ok(vec![serde_json::from_value(v).with_context(ctx).config()?]),
    }
}

pub fn run(g: &Global, a: &McArgs) -> CmdResult {
    let (name, mut designs) = match (&a.preset, &a.config) {
        (Some(p), _) => (
            p.name().to_string(),
            p.designs(a.reps.unwrap_or(DEFAULT_REPS), g.seed.unwrap_or(DEFAULT_SEED)),
        ),
        (None, Some(path)) => {
            let mut ds = load_designs(path)?;
            for d in &mut ds {
                if let Some(r) = a.reps {
                    d.n_reps = r;
                }
                if let Some(s) = g.seed {
                    d.base_seed = s;
                }
            }
            ("mc".to_string(), ds)
        }
        (None, None) => unreachable!("clap requires --preset or --config"),
    };
    if designs.is_empty() {
        return Err(crate::output::config_error("no designs to run"));
    }
    for (i, d) in designs.iter_mut().enumerate() {
        if g.workers.is_some() {
            d.workers = g.workers;
        }
        if d.label.is_empty() {
            d.label = format!("design{i}");
        }
        d.validate().with_context(|| format!("design `{}`", d.label)).config()?;
    }
    let out = OutDir::new(&g.out)?;

    let mut reports = Vec::with_capacity(designs.len());
    for d in &designs {
        let r = run_mc(d).with_context(|| format!("design `{}`", d.label)).runtime()?;
        println!(
            "{}: {} of {} paths ok, {:.1} s on {} workers",
            d.label, r.n_ok, d.n_reps, r.runtime.elapsed_secs, r.runtime.workers
        );
        reports.push(r);
    }
    let labelled: Vec<(String, &McReport)> = reports.iter().map(|r| (r.config.label.clone(), r)).collect();
    out.write_with("summary.csv", |w| write_long_table(&labelled, w))?;

    if designs.iter().any(|d| d.outputs.contains(&OutputKind::Tables)) {
        let with_tables: Vec<(String, &McReport)> = labelled
            .iter()
            .filter(|(_, r)| r.config.outputs.contains(&OutputKind::Tables))
            .cloned()
            .collect();
        out.write_with(&format!("{name}.csv"), |w| {
            write_wide_table(&with_tables, TABLE_SCALE, false, w)
        })?;
        out.write_with(&format!("{name}_bias.csv"), |w| {
            write_wide_table(&with_tables, TABLE_SCALE, true, w)
        })?;
        let mut buf = Vec::new();
        write_wide_table(&with_tables, TABLE_SCALE, false, &mut buf).runtime()?;
        println!("\nmean (sd) x 1e-5");
        print_csv(&buf);
        let mut buf = Vec::new();
        write_wide_table(&with_tables, TABLE_SCALE, true, &mut buf).runtime()?;
        println!("\nbias mean (sd) x 1e-5");
        print_csv(&buf);
    }

    for r in &reports {
        let s = slug(&r.config.label);
        let outputs = &r.config.outputs;
        if outputs.contains(&OutputKind::Qq) && r.n_ok > 0 {
            let last = r.config.tuning.n_steps.min(2);
            for st in [Stage::Raw, Stage::Step(last)] {
                let qq = qq_data(r, st).runtime()?;
                out.write_with(&format!("qq_{s}_{st}.csv"), |w| write_qq_csv(&qq, w))?;
                let cov = r.estimator(st).map(|e| e.coverage).unwrap_or(f64::NAN);
                match qq.ks_pvalue {
                    Some(p) => println!("{}: {st} KS p-value {p:.3}, CI coverage {cov:.3}", r.config.label),
                    None => println!("{}: {st} KS test undefined for {} sample(s)", r.config.label, qq.n),
                }
            }
        }
        if outputs.contains(&OutputKind::AcfBands) && r.n_ok > 0 {
            for (est, tag) in [
                (AcfEstimator::Rv, "rv"),
                (AcfEstimator::Bcrv, "bcrv"),
                (AcfEstimator::BcrvTwoStep, "bcrv_two_step"),
            ] {
                let bands = acf_bands_from(r, est).runtime()?;
                out.write_with(&format!("acf_bands_{s}_{tag}.csv"), |w| write_acf_bands_csv(&bands, w))?;
            }
        }
        if outputs.contains(&OutputKind::RvCurve) && r.n_ok > 0 {
            let iv = r.true_iv.mean;
            let curve = rv_curve_from(r, r.config.tuning.rv_lag_count(), &[0.8 * iv, iv, 1.2 * iv]).runtime()?;
            out.write_with(&format!("rv_curve_{s}.csv"), |w| write_curve_csv(&curve, w))?;
        }
    }

    if !a.keep_paths {
        for r in &mut reports {
            r.paths.clear();
        }
    }
    let p = out.write_json("report.json", &reports)?;
    println!("\nwrote {}", p.display());
    Ok(())
}

fn print_csv(buf: &[u8]) {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(buf);
    for rec in rdr.records().flatten() {
        let cells: Vec<String> = rec
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { format!("{c:<10}") } else { format!("{c:>16}") })
            .collect();
        println!("{}", cells.join(""));
    }
}
