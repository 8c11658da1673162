use hfvol::ingest::write_series_csv;
use hfvol::sim::{simulate_observed, Ar1NoiseConfig, OuConfig, PriceModel, SvConfig};
use hfvol::TickSeries;
use serde::{Deserialize, Serialize};

use crate::args::{Global, Model, NoiseKind, SimulateArgs};
use crate::output::{read_json, Classify, CmdResult, OutDir};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub price: PriceModel,
    pub noise: Ar1NoiseConfig,
    /// Observations per path, `N = n + 1`.
    pub n_obs: usize,
    #[serde(default = "one")]
    pub horizon: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize)]
struct Truth<'a> {
    seed: u64,
    #[serde(flatten)]
    config: &'a SimulateConfig,
    true_iv: f64,
    true_sigma2_u: f64,
    true_var_u: f64,
}

fn from_flags(a: &SimulateArgs) -> SimulateConfig {
    let price = match a.model {
        Model::Ou => PriceModel::Ou(OuConfig::benchmark()),
        Model::Sv => PriceModel::Sv(SvConfig::appendix()),
    };
    let noise = match a.noise {
        NoiseKind::Benchmark => Ar1NoiseConfig::benchmark(a.rho),
        NoiseKind::Appendix => Ar1NoiseConfig::appendix(a.rho),
        NoiseKind::None => Ar1NoiseConfig::none(),
    };
    SimulateConfig {
        price,
        noise,
        n_obs: a.n,
        horizon: a.horizon,
    }
}

pub fn run(g: &Global, a: &SimulateArgs) -> CmdResult {
    let cfg = match &a.config {
        Some(p) => read_json::<SimulateConfig>(p)?,
        None => from_flags(a),
    };
    cfg.price.validate().config()?;
    cfg.noise.validate().config()?;
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    let path =
        simulate_observed(&cfg.price, &cfg.noise, cfg.n_obs, cfg.horizon, seed).map_err(crate::output::lib_error)?;

    let out = OutDir::new(&g.out)?;
    let series_file = out.write_with("path.csv", |w| write_series_csv(&path.series, w))?;
    if a.efficient {
        let eff = TickSeries::new(path.series.timestamps().to_vec(), path.efficient.clone(), "efficient").runtime()?;
        out.write_with("efficient.csv", |w| write_series_csv(&eff, w))?;
    }
    let truth = Truth {
        seed,
        config: &cfg,
        true_iv: path.true_iv,
        true_sigma2_u: path.true_sigma2_u,
        true_var_u: cfg.noise.var_u(),
    };
    out.write_json("truth.json", &truth)?;
    println!(
        "simulated {} observations (seed {seed}): true IV {:.6e}, true noise long-run variance {:.6e}",
        path.series.len(),
        path.true_iv,
        path.true_sigma2_u
    );
    println!("wrote {}", series_file.display());
    Ok(())
}
