//! Estimation of integrated volatility and serially dependent
//! microstructure noise from high-frequency prices.
//!
//! The observed log-price is `Y = X + U`, an Itô semimartingale plus
//! stationary noise. [`noise_moments`] estimates the noise variance and
//! autocovariances from lagged realized volatilities, [`preavg`] estimates
//! integrated volatility by pre-averaging, and [`multistep`] runs the
//! interlocked bias-correction pipeline. [`sim`] and [`mc`] provide the
//! simulation designs and Monte Carlo harness; [`ingest`] reads tick CSVs.

pub mod error;
pub mod ingest;
pub mod kernel;
pub mod mc;
pub mod multistep;
pub mod noise_moments;
pub mod preavg;
pub mod sampling;
pub mod series;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use multistep::{run_pipeline, PipelineReport, Tuning};
pub use noise_moments::{estimate_noise_moments, rv_lag, NoiseMoments};
pub use preavg::{iv_estimate, IvEstimate, PavGeometry, Window};
pub use series::TickSeries;
