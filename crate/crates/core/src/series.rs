use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered log-price observations with their observation times.
///
/// Timestamps are seconds since session open and strictly increasing. The
/// estimators treat a series as equidistant in observation index; timestamps
/// only drive the sampling transforms and reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickSeries {
    timestamps: Vec<f64>,
    log_prices: Vec<f64>,
    pub label: String,
}

impl TickSeries {
    pub fn new(timestamps: Vec<f64>, log_prices: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if timestamps.len() != log_prices.len() {
            return Err(Error::InvalidSeries(format!(
                "{} timestamps but {} prices",
                timestamps.len(),
                log_prices.len()
            )));
        }
        if let Some(i) = log_prices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite price at index {i}")));
        }
        if let Some(i) = timestamps.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite timestamp at index {i}")));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "timestamps not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self {
            timestamps,
            log_prices,
            label: label.into(),
        })
    }

    /// Series observed at unit spacing `0, 1, 2, ...`.
    pub fn from_prices(log_prices: Vec<f64>) -> Result<Self> {
        let ts = (0..log_prices.len()).map(|i| i as f64).collect();
        Self::new(ts, log_prices, "")
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }

    /// Number of observations `N`.
    pub fn len(&self) -> usize {
        self.log_prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_prices.is_empty()
    }

    /// Index of the last observation, `n = N - 1`; the observations are
    /// `Y_0, ..., Y_n`.
    pub fn n(&self) -> usize {
        self.len().saturating_sub(1)
    }

    /// Multiply every log-price by `a`, keeping timestamps.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            timestamps: self.timestamps.clone(),
            log_prices: self.log_prices.iter().map(|p| a * p).collect(),
            label: self.label.clone(),
        }
    }

    /// Keep the observations at the given (increasing) indices.
    pub(crate) fn select(&self, idx: &[usize]) -> Self {
        Self {
            timestamps: idx.iter().map(|&i| self.timestamps[i]).collect(),
            log_prices: idx.iter().map(|&i| self.log_prices[i]).collect(),
            label: self.label.clone(),
        }
    }
}
