//! Sampling schemes: calendar-time subsampling, tick-time filtering and
//! deterministic time-warped grids. Transaction time is the identity.

use crate::error::{Error, Result};
use crate::series::TickSeries;

/// Keep the first observation in each calendar cell
/// `[k·grid_step, (k+1)·grid_step)`. Empty cells produce nothing; kept
/// points retain their original timestamps.
pub fn calendar_subsample(s: &TickSeries, grid_step: f64) -> Result<TickSeries> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::param("grid_step", format!("must be > 0, got {grid_step}")));
    }
    if s.is_empty() {
        return Err(Error::InvalidSeries("cannot subsample an empty series".into()));
    }
    let mut keep = Vec::new();
    let mut last_cell = None;
    for (i, t) in s.timestamps().iter().enumerate() {
        let cell = (t / grid_step).floor() as i64;
        if last_cell != Some(cell) {
            keep.push(i);
            last_cell = Some(cell);
        }
    }
    Ok(s.select(&keep))
}

/// Suppress zero returns: keep the first observation and every later one
/// whose price differs from the last kept price.
pub fn tick_filter(s: &TickSeries) -> TickSeries {
    let prices = s.log_prices();
    let mut keep = Vec::with_capacity(prices.len());
    let mut last = None;
    for (i, &p) in prices.iter().enumerate() {
        if last != Some(p) {
            keep.push(i);
            last = Some(p);
        }
    }
    s.select(&keep)
}

/// Observation times `t_i = f(i/n)`, `i = 0..=n`, for a map `f` of `[0, 1]`
/// onto itself. `f` must fix both endpoints and be strictly increasing on the
/// evaluation grid.
pub fn time_warp_grid<F: Fn(f64) -> f64>(n: usize, f: F) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::param("n", "need at least one interval"));
    }
    let f0 = f(0.0);
    let f1 = f(1.0);
    if f0.abs() > 1e-12 || (f1 - 1.0).abs() > 1e-12 {
        return Err(Error::param(
            "f",
            format!("must map 0 -> 0 and 1 -> 1, got f(0)={f0}, f(1)={f1}"),
        ));
    }
    let mut ts: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
    ts[0] = 0.0;
    ts[n] = 1.0;
    if let Some(i) = ts.iter().position(|t| !t.is_finite()) {
        return Err(Error::param("f", format!("non-finite value at grid point {i}")));
    }
    if let Some(i) = ts.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "f",
            format!("not strictly increasing between grid points {i} and {}", i + 1),
        ));
    }
    Ok(ts)
}
