//! Closed-form curves of the two binary compound-MAC examples, in bits.

use serde::Serialize;

use crate::channels::{example1_noise, h2, h2_inverse};
use crate::optim::maximize_unit_interval;

const CURVE_RANGE: f64 = 0.6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Example1Row {
    pub rate: f64,
    pub hi1: f64,
    pub hi2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeRow {
    pub rate: f64,
    pub slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Example2Row {
    pub rate: f64,
    pub exact: f64,
    pub lower_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InputScanRow {
    pub p: f64,
    pub best_q: f64,
    pub value: f64,
}

fn convolve(p: f64, p0: f64) -> f64 {
    p * p0 + (1.0 - p) * (1.0 - p0)
}

/// `p` in `[0, 1/2]` with `h(p * p0) - 1/2 = rate`, `*` the binary convolution.
fn p_of_rate(rate: f64) -> f64 {
    let p0 = example1_noise();
    let target = rate + 0.5;
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h2(convolve(mid, p0)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `1 - h(p_R)`, the single-letter trade-off before truncation at 1/2.
fn f1(rate: f64) -> f64 {
    if rate >= 0.5 {
        0.0
    } else {
        1.0 - h2(p_of_rate(rate.max(0.0)))
    }
}

/// Best worst-case `R_A` with `R_B >= rate` and no time sharing.
pub fn example1_hi1(rate: f64) -> f64 {
    f1(rate).min(0.5)
}

/// Same with time sharing.
pub fn example1_hi2(rate: f64) -> f64 {
    if rate >= 0.5 {
        0.0
    } else if rate >= 0.25 {
        1.0 - 2.0 * rate
    } else {
        0.5
    }
}

fn rates(resolution: usize) -> impl Iterator<Item = f64> {
    let n = resolution.max(1);
    (0..=n).map(move |k| CURVE_RANGE * k as f64 / n as f64)
}

pub fn example1_curves(resolution: usize) -> Vec<Example1Row> {
    rates(resolution).map(|rate| Example1Row { rate, hi1: example1_hi1(rate), hi2: example1_hi2(rate) }).collect()
}

/// `(f1(R) - f1(0)) / R` on `(0, 1/2]`.
pub fn f1_slope_scan(resolution: usize) -> Vec<SlopeRow> {
    let n = resolution.max(1);
    let f0 = f1(0.0);
    (1..=n)
        .map(|k| {
            let rate = 0.5 * k as f64 / n as f64;
            SlopeRow { rate, slope: (f1(rate) - f0) / rate }
        })
        .collect()
}

pub fn example2_exact(rate: f64) -> f64 {
    if rate <= 0.5 {
        h2(0.25) - 0.5
    } else {
        0.0
    }
}

/// Symmetrized single-letter lower bound; zero once the rate is out of reach.
pub fn example2_lower_bound(rate: f64) -> f64 {
    if rate > 0.5 {
        return 0.0;
    }
    let p = h2_inverse(2.0 * rate.max(0.0));
    let (_, v) = maximize_unit_interval(|q| 0.5 * (h2(p * q) + h2((1.0 - p) * (1.0 - q))));
    (v - rate).max(0.0)
}

pub fn example2_curves(resolution: usize) -> Vec<Example2Row> {
    rates(resolution).map(|rate| Example2Row { rate, exact: example2_exact(rate), lower_bound: example2_lower_bound(rate) }).collect()
}

/// For each `p` on a grid over `[0, 1]`, the best `q` for
/// `min(h(pq) - q h(p), h((1-p)(1-q)) - (1-q) h(p))`.
pub fn example2_input_scan(resolution: usize) -> Vec<InputScanRow> {
    let n = resolution.max(1);
    (0..=n)
        .map(|k| {
            let p = k as f64 / n as f64;
            let hp = h2(p);
            let (best_q, value) =
                maximize_unit_interval(|q| (h2(p * q) - q * hp).min(h2((1.0 - p) * (1.0 - q)) - (1.0 - q) * hp));
            InputScanRow { p, best_q, value }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_branches() {
        assert_eq!(example1_hi2(0.0), 0.5);
        assert_eq!(example1_hi2(0.25), 0.5);
        assert_eq!(example1_hi2(0.5), 0.0);
        assert!(example1_hi1(0.5).abs() < 1e-12);
        assert!((example1_hi1(0.0) - 0.5).abs() < 1e-12);
        assert!(example1_hi1(0.25) <= example1_hi2(0.25));
    }

    #[test]
    fn example2_values() {
        assert!((example2_exact(0.3) - 0.311278).abs() < 1e-6);
        assert_eq!(example2_exact(0.6), 0.0);
        assert!((example2_lower_bound(0.5) - 0.311278).abs() < 1e-5);
    }
}
