//! Independent reference computations: modified Bessel functions, the
//! explicit heat kernel of the normalized Laplacian on `ℤ`, brute-force
//! minimization of the `κ` objective, and decay-rate estimation.
//!
//! On `ℤ` with unit weights and `m ≡ 2`, `Δf(x) = ½(f(x+1) + f(x−1)) − f(x)`
//! generates the continuous-time simple random walk with unit jump rate, so
//! `P(X_t = d) = e^{−t} I_d(t)` and `p_t(0, d) = e^{−t} I_d(t) / 2`. The
//! finite-window Dirichlet kernel computed by [`crate::heat`] is the second,
//! independent route to the same number.

use crate::dgg::{kappa_objective, zeta, ZetaParams};
use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::graph::{truncate_lattice, MeasurePolicy};
use crate::heat::series_apply;
use crate::operators::dirichlet_laplacian;
use rayon::prelude::*;
use serde::Serialize;

const MAX_ORDER: usize = 1000;
const MAX_ARG: f64 = 700.0;

fn check_bessel_range(n: usize, t: f64) -> Result<()> {
    if !(t >= 0.0) || t > MAX_ARG || n > MAX_ORDER {
        return Err(Error::OutOfRange(format!(
            "I_n(t) supports 0 ≤ t ≤ {MAX_ARG} and n ≤ {MAX_ORDER}, got n = {n}, t = {t}"
        )));
    }
    Ok(())
}

/// Modified Bessel function of the first kind `I_n(t)`, integer order.
pub fn bessel_i(n: usize, t: f64) -> Result<f64> {
    Ok(bessel_i_scaled(n, t)? * t.exp())
}

/// `e^{−t} I_n(t)`.
///
/// Ascending series (all terms positive) for small arguments; otherwise
/// Miller's backward recurrence `I_{k−1} = I_{k+1} + (2k/t) I_k`,
/// normalized with `e^t = I_0(t) + 2 Σ_{k≥1} I_k(t)`.
pub fn bessel_i_scaled(n: usize, t: f64) -> Result<f64> {
    check_bessel_range(n, t)?;
    if t == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if t <= 2.0 || t * t <= 4.0 * (n as f64 + 1.0) {
        Ok(series_scaled(n, t))
    } else {
        Ok(miller_scaled(n, t))
    }
}

fn series_scaled(n: usize, t: f64) -> f64 {
    let half = 0.5 * t;
    let ln_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let ln_lead = n as f64 * half.ln() - ln_fact - t;
    if ln_lead < -745.0 {
        return 0.0;
    }
    let q = half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    ln_lead.exp() * sum
}

fn miller_scaled(n: usize, t: f64) -> f64 {
    const BIG: f64 = 1e250;
    let start = n + 50 + (15.0 * t.sqrt()).ceil() as usize;
    let two_over_t = 2.0 / t;
    let mut above = 0.0; // I_{k+1}
    let mut cur = 1e-280; // I_k
    let mut sum = 0.0;
    let mut ans = 0.0;
    for k in (1..=start).rev() {
        let below = above + k as f64 * two_over_t * cur;
        above = cur;
        cur = below;
        // `cur` now holds I_{k−1}, `above` holds I_k
        sum += 2.0 * above;
        if k == n {
            ans = above;
        }
        if cur > BIG {
            cur /= BIG;
            above /= BIG;
            sum /= BIG;
            ans /= BIG;
        }
    }
    sum += cur;
    if n == 0 {
        ans = cur;
    }
    ans / sum
}

/// `p_t(0, d) = e^{−t} I_d(t) / 2` on `ℤ` with the normalized measure.
pub fn pang_kernel(d: usize, t: f64) -> Result<f64> {
    Ok(0.5 * bessel_i_scaled(d, t)?)
}

/// Smallest window half-width `n` for which the Dirichlet kernel on
/// `[−n, n]` is used as a stand-in for the lattice kernel at `(d, t)`.
pub fn window_half_width(d: usize, t: f64) -> usize {
    d + (10.0 * t.sqrt()).ceil() as usize + 20
}

/// `p_t^{[−n,n]}(0, d)` for every `d ≤ n`, from one heat evaluation on the
/// window `[−n, n]` (Dirichlet, inside the window `[−n−1, n+1]` so every
/// vertex of `Ω` has `m = 2`).
pub fn window_kernel_row(n: usize, t: f64) -> Result<Vec<f64>> {
    let g = truncate_lattice(n + 1, MeasurePolicy::Normalized)?;
    let ids: Vec<String> = (-(n as i64)..=n as i64).map(|i| i.to_string()).collect();
    let omega = g.vertex_set(&ids)?;
    let op = dirichlet_laplacian(&g, &omega)?;
    let mut e = vec![0.0; op.dim()];
    e[n] = 0.5; // 𝟙_0 / m_0
    let p = series_apply(&op, &e, t);
    Ok(p[n..].to_vec())
}

/// Finite-window value of `p_t(0, d)` under the window rule.
pub fn window_kernel(d: usize, t: f64) -> Result<f64> {
    Ok(window_kernel_row(window_half_width(d, t), t)?[d])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `t ≤ d`, envelope `d^{−1/2}`.
    Short,
    /// `d ≤ t`, envelope `t^{−1/2}`.
    Long,
}

#[derive(Debug, Clone, Serialize)]
pub struct PangComparison {
    pub d: usize,
    pub t: f64,
    /// Bessel closed form.
    pub oracle: f64,
    /// Truncated-window Dirichlet kernel.
    pub window: f64,
    /// `window / oracle`.
    pub ratio: f64,
    pub regime: Regime,
    /// `p_t · e^{ζ_1(t, d)} · max(t, d)^{1/2}`.
    pub envelope_ratio: f64,
    /// The same with the other regime's power, reported near the diagonal.
    pub envelope_ratio_other: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanGrid {
    pub d_min: usize,
    pub d_max: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// Log-spaced time points.
    pub t_points: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            d_min: 1,
            d_max: 60,
            t_min: 0.25,
            t_max: 256.0,
            t_points: 41,
        }
    }
}

impl ScanGrid {
    pub fn times(&self) -> Vec<f64> {
        log_grid(self.t_min, self.t_max, self.t_points)
    }

    /// Halves the log-spacing of the time axis.
    pub fn refined(&self) -> ScanGrid {
        ScanGrid {
            t_points: 2 * self.t_points - 1,
            ..*self
        }
    }
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub grid: ScanGrid,
    pub min_envelope: f64,
    pub max_envelope: f64,
    /// `max(max_envelope, 1/min_envelope)`.
    pub measured_c: f64,
    /// Largest `|window/oracle − 1|` over the scan.
    pub max_window_deviation: f64,
}

/// Compares the lattice kernel with the envelope `max(t, d)^{−1/2} e^{−ζ_1}`
/// over the grid, with a window kernel for every cell.
pub fn envelope_ratio_scan(grid: &ScanGrid) -> Result<(Vec<PangComparison>, ScanSummary)> {
    if grid.d_min > grid.d_max
        || grid.t_points == 0
        || !(grid.t_min > 0.0)
        || grid.t_max < grid.t_min
    {
        return Err(Error::InvalidParameter("empty scan grid".into()));
    }
    check_bessel_range(grid.d_max, grid.t_max)?;
    let times = grid.times();
    let rows = times
        .par_iter()
        .map(|&t| -> Result<Vec<PangComparison>> {
            let window = window_kernel_row(window_half_width(grid.d_max, t), t)?;
            (grid.d_min..=grid.d_max)
                .map(|d| {
                    let oracle = pang_kernel(d, t)?;
                    let z = match zeta(ZetaParams::new(1.0, t, Ext::Finite(d as f64))?) {
                        Ext::Finite(z) => z,
                        Ext::Infinite => unreachable!("finite distance"),
                    };
                    let df = d as f64;
                    let regime = if t <= df { Regime::Short } else { Regime::Long };
                    let (own, other) = match regime {
                        Regime::Short => (df, t),
                        Regime::Long => (t, df),
                    };
                    let base = oracle * z.exp();
                    Ok(PangComparison {
                        d,
                        t,
                        oracle,
                        window: window[d],
                        ratio: window[d] / oracle,
                        regime,
                        envelope_ratio: base * own.sqrt(),
                        envelope_ratio_other: base * other.sqrt(),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<PangComparison> = rows.into_iter().flatten().collect();
    let min_envelope = cells
        .iter()
        .map(|c| c.envelope_ratio)
        .fold(f64::INFINITY, f64::min);
    let max_envelope = cells.iter().map(|c| c.envelope_ratio).fold(0.0, f64::max);
    let max_window_deviation = cells
        .iter()
        .map(|c| (c.ratio - 1.0).abs())
        .fold(0.0, f64::max);
    let summary = ScanSummary {
        grid: *grid,
        min_envelope,
        max_envelope,
        measured_c: max_envelope.max(1.0 / min_envelope),
        max_window_deviation,
    };
    Ok((cells, summary))
}

/// Least-squares slope of `ln p` against `t` over the last decade of the
/// grid (`t ≥ t_max / 10`).
pub fn decay_slope(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    if let Some(index) = values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveKernel {
            index,
            value: values[index],
        });
    }
    let t_max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_max / 10.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two points in the last decade of the grid".into(),
        ));
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    Ok(num / den)
}

/// Minimizes the `κ` objective without using its stationarity equation:
/// doubling bracket, coarse grid, then repeated zooming.
pub fn brute_min_kappa(s: f64, t: f64, r: f64) -> (f64, f64) {
    let f = |k: f64| kappa_objective(k, s, t, r);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let mut hi = 1e-6;
    while f(2.0 * hi) < f(hi) {
        hi *= 2.0;
    }
    hi *= 4.0;
    let (mut lo, mut up) = (0.0, hi);
    let mut best = (0.0, 0.0);
    for _ in 0..60 {
        let steps = 200;
        let h = (up - lo) / steps as f64;
        best = (0..=steps)
            .map(|i| {
                let k = lo + h * i as f64;
                (k, f(k))
            })
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        lo = (best.0 - 2.0 * h).max(0.0);
        up = best.0 + 2.0 * h;
    }
    best
}
