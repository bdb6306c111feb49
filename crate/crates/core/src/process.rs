//! Evaluation of the transient process `Y(t+u)` and the stationary process
//! `Y*(u)` on a grid of offsets `u`.
//!
//! Kernel paths are drawn lazily, one stream per epoch index, so skipping
//! epochs that cannot reach the grid never changes the paths of the others,
//! and enlarging a stationary window keeps every existing contribution.

use alloc::boxed::Box;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::distributions::InterarrivalLaw;
use crate::error::{Error, Result, TruncationFailure, TruncationReason};
use crate::kernels::Kernel;
use crate::renewal::{build_stationary_window, simulate_forward, StationaryWindow};
use crate::rng::StreamKey;
use crate::stats::RowMatrix;

const TAG_EPOCHS: u64 = 10;
const TAG_PATHS: u64 = 11;
const TAG_WINDOW: u64 = 12;
const TAG_REPLICATE: u64 = 13;

/// Which process a sample comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Transient { t: f64 },
    Stationary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleKind {
    Transient { t: f64 },
    /// Stationary evaluation with the window half-width that was used.
    Stationary { c_used: f64 },
}

/// One replicate of the process on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessSample {
    pub u_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SampleKind,
    /// Bound on the neglected tail; present only for stationary samples of
    /// kernels without compact support.
    pub truncation_bound: Option<f64>,
}

/// Controls of the adaptive window used for `Y*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaryOptions {
    pub tol: f64,
    pub c_max: f64,
    pub max_points: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions { tol: 1e-6, c_max: 1e6, max_points: 1_000_000 }
    }
}

fn check_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.is_empty() {
        return Err(Error::Domain("u-grid is empty".into()));
    }
    if !u_grid.iter().all(|u| u.is_finite()) {
        return Err(Error::Domain("u-grid values must be finite".into()));
    }
    if u_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("u-grid must be sorted ascending".into()));
    }
    Ok(())
}

/// `Y(t + u_j) = Σ_{k≥0} X_{k+1}(t + u_j − S_k)`, summed exactly.
pub fn eval_transient(
    law: &InterarrivalLaw,
    kernel: &Kernel,
    t: f64,
    u_grid: &[f64],
    key: StreamKey,
) -> Result<ProcessSample> {
    check_grid(u_grid)?;
    if !(t >= 0.0) || t.is_infinite() {
        return Err(Error::Domain(alloc::format!("t must be finite and >= 0, got {t}")));
    }
    let mut values = alloc::vec![0.0; u_grid.len()];
    let hi = t + u_grid[u_grid.len() - 1];
    if hi >= 0.0 {
        let epochs = simulate_forward(law, hi, &mut key.child(TAG_EPOCHS).open())?;
        let earliest = match kernel.support_bound() {
            Some(r) => t + u_grid[0] - r,
            None => f64::NEG_INFINITY,
        };
        let paths = key.child(TAG_PATHS);
        for (k, &s) in epochs.epochs.iter().enumerate() {
            // Epochs with s + τ ≤ t + u_0 cannot reach the grid.
            if s <= earliest {
                continue;
            }
            let path = kernel.sample_path(&mut paths.child(k as u64).open())?;
            for (v, &u) in values.iter_mut().zip(u_grid) {
                *v += path.eval(t + u - s);
            }
        }
    }
    Ok(ProcessSample {
        u_grid: u_grid.to_vec(),
        values,
        kind: SampleKind::Transient { t },
        truncation_bound: None,
    })
}

/// `Σ_k X_{k+1}(u_j + t_k)` over stored points with `|t_k| ≤ c`.
///
/// The path of point `k` is drawn from `paths.child(k)`, so values for
/// different `c` on the same window are pathwise comparable.
pub fn truncated_values(
    window: &StationaryWindow,
    kernel: &Kernel,
    u_grid: &[f64],
    c: f64,
    paths: StreamKey,
) -> Result<Vec<f64>> {
    check_grid(u_grid)?;
    let u_max = u_grid[u_grid.len() - 1];
    let reach = kernel.support_bound().map(|r| r - u_grid[0]);
    let mut values = alloc::vec![0.0; u_grid.len()];
    for (k, tk) in window.points() {
        if libm::fabs(tk) > c || tk + u_max < 0.0 {
            continue;
        }
        if let Some(reach) = reach {
            if tk >= reach {
                break;
            }
        }
        let path = kernel.sample_path(&mut paths.child(k as u64).open())?;
        for (v, &u) in values.iter_mut().zip(u_grid) {
            *v += path.eval(u + tk);
        }
    }
    Ok(values)
}

/// `Y*(u_j)` with an adaptively sized window.
///
/// Compact kernels are summed exactly. Otherwise the half-width doubles from
/// `max|u| + 10μ` until the error bound drops below `tol`. The bound is
/// [`Kernel::tail_bound`] at the forward sentinel plus the rounding floor
/// `ε · points · max|X|` of the summation itself, so tolerances below float
/// resolution fail instead of reporting a bound nobody can certify.
pub fn eval_stationary(
    law: &InterarrivalLaw,
    kernel: &Kernel,
    u_grid: &[f64],
    opts: &StationaryOptions,
    key: StreamKey,
) -> Result<ProcessSample> {
    check_grid(u_grid)?;
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol", "must be > 0"));
    }
    let mu = law.mean();
    let u_min = u_grid[0];
    let u_abs = u_grid.iter().fold(0.0f64, |m, u| m.max(libm::fabs(*u)));
    let paths = key.child(TAG_PATHS);
    let mut c = u_abs + 10.0 * mu;
    let compact = kernel.support_bound();
    if let Some(r) = compact {
        c = c.max(r - u_min);
    }
    let fail = |reason, window: &StationaryWindow, bound: f64, c: f64| -> Error {
        let values = truncated_values(window, kernel, u_grid, f64::INFINITY, paths)
            .unwrap_or_default();
        Error::Truncation(Box::new(TruncationFailure {
            reason,
            values,
            bound,
            tol: opts.tol,
            c,
            points: window.len(),
        }))
    };
    let budget = |c: f64| 2.0 * c / mu > opts.max_points as f64;
    let majorant = kernel.magnitude_majorant();
    let error_bound = |window: &StationaryWindow| {
        kernel.tail_bound(law, u_min + sentinel(window))
            + f64::EPSILON * window.len() as f64 * majorant
    };
    let mut window = build_stationary_window(law, c.min(opts.c_max), window_key(key))?;
    if !kernel.has_finite_tail() {
        return Err(fail(TruncationReason::InfiniteTail, &window, f64::INFINITY, window.c()));
    }
    let bound = loop {
        if c > opts.c_max {
            let b = error_bound(&window);
            return Err(fail(TruncationReason::WidthLimit, &window, b, window.c()));
        }
        if budget(c) {
            let b = error_bound(&window);
            return Err(fail(TruncationReason::PointBudget, &window, b, window.c()));
        }
        window.extend_to(c);
        if window.len() > opts.max_points {
            let b = error_bound(&window);
            return Err(fail(TruncationReason::PointBudget, &window, b, window.c()));
        }
        let b = error_bound(&window);
        if b < opts.tol {
            break b;
        }
        c *= 2.0;
    };
    let values = truncated_values(&window, kernel, u_grid, f64::INFINITY, paths)?;
    Ok(ProcessSample {
        u_grid: u_grid.to_vec(),
        values,
        kind: SampleKind::Stationary { c_used: window.c() },
        truncation_bound: if compact.is_some() { None } else { Some(bound) },
    })
}

/// Key of the stationary window drawn by [`eval_stationary`] under `key`.
///
/// Windows extend deterministically, so a window built from this key covers
/// a prefix of the one used in the evaluation.
pub fn window_key(key: StreamKey) -> StreamKey {
    key.child(TAG_WINDOW)
}

fn sentinel(window: &StationaryWindow) -> f64 {
    *window.forward_points().last().unwrap()
}

/// Stream key of replicate `index` under the experiment key `base`.
pub fn replicate_key(base: StreamKey, index: usize) -> StreamKey {
    base.child(TAG_REPLICATE).child(index as u64)
}

/// One replicate of an fdd experiment; replicate errors carry the index.
pub fn fdd_replicate(
    law: &InterarrivalLaw,
    kernel: &Kernel,
    mode: Mode,
    u_grid: &[f64],
    opts: &StationaryOptions,
    base: StreamKey,
    index: usize,
) -> Result<ProcessSample> {
    let key = replicate_key(base, index);
    let out = match mode {
        Mode::Transient { t } => eval_transient(law, kernel, t, u_grid, key),
        Mode::Stationary => eval_stationary(law, kernel, u_grid, opts, key),
    };
    out.map_err(|e| Error::Replicate { index, source: Box::new(e) })
}

/// Replicates stacked as rows, columns aligned with the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FddSample {
    pub u_grid: Vec<f64>,
    pub mode: Mode,
    pub values: RowMatrix,
    /// Window half-widths, one per replicate (stationary mode only).
    pub c_used: Vec<f64>,
    /// Truncation bounds, one per replicate (stationary, non-compact only).
    pub truncation_bounds: Vec<f64>,
}

impl FddSample {
    /// Assemble replicates given in index order.
    pub fn from_replicates(u_grid: &[f64], mode: Mode, samples: &[ProcessSample]) -> Self {
        let mut values = RowMatrix::new(u_grid.len());
        let mut c_used = Vec::new();
        let mut truncation_bounds = Vec::new();
        for s in samples {
            values.push_row(&s.values);
            if let SampleKind::Stationary { c_used: c } = s.kind {
                c_used.push(c);
            }
            if let Some(b) = s.truncation_bound {
                truncation_bounds.push(b);
            }
        }
        FddSample { u_grid: u_grid.to_vec(), mode, values, c_used, truncation_bounds }
    }
}

/// `n_replicates` independent fdd vectors; replicate `i` uses
/// [`replicate_key`]`(StreamKey::root(seed), i)`.
pub fn fdd_sample(
    law: &InterarrivalLaw,
    kernel: &Kernel,
    mode: Mode,
    u_grid: &[f64],
    n_replicates: usize,
    seed: u64,
    opts: &StationaryOptions,
) -> Result<FddSample> {
    fdd_sample_keyed(law, kernel, mode, u_grid, n_replicates, StreamKey::root(seed), opts)
}

pub fn fdd_sample_keyed(
    law: &InterarrivalLaw,
    kernel: &Kernel,
    mode: Mode,
    u_grid: &[f64],
    n_replicates: usize,
    base: StreamKey,
    opts: &StationaryOptions,
) -> Result<FddSample> {
    if n_replicates == 0 {
        return Err(Error::invalid("n_replicates", "must be >= 1"));
    }
    let samples = (0..n_replicates)
        .map(|i| fdd_replicate(law, kernel, mode, u_grid, opts, base, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(FddSample::from_replicates(u_grid, mode, &samples))
}
