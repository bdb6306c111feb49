//! Positive interarrival laws `ξ` and kernel mark laws `η`.
//!
//! Both serialize to a flat tagged object, e.g.
//! `{"family":"exponential","rate":1.0}` or
//! `{"family":"finite_discrete","atoms":[[1.0,0.5],[3.0,0.5]]}`.
//! Validation happens on deserialization, so a parsed law is always usable.

mod eta;
mod interarrival;
mod lattice;

pub use eta::{EtaFamily, EtaLaw};
pub use interarrival::{Family, InterarrivalLaw, StationaryDelay};
pub use lattice::lattice_span;

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a finite discrete law.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

/// Sorted atoms with cumulative weights; shared by both law types.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Atoms {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Atoms {
    pub fn new(atoms: &[(f64, f64)], positive: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("atoms", "at least one atom is required"));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.to_vec();
        for &(v, p) in &pairs {
            if !v.is_finite() || (positive && v <= 0.0) {
                return Err(Error::invalid("atoms", alloc::format!("atom value {v} not allowed")));
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::invalid("atoms", alloc::format!("probability {p} not allowed")));
            }
        }
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::invalid("atoms", alloc::format!("probabilities sum to {total}, not 1")));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let values: Vec<f64> = pairs.iter().map(|&(v, _)| v).collect();
        let probs: Vec<f64> = pairs.iter().map(|&(_, p)| p).collect();
        Ok(Atoms { cumulative: cumulative(&probs), values, probs })
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().zip(&self.probs).map(|(&v, p)| f(v) * p).sum()
    }

    pub fn sample(&self, u: f64) -> f64 {
        self.values[pick(&self.cumulative, u)]
    }

    /// Smallest `q` with `P(|η| ≤ q) ≥ p`.
    pub fn abs_quantile(&self, p: f64) -> f64 {
        let mut pairs: Vec<(f64, f64)> =
            self.values.iter().zip(&self.probs).map(|(v, p)| (v.abs(), *p)).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut acc = 0.0;
        for &(v, w) in &pairs {
            acc += w;
            if acc >= p {
                return v;
            }
        }
        pairs.last().map(|x| x.0).unwrap_or(0.0)
    }
}

pub(crate) fn cumulative(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

/// Index of the first cumulative weight exceeding `u`, skipping zero-weight atoms.
pub(crate) fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, alloc::format!("must be finite and > 0, got {x}")))
    }
}

pub(crate) fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, alloc::format!("must be finite, got {x}")))
    }
}
