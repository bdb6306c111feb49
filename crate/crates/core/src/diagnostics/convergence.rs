//! Two-sample comparison of transient fdd vectors `Y(t+u)` against the
//! stationary vector `Y*(u)`.
//!
//! A comparison rejects when some coordinate's KS p-value is below
//! `α/(2d)` or the energy-distance permutation p-value is below `α/2`
//! (Bonferroni over `d` coordinates plus the joint test).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::dri::{dri_mean_check, DriReport, Verdict};
use crate::distributions::InterarrivalLaw;
use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSpec};
use crate::process::{fdd_sample_keyed, FddSample, Mode, StationaryOptions};
use crate::rng::StreamKey;
use crate::stats::{energy_distance, ks_two_sample, EmpiricalDistribution, RowMatrix, TestResult};

const TAG_STATIONARY: u64 = 40;
const TAG_TRANSIENT: u64 = 41;
const TAG_ENERGY: u64 = 42;
const TAG_DRI: u64 = 43;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceOptions {
    pub n_permutations: usize,
    pub stationary: StationaryOptions,
    pub dri_k_max: usize,
    pub dri_grid_per_unit: usize,
    pub dri_n_mc: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions {
            n_permutations: 200,
            stationary: StationaryOptions::default(),
            dri_k_max: 200,
            dri_grid_per_unit: 4,
            dri_n_mc: 2000,
        }
    }
}

/// Hypothesis warnings raised by the pre-checks or by the stationary run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// The interarrival law is lattice with this span.
    LatticeLaw { span: f64 },
    /// The mean integrability estimate points to divergence.
    DriDivergent,
    /// The kernel's absorption time `τ = η` has infinite mean.
    InfiniteExpectedLifetime,
    /// The kernel's contributions do not decay along a renewal sequence.
    NonIntegrableKernel,
    /// The stationary process could not be evaluated.
    StationaryFailure { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub t: f64,
    pub u_grid: Vec<f64>,
    pub ks: Vec<TestResult>,
    pub energy: TestResult,
    pub alpha: f64,
    /// Per-coordinate KS level `α/(2d)`.
    pub ks_level: f64,
    /// Energy-distance level `α/2`.
    pub energy_level: f64,
    pub reject: bool,
    pub transient_means: Vec<f64>,
    pub stationary_means: Vec<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub n_replicates: usize,
    pub warnings: Vec<Warning>,
    pub dri: DriReport,
    pub comparisons: Vec<ComparisonReport>,
    /// All transient values were finite.
    pub transient_finite: bool,
    /// Rejections stop as `t` grows and the largest `t` does not reject.
    pub rejection_decays: Option<bool>,
}

impl ConvergenceReport {
    /// Outcome at the largest `t`, if a comparison was possible.
    pub fn final_reject(&self) -> Option<bool> {
        self.comparisons
            .iter()
            .max_by(|a, b| a.t.total_cmp(&b.t))
            .map(|c| c.reject)
    }
}

/// Base key of the stationary sample drawn by [`convergence_test`].
pub fn stationary_base(seed: u64) -> StreamKey {
    StreamKey::root(seed).child(TAG_STATIONARY)
}

/// Base key of the transient sample at `t_list[index]`.
pub fn transient_base(seed: u64, index: usize) -> StreamKey {
    StreamKey::root(seed).child(TAG_TRANSIENT).child(index as u64)
}

fn column_means(m: &RowMatrix) -> Vec<f64> {
    (0..m.cols())
        .map(|j| m.column(j).iter().sum::<f64>() / m.rows().max(1) as f64)
        .collect()
}

/// Compare two fdd samples coordinate-wise (KS) and jointly (energy distance).
pub fn compare_samples(
    t: f64,
    u_grid: &[f64],
    transient: &RowMatrix,
    stationary: &RowMatrix,
    alpha: f64,
    n_permutations: usize,
    key: StreamKey,
) -> Result<ComparisonReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", "must lie in (0, 1)"));
    }
    let d = transient.cols();
    if d != stationary.cols() || d != u_grid.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "grid has {} points, samples have {} and {} columns",
            u_grid.len(),
            d,
            stationary.cols()
        )));
    }
    let mut ks = Vec::with_capacity(d);
    for j in 0..d {
        let a = EmpiricalDistribution::new(transient.column(j))?;
        let b = EmpiricalDistribution::new(stationary.column(j))?;
        ks.push(ks_two_sample(&a, &b));
    }
    let energy = energy_distance(transient, stationary, n_permutations, key)?;
    let ks_level = alpha / (2.0 * d as f64);
    let energy_level = alpha / 2.0;
    let reject = ks.iter().any(|r| r.p_value < ks_level) || energy.p_value < energy_level;
    Ok(ComparisonReport {
        t,
        u_grid: u_grid.to_vec(),
        ks,
        energy,
        alpha,
        ks_level,
        energy_level,
        reject,
        transient_means: column_means(transient),
        stationary_means: column_means(stationary),
        note: alloc::format!(
            "reject if any of {d} KS p-values < alpha/(2d) or energy p-value < alpha/2 (Bonferroni)"
        ),
    })
}

/// [`convergence_test_with`] using the serial fdd sampler.
#[allow(clippy::too_many_arguments)]
pub fn convergence_test(
    law: &InterarrivalLaw,
    kernel: &Kernel,
    t_list: &[f64],
    u_grid: &[f64],
    n_replicates: usize,
    alpha: f64,
    seed: u64,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceReport> {
    let sampler = |mode: Mode, base: StreamKey| {
        fdd_sample_keyed(law, kernel, mode, u_grid, n_replicates, base, &opts.stationary)
    };
    convergence_test_with(law, kernel, t_list, u_grid, n_replicates, alpha, seed, opts, &sampler)
}

/// Run the hypothesis pre-checks, sample the stationary vector once and the
/// transient vector at each `t`, and compare.
///
/// `sampler(mode, base)` must return `n_replicates` rows drawn from the
/// replicate streams under `base`. A stationary truncation failure is
/// reported as a warning and leaves the comparison list empty.
#[allow(clippy::too_many_arguments)]
pub fn convergence_test_with(
    law: &InterarrivalLaw,
    kernel: &Kernel,
    t_list: &[f64],
    u_grid: &[f64],
    n_replicates: usize,
    alpha: f64,
    seed: u64,
    opts: &ConvergenceOptions,
    sampler: &dyn Fn(Mode, StreamKey) -> Result<FddSample>,
) -> Result<ConvergenceReport> {
    if t_list.is_empty() {
        return Err(Error::invalid("t_list", "needs at least one time"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", "must lie in (0, 1)"));
    }
    let root = StreamKey::root(seed);
    let mut warnings = Vec::new();
    if let Some(span) = law.lattice_span() {
        warnings.push(Warning::LatticeLaw { span });
    }
    if let KernelSpec::Indicator { eta } = kernel.spec() {
        if eta.mean().is_none() {
            warnings.push(Warning::InfiniteExpectedLifetime);
        }
    }
    if !kernel.has_finite_tail() && !matches!(kernel.spec(), KernelSpec::Indicator { .. }) {
        warnings.push(Warning::NonIntegrableKernel);
    }
    let dri = dri_mean_check(
        kernel,
        opts.dri_k_max,
        opts.dri_grid_per_unit,
        opts.dri_n_mc,
        root.child(TAG_DRI),
    )?;
    if dri.verdict == Verdict::DivergentEvidence {
        warnings.push(Warning::DriDivergent);
    }
    let stationary = match sampler(Mode::Stationary, stationary_base(seed)) {
        Ok(s) => Some(s),
        Err(e) if matches!(e.root_cause(), Error::Truncation(_)) => {
            warnings.push(Warning::StationaryFailure { message: e.to_string() });
            None
        }
        Err(e) => return Err(e),
    };
    let mut comparisons = Vec::new();
    let mut transient_finite = true;
    for (i, &t) in t_list.iter().enumerate() {
        let trans = sampler(Mode::Transient { t }, transient_base(seed, i))?;
        transient_finite &= (0..trans.values.rows()).all(|r| trans.values.row(r).iter().all(|v| v.is_finite()));
        if let Some(stat) = &stationary {
            comparisons.push(compare_samples(
                t,
                u_grid,
                &trans.values,
                &stat.values,
                alpha,
                opts.n_permutations,
                root.child(TAG_ENERGY).child(i as u64),
            )?);
        }
    }
    let rejection_decays = (!comparisons.is_empty()).then(|| {
        let mut order: Vec<&ComparisonReport> = comparisons.iter().collect();
        order.sort_by(|a, b| a.t.total_cmp(&b.t));
        let monotone = order.windows(2).all(|w| w[0].reject || !w[1].reject);
        monotone && !order.last().unwrap().reject
    });
    Ok(ConvergenceReport {
        alpha,
        n_replicates,
        warnings,
        dri,
        comparisons,
        transient_finite,
        rejection_decays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel_never_rejects() {
        let law = InterarrivalLaw::exponential(1.0).unwrap();
        let opts = ConvergenceOptions { dri_n_mc: 10, dri_k_max: 10, ..Default::default() };
        let r = convergence_test(&law, &Kernel::zero(), &[1.0, 5.0], &[0.0, 1.0], 60, 0.01, 1, &opts).unwrap();
        assert!(r.warnings.is_empty());
        assert_eq!(r.comparisons.len(), 2);
        for c in &r.comparisons {
            assert!(!c.reject);
            assert_eq!(c.energy.statistic, 0.0);
            assert!(c.ks.iter().all(|k| k.statistic == 0.0));
        }
        assert_eq!(r.rejection_decays, Some(true));
    }

    #[test]
    fn lattice_law_warns() {
        let law = InterarrivalLaw::point_mass(1.0).unwrap();
        let opts = ConvergenceOptions { dri_n_mc: 10, dri_k_max: 10, ..Default::default() };
        let r = convergence_test(&law, &Kernel::zero(), &[1.0], &[0.0], 20, 0.01, 1, &opts).unwrap();
        assert_eq!(r.warnings, alloc::vec![Warning::LatticeLaw { span: 1.0 }]);
    }
}
