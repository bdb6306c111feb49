//! Checks of the stationary renewal point process: intensity, overshoot law,
//! shift invariance and Laplace functionals.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::distributions::InterarrivalLaw;
use crate::error::{Error, Result};
use crate::kernels::Table;
use crate::renewal::{build_stationary_window, simulate_forward};
use crate::rng::StreamKey;
use crate::stats::{chisq_homogeneity, ks_one_sample, EmpiricalDistribution, TestMethod, TestResult};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

const TAG_TRANSIENT: u64 = 30;
const TAG_STATIONARY: u64 = 31;
const TAG_ARM_A: u64 = 32;
const TAG_ARM_B: u64 = 33;

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, libm::sqrt(v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityRow {
    pub a: f64,
    pub b: f64,
    pub empirical_mean: f64,
    pub expected: f64,
    pub std_error: f64,
    pub z_score: f64,
}

/// Mean number of stationary points in `[a, b)` against `(b − a)/μ`.
pub fn intensity_check(
    law: &InterarrivalLaw,
    intervals: &[(f64, f64)],
    n_windows: usize,
    key: StreamKey,
) -> Result<Vec<IntensityRow>> {
    if n_windows < 2 {
        return Err(Error::invalid("n_windows", "must be >= 2"));
    }
    if intervals.iter().any(|&(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
        return Err(Error::Domain("intervals need finite a <= b".into()));
    }
    let c = intervals.iter().fold(1.0f64, |m, &(a, b)| m.max(libm::fabs(a)).max(libm::fabs(b)));
    let mut counts: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(n_windows); intervals.len()];
    for i in 0..n_windows {
        let w = build_stationary_window(law, c, key.child(i as u64))?;
        for (row, &(a, b)) in counts.iter_mut().zip(intervals) {
            row.push(w.count_in(a, b) as f64);
        }
    }
    Ok(intervals
        .iter()
        .zip(&counts)
        .map(|(&(a, b), xs)| {
            let (m, sd) = mean_sd(xs);
            let expected = (b - a) / law.mean();
            let se = sd / libm::sqrt(n_windows as f64);
            let z = if se > 0.0 {
                (m - expected) / se
            } else if m == expected {
                0.0
            } else {
                f64::INFINITY.copysign(m - expected)
            };
            IntensityRow { a, b, empirical_mean: m, expected, std_error: se, z_score: z }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OvershootReport {
    pub horizon: f64,
    pub ks: TestResult,
    /// The horizon is shorter than 20 mean interarrival times.
    pub short_horizon: bool,
    pub lattice: bool,
}

/// One-sample KS of the overshoot `S_{ν(T)} − T` against the integrated-tail law.
pub fn overshoot_check(
    law: &InterarrivalLaw,
    horizon: f64,
    n_realizations: usize,
    key: StreamKey,
) -> Result<OvershootReport> {
    if n_realizations < 1 {
        return Err(Error::invalid("n_realizations", "must be >= 1"));
    }
    let mut overshoots = Vec::with_capacity(n_realizations);
    for i in 0..n_realizations {
        let r = simulate_forward(law, horizon, &mut key.child(i as u64).open())?;
        overshoots.push(r.overshoot());
    }
    let sample = EmpiricalDistribution::new(overshoots)?;
    let ks = ks_one_sample(&sample, |x| law.integrated_tail_cdf(x.max(0.0)).unwrap_or(0.0))?;
    Ok(OvershootReport {
        horizon,
        ks,
        short_horizon: horizon < 20.0 * law.mean(),
        lattice: law.is_lattice(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub shift: f64,
    pub interval: (f64, f64),
    pub mean_original: f64,
    pub mean_shifted: f64,
    pub test: TestResult,
}

/// Compare counts in `[a, b)` of unshifted windows with counts of
/// independently drawn windows shifted by `t` (chi-square homogeneity).
pub fn shift_invariance_check(
    law: &InterarrivalLaw,
    shift: f64,
    interval: (f64, f64),
    n_windows: usize,
    key: StreamKey,
) -> Result<ShiftReport> {
    let (a, b) = interval;
    if !(a <= b) {
        return Err(Error::Domain("interval needs a <= b".into()));
    }
    if n_windows < 1 {
        return Err(Error::invalid("n_windows", "must be >= 1"));
    }
    let c = libm::fabs(a).max(libm::fabs(b)) + libm::fabs(shift) + law.mean();
    let mut hist_a: Vec<u64> = Vec::new();
    let mut hist_b: Vec<u64> = Vec::new();
    let bump = |h: &mut Vec<u64>, k: usize| {
        if h.len() <= k {
            h.resize(k + 1, 0);
        }
        h[k] += 1;
    };
    let (mut sum_a, mut sum_b) = (0usize, 0usize);
    for i in 0..n_windows {
        let w = build_stationary_window(law, c, key.child(TAG_ARM_A).child(i as u64))?;
        let k = w.count_in(a, b);
        sum_a += k;
        bump(&mut hist_a, k);
        let w = build_stationary_window(law, c, key.child(TAG_ARM_B).child(i as u64))?;
        let k = w.shifted(shift)?.count_in(a, b);
        sum_b += k;
        bump(&mut hist_b, k);
    }
    let len = hist_a.len().max(hist_b.len());
    hist_a.resize(len, 0);
    hist_b.resize(len, 0);
    // Lattice laws can put every count in one cell; the two arms then agree exactly.
    let occupied: Vec<usize> = (0..len).filter(|&k| hist_a[k] + hist_b[k] > 0).collect();
    let test = if occupied.len() == 1 {
        let mut r = TestResult::new(0.0, 1.0, n_windows, n_windows, TestMethod::ChiSquareHomogeneity);
        r.df = Some(0);
        r
    } else {
        chisq_homogeneity(&hist_a, &hist_b, 5.0)?
    };
    Ok(ShiftReport {
        shift,
        interval,
        mean_original: sum_a as f64 / n_windows as f64,
        mean_shifted: sum_b as f64 / n_windows as f64,
        test,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceReport {
    pub t: f64,
    pub n_mc: usize,
    /// Estimate of `E exp(−Σ_{k≥0} h(t − S_k))`.
    pub transient: f64,
    /// Estimate of `E exp(−Σ_j h(S*_j))`.
    pub stationary: f64,
    pub transient_halfwidth: f64,
    pub stationary_halfwidth: f64,
    pub lattice: bool,
}

/// Monte Carlo Laplace functionals of the transient and stationary point
/// processes for a nonnegative, compactly supported step function `h`, with
/// 99% normal confidence half-widths.
pub fn laplace_functional_compare(
    law: &InterarrivalLaw,
    h: &Table,
    t: f64,
    n_mc: usize,
    key: StreamKey,
) -> Result<LaplaceReport> {
    if h.values.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("h", "values must be >= 0"));
    }
    let reach = h
        .vanishing_point()
        .ok_or_else(|| Error::invalid("h", "must have compact support (final value 0)"))?;
    if !(t >= 0.0) || t.is_infinite() {
        return Err(Error::Domain(alloc::format!("t must be finite and >= 0, got {t}")));
    }
    if n_mc < 2 {
        return Err(Error::invalid("n_mc", "must be >= 2"));
    }
    let mut trans = Vec::with_capacity(n_mc);
    let mut stat = Vec::with_capacity(n_mc);
    for i in 0..n_mc {
        let r = simulate_forward(law, t, &mut key.child(TAG_TRANSIENT).child(i as u64).open())?;
        let s: f64 = r.epochs.iter().map(|&e| h.eval(t - e)).sum();
        trans.push(libm::exp(-s));
        let w = build_stationary_window(law, reach.max(1.0), key.child(TAG_STATIONARY).child(i as u64))?;
        let s: f64 = w.points().map(|(_, p)| h.eval(p)).sum();
        stat.push(libm::exp(-s));
    }
    let (mt, st) = mean_sd(&trans);
    let (ms, ss) = mean_sd(&stat);
    let root = libm::sqrt(n_mc as f64);
    Ok(LaplaceReport {
        t,
        n_mc,
        transient: mt,
        stationary: ms,
        transient_halfwidth: Z_99 * st / root,
        stationary_halfwidth: Z_99 * ss / root,
        lattice: law.is_lattice(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_length_interval_and_zero_h() {
        let law = InterarrivalLaw::exponential(1.0).unwrap();
        let rows = intensity_check(&law, &[(1.0, 1.0)], 10, StreamKey::root(0)).unwrap();
        assert_eq!(rows[0].empirical_mean, 0.0);
        assert_eq!(rows[0].expected, 0.0);
        assert_eq!(rows[0].z_score, 0.0);
        let r = laplace_functional_compare(&law, &Table::zero(), 5.0, 20, StreamKey::root(0)).unwrap();
        assert_eq!((r.transient, r.stationary), (1.0, 1.0));
        assert_eq!(r.transient_halfwidth, 0.0);
    }

    #[test]
    fn lattice_flags() {
        let law = InterarrivalLaw::point_mass(1.0).unwrap();
        let r = overshoot_check(&law, 10.5, 50, StreamKey::root(0)).unwrap();
        assert!(r.lattice && r.short_horizon);
        assert!((r.ks.statistic - 0.5).abs() < 1e-12);
        let h = Table::new(alloc::vec![0.0, 1.0], alloc::vec![1.0, 0.0]).unwrap();
        let l = laplace_functional_compare(&law, &h, 5.0, 10, StreamKey::root(0)).unwrap();
        assert!(l.lattice);
        // Unit span: every unit interval holds exactly one point in both arms.
        let s = shift_invariance_check(&law, 2.5, (0.0, 1.0), 50, StreamKey::root(0)).unwrap();
        assert_eq!((s.mean_original, s.mean_shifted), (1.0, 1.0));
        assert_eq!((s.test.statistic, s.test.p_value, s.test.df), (0.0, 1.0, Some(0)));
    }

    #[test]
    fn h_must_be_compact_and_nonnegative() {
        let law = InterarrivalLaw::exponential(1.0).unwrap();
        let open = Table::new(alloc::vec![0.0], alloc::vec![1.0]).unwrap();
        assert!(laplace_functional_compare(&law, &open, 1.0, 10, StreamKey::root(0)).is_err());
        let neg = Table::new(alloc::vec![0.0, 1.0], alloc::vec![-1.0, 0.0]).unwrap();
        assert!(laplace_functional_compare(&law, &neg, 1.0, 10, StreamKey::root(0)).is_err());
    }
}
