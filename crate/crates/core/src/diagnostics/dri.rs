//! Monte Carlo estimates of the direct Riemann integrability criteria
//!
//! ```text
//! mean:  Σ_k sup_{t∈[k,k+1)} E[|X(t)| ∧ 1]
//! path:  Σ_k E[sup_{t∈[k,k+1)} |X(t)| ∧ 1]
//! ```
//!
//! Path `i` of either check is drawn from `key.child(i)`, so calling both
//! with the same key gives paired estimates.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::rng::StreamKey;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriCriterion {
    Mean,
    Path,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConvergentEvidence,
    DivergentEvidence,
    Inconclusive,
}

/// Tail summaries behind a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Which rule decided: `zero`, `vanishing_tail`, `geometric`,
    /// `power_law`, `log_growth` or `none`.
    pub rule: String,
    pub ratio: Option<f64>,
    pub exponent: Option<f64>,
    pub residual: Option<f64>,
    /// Slope of partial sums against `ln k`.
    pub log_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriReport {
    pub criterion: DriCriterion,
    pub terms: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
    pub fit: TailFit,
    pub k_max: usize,
    pub n_mc: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid_per_unit: Option<usize>,
}

fn check_sizes(k_max: usize, n_mc: usize) -> Result<()> {
    if k_max < 1 {
        return Err(Error::invalid("k_max", "must be >= 1"));
    }
    if n_mc < 1 {
        return Err(Error::invalid("n_mc", "must be >= 1"));
    }
    Ok(())
}

/// Grid indices `j` with `lo ≤ j/g < hi`, clipped to `0..n`.
fn grid_range(lo: f64, hi: f64, g: usize, n: usize) -> (usize, usize) {
    let gf = g as f64;
    let first = |x: f64| -> usize {
        if x <= 0.0 {
            return 0;
        }
        if x.is_infinite() || x * gf >= n as f64 + 1.0 {
            return n;
        }
        let mut j = libm::ceil(x * gf) as usize;
        while j > 0 && (j - 1) as f64 / gf >= x {
            j -= 1;
        }
        while (j as f64) / gf < x {
            j += 1;
        }
        j.min(n)
    };
    (first(lo), first(hi))
}

/// Mean criterion: `Ĝ(t) = mean of |X(t)| ∧ 1` on the grid `t_j = j / g`,
/// term `k` the largest grid value in `[k, k+1)`, its standard error taken at
/// the maximizing grid point.
pub fn dri_mean_check(
    kernel: &Kernel,
    k_max: usize,
    grid_per_unit: usize,
    n_mc: usize,
    key: StreamKey,
) -> Result<DriReport> {
    check_sizes(k_max, n_mc)?;
    if grid_per_unit < 2 {
        return Err(Error::invalid("grid_per_unit", "must be >= 2"));
    }
    let g = grid_per_unit;
    let n = k_max * g;
    // Difference arrays for step paths; the active count keeps empty grid
    // points exactly zero despite float cancellation.
    let mut d1 = alloc::vec![0.0f64; n + 1];
    let mut d2 = alloc::vec![0.0f64; n + 1];
    let mut active = alloc::vec![0i64; n + 1];
    let mut direct1 = alloc::vec![0.0f64; n];
    let mut direct2 = alloc::vec![0.0f64; n];
    for i in 0..n_mc {
        let path = kernel.sample_path(&mut key.child(i as u64).open())?;
        match path.segments() {
            Some(segments) => {
                for (s, e, v) in segments {
                    let w = libm::fabs(v).min(1.0);
                    let (lo, hi) = grid_range(s, e, g, n);
                    if lo < hi {
                        d1[lo] += w;
                        d1[hi] -= w;
                        d2[lo] += w * w;
                        d2[hi] -= w * w;
                        active[lo] += 1;
                        active[hi] -= 1;
                    }
                }
            }
            None => {
                for j in 0..n {
                    let w = libm::fabs(path.eval(j as f64 / g as f64)).min(1.0);
                    direct1[j] += w;
                    direct2[j] += w * w;
                }
            }
        }
    }
    let nf = n_mc as f64;
    let (mut s1, mut s2, mut count) = (0.0, 0.0, 0i64);
    let mut mean = alloc::vec![0.0; n];
    let mut var = alloc::vec![0.0; n];
    for j in 0..n {
        s1 += d1[j];
        s2 += d2[j];
        count += active[j];
        let (a, b) = if count == 0 { (0.0, 0.0) } else { (s1.max(0.0), s2.max(0.0)) };
        let (t1, t2) = (a + direct1[j], b + direct2[j]);
        let m = t1 / nf;
        mean[j] = m;
        var[j] = if n_mc > 1 { ((t2 - nf * m * m) / (nf - 1.0)).max(0.0) } else { 0.0 };
    }
    let mut terms = Vec::with_capacity(k_max);
    let mut std_errors = Vec::with_capacity(k_max);
    for k in 0..k_max {
        let block = k * g..(k + 1) * g;
        let best = block.clone().fold(k * g, |b, j| if mean[j] > mean[b] { j } else { b });
        terms.push(mean[best]);
        std_errors.push(libm::sqrt(var[best] / nf));
    }
    Ok(report(DriCriterion::Mean, terms, std_errors, k_max, n_mc, Some(g)))
}

/// Path criterion: term `k` is the mean of `sup_{[k,k+1)} |X| ∧ 1`.
pub fn dri_path_check(kernel: &Kernel, k_max: usize, n_mc: usize, key: StreamKey) -> Result<DriReport> {
    check_sizes(k_max, n_mc)?;
    let mut s1 = alloc::vec![0.0f64; k_max];
    let mut s2 = alloc::vec![0.0f64; k_max];
    for i in 0..n_mc {
        let path = kernel.sample_path(&mut key.child(i as u64).open())?;
        for k in 0..k_max {
            let w = path.sup_over_half_open(k as f64, (k + 1) as f64).min(1.0);
            s1[k] += w;
            s2[k] += w * w;
        }
    }
    let nf = n_mc as f64;
    let terms: Vec<f64> = s1.iter().map(|s| s / nf).collect();
    let std_errors = terms
        .iter()
        .zip(&s2)
        .map(|(m, s)| {
            if n_mc > 1 {
                libm::sqrt(((s - nf * m * m) / (nf - 1.0)).max(0.0) / nf)
            } else {
                0.0
            }
        })
        .collect();
    Ok(report(DriCriterion::Path, terms, std_errors, k_max, n_mc, None))
}

fn report(
    criterion: DriCriterion,
    terms: Vec<f64>,
    std_errors: Vec<f64>,
    k_max: usize,
    n_mc: usize,
    grid_per_unit: Option<usize>,
) -> DriReport {
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = terms
        .iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect();
    let (verdict, fit) = verdict(&terms, &partial_sums);
    DriReport { criterion, terms, std_errors, partial_sums, verdict, fit, k_max, n_mc, grid_per_unit }
}

/// Least-squares slope of `y` against `x`.
fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Decision rule, in order:
///
/// 1. all terms zero, or all terms on `[K/2, K)` zero: convergent;
/// 2. geometric fit `ln T_k ~ k` on the positive terms of `[K/2, K)` (or the
///    last ten positive terms): convergent if the ratio `r < 0.99` and the
///    extrapolated remainder `T_last r/(1−r)` is below `10⁻³` of the sum;
/// 3. power fit `ln T_k ~ −p ln k` on the same terms: convergent if
///    `p ≥ 1.5` and the remainder `T_last k_last/(p−1)` is below `0.1` of the sum;
/// 4. partial sums against `ln k` on `[K/10, K)`: divergent if the slope is
///    at least 0.5;
/// 5. otherwise inconclusive.
fn verdict(terms: &[f64], partial: &[f64]) -> (Verdict, TailFit) {
    let k_max = terms.len();
    let total = *partial.last().unwrap_or(&0.0);
    let mut fit = TailFit { rule: "none".into(), ratio: None, exponent: None, residual: None, log_slope: None };
    if total == 0.0 {
        fit.rule = "zero".into();
        return (Verdict::ConvergentEvidence, fit);
    }
    let half = k_max / 2;
    if k_max >= 2 && terms[half..].iter().all(|&t| t == 0.0) {
        fit.rule = "vanishing_tail".into();
        return (Verdict::ConvergentEvidence, fit);
    }
    let mut tail: Vec<usize> = (half..k_max).filter(|&k| terms[k] > 0.0).collect();
    if tail.len() < 2 {
        let positive: Vec<usize> = (0..k_max).filter(|&k| terms[k] > 0.0).collect();
        tail = positive[positive.len().saturating_sub(10)..].to_vec();
    }
    if let Some(&last) = tail.last() {
        let t_last = terms[last];
        let geo: Vec<(f64, f64)> = tail.iter().map(|&k| (k as f64, libm::log(terms[k]))).collect();
        if let Some(b) = slope(&geo) {
            let r = libm::exp(b);
            fit.ratio = Some(r);
            if r < 0.99 {
                let residual = t_last * r / (1.0 - r);
                fit.residual = Some(residual);
                if residual < 1e-3 * total {
                    fit.rule = "geometric".into();
                    return (Verdict::ConvergentEvidence, fit);
                }
            }
        }
        let pw: Vec<(f64, f64)> = tail
            .iter()
            .filter(|&&k| k >= 1)
            .map(|&k| (libm::log(k as f64), libm::log(terms[k])))
            .collect();
        if let Some(b) = slope(&pw) {
            let p = -b;
            fit.exponent = Some(p);
            if p >= 1.5 {
                let residual = t_last * last as f64 / (p - 1.0);
                if residual < 0.1 * total {
                    fit.residual = Some(residual);
                    fit.rule = "power_law".into();
                    return (Verdict::ConvergentEvidence, fit);
                }
            }
        }
    }
    let from = (k_max / 10).max(1);
    let growth: Vec<(f64, f64)> = (from..k_max).map(|k| (libm::log(k as f64), partial[k])).collect();
    if let Some(s) = slope(&growth) {
        fit.log_slope = Some(s);
        if s >= 0.5 {
            fit.rule = "log_growth".into();
            return (Verdict::DivergentEvidence, fit);
        }
    }
    (Verdict::Inconclusive, fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::EtaLaw;

    #[test]
    fn zero_kernel_is_convergent() {
        let r = dri_mean_check(&Kernel::zero(), 10, 4, 10, StreamKey::root(0)).unwrap();
        assert!(r.terms.iter().all(|&t| t == 0.0));
        assert_eq!(r.verdict, Verdict::ConvergentEvidence);
    }

    #[test]
    fn deterministic_exp_decay_terms_are_geometric() {
        let k = Kernel::exp_decay(EtaLaw::point_mass(1.0).unwrap(), 1.0).unwrap();
        let r = dri_mean_check(&k, 50, 4, 3, StreamKey::root(0)).unwrap();
        for (i, t) in r.terms.iter().enumerate() {
            assert!((t - libm::exp(-(i as f64))).abs() < 1e-15, "term {i}");
        }
        // First term is capped at 1 by the |X| ∧ 1 truncation.
        let sum = 1.0 / (1.0 - libm::exp(-1.0));
        assert!((r.partial_sums[49] - sum).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::ConvergentEvidence);
        assert_eq!(r.fit.rule, "geometric");
    }

    #[test]
    fn table_path_terms() {
        let k = Kernel::table(alloc::vec![0.0, 4.0], alloc::vec![1.0, 0.0]).unwrap();
        let r = dri_path_check(&k, 8, 2, StreamKey::root(0)).unwrap();
        assert_eq!(r.terms, alloc::vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.verdict, Verdict::ConvergentEvidence);
    }

    #[test]
    fn grid_range_is_exact() {
        assert_eq!(grid_range(0.0, 1.0, 4, 40), (0, 4));
        assert_eq!(grid_range(0.25, 0.5, 4, 40), (1, 2));
        assert_eq!(grid_range(0.3, 0.3, 4, 40), (2, 2));
        assert_eq!(grid_range(5.0, f64::INFINITY, 4, 40), (20, 40));
        assert_eq!(grid_range(-1.0, 100.0, 4, 40), (0, 40));
    }

    #[test]
    fn verdict_rules() {
        let geo: Vec<f64> = (0..100).map(|k| libm::pow(0.5, k as f64)).collect();
        let ps = |t: &[f64]| {
            let mut a = 0.0;
            t.iter().map(|x| {
                a += x;
                a
            }).collect::<Vec<_>>()
        };
        assert_eq!(verdict(&geo, &ps(&geo)).0, Verdict::ConvergentEvidence);
        let harmonic: Vec<f64> = (0..1000).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        assert_eq!(verdict(&harmonic, &ps(&harmonic)).0, Verdict::DivergentEvidence);
        let square: Vec<f64> = (0..1000).map(|k| 1.0 / ((k * k) as f64 + 1.0)).collect();
        let (v, fit) = verdict(&square, &ps(&square));
        assert_eq!(v, Verdict::ConvergentEvidence);
        assert_eq!(fit.rule, "power_law");
    }
}
