//! Empirical distributions and goodness-of-fit tests.
//!
//! Empirical CDFs are right-continuous step functions, so tied values jump
//! together. KS p-values use the asymptotic Kolmogorov law with the usual
//! `√(nm/(n+m))` scaling; decisions should use `n, m ≥ 50`.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::rng::StreamKey;

/// Pooled row count above which energy distance works on a subsample.
pub const ENERGY_MAX_ROWS: usize = 20_000;
/// Unique-row count up to which the pairwise distance matrix is cached.
const ENERGY_CACHE_ROWS: usize = 2048;

const TAG_SUBSAMPLE: u64 = 20;
const TAG_PERMUTATION: u64 = 21;

/// Dense row-major matrix; one row per replicate.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RowMatrix {
    cols: usize,
    data: Vec<f64>,
}

impl RowMatrix {
    pub fn new(cols: usize) -> Self {
        RowMatrix { cols, data: Vec::new() }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = RowMatrix::new(cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "row of length {} in a matrix with {cols} columns",
                    r.len()
                )));
            }
            m.push_row(r);
        }
        Ok(m)
    }

    /// Append a row; panics if its length differs from the column count.
    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row length must match column count");
        self.data.extend_from_slice(row);
    }

    pub fn rows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.data.len() / self.cols
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.iter().skip(j).step_by(self.cols).copied().collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols.max(1))
    }
}

/// Sorted sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Precondition("empirical distribution needs at least one sample".into()));
        }
        if samples.iter().any(|x| x.is_nan()) {
            return Err(Error::Precondition("samples must not be NaN".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `#{x_i ≤ x} / n`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance; zero for a single sample.
    pub fn variance(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        libm::sqrt(self.variance() / self.len() as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    KsTwoSample,
    KsOneSample,
    EnergyDistance,
    ChiSquareGof,
    ChiSquareHomogeneity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
    pub method: TestMethod,
    /// Degrees of freedom (chi-square) or permutation count (energy).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub df: Option<usize>,
    /// Stream id of the subsample, when energy distance subsampled.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subsample_stream: Option<u64>,
}

impl TestResult {
    pub(crate) fn new(statistic: f64, p_value: f64, n: usize, m: usize, method: TestMethod) -> Self {
        TestResult {
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            n,
            m,
            method,
            df: None,
            subsample_stream: None,
        }
    }
}

/// Standard normal quantile `Φ⁻¹(p)`.
pub fn normal_quantile(p: f64) -> f64 {
    math::normal_quantile(p)
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|` by merge scan.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> TestResult {
    let (x, y) = (a.samples(), b.samples());
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0usize, 0usize);
    // Gaps are compared as |i·m − j·n| to keep the statistic exact and symmetric.
    let mut best: u128 = 0;
    while i < n && j < m {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        let gap = (i as u128 * m as u128).abs_diff(j as u128 * n as u128);
        best = best.max(gap);
    }
    let d = best as f64 / (n as f64 * m as f64);
    let scale = libm::sqrt((n as f64 * m as f64) / (n + m) as f64);
    TestResult::new(d, math::kolmogorov_sf(scale * d), n, m, TestMethod::KsTwoSample)
}

/// One-sample KS statistic against a continuous CDF.
///
/// The CDF must map into `[0, 1]`, be nondecreasing on the sample, and tend
/// to 0 and 1 at `∓f64::MAX`.
pub fn ks_one_sample(a: &EmpiricalDistribution, cdf: impl Fn(f64) -> f64) -> Result<TestResult> {
    let lo = cdf(-f64::MAX);
    let hi = cdf(f64::MAX);
    if !(libm::fabs(lo) <= 1e-9 && libm::fabs(hi - 1.0) <= 1e-9) {
        return Err(Error::Precondition(alloc::format!(
            "cdf limits must be 0 and 1, got {lo} and {hi}"
        )));
    }
    let n = a.len();
    let nf = n as f64;
    let mut d = 0.0f64;
    let mut prev = lo;
    for (i, &x) in a.samples().iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) || f < prev {
            return Err(Error::Precondition(alloc::format!(
                "cdf must be nondecreasing with values in [0, 1]; got {f} at {x}"
            )));
        }
        prev = f;
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    let p = math::kolmogorov_sf(libm::sqrt(nf) * d);
    Ok(TestResult::new(d, p, n, 0, TestMethod::KsOneSample))
}

/// Energy distance `2E‖A−B‖ − E‖A−A′‖ − E‖B−B′‖` (V-statistic over all
/// pairs) with a permutation p-value `(1 + #{perm ≥ obs})/(B + 1)`.
///
/// Identical rows are merged with multiplicities first, which makes
/// integer-valued data cheap. Above [`ENERGY_MAX_ROWS`] pooled rows each
/// sample is subsampled proportionally from a stream recorded in the result.
pub fn energy_distance(
    a: &RowMatrix,
    b: &RowMatrix,
    n_permutations: usize,
    key: StreamKey,
) -> Result<TestResult> {
    energy_distance_capped(a, b, n_permutations, key, ENERGY_MAX_ROWS)
}

pub fn energy_distance_capped(
    a: &RowMatrix,
    b: &RowMatrix,
    n_permutations: usize,
    key: StreamKey,
    max_rows: usize,
) -> Result<TestResult> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "samples have {} and {} columns",
            a.cols(),
            b.cols()
        )));
    }
    if a.rows() == 0 || b.rows() == 0 {
        return Err(Error::Precondition("energy distance needs nonempty samples".into()));
    }
    if n_permutations < 19 {
        return Err(Error::invalid("n_permutations", "must be >= 19"));
    }
    let (n_full, m_full) = (a.rows(), b.rows());
    let mut rows: Vec<&[f64]> = a.iter_rows().chain(b.iter_rows()).collect();
    let mut n = n_full;
    let mut subsample_stream = None;
    if n_full + m_full > max_rows.max(2) {
        let sub = key.child(TAG_SUBSAMPLE);
        let mut rng = sub.open();
        let total = (n_full + m_full) as f64;
        let n_keep = ((n_full as f64 * max_rows as f64 / total) as usize).max(1);
        let m_keep = (max_rows - n_keep).max(1);
        let mut ia: Vec<usize> = (0..n_full).collect();
        let mut ib: Vec<usize> = (n_full..n_full + m_full).collect();
        ia.shuffle(&mut rng);
        ib.shuffle(&mut rng);
        ia.truncate(n_keep);
        ib.truncate(m_keep.min(m_full));
        ia.sort_unstable();
        ib.sort_unstable();
        rows = ia.iter().chain(&ib).map(|&i| rows[i]).collect();
        n = ia.len();
        subsample_stream = Some(sub.stream());
    }
    let m = rows.len() - n;
    let pooled = Pooled::new(&rows);
    let mut labels: Vec<bool> = (0..rows.len()).map(|i| i < n).collect();
    let observed = pooled.statistic(&labels, n, m);
    let slack = 1e-12 * observed.abs().max(1e-300);
    let mut exceed = 0usize;
    let perms = key.child(TAG_PERMUTATION);
    for p in 0..n_permutations {
        labels.shuffle(&mut perms.child(p as u64).open());
        if pooled.statistic(&labels, n, m) >= observed - slack {
            exceed += 1;
        }
    }
    let p_value = (1 + exceed) as f64 / (n_permutations + 1) as f64;
    let mut r = TestResult::new(observed, p_value, n, m, TestMethod::EnergyDistance);
    r.df = Some(n_permutations);
    r.subsample_stream = subsample_stream;
    Ok(r)
}

/// Pooled rows merged into unique values with an index per original row.
struct Pooled {
    unique: Vec<Vec<f64>>,
    index: Vec<usize>,
    cache: Option<Vec<f64>>,
}

impl Pooled {
    fn new(rows: &[&[f64]]) -> Self {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let cmp = |x: &[f64], y: &[f64]| {
            x.iter().zip(y).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
        };
        order.sort_by(|&i, &j| cmp(rows[i], rows[j]));
        let mut unique: Vec<Vec<f64>> = Vec::new();
        let mut index = alloc::vec![0; rows.len()];
        for &i in &order {
            if unique.last().map_or(true, |u| cmp(u, rows[i]).is_ne()) {
                unique.push(rows[i].to_vec());
            }
            index[i] = unique.len() - 1;
        }
        let u = unique.len();
        let cache = (u <= ENERGY_CACHE_ROWS).then(|| {
            let mut d = alloc::vec![0.0; u * u];
            for p in 0..u {
                for q in p + 1..u {
                    let v = euclid(&unique[p], &unique[q]);
                    d[p * u + q] = v;
                    d[q * u + p] = v;
                }
            }
            d
        });
        Pooled { unique, index, cache }
    }

    fn dist(&self, p: usize, q: usize) -> f64 {
        match &self.cache {
            Some(d) => d[p * self.unique.len() + q],
            None => euclid(&self.unique[p], &self.unique[q]),
        }
    }

    /// V-statistic for the rows labelled `true` (size n) against the rest (size m).
    fn statistic(&self, labels: &[bool], n: usize, m: usize) -> f64 {
        let u = self.unique.len();
        let mut ca = alloc::vec![0.0f64; u];
        let mut cb = alloc::vec![0.0f64; u];
        for (&l, &i) in labels.iter().zip(&self.index) {
            if l {
                ca[i] += 1.0;
            } else {
                cb[i] += 1.0;
            }
        }
        let (mut s_ab, mut s_aa, mut s_bb) = (0.0, 0.0, 0.0);
        for p in 0..u {
            for q in p + 1..u {
                let d = self.dist(p, q);
                s_aa += ca[p] * ca[q] * d;
                s_bb += cb[p] * cb[q] * d;
                s_ab += (ca[p] * cb[q] + ca[q] * cb[p]) * d;
            }
        }
        // Within-sample pair sums run over unordered pairs, hence the factor 2.
        let (nf, mf) = (n as f64, m as f64);
        2.0 * s_ab / (nf * mf) - 2.0 * s_aa / (nf * nf) - 2.0 * s_bb / (mf * mf)
    }
}

fn euclid(x: &[f64], y: &[f64]) -> f64 {
    libm::sqrt(x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum())
}

fn check_probs(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::invalid("expected_probs", "probabilities must be finite and >= 0"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("expected_probs", alloc::format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Merge bins flagged small into one pooled bin, then fold the pooled bin
/// into the smallest other bin if it is still small. Returns groups of
/// original bin indices.
fn pool_bins(expected: &[f64], min_expected: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut pooled: Vec<usize> = Vec::new();
    let mut pooled_e = 0.0;
    for (i, &e) in expected.iter().enumerate() {
        if e < min_expected {
            pooled.push(i);
            pooled_e += e;
        } else {
            groups.push(alloc::vec![i]);
        }
    }
    if !pooled.is_empty() {
        if pooled_e >= min_expected || groups.is_empty() {
            groups.push(pooled);
        } else {
            let group_e = |g: &Vec<usize>| g.iter().map(|&i| expected[i]).sum::<f64>();
            let smallest = (0..groups.len())
                .min_by(|&x, &y| group_e(&groups[x]).total_cmp(&group_e(&groups[y])))
                .unwrap();
            groups[smallest].extend(pooled);
            groups[smallest].sort_unstable();
        }
    }
    groups
}

/// Pearson chi-square goodness of fit of counts to bin probabilities.
///
/// A bin with probability 0 and a nonzero count gives statistic `+∞` and
/// p-value 0. Bins with expected count below `min_expected` are pooled.
pub fn chisq_gof_counts(observed: &[u64], expected_probs: &[f64], min_expected: f64) -> Result<TestResult> {
    if observed.len() != expected_probs.len() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{} counts vs {} probabilities",
            observed.len(),
            expected_probs.len()
        )));
    }
    check_probs(expected_probs)?;
    let total: u64 = observed.iter().sum();
    let n = total as usize;
    if observed.iter().zip(expected_probs).any(|(&o, &p)| p == 0.0 && o > 0) {
        let mut r = TestResult::new(f64::INFINITY, 0.0, n, 0, TestMethod::ChiSquareGof);
        r.df = Some(observed.len().saturating_sub(1));
        return Ok(r);
    }
    let expected: Vec<f64> = expected_probs.iter().map(|p| p * total as f64).collect();
    let groups = pool_bins(&expected, min_expected);
    if groups.len() < 2 {
        return Err(Error::UndefinedTest("all expected mass pooled into one bin".into()));
    }
    let mut stat = 0.0;
    for g in &groups {
        let o: f64 = g.iter().map(|&i| observed[i] as f64).sum();
        let e: f64 = g.iter().map(|&i| expected[i]).sum();
        stat += (o - e) * (o - e) / e;
    }
    let df = groups.len() - 1;
    let mut r = TestResult::new(stat, math::chi_square_sf(stat, df as f64), n, 0, TestMethod::ChiSquareGof);
    r.df = Some(df);
    Ok(r)
}

/// Chi-square test that two count vectors come from the same distribution.
pub fn chisq_homogeneity(a: &[u64], b: &[u64], min_expected: f64) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(alloc::format!("{} vs {} bins", a.len(), b.len())));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedTest("both samples need at least one observation".into()));
    }
    let total = na + nb;
    // Pool on the smaller arm's expected counts so both arms satisfy the floor.
    let small = na.min(nb);
    let expected_small: Vec<f64> =
        a.iter().zip(b).map(|(&x, &y)| small * (x + y) as f64 / total).collect();
    let groups = pool_bins(&expected_small, min_expected);
    let groups: Vec<Vec<usize>> = groups
        .into_iter()
        .filter(|g| g.iter().any(|&i| a[i] + b[i] > 0))
        .collect();
    if groups.len() < 2 {
        return Err(Error::UndefinedTest("fewer than two nonempty bins after pooling".into()));
    }
    let mut stat = 0.0;
    for g in &groups {
        let oa: f64 = g.iter().map(|&i| a[i] as f64).sum();
        let ob: f64 = g.iter().map(|&i| b[i] as f64).sum();
        let ea = na * (oa + ob) / total;
        let eb = nb * (oa + ob) / total;
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let df = groups.len() - 1;
    let mut r = TestResult::new(
        stat,
        math::chi_square_sf(stat, df as f64),
        na as usize,
        nb as usize,
        TestMethod::ChiSquareHomogeneity,
    );
    r.df = Some(df);
    Ok(r)
}
