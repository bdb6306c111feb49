//! Kernel families `X` and their sampled trajectories.
//!
//! Every trajectory vanishes on `(−∞, 0)`. Piecewise-constant families
//! (tables, indicators, spikes, birth–death chains) are right-continuous with
//! half-open pieces `[a, b)`, so `eval` and both interval suprema are exact.

use alloc::vec::Vec;

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::distributions::{EtaLaw, InterarrivalLaw};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Quantile level used to majorize `|η|` for kernels without compact support.
pub const ETA_MAJORANT_DELTA: f64 = 1e-6;

fn default_max_jumps() -> u64 {
    100_000
}

fn default_max_time() -> f64 {
    100.0
}

/// Step function `values[i]` on `[breakpoints[i], breakpoints[i+1])`, the last
/// value continuing to `+∞`, and zero before the first breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl Table {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let t = Table { breakpoints, values };
        t.validate()?;
        Ok(t)
    }

    /// The identically zero function.
    pub fn zero() -> Self {
        Table { breakpoints: alloc::vec![0.0], values: alloc::vec![0.0] }
    }

    fn validate(&self) -> Result<()> {
        if self.breakpoints.is_empty() || self.breakpoints.len() != self.values.len() {
            return Err(Error::invalid(
                "breakpoints",
                "needs as many breakpoints as values, at least one",
            ));
        }
        if !self.breakpoints.iter().chain(&self.values).all(|x| x.is_finite()) {
            return Err(Error::invalid("breakpoints", "breakpoints and values must be finite"));
        }
        if self.breakpoints[0] < 0.0 {
            return Err(Error::invalid("breakpoints", "first breakpoint must be >= 0"));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("breakpoints", "must be strictly increasing"));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        step_eval(&self.breakpoints, t, |i| self.values[i])
    }

    /// First time after which the table is identically zero.
    pub fn vanishing_point(&self) -> Option<f64> {
        if *self.values.last().unwrap() != 0.0 {
            return None;
        }
        match self.values.iter().rposition(|&v| v != 0.0) {
            Some(j) => Some(self.breakpoints[j + 1]),
            None => Some(0.0),
        }
    }

    fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Breakpoints where the function actually jumps.
    pub fn jumps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        let mut out = Vec::new();
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            if v != prev {
                out.push(b);
            }
            prev = v;
        }
        out
    }
}

/// Configurable kernel family; validated into a [`Kernel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// Deterministic step function.
    DeterministicTable { breakpoints: Vec<f64>, values: Vec<f64> },
    /// `X(t) = 1{0 ≤ t < η}`.
    Indicator { eta: EtaLaw },
    /// `X(t) = η e^{−at}` for `t ≥ 0`.
    ScaledExpDecay { eta: EtaLaw, a: f64 },
    /// `X(t) = η f(t)` with a step function `f`.
    ScaledTable { eta: EtaLaw, table: Table },
    /// Birth–death chain from `initial`, stopped on absorption at 0.
    ///
    /// Rates for state `i ≥ 1` are `rates[min(i, len) − 1]`. Births are
    /// suppressed at `state_cap`. A path that is not absorbed within
    /// `max_jumps` jumps or by `max_time` is an error.
    BirthDeath {
        initial: u32,
        birth_rates: Vec<f64>,
        death_rates: Vec<f64>,
        state_cap: u32,
        #[serde(default = "default_max_jumps")]
        max_jumps: u64,
        #[serde(default = "default_max_time")]
        max_time: f64,
    },
    /// `X(t) = Σ_{k=1}^{count} 1{k + k²η/(k²+1) ≤ t < k + η}` with `η ∈ [0, 1]`.
    Spikes { eta: EtaLaw, count: u32 },
}

/// A validated kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct Kernel {
    spec: KernelSpec,
}

impl TryFrom<KernelSpec> for Kernel {
    type Error = Error;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        Kernel::new(spec)
    }
}

impl From<Kernel> for KernelSpec {
    fn from(k: Kernel) -> KernelSpec {
        k.spec
    }
}

/// Random part of one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub enum PathSample {
    /// Deterministic kernels carry no randomness.
    Deterministic,
    /// The mark `η` of an indicator, scaled or spike kernel.
    Mark { eta: f64 },
    /// Birth–death jump chain: `states[i]` holds on `[times[i], times[i+1])`.
    Jumps { times: Vec<f64>, states: Vec<u32> },
}

/// A sampled trajectory, evaluable at any real time.
#[derive(Clone, Debug, PartialEq)]
pub struct Path<'k> {
    kernel: &'k Kernel,
    sample: PathSample,
}

impl Kernel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        match &spec {
            KernelSpec::DeterministicTable { breakpoints, values } => {
                Table { breakpoints: breakpoints.clone(), values: values.clone() }.validate()?
            }
            KernelSpec::Indicator { .. } => {}
            KernelSpec::ScaledExpDecay { a, .. } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::invalid("a", alloc::format!("must be finite and > 0, got {a}")));
                }
            }
            KernelSpec::ScaledTable { table, .. } => table.validate()?,
            KernelSpec::BirthDeath {
                initial,
                birth_rates,
                death_rates,
                state_cap,
                max_jumps,
                max_time,
            } => {
                if *initial == 0 {
                    return Err(Error::invalid("initial", "must be >= 1"));
                }
                if state_cap < initial {
                    return Err(Error::invalid("state_cap", "must be >= initial"));
                }
                if birth_rates.is_empty() || !birth_rates.iter().all(|r| r.is_finite() && *r >= 0.0) {
                    return Err(Error::invalid("birth_rates", "needs finite nonnegative rates"));
                }
                if death_rates.is_empty() || !death_rates.iter().all(|r| r.is_finite() && *r > 0.0) {
                    return Err(Error::invalid("death_rates", "needs finite positive rates"));
                }
                if *max_jumps == 0 {
                    return Err(Error::invalid("max_jumps", "must be >= 1"));
                }
                if !(max_time.is_finite() && *max_time > 0.0) {
                    return Err(Error::invalid("max_time", "must be finite and > 0"));
                }
            }
            KernelSpec::Spikes { eta, .. } => {
                if eta.ess_inf() < 0.0 || eta.ess_sup() > 1.0 {
                    return Err(Error::invalid("eta", "spike marks must lie in [0, 1]"));
                }
            }
        }
        Ok(Kernel { spec })
    }

    pub fn zero() -> Self {
        let t = Table::zero();
        Kernel { spec: KernelSpec::DeterministicTable { breakpoints: t.breakpoints, values: t.values } }
    }

    pub fn table(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(KernelSpec::DeterministicTable { breakpoints, values })
    }

    pub fn indicator(eta: EtaLaw) -> Self {
        Kernel { spec: KernelSpec::Indicator { eta } }
    }

    pub fn exp_decay(eta: EtaLaw, a: f64) -> Result<Self> {
        Self::new(KernelSpec::ScaledExpDecay { eta, a })
    }

    pub fn scaled_table(eta: EtaLaw, table: Table) -> Result<Self> {
        Self::new(KernelSpec::ScaledTable { eta, table })
    }

    pub fn spikes(eta: EtaLaw, count: u32) -> Result<Self> {
        Self::new(KernelSpec::Spikes { eta, count })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn eta(&self) -> Option<&EtaLaw> {
        match &self.spec {
            KernelSpec::Indicator { eta }
            | KernelSpec::ScaledExpDecay { eta, .. }
            | KernelSpec::ScaledTable { eta, .. }
            | KernelSpec::Spikes { eta, .. } => Some(eta),
            _ => None,
        }
    }

    /// `true` when every trajectory is nonnegative.
    pub fn is_nonnegative(&self) -> bool {
        match &self.spec {
            KernelSpec::DeterministicTable { values, .. } => values.iter().all(|&v| v >= 0.0),
            KernelSpec::ScaledExpDecay { eta, .. } => eta.ess_inf() >= 0.0,
            KernelSpec::ScaledTable { eta, table } => {
                eta.is_zero() || (eta.ess_inf() >= 0.0 && table.is_nonnegative())
            }
            _ => true,
        }
    }

    /// `true` when trajectories are right-continuous step functions.
    pub fn is_piecewise_constant(&self) -> bool {
        match &self.spec {
            KernelSpec::ScaledExpDecay { eta, .. } => eta.is_zero(),
            _ => true,
        }
    }

    /// Essential supremum of the time after which a path vanishes, if finite.
    ///
    /// For birth–death kernels this is the configured `max_time`: longer
    /// paths are rejected at sampling time.
    pub fn support_bound(&self) -> Option<f64> {
        match &self.spec {
            KernelSpec::DeterministicTable { breakpoints, values } => {
                Table { breakpoints: breakpoints.clone(), values: values.clone() }.vanishing_point()
            }
            KernelSpec::Indicator { eta } => {
                let s = eta.ess_sup();
                s.is_finite().then(|| s.max(0.0))
            }
            KernelSpec::ScaledExpDecay { eta, .. } => eta.is_zero().then_some(0.0),
            KernelSpec::ScaledTable { eta, table } => {
                if eta.is_zero() {
                    Some(0.0)
                } else {
                    table.vanishing_point()
                }
            }
            KernelSpec::BirthDeath { max_time, .. } => Some(*max_time),
            KernelSpec::Spikes { eta, count } => {
                Some(if eta.ess_sup() <= 0.0 { 0.0 } else { *count as f64 + eta.ess_sup() })
            }
        }
    }

    /// Whether `E Σ_j sup_u |X_j(u + x + S_j)|` can be made finite by taking
    /// `x` large. False for kernels whose sum over a stationary renewal
    /// sequence diverges almost surely.
    pub fn has_finite_tail(&self) -> bool {
        if self.support_bound().is_some() {
            return true;
        }
        match &self.spec {
            KernelSpec::Indicator { eta } => eta.excess_mean(0.0).is_finite(),
            KernelSpec::ScaledExpDecay { .. } => true,
            _ => false,
        }
    }

    /// Bound on the expected total absolute contribution of epochs
    /// `x + S_j`, `j ≥ 1`, with `S_j` a zero-delayed renewal sequence of `law`
    /// and independent marks.
    ///
    /// Compact kernels give 0 once `x` reaches the support bound and `∞`
    /// before. Indicators with unbounded marks use Lorden's renewal-function
    /// bound `U(y) ≤ y/μ + Eξ²/μ²`. Exponential decay replaces `|η|` by its
    /// `1 − 10⁻⁶` quantile and sums the geometric series of Laplace
    /// transforms, so the bound holds up to that quantile event.
    pub fn tail_bound(&self, law: &InterarrivalLaw, x: f64) -> f64 {
        if let Some(r) = self.support_bound() {
            return if x >= r { 0.0 } else { f64::INFINITY };
        }
        let mu = law.mean();
        match &self.spec {
            KernelSpec::Indicator { eta } => {
                let x = x.max(0.0);
                eta.excess_mean(x) / mu + law.second_moment() / (mu * mu) * eta.survival(x)
            }
            KernelSpec::ScaledExpDecay { eta, a } => {
                let q = eta.abs_quantile(1.0 - ETA_MAJORANT_DELTA);
                let l = law.laplace(*a);
                q * libm::exp(-a * x.max(0.0)) * l / (1.0 - l)
            }
            _ => f64::INFINITY,
        }
    }

    /// Bound on `|X(t)|` holding up to the `1 − 10⁻⁶` quantile of `|η|`.
    pub fn magnitude_majorant(&self) -> f64 {
        let q = |eta: &EtaLaw| eta.abs_quantile(1.0 - ETA_MAJORANT_DELTA);
        let table_max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(libm::fabs(*x)));
        match &self.spec {
            KernelSpec::DeterministicTable { values, .. } => table_max(values),
            KernelSpec::Indicator { .. } | KernelSpec::Spikes { .. } => 1.0,
            KernelSpec::ScaledExpDecay { eta, .. } => q(eta),
            KernelSpec::ScaledTable { eta, table } => q(eta) * table_max(&table.values),
            KernelSpec::BirthDeath { state_cap, .. } => *state_cap as f64,
        }
    }

    /// Fixed discontinuity locations shared by all trajectories.
    pub fn fixed_discontinuities(&self) -> Vec<f64> {
        match &self.spec {
            KernelSpec::DeterministicTable { breakpoints, values } => {
                Table { breakpoints: breakpoints.clone(), values: values.clone() }.jumps()
            }
            _ => Vec::new(),
        }
    }

    /// Draw one independent trajectory.
    pub fn sample_path(&self, rng: &mut RngStream) -> Result<Path<'_>> {
        let sample = match &self.spec {
            KernelSpec::DeterministicTable { .. } => PathSample::Deterministic,
            KernelSpec::Indicator { eta }
            | KernelSpec::ScaledExpDecay { eta, .. }
            | KernelSpec::ScaledTable { eta, .. }
            | KernelSpec::Spikes { eta, .. } => PathSample::Mark { eta: eta.sample(rng) },
            KernelSpec::BirthDeath {
                initial,
                birth_rates,
                death_rates,
                state_cap,
                max_jumps,
                max_time,
            } => {
                let rate = |v: &[f64], i: u32| v[(i as usize).min(v.len()) - 1];
                let mut times = alloc::vec![0.0];
                let mut states = alloc::vec![*initial];
                let mut state = *initial;
                let mut t = 0.0;
                let mut jumps = 0u64;
                while state > 0 {
                    let birth = if state >= *state_cap { 0.0 } else { rate(birth_rates, state) };
                    let death = rate(death_rates, state);
                    let total = birth + death;
                    t += Exp::new(total).expect("positive rate").sample(rng);
                    jumps += 1;
                    if t > *max_time || jumps > *max_jumps {
                        return Err(Error::NonAbsorbed {
                            time: t,
                            jumps,
                            partial: PathSample::Jumps { times, states },
                        });
                    }
                    state = if rng.open01() * total < birth { state + 1 } else { state - 1 };
                    times.push(t);
                    states.push(state);
                }
                PathSample::Jumps { times, states }
            }
        };
        Ok(Path { kernel: self, sample })
    }

    /// Rebuild a trajectory from a stored sample.
    pub fn path(&self, sample: PathSample) -> Path<'_> {
        Path { kernel: self, sample }
    }
}

fn step_eval(knots: &[f64], t: f64, val: impl Fn(usize) -> f64) -> f64 {
    match knots.partition_point(|&b| b <= t) {
        0 => 0.0,
        i => val(i - 1),
    }
}

/// `sup |f|` over `[lo, hi]` (`closed`) or `[lo, hi)` for a step function.
fn step_sup(knots: &[f64], lo: f64, hi: f64, closed: bool, val: impl Fn(usize) -> f64) -> f64 {
    if hi < lo || (!closed && hi <= lo) {
        return 0.0;
    }
    let first = knots.partition_point(|&b| b <= lo).saturating_sub(1);
    let end = if closed {
        knots.partition_point(|&b| b <= hi)
    } else {
        knots.partition_point(|&b| b < hi)
    };
    (first..end).map(|i| libm::fabs(val(i))).fold(0.0, f64::max)
}

fn spike(k: u32, eta: f64) -> (f64, f64) {
    let k = k as f64;
    let k2 = k * k;
    (k + k2 * eta / (k2 + 1.0), k + eta)
}

impl<'k> Path<'k> {
    pub fn kernel(&self) -> &'k Kernel {
        self.kernel
    }

    pub fn sample(&self) -> &PathSample {
        &self.sample
    }

    pub fn into_sample(self) -> PathSample {
        self.sample
    }

    fn mark(&self) -> f64 {
        match self.sample {
            PathSample::Mark { eta } => eta,
            _ => 0.0,
        }
    }

    /// Trajectory value at `t`; exactly zero for `t < 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if !(t >= 0.0) {
            return 0.0;
        }
        match (&self.kernel.spec, &self.sample) {
            (KernelSpec::DeterministicTable { breakpoints, values }, _) => {
                step_eval(breakpoints, t, |i| values[i])
            }
            (KernelSpec::Indicator { .. }, _) => (t < self.mark()) as u8 as f64,
            (KernelSpec::ScaledExpDecay { a, .. }, _) => self.mark() * libm::exp(-a * t),
            (KernelSpec::ScaledTable { table, .. }, _) => self.mark() * table.eval(t),
            (KernelSpec::BirthDeath { .. }, PathSample::Jumps { times, states }) => {
                step_eval(times, t, |i| states[i] as f64)
            }
            (KernelSpec::Spikes { count, .. }, _) => {
                let eta = self.mark();
                let k = libm::floor(t);
                if eta <= 0.0 || k < 1.0 || k > *count as f64 {
                    return 0.0;
                }
                let (s, e) = spike(k as u32, eta);
                (s <= t && t < e) as u8 as f64
            }
            _ => 0.0,
        }
    }

    /// `sup |X|` over the closed interval `[lo, hi]`.
    pub fn sup_over_interval(&self, lo: f64, hi: f64) -> f64 {
        self.sup(lo, hi, true)
    }

    /// `sup |X|` over the half-open interval `[lo, hi)`.
    pub fn sup_over_half_open(&self, lo: f64, hi: f64) -> f64 {
        self.sup(lo, hi, false)
    }

    fn sup(&self, lo: f64, hi: f64, closed: bool) -> f64 {
        if hi < lo || (!closed && hi <= lo) || hi < 0.0 || (!closed && hi <= 0.0) {
            return 0.0;
        }
        let eta = self.mark();
        match (&self.kernel.spec, &self.sample) {
            (KernelSpec::DeterministicTable { breakpoints, values }, _) => {
                step_sup(breakpoints, lo, hi, closed, |i| values[i])
            }
            (KernelSpec::Indicator { .. }, _) => {
                let start = lo.max(0.0);
                (start < eta && start <= hi) as u8 as f64
            }
            (KernelSpec::ScaledExpDecay { a, .. }, _) => {
                libm::fabs(eta) * libm::exp(-a * lo.max(0.0))
            }
            (KernelSpec::ScaledTable { table, .. }, _) => {
                libm::fabs(eta) * step_sup(&table.breakpoints, lo, hi, closed, |i| table.values[i])
            }
            (KernelSpec::BirthDeath { .. }, PathSample::Jumps { times, states }) => {
                step_sup(times, lo, hi, closed, |i| states[i] as f64)
            }
            (KernelSpec::Spikes { count, .. }, _) => {
                if eta <= 0.0 {
                    return 0.0;
                }
                let first = libm::floor(lo).max(1.0);
                let last = libm::floor(hi).min(*count as f64);
                let mut k = first;
                while k <= last {
                    let (s, e) = spike(k as u32, eta);
                    let meets_right = if closed { s <= hi } else { s < hi };
                    if meets_right && e > lo {
                        return 1.0;
                    }
                    k += 1.0;
                }
                0.0
            }
            _ => 0.0,
        }
    }

    /// First time after which the path is identically zero, when it exists.
    pub fn absorption_time(&self) -> Option<f64> {
        let eta = self.mark();
        match (&self.kernel.spec, &self.sample) {
            (KernelSpec::DeterministicTable { breakpoints, values }, _) => {
                Table { breakpoints: breakpoints.clone(), values: values.clone() }.vanishing_point()
            }
            (KernelSpec::Indicator { .. }, _) => Some(eta.max(0.0)),
            (KernelSpec::ScaledExpDecay { .. }, _) => (eta == 0.0).then_some(0.0),
            (KernelSpec::ScaledTable { table, .. }, _) => {
                if eta == 0.0 {
                    Some(0.0)
                } else {
                    table.vanishing_point()
                }
            }
            (KernelSpec::BirthDeath { .. }, PathSample::Jumps { times, states }) => {
                (*states.last().unwrap() == 0).then(|| *times.last().unwrap())
            }
            (KernelSpec::Spikes { count, .. }, _) => {
                Some(if eta <= 0.0 || *count == 0 { 0.0 } else { *count as f64 + eta })
            }
            _ => None,
        }
    }

    /// Nonzero pieces `(start, end, value)` of a step-function path, in
    /// increasing order; `None` for paths that are not piecewise constant.
    pub fn segments(&self) -> Option<Vec<(f64, f64, f64)>> {
        let eta = self.mark();
        let from_steps = |knots: &[f64], val: &dyn Fn(usize) -> f64| {
            let mut out = Vec::new();
            for i in 0..knots.len() {
                let v = val(i);
                if v != 0.0 {
                    let end = knots.get(i + 1).copied().unwrap_or(f64::INFINITY);
                    out.push((knots[i], end, v));
                }
            }
            out
        };
        Some(match (&self.kernel.spec, &self.sample) {
            (KernelSpec::DeterministicTable { breakpoints, values }, _) => {
                from_steps(breakpoints, &|i| values[i])
            }
            (KernelSpec::Indicator { .. }, _) => {
                if eta > 0.0 {
                    alloc::vec![(0.0, eta, 1.0)]
                } else {
                    Vec::new()
                }
            }
            (KernelSpec::ScaledExpDecay { .. }, _) => {
                if eta == 0.0 {
                    Vec::new()
                } else {
                    return None;
                }
            }
            (KernelSpec::ScaledTable { table, .. }, _) => {
                if eta == 0.0 {
                    Vec::new()
                } else {
                    from_steps(&table.breakpoints, &|i| eta * table.values[i])
                }
            }
            (KernelSpec::BirthDeath { .. }, PathSample::Jumps { times, states }) => {
                from_steps(times, &|i| states[i] as f64)
            }
            (KernelSpec::Spikes { count, .. }, _) => {
                if eta <= 0.0 {
                    Vec::new()
                } else {
                    (1..=*count)
                        .map(|k| {
                            let (s, e) = spike(k, eta);
                            (s, e, 1.0)
                        })
                        .filter(|&(s, e, _)| s < e)
                        .collect()
                }
            }
            _ => Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::EtaFamily;
    use crate::rng::StreamKey;

    fn fixed(kernel: &Kernel, eta: f64) -> Path<'_> {
        kernel.path(PathSample::Mark { eta })
    }

    #[test]
    fn table_eval_and_absorption() {
        let k = Kernel::table(alloc::vec![0.0, 4.0], alloc::vec![1.0, 0.0]).unwrap();
        let p = k.sample_path(&mut StreamKey::root(1).open()).unwrap();
        assert_eq!(p.eval(-0.001), 0.0);
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(3.999), 1.0);
        assert_eq!(p.eval(4.0), 0.0);
        assert_eq!(p.absorption_time(), Some(4.0));
        assert_eq!(k.fixed_discontinuities(), alloc::vec![0.0, 4.0]);
        assert_eq!(p.sup_over_half_open(4.0, 5.0), 0.0);
        assert_eq!(p.sup_over_interval(3.0, 4.0), 1.0);
        assert_eq!(p.sup_over_half_open(-2.0, 0.0), 0.0);
        assert_eq!(p.sup_over_interval(-2.0, 0.0), 1.0);
    }

    #[test]
    fn table_validation() {
        assert!(Kernel::table(alloc::vec![1.0, 1.0], alloc::vec![1.0, 0.0]).is_err());
        assert!(Kernel::table(alloc::vec![-1.0], alloc::vec![1.0]).is_err());
        assert!(Kernel::table(alloc::vec![0.0], alloc::vec![]).is_err());
        assert!(Kernel::table(alloc::vec![0.0], alloc::vec![f64::NAN]).is_err());
    }

    #[test]
    fn indicator_boundary_and_sup() {
        let k = Kernel::indicator(EtaLaw::point_mass(2.5).unwrap());
        let p = fixed(&k, 2.5);
        assert_eq!(p.eval(2.5), 0.0);
        assert_eq!(p.eval(2.4999), 1.0);
        assert_eq!(p.sup_over_interval(2.0, 3.0), 1.0);
        assert_eq!(p.sup_over_interval(2.5, 3.0), 0.0);
        assert_eq!(p.sup_over_interval(-3.0, -1.0), 0.0);
        assert_eq!(p.absorption_time(), Some(2.5));
        let k3 = Kernel::indicator(EtaLaw::point_mass(3.0).unwrap());
        let p3 = k3.sample_path(&mut StreamKey::root(0).open()).unwrap();
        assert_eq!(p3.absorption_time(), Some(3.0));
    }

    #[test]
    fn exp_decay_values() {
        let k = Kernel::exp_decay(EtaLaw::point_mass(2.0).unwrap(), 1.0).unwrap();
        let p = fixed(&k, 2.0);
        assert!((p.eval(core::f64::consts::LN_2) - 1.0).abs() < 1e-15);
        assert_eq!(p.sup_over_interval(0.0, 1.0), 2.0);
        assert_eq!(p.sup_over_interval(-1.0, -0.5), 0.0);
        assert_eq!(p.absorption_time(), None);
        assert!(p.segments().is_none());
        let signed = fixed(&k, -2.0);
        assert_eq!(signed.sup_over_interval(-1.0, 1.0), 2.0);
    }

    #[test]
    fn spikes_match_definition() {
        let k = Kernel::spikes(EtaLaw::uniform(0.0, 1.0).unwrap(), 5).unwrap();
        let p = fixed(&k, 0.5);
        // Spike k occupies [k + 0.5 k²/(k²+1), k + 0.5).
        assert_eq!(p.eval(1.2), 0.0);
        assert_eq!(p.eval(1.25), 1.0);
        assert_eq!(p.eval(1.5), 0.0);
        assert_eq!(p.eval(6.49), 0.0);
        assert_eq!(p.sup_over_half_open(3.0, 4.0), 1.0);
        assert_eq!(p.sup_over_half_open(3.5, 4.0), 0.0);
        assert_eq!(p.segments().unwrap().len(), 5);
        assert_eq!(p.absorption_time(), Some(5.5));
        assert!(Kernel::spikes(EtaLaw::uniform(0.0, 2.0).unwrap(), 3).is_err());
    }

    #[test]
    fn birth_death_pure_death_absorbs() {
        let spec = KernelSpec::BirthDeath {
            initial: 1,
            birth_rates: alloc::vec![0.0],
            death_rates: alloc::vec![1.0],
            state_cap: 5,
            max_jumps: 10,
            max_time: 1e9,
        };
        let k = Kernel::new(spec).unwrap();
        let mut rng = StreamKey::root(3).open();
        let p = k.sample_path(&mut rng).unwrap();
        let tau = p.absorption_time().unwrap();
        assert!(tau > 0.0);
        assert_eq!(p.eval(tau * 0.5), 1.0);
        assert_eq!(p.eval(tau), 0.0);
        assert_eq!(p.segments().unwrap(), alloc::vec![(0.0, tau, 1.0)]);
    }

    #[test]
    fn birth_death_budget_error_carries_partial_path() {
        let spec = KernelSpec::BirthDeath {
            initial: 3,
            birth_rates: alloc::vec![10.0],
            death_rates: alloc::vec![0.1],
            state_cap: 1000,
            max_jumps: 50,
            max_time: 1e9,
        };
        let k = Kernel::new(spec).unwrap();
        match k.sample_path(&mut StreamKey::root(0).open()) {
            Err(Error::NonAbsorbed { partial: PathSample::Jumps { times, .. }, jumps, .. }) => {
                assert_eq!(jumps, 51);
                assert_eq!(times.len(), 51);
            }
            other => panic!("expected a non-absorbed error, got {other:?}"),
        }
    }

    #[test]
    fn birth_death_validation() {
        let base = |death: f64, cap: u32| KernelSpec::BirthDeath {
            initial: 2,
            birth_rates: alloc::vec![1.0],
            death_rates: alloc::vec![death],
            state_cap: cap,
            max_jumps: 10,
            max_time: 10.0,
        };
        assert!(Kernel::new(base(0.0, 4)).is_err());
        assert!(Kernel::new(base(1.0, 1)).is_err());
        assert!(Kernel::new(base(1.0, 4)).is_ok());
    }

    #[test]
    fn support_and_tail_bounds() {
        let law = InterarrivalLaw::exponential(1.0).unwrap();
        let zero = Kernel::zero();
        assert_eq!(zero.support_bound(), Some(0.0));
        assert_eq!(zero.tail_bound(&law, 0.0), 0.0);
        let ind = Kernel::indicator(EtaLaw::exponential(1.0).unwrap());
        assert_eq!(ind.support_bound(), None);
        // Exp(1) marks: E(η−x)⁺ = e^{−x}, P(η > x) = e^{−x}, Eξ²/μ² = 2.
        let x = 5.0;
        assert!((ind.tail_bound(&law, x) - 3.0 * libm::exp(-x)).abs() < 1e-14);
        let heavy = Kernel::indicator(EtaLaw::pareto(0.8, 1.0).unwrap());
        assert!(!heavy.has_finite_tail());
        let dec = Kernel::exp_decay(EtaLaw::point_mass(1.0).unwrap(), 1.0).unwrap();
        // L(1) = 1/2 for Exp(1) gaps.
        assert!((dec.tail_bound(&law, 2.0) - libm::exp(-2.0)).abs() < 1e-15);
        let constant = Kernel::table(alloc::vec![0.0], alloc::vec![1.0]).unwrap();
        assert!(!constant.has_finite_tail());
    }

    #[test]
    fn serde_shape() {
        let json = r#"{"kind":"scaled_exp_decay","eta":{"family":"point_mass","value":1.0},"a":1.0}"#;
        let k: Kernel = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&k).unwrap(), json);
        let bad = r#"{"kind":"scaled_exp_decay","eta":{"family":"point_mass","value":1.0},"a":-1.0}"#;
        assert!(serde_json::from_str::<Kernel>(bad).is_err());
        let bd = r#"{"kind":"birth_death","initial":1,"birth_rates":[0.5],"death_rates":[1.0],"state_cap":10}"#;
        let k: Kernel = serde_json::from_str(bd).unwrap();
        assert!(matches!(k.spec(), KernelSpec::BirthDeath { max_jumps: 100_000, .. }));
        let g = EtaFamily::Gamma { shape: 2.0, scale: 1.0 };
        let k = Kernel::indicator(EtaLaw::new(g).unwrap());
        let back: Kernel = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
        assert_eq!(back, k);
    }
}
