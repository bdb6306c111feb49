use alloc::vec::Vec;

use rand_distr::{Distribution, Exp, Gamma, LogNormal};
use serde::{Deserialize, Serialize};

use super::{check_finite, check_positive, Atoms};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::RngStream;

/// Parametric family of a kernel mark `η`.
///
/// Unlike interarrival laws, marks may put mass at zero or on negative
/// values (uniform, point mass and finite discrete families), and may be
/// heavy-tailed (Pareto with any `alpha > 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum EtaFamily {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    #[serde(rename = "lognormal")]
    LogNormal { mu: f64, sigma: f64 },
    PointMass { value: f64 },
    FiniteDiscrete { atoms: Vec<(f64, f64)> },
    Pareto { alpha: f64, xm: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EtaFamily", into = "EtaFamily")]
pub struct EtaLaw {
    family: EtaFamily,
    atoms: Option<Atoms>,
}

impl TryFrom<EtaFamily> for EtaLaw {
    type Error = Error;

    fn try_from(family: EtaFamily) -> Result<Self> {
        EtaLaw::new(family)
    }
}

impl From<EtaLaw> for EtaFamily {
    fn from(law: EtaLaw) -> EtaFamily {
        law.family
    }
}

impl EtaLaw {
    pub fn new(family: EtaFamily) -> Result<Self> {
        let mut atoms = None;
        match &family {
            EtaFamily::Exponential { rate } => check_positive("rate", *rate)?,
            EtaFamily::Gamma { shape, scale } => {
                check_positive("shape", *shape)?;
                check_positive("scale", *scale)?;
            }
            EtaFamily::Uniform { lo, hi } => {
                check_finite("lo", *lo)?;
                check_finite("hi", *hi)?;
                if !(hi > lo) {
                    return Err(Error::invalid("hi", "uniform law needs lo < hi"));
                }
            }
            EtaFamily::LogNormal { mu, sigma } => {
                check_finite("mu", *mu)?;
                check_positive("sigma", *sigma)?;
            }
            EtaFamily::PointMass { value } => check_finite("value", *value)?,
            EtaFamily::FiniteDiscrete { atoms: a } => atoms = Some(Atoms::new(a, false)?),
            EtaFamily::Pareto { alpha, xm } => {
                check_positive("alpha", *alpha)?;
                check_positive("xm", *xm)?;
            }
        }
        Ok(EtaLaw { family, atoms })
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(EtaFamily::PointMass { value })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(EtaFamily::Exponential { rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(EtaFamily::Uniform { lo, hi })
    }

    pub fn pareto(alpha: f64, xm: f64) -> Result<Self> {
        Self::new(EtaFamily::Pareto { alpha, xm })
    }

    pub fn family(&self) -> &EtaFamily {
        &self.family
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match &self.family {
            EtaFamily::Exponential { rate } => Exp::new(*rate).expect("validated").sample(rng),
            EtaFamily::Gamma { shape, scale } => {
                Gamma::new(*shape, *scale).expect("validated").sample(rng)
            }
            EtaFamily::Uniform { lo, hi } => lo + (hi - lo) * rng.open01(),
            EtaFamily::LogNormal { mu, sigma } => {
                LogNormal::new(*mu, *sigma).expect("validated").sample(rng)
            }
            EtaFamily::PointMass { value } => *value,
            EtaFamily::FiniteDiscrete { .. } => self.atoms.as_ref().unwrap().sample(rng.open01()),
            EtaFamily::Pareto { alpha, xm } => xm * libm::pow(rng.open01(), -1.0 / alpha),
        }
    }

    /// Essential infimum of `η`.
    pub fn ess_inf(&self) -> f64 {
        match &self.family {
            EtaFamily::Exponential { .. } | EtaFamily::Gamma { .. } | EtaFamily::LogNormal { .. } => 0.0,
            EtaFamily::Uniform { lo, .. } => *lo,
            EtaFamily::PointMass { value } => *value,
            EtaFamily::FiniteDiscrete { .. } => self.support().fold(f64::INFINITY, f64::min),
            EtaFamily::Pareto { xm, .. } => *xm,
        }
    }

    /// Essential supremum of `η`; infinite for unbounded families.
    pub fn ess_sup(&self) -> f64 {
        match &self.family {
            EtaFamily::Uniform { hi, .. } => *hi,
            EtaFamily::PointMass { value } => *value,
            EtaFamily::FiniteDiscrete { .. } => self.support().fold(f64::NEG_INFINITY, f64::max),
            _ => f64::INFINITY,
        }
    }

    fn support(&self) -> impl Iterator<Item = f64> + '_ {
        let atoms = self.atoms.as_ref();
        atoms
            .into_iter()
            .flat_map(|a| a.values.iter().zip(&a.probs))
            .filter(|(_, &p)| p > 0.0)
            .map(|(&v, _)| v)
    }

    /// `true` when `η` is almost surely zero.
    pub fn is_zero(&self) -> bool {
        self.ess_inf() == 0.0 && self.ess_sup() == 0.0
    }

    /// `P(η > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match &self.family {
            EtaFamily::Exponential { rate } => {
                if x < 0.0 {
                    1.0
                } else {
                    libm::exp(-rate * x)
                }
            }
            EtaFamily::Gamma { shape, scale } => math::gamma_q(*shape, x / scale),
            EtaFamily::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            EtaFamily::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    math::normal_sf((libm::log(x) - mu) / sigma)
                }
            }
            EtaFamily::PointMass { value } => (*value > x) as u8 as f64,
            EtaFamily::FiniteDiscrete { .. } => {
                self.atoms.as_ref().unwrap().expect(|v| (v > x) as u8 as f64)
            }
            EtaFamily::Pareto { alpha, xm } => {
                if x < *xm {
                    1.0
                } else {
                    libm::pow(xm / x, *alpha)
                }
            }
        }
    }

    /// `P(η ≥ x)`; differs from [`survival`](Self::survival) only at atoms.
    pub fn survival_inclusive(&self, x: f64) -> f64 {
        match &self.family {
            EtaFamily::PointMass { value } => (*value >= x) as u8 as f64,
            EtaFamily::FiniteDiscrete { .. } => {
                self.atoms.as_ref().unwrap().expect(|v| (v >= x) as u8 as f64)
            }
            _ => self.survival(x),
        }
    }

    /// `E η`, or `None` when the mean is infinite.
    pub fn mean(&self) -> Option<f64> {
        Some(match &self.family {
            EtaFamily::Exponential { rate } => 1.0 / rate,
            EtaFamily::Gamma { shape, scale } => shape * scale,
            EtaFamily::Uniform { lo, hi } => (lo + hi) / 2.0,
            EtaFamily::LogNormal { mu, sigma } => libm::exp(mu + sigma * sigma / 2.0),
            EtaFamily::PointMass { value } => *value,
            EtaFamily::FiniteDiscrete { .. } => self.atoms.as_ref().unwrap().mean(),
            EtaFamily::Pareto { alpha, xm } => {
                if *alpha <= 1.0 {
                    return None;
                }
                alpha * xm / (alpha - 1.0)
            }
        })
    }

    /// `E[(η − x)⁺] = ∫ₓ^∞ P(η > y) dy` for `x ≥ 0`; infinite when `Eη = ∞`.
    pub fn excess_mean(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match &self.family {
            EtaFamily::Exponential { rate } => libm::exp(-rate * x) / rate,
            EtaFamily::Gamma { shape, scale } => {
                let z = x / scale;
                (shape * scale * math::gamma_q(shape + 1.0, z) - x * math::gamma_q(*shape, z)).max(0.0)
            }
            EtaFamily::Uniform { lo, hi } => {
                if x <= *lo {
                    (lo + hi) / 2.0 - x
                } else if x >= *hi {
                    0.0
                } else {
                    (hi - x) * (hi - x) / (2.0 * (hi - lo))
                }
            }
            EtaFamily::LogNormal { mu, sigma } => {
                let mean = libm::exp(mu + sigma * sigma / 2.0);
                if x == 0.0 {
                    return mean;
                }
                let z = (libm::log(x) - mu) / sigma;
                (mean * math::normal_sf(z - sigma) - x * math::normal_sf(z)).max(0.0)
            }
            EtaFamily::PointMass { value } => (value - x).max(0.0),
            EtaFamily::FiniteDiscrete { .. } => {
                self.atoms.as_ref().unwrap().expect(|v| (v - x).max(0.0))
            }
            EtaFamily::Pareto { alpha, xm } => {
                if *alpha <= 1.0 {
                    f64::INFINITY
                } else if x <= *xm {
                    alpha * xm / (alpha - 1.0) - x
                } else {
                    libm::pow(*xm, *alpha) * libm::pow(x, 1.0 - alpha) / (alpha - 1.0)
                }
            }
        }
    }

    /// `P(|η| ≤ q)`.
    pub fn abs_cdf(&self, q: f64) -> f64 {
        if q < 0.0 {
            return 0.0;
        }
        match &self.family {
            EtaFamily::Uniform { lo, hi } => {
                let len = (hi.min(q) - lo.max(-q)).max(0.0);
                (len / (hi - lo)).clamp(0.0, 1.0)
            }
            EtaFamily::PointMass { value } => (value.abs() <= q) as u8 as f64,
            EtaFamily::FiniteDiscrete { .. } => {
                self.atoms.as_ref().unwrap().expect(|v| (v.abs() <= q) as u8 as f64)
            }
            _ => 1.0 - self.survival(q),
        }
    }

    /// Smallest `q ≥ 0` with `P(|η| ≤ q) ≥ p`.
    pub fn abs_quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match &self.family {
            EtaFamily::Exponential { rate } => -libm::log1p(-p) / rate,
            EtaFamily::LogNormal { mu, sigma } => libm::exp(mu + sigma * math::normal_quantile(p)),
            EtaFamily::PointMass { value } => value.abs(),
            EtaFamily::FiniteDiscrete { .. } => self.atoms.as_ref().unwrap().abs_quantile(p),
            EtaFamily::Pareto { alpha, xm } => xm * libm::pow(1.0 - p, -1.0 / alpha),
            EtaFamily::Gamma { .. } | EtaFamily::Uniform { .. } => {
                let mut hi = 1.0;
                while self.abs_cdf(hi) < p && hi < 1e300 {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.abs_cdf(mid) >= p {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                hi
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_and_heavy_tailed_are_allowed() {
        assert!(EtaLaw::uniform(-1.0, 1.0).is_ok());
        assert!(EtaLaw::point_mass(-2.0).is_ok());
        assert!(EtaLaw::point_mass(0.0).unwrap().is_zero());
        let p = EtaLaw::pareto(0.8, 1.0).unwrap();
        assert_eq!(p.mean(), None);
        assert_eq!(p.excess_mean(10.0), f64::INFINITY);
        assert!((p.survival(10.0) - libm::pow(0.1, 0.8)).abs() < 1e-15);
    }

    #[test]
    fn excess_mean_matches_quadrature() {
        let laws = [
            EtaLaw::exponential(1.5).unwrap(),
            EtaLaw::new(EtaFamily::Gamma { shape: 2.5, scale: 0.7 }).unwrap(),
            EtaLaw::uniform(0.5, 3.0).unwrap(),
            EtaLaw::new(EtaFamily::LogNormal { mu: 0.1, sigma: 0.6 }).unwrap(),
            EtaLaw::pareto(2.5, 1.0).unwrap(),
        ];
        for law in &laws {
            for &x in &[0.0, 0.3, 1.0, 2.2] {
                let f = |y: f64| law.survival(y);
                let numeric = math::integrate(&f, x, x + 200.0, 1e-12);
                // Pareto(2.5) keeps ~1e-4 of its tail mass beyond the cutoff.
                let tail = if matches!(law.family(), EtaFamily::Pareto { .. }) {
                    libm::pow(x + 200.0, -1.5) / 1.5
                } else {
                    0.0
                };
                let exact = law.excess_mean(x);
                assert!((numeric + tail - exact).abs() < 1e-7, "{law:?} x={x}: {numeric} vs {exact}");
            }
        }
    }

    #[test]
    fn abs_quantiles() {
        let u = EtaLaw::uniform(-1.0, 3.0).unwrap();
        // |η| ≤ q has probability (min(3,q) + min(1,q))/4.
        let q = u.abs_quantile(0.5);
        assert!((u.abs_cdf(q) - 0.5).abs() < 1e-12);
        assert!((q - 1.0).abs() < 1e-12);
        let e = EtaLaw::exponential(1.0).unwrap();
        assert!((e.abs_quantile(1.0 - 1e-6) - 6.0 * core::f64::consts::LN_10).abs() < 1e-9);
        assert_eq!(EtaLaw::point_mass(-2.0).unwrap().abs_quantile(0.999), 2.0);
    }
}
