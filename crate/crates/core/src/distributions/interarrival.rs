use alloc::vec::Vec;

use rand_distr::{Distribution, Exp, Gamma, LogNormal};
use serde::{Deserialize, Serialize};

use super::{check_finite, check_positive, cumulative, lattice_span, pick, Atoms};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::RngStream;

/// Parametric family of a positive interarrival law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
    #[serde(rename = "lognormal")]
    LogNormal { mu: f64, sigma: f64 },
    PointMass { value: f64 },
    FiniteDiscrete { atoms: Vec<(f64, f64)> },
}

/// Law of the renewal increments `ξ`: all mass on `(0, ∞)`, finite mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct InterarrivalLaw {
    family: Family,
    mean: f64,
    second_moment: f64,
    lattice: Option<f64>,
    discrete: Option<Discrete>,
}

#[derive(Clone, Debug, PartialEq)]
struct Discrete {
    atoms: Atoms,
    size_biased: Vec<f64>,
}

/// One draw of the stationary delay: `s0 = u·ξ₀` and the undershoot `(1−u)·ξ₀`.
///
/// `xi0` is stored as the floating-point sum `s0 + undershoot`, so the
/// straddling interval of a window built from this draw has length exactly
/// `xi0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryDelay {
    pub s0: f64,
    pub undershoot: f64,
    pub xi0: f64,
    pub u: f64,
}

impl TryFrom<Family> for InterarrivalLaw {
    type Error = Error;

    fn try_from(family: Family) -> Result<Self> {
        InterarrivalLaw::new(family)
    }
}

impl From<InterarrivalLaw> for Family {
    fn from(law: InterarrivalLaw) -> Family {
        law.family
    }
}

impl InterarrivalLaw {
    pub fn new(family: Family) -> Result<Self> {
        let mut discrete = None;
        let (mean, second_moment) = match &family {
            Family::Exponential { rate } => {
                check_positive("rate", *rate)?;
                (1.0 / rate, 2.0 / (rate * rate))
            }
            Family::Gamma { shape, scale } => {
                check_positive("shape", *shape)?;
                check_positive("scale", *scale)?;
                (shape * scale, shape * (shape + 1.0) * scale * scale)
            }
            Family::Uniform { lo, hi } => {
                check_finite("lo", *lo)?;
                check_finite("hi", *hi)?;
                if !(*lo >= 0.0 && hi > lo) {
                    return Err(Error::invalid("hi", "uniform law needs 0 <= lo < hi"));
                }
                ((lo + hi) / 2.0, (lo * lo + lo * hi + hi * hi) / 3.0)
            }
            Family::LogNormal { mu, sigma } => {
                check_finite("mu", *mu)?;
                check_positive("sigma", *sigma)?;
                let s2 = sigma * sigma;
                (libm::exp(mu + s2 / 2.0), libm::exp(2.0 * mu + 2.0 * s2))
            }
            Family::PointMass { value } => {
                check_positive("value", *value)?;
                (*value, value * value)
            }
            Family::FiniteDiscrete { atoms } => {
                let atoms = Atoms::new(atoms, true)?;
                let mean = atoms.mean();
                let second = atoms.expect(|v| v * v);
                let weights: Vec<f64> =
                    atoms.values.iter().zip(&atoms.probs).map(|(v, p)| v * p).collect();
                discrete = Some(Discrete { size_biased: cumulative(&weights), atoms });
                (mean, second)
            }
        };
        let lattice = match &family {
            Family::PointMass { value } => Some(*value),
            Family::FiniteDiscrete { .. } => {
                let atoms = &discrete.as_ref().unwrap().atoms;
                let support: Vec<f64> = atoms
                    .values
                    .iter()
                    .zip(&atoms.probs)
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(&v, _)| v)
                    .collect();
                lattice_span(&support)
            }
            _ => None,
        };
        Ok(InterarrivalLaw { family, mean, second_moment, lattice, discrete })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(Family::Exponential { rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Family::Uniform { lo, hi })
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(Family::PointMass { value })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// `μ = Eξ`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `Eξ²`.
    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }

    /// Span `d` when the law sits on a lattice `dℤ`.
    pub fn lattice_span(&self) -> Option<f64> {
        self.lattice
    }

    pub fn is_lattice(&self) -> bool {
        self.lattice.is_some()
    }

    /// `P(ξ ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { rate } => -libm::expm1(-rate * x),
            Family::Gamma { shape, scale } => math::gamma_p(*shape, x / scale),
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::LogNormal { mu, sigma } => {
                if x == 0.0 {
                    0.0
                } else {
                    math::normal_cdf((libm::log(x) - mu) / sigma)
                }
            }
            Family::PointMass { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
            Family::FiniteDiscrete { .. } => {
                let atoms = &self.discrete.as_ref().unwrap().atoms;
                atoms.expect(|v| if v <= x { 1.0 } else { 0.0 }).min(1.0)
            }
        }
    }

    /// `P(ξ > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match &self.family {
            Family::Exponential { rate } => {
                if x < 0.0 {
                    1.0
                } else {
                    libm::exp(-rate * x)
                }
            }
            Family::Gamma { shape, scale } => math::gamma_q(*shape, x / scale),
            Family::LogNormal { mu, sigma } if x > 0.0 => math::normal_sf((libm::log(x) - mu) / sigma),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// `E[min(ξ, x)] = ∫₀ˣ P(ξ > y) dy` for `x ≥ 0`.
    fn truncated_mean(&self, x: f64) -> f64 {
        match &self.family {
            Family::Exponential { rate } => -libm::expm1(-rate * x) / rate,
            Family::Gamma { shape, scale } => {
                let z = x / scale;
                x * math::gamma_q(*shape, z) + shape * scale * math::gamma_p(shape + 1.0, z)
            }
            Family::Uniform { lo, hi } => {
                if x <= *lo {
                    x
                } else if x >= *hi {
                    (lo + hi) / 2.0
                } else {
                    let w = hi - lo;
                    lo + (w * w - (hi - x) * (hi - x)) / (2.0 * w)
                }
            }
            Family::LogNormal { mu, sigma } => {
                if x == 0.0 {
                    return 0.0;
                }
                // E[ξ; ξ ≤ x] = e^{μ+σ²/2} Φ(z − σ) with z = (ln x − μ)/σ.
                let z = (libm::log(x) - mu) / sigma;
                x * math::normal_sf(z) + self.mean * math::normal_cdf(z - sigma)
            }
            Family::PointMass { value } => x.min(*value),
            Family::FiniteDiscrete { .. } => {
                self.discrete.as_ref().unwrap().atoms.expect(|v| v.min(x))
            }
        }
    }

    /// CDF of the integrated-tail law, `F*(x) = μ⁻¹ ∫₀ˣ P(ξ > y) dy`.
    ///
    /// This is the law of the stationary delay `S*₀` and the limit law of the
    /// overshoot `S_{ν(t)} − t`.
    pub fn integrated_tail_cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(alloc::format!("integrated-tail CDF needs x >= 0, got {x}")));
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        Ok((self.truncated_mean(x) / self.mean).clamp(0.0, 1.0))
    }

    /// Laplace transform `E e^{−aξ}` for `a ≥ 0`.
    pub fn laplace(&self, a: f64) -> f64 {
        if a == 0.0 {
            return 1.0;
        }
        match &self.family {
            Family::Exponential { rate } => rate / (rate + a),
            Family::Gamma { shape, scale } => libm::pow(1.0 + a * scale, -shape),
            Family::Uniform { lo, hi } => {
                (libm::exp(-a * lo) - libm::exp(-a * hi)) / (a * (hi - lo))
            }
            Family::LogNormal { mu, sigma } => {
                // No closed form: integrate over the standard normal variable.
                let (mu, sigma) = (*mu, *sigma);
                let f = move |z: f64| {
                    let phi = libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * core::f64::consts::PI);
                    phi * libm::exp(-a * libm::exp(mu + sigma * z))
                };
                math::integrate(&f, -12.0, 12.0, 1e-13).clamp(0.0, 1.0)
            }
            Family::PointMass { value } => libm::exp(-a * value),
            Family::FiniteDiscrete { .. } => {
                self.discrete.as_ref().unwrap().atoms.expect(|v| libm::exp(-a * v))
            }
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match &self.family {
            Family::Exponential { rate } => Exp::new(*rate).expect("validated").sample(rng),
            Family::Gamma { shape, scale } => {
                Gamma::new(*shape, *scale).expect("validated").sample(rng)
            }
            Family::Uniform { lo, hi } => lo + (hi - lo) * rng.open01(),
            Family::LogNormal { mu, sigma } => {
                LogNormal::new(*mu, *sigma).expect("validated").sample(rng)
            }
            Family::PointMass { value } => *value,
            Family::FiniteDiscrete { .. } => {
                self.discrete.as_ref().unwrap().atoms.sample(rng.open01())
            }
        }
    }

    /// A draw of `ξ₀` from the size-biased law `μ⁻¹ E[ξ; ξ ∈ dx]`.
    ///
    /// Every family has an exact sampler: Exp(λ) and Gamma(k, θ) shift the
    /// shape by one, Uniform(lo, hi) inverts the CDF `(x² − lo²)/(hi² − lo²)`,
    /// LogNormal(m, σ) becomes LogNormal(m + σ², σ), and discrete atoms are
    /// reweighted by `value · prob / μ`.
    pub fn sample_size_biased(&self, rng: &mut RngStream) -> f64 {
        match &self.family {
            Family::Exponential { rate } => {
                let e = Exp::new(*rate).expect("validated");
                e.sample(rng) + e.sample(rng)
            }
            Family::Gamma { shape, scale } => {
                Gamma::new(shape + 1.0, *scale).expect("validated").sample(rng)
            }
            Family::Uniform { lo, hi } => {
                let (l2, h2) = (lo * lo, hi * hi);
                libm::sqrt(l2 + rng.open01() * (h2 - l2))
            }
            Family::LogNormal { mu, sigma } => {
                LogNormal::new(mu + sigma * sigma, *sigma).expect("validated").sample(rng)
            }
            Family::PointMass { value } => *value,
            Family::FiniteDiscrete { .. } => {
                let d = self.discrete.as_ref().unwrap();
                d.atoms.values[pick(&d.size_biased, rng.open01())]
            }
        }
    }

    /// Draw `(ξ₀, U)` and return the stationary delay `S*₀ = U ξ₀` together
    /// with the undershoot `−S*₋₁ = (1 − U) ξ₀`.
    pub fn sample_stationary_delay(&self, rng: &mut RngStream) -> StationaryDelay {
        let raw = self.sample_size_biased(rng);
        let u = rng.open01();
        let s0 = u * raw;
        let undershoot = (1.0 - u) * raw;
        StationaryDelay { s0, undershoot, xi0: s0 + undershoot, u }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn law(f: Family) -> InterarrivalLaw {
        InterarrivalLaw::new(f).unwrap()
    }

    #[test]
    fn analytic_means() {
        assert_eq!(law(Family::Exponential { rate: 1.0 }).mean(), 1.0);
        assert_eq!(law(Family::Uniform { lo: 0.0, hi: 2.0 }).mean(), 1.0);
        let d = law(Family::FiniteDiscrete { atoms: alloc::vec![(1.0, 0.5), (3.0, 0.5)] });
        assert_eq!(d.mean(), 2.0);
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(InterarrivalLaw::new(Family::Exponential { rate: 0.0 }).is_err());
        assert!(InterarrivalLaw::new(Family::Uniform { lo: -1.0, hi: 1.0 }).is_err());
        assert!(InterarrivalLaw::new(Family::Uniform { lo: 2.0, hi: 2.0 }).is_err());
        assert!(InterarrivalLaw::new(Family::PointMass { value: 0.0 }).is_err());
        assert!(InterarrivalLaw::new(Family::LogNormal { mu: 0.0, sigma: 0.0 }).is_err());
        assert!(InterarrivalLaw::new(Family::FiniteDiscrete { atoms: alloc::vec![(1.0, 0.5), (2.0, 0.4)] }).is_err());
        assert!(InterarrivalLaw::new(Family::FiniteDiscrete { atoms: alloc::vec![(0.0, 1.0)] }).is_err());
        // Mass within 1e-12 of one is accepted.
        assert!(InterarrivalLaw::new(Family::FiniteDiscrete {
            atoms: alloc::vec![(1.0, 0.5 + 4e-13), (2.0, 0.5)]
        })
        .is_ok());
    }

    #[test]
    fn lattice_flags() {
        assert_eq!(law(Family::PointMass { value: 1.0 }).lattice_span(), Some(1.0));
        let d = law(Family::FiniteDiscrete { atoms: alloc::vec![(1.0, 0.5), (3.0, 0.5)] });
        assert_eq!(d.lattice_span(), Some(1.0));
        let irr = law(Family::FiniteDiscrete {
            atoms: alloc::vec![(1.0, 0.5), (core::f64::consts::SQRT_2, 0.5)],
        });
        assert!(!irr.is_lattice());
        assert!(!law(Family::Exponential { rate: 2.0 }).is_lattice());
    }

    #[test]
    fn integrated_tail_examples() {
        let u = law(Family::Uniform { lo: 0.0, hi: 1.0 });
        assert_eq!(u.integrated_tail_cdf(0.0).unwrap(), 0.0);
        assert!((u.integrated_tail_cdf(0.5).unwrap() - 0.75).abs() < 1e-15);
        let e = law(Family::Exponential { rate: 1.0 });
        assert!((e.integrated_tail_cdf(core::f64::consts::LN_2).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(e.integrated_tail_cdf(-1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn point_mass_draws() {
        let p = law(Family::PointMass { value: 5.0 });
        let mut rng = RngStream::from_seed(1, 0);
        for _ in 0..10 {
            assert_eq!(p.sample(&mut rng), 5.0);
            assert_eq!(p.sample_size_biased(&mut rng), 5.0);
        }
    }

    #[test]
    fn serde_shape() {
        let l: InterarrivalLaw = serde_json::from_str(r#"{"family":"exponential","rate":1.0}"#).unwrap();
        assert_eq!(l.mean(), 1.0);
        let l: InterarrivalLaw =
            serde_json::from_str(r#"{"family":"finite_discrete","atoms":[[1.0,0.5],[3.0,0.5]]}"#).unwrap();
        assert_eq!(l.mean(), 2.0);
        let back = serde_json::to_string(&l).unwrap();
        assert_eq!(back, r#"{"family":"finite_discrete","atoms":[[1.0,0.5],[3.0,0.5]]}"#);
        assert!(serde_json::from_str::<InterarrivalLaw>(r#"{"family":"exponential","rate":-1.0}"#).is_err());
        assert!(serde_json::from_str::<InterarrivalLaw>(r#"{"family":"pareto","alpha":2.0,"xm":1.0}"#).is_err());
        assert!(serde_json::from_str::<InterarrivalLaw>(r#"{"family":"exponential","rate":1.0,"x":1}"#).is_err());
    }
}
