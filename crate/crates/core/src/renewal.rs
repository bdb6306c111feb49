//! Renewal sequences: the zero-delayed forward walk and the two-sided
//! stationary renewal point process restricted to a window `[−c, c]`.

use alloc::vec::Vec;

use crate::distributions::{InterarrivalLaw, StationaryDelay};
use crate::error::{Error, Result};
use crate::rng::{RngStream, StreamKey};

const TAG_DELAY: u64 = 1;
const TAG_FORWARD: u64 = 2;
const TAG_BACKWARD: u64 = 3;

/// Epochs `0 = S_0 < S_1 < … ≤ horizon` and the first epoch past the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct RenewalRealization {
    pub epochs: Vec<f64>,
    pub horizon: f64,
    /// `S_{ν(horizon)}`, the first epoch strictly after the horizon.
    pub next_epoch: f64,
}

impl RenewalRealization {
    /// `ν(horizon) = #{k : S_k ≤ horizon}`.
    pub fn count(&self) -> usize {
        self.epochs.len()
    }

    /// `S_{ν(horizon)} − horizon`.
    pub fn overshoot(&self) -> f64 {
        self.next_epoch - self.horizon
    }

    /// `horizon − S_{ν(horizon)−1}`.
    pub fn undershoot(&self) -> f64 {
        self.horizon - self.epochs.last().copied().unwrap_or(0.0)
    }
}

pub fn simulate_forward(
    law: &InterarrivalLaw,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<RenewalRealization> {
    if !(horizon >= 0.0) || horizon.is_infinite() {
        return Err(Error::Domain(alloc::format!("horizon must be finite and >= 0, got {horizon}")));
    }
    let mut epochs = alloc::vec![0.0];
    let mut s = 0.0;
    loop {
        s += law.sample(rng);
        if s > horizon {
            break;
        }
        epochs.push(s);
    }
    Ok(RenewalRealization { epochs, horizon, next_epoch: s })
}

/// Points of the stationary renewal process covering `[−c, c]`.
///
/// Indexing follows `t_{−1} < 0 ≤ t_0`. One point beyond each edge is kept
/// as a sentinel. Forward and backward extensions draw from independent
/// sub-streams, so [`extend_to`](Self::extend_to) yields the same points as
/// building the larger window directly.
#[derive(Clone, Debug)]
pub struct StationaryWindow {
    law: InterarrivalLaw,
    c: f64,
    delay: StationaryDelay,
    /// `t_0, t_1, …` ascending.
    pos: Vec<f64>,
    /// `t_{−1}, t_{−2}, …` descending.
    neg: Vec<f64>,
    forward: RngStream,
    backward: RngStream,
}

pub fn build_stationary_window(
    law: &InterarrivalLaw,
    c: f64,
    key: StreamKey,
) -> Result<StationaryWindow> {
    if !(c > 0.0) || c.is_infinite() {
        return Err(Error::Domain(alloc::format!("window half-width must be finite and > 0, got {c}")));
    }
    let delay = law.sample_stationary_delay(&mut key.child(TAG_DELAY).open());
    let mut w = StationaryWindow {
        law: law.clone(),
        c: 0.0,
        pos: alloc::vec![delay.s0],
        neg: alloc::vec![-delay.undershoot],
        delay,
        forward: key.child(TAG_FORWARD).open(),
        backward: key.child(TAG_BACKWARD).open(),
    };
    w.extend_to(c);
    Ok(w)
}

impl StationaryWindow {
    pub fn law(&self) -> &InterarrivalLaw {
        &self.law
    }

    /// Half-width of the window guaranteed to be covered.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Length of the straddling interval, `t_0 − t_{−1}`.
    pub fn xi0(&self) -> f64 {
        self.delay.xi0
    }

    /// Position of the origin inside the straddling interval, `t_0 / ξ₀`.
    pub fn u(&self) -> f64 {
        self.delay.u
    }

    pub fn delay(&self) -> StationaryDelay {
        self.delay
    }

    /// Grow the covered range to `[−c, c]`; never shrinks.
    pub fn extend_to(&mut self, c: f64) {
        while *self.pos.last().unwrap() <= c {
            let next = self.pos.last().unwrap() + self.law.sample(&mut self.forward);
            self.pos.push(next);
        }
        while *self.neg.last().unwrap() >= -c {
            let next = self.neg.last().unwrap() - self.law.sample(&mut self.backward);
            self.neg.push(next);
        }
        self.c = self.c.max(c);
    }

    /// Grow the positive side only, until the largest point exceeds `x`.
    pub fn extend_forward_to(&mut self, x: f64) {
        while *self.pos.last().unwrap() <= x {
            let next = self.pos.last().unwrap() + self.law.sample(&mut self.forward);
            self.pos.push(next);
        }
    }

    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `t_k` for `k ≥ 0`, including the sentinel.
    pub fn forward_points(&self) -> &[f64] {
        &self.pos
    }

    /// `t_{−1}, t_{−2}, …` (descending), including the sentinel.
    pub fn backward_points(&self) -> &[f64] {
        &self.neg
    }

    /// `t_k`, if stored.
    pub fn point(&self, k: i64) -> Option<f64> {
        if k >= 0 {
            self.pos.get(k as usize).copied()
        } else {
            self.neg.get((-k - 1) as usize).copied()
        }
    }

    pub fn k_min(&self) -> i64 {
        -(self.neg.len() as i64)
    }

    pub fn k_max(&self) -> i64 {
        self.pos.len() as i64 - 1
    }

    /// All stored `(k, t_k)` in increasing order.
    pub fn points(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let back = self.neg.iter().enumerate().rev().map(|(i, &t)| (-(i as i64) - 1, t));
        let fwd = self.pos.iter().enumerate().map(|(i, &t)| (i as i64, t));
        back.chain(fwd)
    }

    /// Number of points in `[a, b)`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        if !(b > a) {
            return 0;
        }
        let in_range = |t: &&f64| **t >= a && **t < b;
        self.pos.iter().filter(in_range).count() + self.neg.iter().filter(in_range).count()
    }

    /// The window translated by `−t` and re-indexed so that `t_{−1} < 0 ≤ t_0`.
    ///
    /// The result covers `[−(c − |t|), c − |t|]`.
    pub fn shifted(&self, t: f64) -> Result<StationaryWindow> {
        if !(libm::fabs(t) < self.c) {
            return Err(Error::Domain(alloc::format!(
                "shift {t} must be smaller in magnitude than the half-width {}",
                self.c
            )));
        }
        let all: Vec<f64> = self.points().map(|(_, p)| p - t).collect();
        let split = all.partition_point(|&p| p < 0.0);
        let pos: Vec<f64> = all[split..].to_vec();
        let neg: Vec<f64> = all[..split].iter().rev().copied().collect();
        let (t0, tm1) = (pos[0], neg[0]);
        let xi0 = t0 - tm1;
        let delay = StationaryDelay { s0: t0, undershoot: -tm1, xi0, u: t0 / xi0 };
        Ok(StationaryWindow {
            law: self.law.clone(),
            c: self.c - libm::fabs(t),
            delay,
            pos,
            neg,
            forward: self.forward.clone(),
            backward: self.backward.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_point_mass() {
        let law = InterarrivalLaw::point_mass(1.0).unwrap();
        let r = simulate_forward(&law, 5.5, &mut StreamKey::root(0).open()).unwrap();
        assert_eq!(r.epochs, alloc::vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(r.overshoot(), 0.5);
        let r0 = simulate_forward(&law, 0.0, &mut StreamKey::root(0).open()).unwrap();
        assert_eq!(r0.epochs, alloc::vec![0.0]);
        assert!(simulate_forward(&law, -1.0, &mut StreamKey::root(0).open()).is_err());
    }

    #[test]
    fn window_convention_and_gaps() {
        let law = InterarrivalLaw::point_mass(2.0).unwrap();
        let w = build_stationary_window(&law, 3.0, StreamKey::root(9)).unwrap();
        assert!(w.point(-1).unwrap() < 0.0 && 0.0 <= w.point(0).unwrap());
        assert_eq!(w.point(0).unwrap() - w.point(-1).unwrap(), w.xi0());
        let pts: Vec<f64> = w.points().map(|(_, t)| t).collect();
        assert!(pts[0] < -3.0 && *pts.last().unwrap() > 3.0);
        for g in pts.windows(2) {
            assert!((g[1] - g[0] - 2.0).abs() < 1e-12);
        }
        let ks: Vec<i64> = w.points().map(|(k, _)| k).collect();
        assert_eq!(ks, (w.k_min()..=w.k_max()).collect::<Vec<_>>());
    }

    #[test]
    fn extension_matches_direct_build() {
        let law = InterarrivalLaw::exponential(1.0).unwrap();
        let mut small = build_stationary_window(&law, 2.0, StreamKey::root(4)).unwrap();
        small.extend_to(40.0);
        let big = build_stationary_window(&law, 40.0, StreamKey::root(4)).unwrap();
        assert_eq!(small.forward_points(), big.forward_points());
        assert_eq!(small.backward_points(), big.backward_points());
    }

    #[test]
    fn shift_reindexes() {
        let law = InterarrivalLaw::point_mass(1.0).unwrap();
        let w = build_stationary_window(&law, 5.0, StreamKey::root(2)).unwrap();
        let same = w.shifted(0.0).unwrap();
        assert_eq!(same.forward_points(), w.forward_points());
        let s = w.shifted(0.25).unwrap();
        assert!(s.point(-1).unwrap() < 0.0 && 0.0 <= s.point(0).unwrap());
        assert_eq!(s.point(0).unwrap() - s.point(-1).unwrap(), s.xi0());
        let pts: Vec<f64> = s.points().map(|(_, t)| t).collect();
        for g in pts.windows(2) {
            assert!((g[1] - g[0] - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.c(), 4.75);
        assert!(w.shifted(5.0).is_err());
    }
}
