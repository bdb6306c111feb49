//! Commensurability test for finite sets of positive atoms.

/// Largest denominator considered when matching atom ratios to rationals.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

const RELATIVE_TOLERANCE: f64 = 64.0 * f64::EPSILON;

/// Best rational approximation `p/q` of `x > 0` with `q ≤ max_den`.
fn rational(x: f64, max_den: u64) -> Option<(u64, u64)> {
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = libm::floor(r);
        if a > 1e15 {
            break;
        }
        let a = a as u64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if q1 == 0 {
        None
    } else {
        Some((p1, q1))
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Span `d` of the lattice `dℤ` carrying all `atoms`, if the atoms are
/// commensurable up to denominator [`MAX_DENOMINATOR`].
///
/// Exact detection is undecidable for floats; a ratio counts as rational when
/// some `p/q` with `q ≤ 10⁶` matches it within 64 ulps.
pub fn lattice_span(atoms: &[f64]) -> Option<f64> {
    let base = *atoms.first()?;
    if !(base > 0.0) {
        return None;
    }
    // a_i = base · p_i / q_i; with L = lcm(q_i), a_i = (base / L) · n_i.
    let mut fracs = alloc::vec::Vec::with_capacity(atoms.len());
    for &a in atoms {
        let ratio = a / base;
        let (p, q) = rational(ratio, MAX_DENOMINATOR)?;
        let approx = p as f64 / q as f64;
        if (approx - ratio).abs() > RELATIVE_TOLERANCE * ratio {
            return None;
        }
        fracs.push((p as u128, q as u128));
    }
    let mut lcm: u128 = 1;
    for &(_, q) in &fracs {
        lcm = lcm / gcd(lcm, q) * q;
        if lcm > u64::MAX as u128 {
            // Commensurable, but the span is below float resolution of the atoms.
            return Some(base / lcm as f64);
        }
    }
    let mut g: u128 = 0;
    for &(p, q) in &fracs {
        g = gcd(g, p * (lcm / q));
    }
    Some(base * g as f64 / lcm as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_atoms() {
        assert_eq!(lattice_span(&[1.0, 3.0]), Some(1.0));
        assert_eq!(lattice_span(&[2.0, 6.0, 10.0]), Some(2.0));
        assert_eq!(lattice_span(&[5.0]), Some(5.0));
    }

    #[test]
    fn decimal_atoms() {
        let d = lattice_span(&[0.1, 0.25]).unwrap();
        assert!((d - 0.05).abs() < 1e-15);
    }

    #[test]
    fn irrational_ratio_is_nonlattice() {
        assert_eq!(lattice_span(&[1.0, core::f64::consts::SQRT_2]), None);
        assert_eq!(lattice_span(&[1.0, core::f64::consts::PI]), None);
        assert_eq!(lattice_span(&[0.5, core::f64::consts::E]), None);
    }
}
