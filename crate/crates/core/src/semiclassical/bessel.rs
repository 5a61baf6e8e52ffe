//! Integer-order Bessel functions of the first kind.

use crate::error::{domain, Result};

/// Largest supported order magnitude.
pub const MAX_ORDER: i32 = 200;
/// Largest supported argument magnitude.
pub const MAX_ARG: f64 = 50.0;

const RESCALE_ABOVE: f64 = 1e250;

/// `J_0(u) ..= J_{n_max}(u)` for `u ≥ 0` by Miller's downward recurrence,
/// normalized with `J_0 + 2 Σ_k J_{2k} = 1`.
pub fn bessel_j_orders(n_max: usize, u: f64) -> Vec<f64> {
    debug_assert!(u >= 0.0);
    let mut out = vec![0.0; n_max + 1];
    if u == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let big = (n_max as f64).max(u);
    let mut start = (big + 20.0 + (40.0 * big).sqrt()) as usize;
    start += start % 2;

    let mut j_next = 0.0; // J_{k+1}
    let mut j_here = 1e-300; // J_k, arbitrary seed
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = j_here;
        }
        if k % 2 == 0 {
            norm += 2.0 * j_here;
        }
        let j_prev = 2.0 * k as f64 / u * j_here - j_next;
        j_next = j_here;
        j_here = j_prev;
        if j_here.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            j_here *= s;
            j_next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = j_here;
    norm += j_here;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `J_n(u)` for integer `n`, `|n| ≤ 200`, `|u| ≤ 50`.
pub fn bessel_j(n: i32, u: f64) -> Result<f64> {
    if n.abs() > MAX_ORDER || !(u.abs() <= MAX_ARG) {
        return domain(format!(
            "Bessel J_{n}({u}) outside supported range |n| <= {MAX_ORDER}, |u| <= {MAX_ARG}"
        ));
    }
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_orders(m, u.abs())[m];
    // J_{-n}(u) = (-1)^n J_n(u) and J_n(-u) = (-1)^n J_n(u)
    let flips = (n < 0) as u32 + (u < 0.0) as u32;
    Ok(if flips % 2 == 1 && m % 2 == 1 { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `J_n(u) = (1/π) ∫₀^π cos(nθ − u sin θ) dθ`; the periodic trapezoid rule on
    /// the full circle converges geometrically for this integrand.
    fn quadrature_oracle(n: i32, u: f64) -> f64 {
        let m = 4096;
        let h = 2.0 * PI / m as f64;
        let s: f64 = (0..m)
            .map(|k| {
                let th = k as f64 * h;
                (n as f64 * th - u * th.sin()).cos()
            })
            .sum();
        s * h / (2.0 * PI)
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        for n in [-3, -1, 1, 2, 17] {
            assert_eq!(bessel_j(n, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn matches_quadrature() {
        let mut worst: f64 = 0.0;
        for &u in &[0.5, 1.84, 10.0] {
            for n in -40..=40 {
                let err = (bessel_j(n, u).unwrap() - quadrature_oracle(n, u)).abs();
                worst = worst.max(err);
            }
        }
        assert!(worst < 1e-8, "worst error {worst:e}");
    }

    #[test]
    fn wide_range_against_quadrature() {
        for &u in &[1e-6, 0.03, 3.0, 27.5, 49.9, -7.3] {
            for n in [-60, -5, 0, 1, 2, 9, 30, 55] {
                let err = (bessel_j(n, u).unwrap() - quadrature_oracle(n, u)).abs();
                assert!(err < 1e-10, "J_{n}({u}) error {err:e}");
            }
        }
    }

    #[test]
    fn first_maximum_of_j1() {
        let v = bessel_j(1, 1.84).unwrap();
        assert!((v - quadrature_oracle(1, 1.84)).abs() < 1e-12);
        assert!((v - 0.5819).abs() < 1e-4, "{v}");
    }

    #[test]
    fn reflection_identities() {
        for &u in &[0.7, 4.4, 12.0] {
            for n in 1..20 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let jp = bessel_j(n, u).unwrap();
                assert!((bessel_j(-n, u).unwrap() - sign * jp).abs() < 1e-14);
                assert!((bessel_j(n, -u).unwrap() - sign * jp).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(bessel_j(201, 1.0).is_err());
        assert!(bessel_j(3, 50.5).is_err());
        assert!(bessel_j(3, f64::NAN).is_err());
    }

    #[test]
    fn tiny_argument_does_not_overflow() {
        let v = bessel_j_orders(150, 1e-3);
        assert!(v.iter().all(|x| x.is_finite()));
        assert!((v[0] - 1.0).abs() < 1e-6);
        assert!((v[1] - 5e-4).abs() < 1e-9);
    }
}
