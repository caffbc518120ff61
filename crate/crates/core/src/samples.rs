//! Seeded random inputs for identity checks. The same seed always yields
//! the same samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fedosov::{WeylElement, WeylKey};
use crate::poly::Polynomial;
use crate::scalar::Scalar;
use crate::series::FormalSeries;

fn small_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let mut num = rng.gen_range(-4i64..=4);
    if num == 0 {
        num = 1;
    }
    Scalar::ratio(num, rng.gen_range(1i64..=3))
}

fn exponents(rng: &mut ChaCha8Rng, dim: usize, degree: u32) -> Vec<u32> {
    let mut e = vec![0; dim];
    for _ in 0..degree {
        e[rng.gen_range(0..dim)] += 1;
    }
    e
}

/// Polynomial in `dim` variables with up to `terms` monomials of degree at
/// most `max_degree`.
pub fn random_polynomial(rng: &mut ChaCha8Rng, dim: usize, max_degree: u32, terms: usize) -> Polynomial {
    let mut p = Polynomial::zero(dim);
    for _ in 0..rng.gen_range(1..=terms) {
        let d = rng.gen_range(0..=max_degree);
        p.add_term(exponents(rng, dim, d), small_scalar(rng));
    }
    p
}

/// Formal series whose `ℏ^r` coefficient has degree at most `max_degree`.
pub fn random_series(rng: &mut ChaCha8Rng, dim: usize, max_degree: u32, order: usize) -> FormalSeries {
    let coeffs = (0..=order)
        .map(|r| {
            if r == 0 || rng.gen_bool(0.3) {
                random_polynomial(rng, dim, max_degree, 3)
            } else {
                Polynomial::zero(dim)
            }
        })
        .collect();
    FormalSeries::from_coeffs(dim, coeffs, order).expect("matching variables")
}

/// Mixed-degree Weyl element with total degree at most `n_w`, arbitrary
/// form degree and low-degree coefficients in the base variables.
pub fn random_weyl(rng: &mut ChaCha8Rng, dim: usize, n_w: u32, terms: usize) -> WeylElement {
    let mut a = WeylElement::zero(dim);
    for _ in 0..rng.gen_range(1..=terms) {
        let total = rng.gen_range(0..=n_w);
        let hbar = rng.gen_range(0..=total / 2);
        let y = exponents(rng, dim, total - 2 * hbar);
        let forms = rng.gen_range(0..(1u32 << dim));
        a.add_term(WeylKey::new(hbar, y, forms), random_polynomial(rng, dim, 2, 2));
    }
    a
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn weyl_samples(dim: usize, n_w: u32, count: usize, seed: u64) -> Vec<WeylElement> {
    let mut r = rng(seed);
    (0..count).map(|_| random_weyl(&mut r, dim, n_w, 4)).collect()
}

pub fn function_samples(dim: usize, max_degree: u32, order: usize, count: usize, seed: u64) -> Vec<FormalSeries> {
    let mut r = rng(seed);
    (0..count).map(|_| random_series(&mut r, dim, max_degree, order)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        let a = weyl_samples(2, 6, 10, 7);
        assert_eq!(a, weyl_samples(2, 6, 10, 7));
        assert!(a.iter().all(|w| w.max_total_degree().unwrap_or(0) <= 6));
        let f = function_samples(4, 3, 2, 5, 1);
        assert!(f.iter().all(|s| s.degree() <= 3 && s.order() == 2));
    }
}
