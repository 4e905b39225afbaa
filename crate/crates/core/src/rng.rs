//! Seeded random polynomials for experiments and property tests.
//!
//! Coefficients are drawn uniformly from the square `[-1, 1] × [-1, 1]` and
//! the polynomial is then scaled to unit `A²` norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Poly, C64};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random polynomial of exact degree `degree`, unit `A²` norm.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, degree: usize) -> Poly {
    loop {
        let coeffs: Vec<C64> = (0..=degree)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if coeffs[degree] == C64::new(0.0, 0.0) {
            continue;
        }
        let norm = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() / (k + 1) as f64)
            .sum::<f64>()
            .sqrt();
        return Poly::new(coeffs.into_iter().map(|c| c / norm).collect());
    }
}

/// Random polynomial whose degree is itself uniform in `0..=max_degree`.
pub fn random_poly_up_to<R: Rng + ?Sized>(rng: &mut R, max_degree: usize) -> Poly {
    let degree = rng.random_range(0..=max_degree);
    random_poly(rng, degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_polynomial() {
        let a = random_poly(&mut seeded(11), 5);
        let b = random_poly(&mut seeded(11), 5);
        assert_eq!(a, b);
        assert_ne!(a, random_poly(&mut seeded(12), 5));
    }

    #[test]
    fn unit_a2_norm_and_exact_degree() {
        let mut rng = seeded(3);
        for d in 0..10 {
            let f = random_poly(&mut rng, d);
            assert_eq!(f.degree(), Some(d));
            let n2: f64 = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm_sqr() / (k + 1) as f64)
                .sum();
            assert!((n2 - 1.0).abs() < 1e-14);
            assert!(f.coeffs().iter().all(|c| c.re.abs() <= 1.0 * 2f64.sqrt() * 10.0));
        }
    }
}
