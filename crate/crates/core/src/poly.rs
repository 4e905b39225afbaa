//! Complex polynomials in the monomial basis.
//!
//! A [`Poly`] is always stored normalized: trailing zero coefficients are
//! dropped, so the zero polynomial has an empty coefficient vector and no
//! degree (the conventional degree −1).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::C64;

/// Analytic polynomial `Σ coeffs[k]·z^k`.
#[derive(Clone, Default, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
        coeffs[k] = C64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Largest index with a nonzero coefficient; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// `G(z) = (1/z)∫₀^z g(ζ) dζ`, i.e. `G_k = g_k/(k+1)`, so that `(zG)' = g`.
    pub fn averaged_antiderivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / (k + 1) as f64)
                .collect(),
        )
    }

    /// `z·f`.
    pub fn shift_up(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(C64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Drops every coefficient above `degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        Self::new(self.coeffs.iter().take(degree + 1).copied().collect())
    }

    pub fn scale(&self, a: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * a).collect())
    }

    /// Coefficients padded (or cut) to exactly `len` entries.
    pub fn padded(&self, len: usize) -> Vec<C64> {
        (0..len).map(|k| self.coeff(k)).collect()
    }

    /// Largest coefficient modulus difference.
    pub fn max_coeff_distance(&self, other: &Poly) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul<C64> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: C64) -> Poly {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: f64) -> Poly {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Ok(Poly::new(
            pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Poly::from_real(&[1.0, 2.0]).eval(c(0.0, 0.0)), c(1.0, 0.0));
        assert_eq!(Poly::from_real(&[0.0, 1.0]).eval(c(0.0, 1.0)), c(0.0, 1.0));
        // 1 + 0.5 + 0.25
        let direct = 1.0 + 0.5 + 0.5 * 0.5;
        assert_eq!(Poly::from_real(&[1.0, 1.0, 1.0]).eval(c(0.5, 0.0)), c(direct, 0.0));
    }

    #[test]
    fn averaged_antiderivative_examples() {
        assert_eq!(Poly::from_real(&[1.0]).averaged_antiderivative(), Poly::from_real(&[1.0]));
        assert_eq!(
            Poly::from_real(&[1.0, 2.0]).averaged_antiderivative(),
            Poly::from_real(&[1.0, 1.0])
        );
        let g = Poly::from_real(&[0.0, 1.0]);
        let big_g = g.averaged_antiderivative();
        assert_eq!(big_g, Poly::from_real(&[0.0, 0.5]));
        assert_eq!(big_g.shift_up().derivative(), g);
    }

    #[test]
    fn derivative_examples() {
        assert!(Poly::from_real(&[5.0]).derivative().is_zero());
        assert_eq!(Poly::from_real(&[0.0, 0.0, 1.0]).derivative(), Poly::from_real(&[0.0, 2.0]));
        assert_eq!(Poly::from_real(&[1.0, 3.0, 2.0]).derivative(), Poly::from_real(&[3.0, 4.0]));
    }

    #[test]
    fn zero_polynomial_is_accepted_everywhere() {
        let z = Poly::zero();
        assert_eq!(z.degree(), None);
        assert_eq!(z.eval(c(0.3, 0.2)), c(0.0, 0.0));
        assert!(z.derivative().is_zero());
        assert!(z.averaged_antiderivative().is_zero());
        assert!(z.shift_up().is_zero());
        assert!(z.truncate(3).is_zero());
        assert_eq!(Poly::from_real(&[0.0, 0.0]), z);
    }

    #[test]
    fn normalization_trims_trailing_zeros() {
        let p = Poly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(Poly::from_real(&[0.0, 0.0, 1.0]).truncate(1), Poly::zero());
    }

    #[test]
    fn json_is_array_of_pairs() {
        let p = Poly::new(vec![c(1.0, -2.0), c(0.0, 0.5)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[1.0,-2.0],[0.0,0.5]]");
        let back: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..12)
            .prop_map(|v| Poly::new(v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    fn arb_disk_point() -> impl Strategy<Value = C64> {
        (0.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    proptest! {
        #[test]
        fn shifted_antiderivative_differentiates_back(g in arb_poly()) {
            // g_k/(k+1)·(k+1) reproduces g_k up to one rounding per component
            let back = g.averaged_antiderivative().shift_up().derivative();
            prop_assert_eq!(back.coeffs().len(), g.coeffs().len());
            for (a, b) in back.coeffs().iter().zip(g.coeffs()) {
                prop_assert!((a - b).norm() <= 4.0 * f64::EPSILON * b.norm());
            }
        }

        #[test]
        fn derivative_matches_central_difference(f in arb_poly(), z in arb_disk_point()) {
            let h = 1e-5;
            let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
            let exact = f.derivative().eval(z);
            // O(h²) truncation plus cancellation in the quotient
            prop_assert!((fd - exact).norm() <= 1e-7, "{} vs {}", fd, exact);
        }

        #[test]
        fn evaluation_is_linear(
            f in arb_poly(),
            g in arb_poly(),
            a in (-2.0f64..2.0, -2.0f64..2.0),
            b in (-2.0f64..2.0, -2.0f64..2.0),
            z in arb_disk_point(),
        ) {
            let (a, b) = (c(a.0, a.1), c(b.0, b.1));
            let combined = &(&f * a) + &(&g * b);
            let lhs = combined.eval(z);
            let rhs = a * f.eval(z) + b * g.eval(z);
            assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-13);
            assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-13);
        }
    }
}
