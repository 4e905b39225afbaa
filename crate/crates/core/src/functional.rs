//! Linear functionals on `A^p` represented by a polynomial kernel.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::quadrature::{ap_norm, hp_norm, DiskGrid, Exponent};
use crate::{Error, Poly, Result, C64};

/// `φ(f) = ∫_D f·conj(g) dσ` acting on `A^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelFunctional {
    kernel: Poly,
    exponent: Exponent,
}

impl KernelFunctional {
    pub fn new(kernel: Poly, exponent: Exponent) -> Result<Self> {
        if kernel.is_zero() {
            return Err(Error::ZeroKernel);
        }
        Ok(Self { kernel, exponent })
    }

    pub fn kernel(&self) -> &Poly {
        &self.kernel
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    /// Exact pairing `Σ f_k·conj(g_k)/(k+1)` from the moments
    /// `∫ z^a conj(z)^b dσ = δ_ab/(a+1)`.
    pub fn apply(&self, f: &Poly) -> C64 {
        f.coeffs()
            .iter()
            .zip(self.kernel.coeffs())
            .enumerate()
            .map(|(k, (a, b))| a * b.conj() / (k + 1) as f64)
            .sum()
    }

    /// `φ(z^j)`.
    pub fn apply_monomial(&self, j: usize) -> C64 {
        self.kernel.coeff(j).conj() / (j + 1) as f64
    }

    /// `‖g‖_{H^q}`.
    pub fn kernel_hq_norm(&self) -> f64 {
        hp_norm(&self.kernel, self.exponent.conjugate())
    }

    /// `‖g‖_{A^q}` on a grid built for `deg g` and exponent `q`.
    pub fn kernel_aq_norm(&self, grid: &DiskGrid) -> f64 {
        ap_norm(&self.kernel, self.exponent.conjugate(), grid)
    }

    /// Same exponent, kernel replaced.
    pub fn with_kernel(&self, kernel: Poly) -> Result<Self> {
        Self::new(kernel, self.exponent)
    }
}

#[derive(Serialize, Deserialize)]
struct KernelFunctionalRepr {
    p: f64,
    g: Poly,
}

impl Serialize for KernelFunctional {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        KernelFunctionalRepr {
            p: self.exponent.p(),
            g: self.kernel.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KernelFunctional {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = KernelFunctionalRepr::deserialize(deserializer)?;
        let exponent = Exponent::new(repr.p).map_err(D::Error::custom)?;
        KernelFunctional::new(repr.g, exponent).map_err(D::Error::custom)
    }
}
