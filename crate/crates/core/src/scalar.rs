//! Scalar abstraction: every operation in this crate is defined over the real
//! field `f64` and the complex field `Complex<f64>`; adjoints are conjugate
//! transposes in both cases.

use nalgebra::ComplexField;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Tag selecting the scalar field of a value, used by the JSON formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

impl std::fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarKind::Real => write!(f, "real"),
            ScalarKind::Complex => write!(f, "complex"),
        }
    }
}

/// Double-precision scalar field: `f64` or `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    const KIND: ScalarKind;

    /// Draw a standard Gaussian sample (each real component is N(0,1)).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Build a scalar from a `(re, im)` pair. Returns `None` if the imaginary
    /// part is nonzero but the field is real.
    fn from_re_im(re: f64, im: f64) -> Option<Self>;

    /// Decompose into `(re, im)`.
    fn re_im(self) -> (f64, f64);
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn from_re_im(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }

    fn re_im(self) -> (f64, f64) {
        (self, 0.0)
    }
}

impl Scalar for Complex64 {
    const KIND: ScalarKind = ScalarKind::Complex;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    }

    fn from_re_im(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }

    fn re_im(self) -> (f64, f64) {
        (self.re, self.im)
    }
}
