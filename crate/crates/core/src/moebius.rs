//! Disk automorphisms `z ↦ (a z + b)/(b̄ z + ā)` with `|a|² − |b|² = 1`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const DEGENERACY_TOL: f64 = 1e-14;
const POLE_TOL: f64 = 1e-14;
const CLASSIFY_TOL: f64 = 1e-12;

/// A Möbius automorphism of the unit disk in canonical normal form.
///
/// The pair `(a, b)` is scaled so that `|a|² − |b|² = 1` and its sign is fixed
/// so that `Re a > 0`, or `Re a = 0` and `Im a > 0`. Two transforms are equal as
/// maps iff their canonical pairs agree.
#[derive(Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Moebius {
    a: Complex64,
    b: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Identity,
    Hyperbolic,
    Parabolic,
    Elliptic,
}

impl Moebius {
    pub const IDENTITY: Moebius = Moebius {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        let det = a.norm_sqr() - b.norm_sqr();
        if !(det > DEGENERACY_TOL) {
            return Err(Error::DegenerateTransform(det));
        }
        let s = det.sqrt().recip();
        Ok(Self::canonical(a * s, b * s))
    }

    /// The hyperbolic transform `(cosh t, sinh t)`, which maps `0` to `tanh t`
    /// and fixes `±1`.
    pub fn hyperbolic(t: f64) -> Self {
        Self::canonical(Complex64::new(t.cosh(), 0.0), Complex64::new(t.sinh(), 0.0))
    }

    /// Rotation `z ↦ e^{iφ} z`.
    pub fn rotation(phi: f64) -> Self {
        Self::canonical(Complex64::from_polar(1.0, phi / 2.0), Complex64::new(0.0, 0.0))
    }

    fn canonical(a: Complex64, b: Complex64) -> Self {
        if a.re < 0.0 || (a.re == 0.0 && a.im < 0.0) {
            Moebius { a: -a, b: -b }
        } else {
            Moebius { a, b }
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    #[inline]
    fn denominator(&self, z: Complex64) -> Complex64 {
        self.b.conj() * z + self.a.conj()
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        let den = self.denominator(z);
        if den.norm() < POLE_TOL {
            return Err(Error::PoleHit(z));
        }
        Ok((self.a * z + self.b) / den)
    }

    /// `g'(z) = 1/(b̄ z + ā)²`.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let den = self.denominator(z);
        if den.norm() < POLE_TOL {
            return Err(Error::PoleHit(z));
        }
        Ok((den * den).inv())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Moebius) -> Moebius {
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        // Renormalise to keep the determinant at one under repeated products.
        let det = a.norm_sqr() - b.norm_sqr();
        let s = det.sqrt().recip();
        Self::canonical(a * s, b * s)
    }

    pub fn inverse(&self) -> Moebius {
        Self::canonical(self.a.conj(), -self.b)
    }

    /// Trace of the normal-form matrix, `2 Re a`.
    pub fn trace(&self) -> f64 {
        2.0 * self.a.re
    }

    pub fn classify(&self) -> Classification {
        if self.approx_eq(&Self::IDENTITY, CLASSIFY_TOL) {
            return Classification::Identity;
        }
        let t = self.trace().abs();
        if t > 2.0 + CLASSIFY_TOL {
            Classification::Hyperbolic
        } else if (t - 2.0).abs() <= CLASSIFY_TOL {
            Classification::Parabolic
        } else {
            Classification::Elliptic
        }
    }

    /// Entrywise comparison of canonical pairs.
    pub fn approx_eq(&self, other: &Moebius, tol: f64) -> bool {
        (self.a - other.a).norm() <= tol && (self.b - other.b).norm() <= tol
    }
}

impl fmt::Debug for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Moebius(a = {}, b = {})", self.a, self.b)
    }
}
