//! Covering maps `𝔷`, the half-domain `Ω₊ = {Im 𝔷 > 0}`, the Cayley-type
//! transform `σ = (1 + i𝔷)/(1 − i𝔷)` and its local inverse `ς`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fuchsian::{fundamental_domain_on_orbit, orbit_enumerate, GroupPresentation, OrbitTruncation};
use crate::{evaluator, Evaluator};

const POLE_TOL: f64 = 1e-300;
const SEED_GRID: usize = 17;
const NEWTON_MAX_ITER: usize = 80;
const INVERSION_TOL: f64 = 1e-10;
const AMBIGUITY_TOL: f64 = 1e-8;

/// A covering map `𝔷 : 𝔻 → ℂ̄ ∖ E` with a simple pole at the origin.
#[derive(Clone)]
pub struct CoveringMap {
    label: String,
    zmap: Evaluator,
    zmap_deriv: Evaluator,
    /// Residue of `𝔷` at its pole at the origin.
    pole_residue: Complex64,
    /// `|(𝔷 b)(0)|`, the normalised value of `𝔷·b` at the origin.
    zb_at_0: f64,
}

impl std::fmt::Debug for CoveringMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoveringMap")
            .field("label", &self.label)
            .field("pole_residue", &self.pole_residue)
            .field("zb_at_0", &self.zb_at_0)
            .finish()
    }
}

impl CoveringMap {
    /// Registers a user-supplied covering map. `b_prime_at_0` is `b'(0)` for
    /// the Green's function the map is paired with, so that
    /// `(𝔷 b)(0) = residue · b'(0)`.
    pub fn new(
        label: impl Into<String>,
        zmap: Evaluator,
        zmap_deriv: Evaluator,
        pole_residue: Complex64,
        b_prime_at_0: Complex64,
    ) -> Result<Self> {
        let zb = (pole_residue * b_prime_at_0).norm();
        if !(zb > 0.0) {
            return Err(Error::NonPositive(zb));
        }
        Ok(Self {
            label: label.into(),
            zmap,
            zmap_deriv,
            pole_residue,
            zb_at_0: zb,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn pole_residue(&self) -> Complex64 {
        self.pole_residue
    }

    pub fn zb_at_0(&self) -> f64 {
        self.zb_at_0
    }

    pub fn zmap(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() < POLE_TOL {
            return Err(Error::PoleHit(z));
        }
        let v = (self.zmap)(z);
        if !v.is_finite() {
            return Err(Error::PoleHit(z));
        }
        Ok(v)
    }

    pub fn zmap_deriv(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() < POLE_TOL {
            return Err(Error::PoleHit(z));
        }
        Ok((self.zmap_deriv)(z))
    }

    /// Unimodular `u` with `(𝔷 · u b)(0) > 0`, given `b'(0)`.
    pub fn normalization_phase(&self, b_prime_at_0: Complex64) -> Complex64 {
        let p = self.pole_residue * b_prime_at_0;
        p.conj() / p.norm()
    }
}

/// The trivial-group covering `𝔷(z) = (z + 1/z)/2` of `ℂ̄ ∖ [−1, 1]`.
pub fn joukowski_fixture() -> CoveringMap {
    CoveringMap {
        label: "joukowski-arc".to_string(),
        zmap: evaluator(|z| (z + z.inv()) * 0.5),
        zmap_deriv: evaluator(|z| (Complex64::new(1.0, 0.0) - (z * z).inv()) * 0.5),
        pole_residue: Complex64::new(0.5, 0.0),
        zb_at_0: 0.5,
    }
}

pub fn in_omega_plus(cov: &CoveringMap, z: Complex64) -> Result<bool> {
    Ok(cov.zmap(z)?.im > 0.0)
}

/// `σ(z) = (1 + i𝔷(z))/(1 − i𝔷(z))`, with `σ = −1` at poles of `𝔷`.
pub fn sigma_eval(cov: &CoveringMap, z: Complex64) -> Result<Complex64> {
    let zz = match cov.zmap(z) {
        Ok(v) => v,
        Err(Error::PoleHit(_)) => return Ok(Complex64::new(-1.0, 0.0)),
        Err(e) => return Err(e),
    };
    Ok(cayley(zz))
}

pub(crate) fn cayley(zz: Complex64) -> Complex64 {
    let iz = Complex64::i() * zz;
    let one = Complex64::new(1.0, 0.0);
    if !zz.is_finite() || zz.norm() > 1e150 {
        return -one;
    }
    (one + iz) / (one - iz)
}

/// Inverse Cayley transform: `𝔷 = −i(λ − 1)/(λ + 1)`.
pub fn cayley_inverse(lambda: Complex64) -> Complex64 {
    -Complex64::i() * (lambda - 1.0) / (lambda + 1.0)
}

/// Preimage search for `σ` restricted to `Ω₊ ∩ ℱ`.
///
/// Holds the orbit used for the depth-`L` fundamental-domain certificate so
/// repeated inversions do not re-enumerate the group.
pub struct Varsigma<'a> {
    cov: &'a CoveringMap,
    orbit: OrbitTruncation,
    seeds: Vec<Complex64>,
}

impl<'a> Varsigma<'a> {
    pub fn new(cov: &'a CoveringMap, group: &GroupPresentation, depth: usize) -> Result<Self> {
        let orbit = orbit_enumerate(group, depth)?;
        let step = 2.0 / (SEED_GRID as f64 - 1.0);
        let mut seeds = Vec::new();
        for i in 0..SEED_GRID {
            for j in 0..SEED_GRID {
                // Offset the grid slightly so no seed lands on the real axis or the origin.
                let s = Complex64::new(-1.0 + (i as f64 + 0.013) * step, -1.0 + (j as f64 + 0.017) * step);
                if s.norm() < 0.995 {
                    seeds.push(s);
                }
            }
        }
        Ok(Self { cov, orbit, seeds })
    }

    fn certified(&self, z: Complex64, lambda: Complex64) -> bool {
        z.norm() < 1.0
            && matches!(in_omega_plus(self.cov, z), Ok(true))
            && fundamental_domain_on_orbit(&self.orbit, z).inside
            && matches!(sigma_eval(self.cov, z), Ok(s) if (s - lambda).norm() <= INVERSION_TOL)
    }

    fn newton(&self, seed: Complex64, target: Complex64) -> Option<Complex64> {
        let mut z = seed;
        let mut res = (self.cov.zmap(z).ok()? - target).norm();
        for _ in 0..NEWTON_MAX_ITER {
            let f = self.cov.zmap(z).ok()? - target;
            let df = self.cov.zmap_deriv(z).ok()?;
            if df.norm() == 0.0 {
                return None;
            }
            let mut step = f / df;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = z - step;
                if cand.norm() < 1.0 {
                    if let Ok(v) = self.cov.zmap(cand) {
                        let r = (v - target).norm();
                        if r < res || r <= 1e-14 * (1.0 + target.norm()) {
                            z = cand;
                            res = r;
                            accepted = true;
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
            if !accepted || step.norm() <= 1e-16 * (1.0 + z.norm()) || res <= 1e-15 * (1.0 + target.norm()) {
                break;
            }
        }
        Some(z)
    }

    /// Returns the certified `z ∈ Ω₊ ∩ ℱ` with `σ(z) = λ`, taking the first
    /// certified Newton root in seed order.
    pub fn invert(&self, lambda: Complex64) -> Result<Complex64> {
        if lambda.norm() >= 1.0 {
            return Err(Error::NotInImage(lambda));
        }
        let target = cayley_inverse(lambda);
        let mut found: Option<Complex64> = None;
        for &seed in &self.seeds {
            let Some(z) = self.newton(seed, target) else { continue };
            if !self.certified(z, lambda) {
                continue;
            }
            match found {
                None => found = Some(z),
                Some(first) if (first - z).norm() > AMBIGUITY_TOL => {
                    return Err(Error::AmbiguousRoot(first, z));
                }
                Some(_) => {}
            }
        }
        found.ok_or(Error::NotInImage(lambda))
    }
}

/// One-shot form of [`Varsigma::invert`].
pub fn varsigma_eval(
    cov: &CoveringMap,
    group: &GroupPresentation,
    lambda: Complex64,
    depth: usize,
) -> Result<Complex64> {
    Varsigma::new(cov, group, depth)?.invert(lambda)
}
