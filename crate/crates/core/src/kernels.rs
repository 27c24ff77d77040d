//! Reproducing kernels of character-automorphic Hardy spaces.
//!
//! A [`HardySpace`] bundles the spectral data `k^α(·,0)`, `k^{αμ}(·,0)`, `c(α)`
//! with a Green's function `b` and a covering map `𝔷`. The Green's function is
//! rescaled by a unimodular constant so that `(𝔷 b)(0) > 0`; every formula
//! below uses that normalised `b`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::covering::CoveringMap;
use crate::error::{Error, Result};
use crate::fuchsian::Character;
use crate::green::{circle_probes, poincare_project, GreenFunction};
use crate::io;
use crate::linalg::{hermitian_condition, CMat};
use crate::{evaluator, Evaluator};

const ORIGIN_TOL: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-9;
const RICHARDSON_STEPS: (f64, f64) = (1e-4, 5e-5);
const RICHARDSON_SPREAD: f64 = 1e-6;
const A_ZERO_TOL: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e10;

/// The pair `k^α(·,0)`, `k^{αμ}(·,0)` and the constant `c(α)`.
#[derive(Clone)]
pub struct SpectralData {
    kappa_alpha: Evaluator,
    kappa_alpha_mu: Evaluator,
    c_alpha: f64,
    alpha: Character,
    label: String,
}

impl std::fmt::Debug for SpectralData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralData")
            .field("label", &self.label)
            .field("c_alpha", &self.c_alpha)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl SpectralData {
    /// Checks `c(α) > 0` and that `k^α(0,0)` is real and positive.
    pub fn new(
        label: impl Into<String>,
        alpha: Character,
        kappa_alpha: Evaluator,
        kappa_alpha_mu: Evaluator,
        c_alpha: f64,
    ) -> Result<Self> {
        if !(c_alpha > 0.0) {
            return Err(Error::NonPositive(c_alpha));
        }
        let k00 = kappa_alpha(Complex64::new(0.0, 0.0));
        if !(k00.re > 0.0) || k00.im.abs() > 1e-10 * k00.re.max(1.0) {
            return Err(Error::NonPositive(k00.re));
        }
        Ok(Self {
            kappa_alpha,
            kappa_alpha_mu,
            c_alpha,
            alpha,
            label: label.into(),
        })
    }

    /// Injects arbitrary evaluators without the diagonal check; the algebraic
    /// identities between the kernel forms hold for any data.
    pub fn unchecked(
        label: impl Into<String>,
        alpha: Character,
        kappa_alpha: Evaluator,
        kappa_alpha_mu: Evaluator,
        c_alpha: f64,
    ) -> Result<Self> {
        if !(c_alpha > 0.0) {
            return Err(Error::NonPositive(c_alpha));
        }
        Ok(Self {
            kappa_alpha,
            kappa_alpha_mu,
            c_alpha,
            alpha,
            label: label.into(),
        })
    }

    pub fn kappa_alpha(&self, z: Complex64) -> Complex64 {
        (self.kappa_alpha)(z)
    }

    pub fn kappa_alpha_mu(&self, z: Complex64) -> Complex64 {
        (self.kappa_alpha_mu)(z)
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    pub fn alpha(&self) -> &Character {
        &self.alpha
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// `c(α) = (𝔷b)(0) / k^{αμ}(0,0)` with the normalised product at the origin.
pub fn c_alpha_compute(cov: &CoveringMap, kappa_alpha_mu_at_0: f64) -> Result<f64> {
    c_alpha_from(cov.zb_at_0(), kappa_alpha_mu_at_0)
}

fn c_alpha_from(zb_at_0: f64, kappa_alpha_mu_at_0: f64) -> Result<f64> {
    if !(kappa_alpha_mu_at_0 > 0.0) {
        return Err(Error::NonPositive(kappa_alpha_mu_at_0));
    }
    if !(zb_at_0 > 0.0) {
        return Err(Error::NonPositive(zb_at_0));
    }
    Ok(zb_at_0 / kappa_alpha_mu_at_0)
}

/// Constant in front of `A^α/(1 − i𝔷)` in the rewritten kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `√2`, which reproduces the structure formula exactly.
    Sqrt2,
    /// The constant `2`; off by a factor of two.
    #[serde(rename = "2")]
    Two,
}

impl Normalization {
    pub fn factor(self) -> f64 {
        match self {
            Normalization::Sqrt2 => SQRT_2,
            Normalization::Two => 2.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HardySpace {
    spectral: SpectralData,
    green: GreenFunction,
    cov: CoveringMap,
    phase: Complex64,
}

impl HardySpace {
    pub fn new(spectral: SpectralData, green: GreenFunction, cov: CoveringMap) -> Result<Self> {
        if green.base_point().norm() > 0.0 {
            return Err(Error::InvalidInput(
                "the structure formula uses b based at the origin".into(),
            ));
        }
        let phase = cov.normalization_phase(green.derivative(Complex64::new(0.0, 0.0)));
        Ok(Self {
            spectral,
            green,
            cov,
            phase,
        })
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn green(&self) -> &GreenFunction {
        &self.green
    }

    pub fn cov(&self) -> &CoveringMap {
        &self.cov
    }

    /// Unimodular factor applied to `b` so that `(𝔷b)(0) > 0`.
    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    /// The normalised Green's function.
    pub fn b(&self, z: Complex64) -> Complex64 {
        self.phase * self.green.eval(z)
    }

    fn zb_at_0(&self) -> f64 {
        self.cov.zb_at_0()
    }

    fn near_origin(z: Complex64) -> bool {
        z.norm() < ORIGIN_TOL
    }

    fn structure_raw(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        let c = self.spectral.c_alpha;
        let zb = self.zb_at_0();
        let zero = Complex64::new(0.0, 0.0);
        match (Self::near_origin(z), Self::near_origin(w)) {
            (true, _) => {
                let gw = if Self::near_origin(w) {
                    self.spectral.kappa_alpha(zero)
                } else {
                    self.spectral.kappa_alpha(w)
                };
                Ok(self.spectral.kappa_alpha_mu(zero) * gw.conj() * (c / zb))
            }
            (false, true) => Ok(self.spectral.kappa_alpha(z) * self.spectral.kappa_alpha_mu(zero).conj() * (c / zb)),
            (false, false) => {
                let den = self.cov.zmap(z)? - self.cov.zmap(w)?.conj();
                if den.norm() < SINGULAR_TOL {
                    return Err(Error::UnresolvedSingularity(den.norm()));
                }
                let fz = self.spectral.kappa_alpha_mu(z) / self.b(z);
                let fw = self.spectral.kappa_alpha_mu(w) / self.b(w);
                let num = fz * self.spectral.kappa_alpha(w).conj() - fw.conj() * self.spectral.kappa_alpha(z);
                Ok(num * c / den)
            }
        }
    }

    /// `k^α(z, w)` from the structure formula
    /// `c(α)[(k^{αμ}(z,0)/b(z)) k^α(w,0)* − (k^{αμ}(w,0)/b(w))* k^α(z,0)]/(𝔷(z) − 𝔷(w)*)`.
    pub fn kernel_structure(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        with_richardson(z, w, |z, w| self.structure_raw(z, w))
    }

    /// `k^{αμ}(z,0) + i k^α(z,0) b(z)`, i.e. `A^α(z) b(z)/√(c/2)` without the pole.
    pub fn a_numerator(&self, z: Complex64) -> Complex64 {
        self.spectral.kappa_alpha_mu(z) + Complex64::i() * self.spectral.kappa_alpha(z) * self.b(z)
    }

    fn b_numerator(&self, z: Complex64) -> Complex64 {
        self.spectral.kappa_alpha_mu(z) - Complex64::i() * self.spectral.kappa_alpha(z) * self.b(z)
    }

    /// `A^α(z), B^α(z) = √(c/2)(k^{αμ}(z,0)/b(z) ± i k^α(z,0))`. Both have a pole at
    /// the origin.
    pub fn ab(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let bz = self.b(z);
        if bz.norm() < ORIGIN_TOL {
            return Err(Error::PoleHit(z));
        }
        let s = (self.spectral.c_alpha / 2.0).sqrt();
        let f = self.spectral.kappa_alpha_mu(z) / bz;
        let g = self.spectral.kappa_alpha(z);
        Ok((s * (f + Complex64::i() * g), s * (f - Complex64::i() * g)))
    }

    /// `S_α = B^α/A^α`, evaluated in pole-free form.
    pub fn s_alpha(&self, z: Complex64) -> Result<Complex64> {
        let n = self.a_numerator(z);
        let bz = self.b(z);
        let s = (self.spectral.c_alpha / 2.0).sqrt();
        if bz.norm() >= ORIGIN_TOL && s * n.norm() / bz.norm() <= A_ZERO_TOL {
            return Err(Error::AZero(z));
        }
        if n.norm() == 0.0 {
            return Err(Error::AZero(z));
        }
        Ok(self.b_numerator(z) / n)
    }

    /// `A^{other}(z)/A^{self}(z)`, finite at the origin.
    pub fn a_ratio(&self, other: &HardySpace, z: Complex64) -> Result<Complex64> {
        let num = other.a_numerator(z);
        let den = self.a_numerator(z);
        if den.norm() == 0.0 {
            return Err(Error::AZero(z));
        }
        let scale = (other.spectral.c_alpha / self.spectral.c_alpha).sqrt();
        Ok(num / den * scale * (self.phase / other.phase))
    }

    /// `σ(z)` for this space's covering map.
    pub fn sigma(&self, z: Complex64) -> Result<Complex64> {
        crate::covering::sigma_eval(&self.cov, z)
    }

    /// `factor · A^α(z)/(1 − i𝔷(z))` with its finite value at the origin.
    pub fn weight(&self, z: Complex64, norm: Normalization) -> Result<Complex64> {
        let s = norm.factor() * (self.spectral.c_alpha / 2.0).sqrt();
        if Self::near_origin(z) {
            let k0 = self.spectral.kappa_alpha_mu(Complex64::new(0.0, 0.0));
            return Ok(Complex64::i() * s * k0 / self.zb_at_0());
        }
        let bz = self.b(z);
        let zb = self.cov.zmap(z)? * bz;
        let den = bz - Complex64::i() * zb;
        if den.norm() == 0.0 {
            return Err(Error::PoleHit(z));
        }
        Ok(s * self.a_numerator(z) / den)
    }

    fn rewritten_raw(&self, z: Complex64, w: Complex64, norm: Normalization) -> Result<Complex64> {
        let sz = self.s_alpha(z)?;
        let sw = self.s_alpha(w)?;
        let den = Complex64::new(1.0, 0.0) - self.sigma(z)? * self.sigma(w)?.conj();
        if den.norm() < SINGULAR_TOL {
            return Err(Error::UnresolvedSingularity(den.norm()));
        }
        let middle = (Complex64::new(1.0, 0.0) - sz * sw.conj()) / den;
        Ok(self.weight(z, norm)? * middle * self.weight(w, norm)?.conj())
    }

    /// The de Branges–Rovnyak form
    /// `[√2 A(z)/(1−i𝔷(z))]·[1 − S(z)S(w)*]/[1 − σ(z)σ(w)*]·[√2 A(w)/(1−i𝔷(w))]*`.
    pub fn kernel_rewritten(&self, z: Complex64, w: Complex64, norm: Normalization) -> Result<Complex64> {
        with_richardson(z, w, |z, w| self.rewritten_raw(z, w, norm))
    }

    /// Kernel grid as CSV: `re z, im z, re w, im w, re k, im k`.
    pub fn kernel_csv(&self, points: &[Complex64]) -> Result<String> {
        let mut rows = Vec::with_capacity(points.len() * points.len());
        for &z in points {
            for &w in points {
                let k = self.kernel_structure(z, w)?;
                let mut row = Vec::with_capacity(6);
                row.extend(io::complex_fields(z));
                row.extend(io::complex_fields(w));
                row.extend(io::complex_fields(k));
                rows.push(row);
            }
        }
        Ok(io::csv_string(&["re_z", "im_z", "re_w", "im_w", "re_k", "im_k"], rows))
    }
}

/// Evaluates `raw`, falling back to two-point Richardson extrapolation along
/// `z + εδ`, `δ = (1+i)/√2`, when the denominator is numerically singular.
///
/// The extrapolation is repeated for the rotations `iδ, −δ, −iδ` and averaged.
/// Both kernel forms are holomorphic in `z`, so the average cancels every
/// Taylor term below `ε⁴`. Opposite directions share the `ε²` error term, so
/// their spread measures `O(ε³)` and is the acceptance test.
fn with_richardson<F>(z: Complex64, w: Complex64, raw: F) -> Result<Complex64>
where
    F: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    match raw(z, w) {
        Err(Error::UnresolvedSingularity(_)) => {
            let delta = Complex64::new(1.0, 1.0) / SQRT_2;
            let extrapolate = |d: Complex64| -> Result<Complex64> {
                let k1 = raw(z + d * RICHARDSON_STEPS.0, w)?;
                let k2 = raw(z + d * RICHARDSON_STEPS.1, w)?;
                Ok(k2 * 2.0 - k1)
            };
            let i = Complex64::i();
            let r = [
                extrapolate(delta)?,
                extrapolate(i * delta)?,
                extrapolate(-delta)?,
                extrapolate(-i * delta)?,
            ];
            let spread = (r[0] - r[2]).norm().max((r[1] - r[3]).norm());
            if spread > RICHARDSON_SPREAD {
                return Err(Error::UnresolvedSingularity(spread));
            }
            Ok((r[0] + r[1] + r[2] + r[3]) / 4.0)
        }
        other => other,
    }
}

/// Szegő data for the trivial group: `k(·,0) ≡ 1`, `c = 1/2`.
pub fn spectral_oracle_trivial() -> SpectralData {
    let one = evaluator(|_| Complex64::new(1.0, 0.0));
    SpectralData::new("szego-fixture", Character::trivial(0), one.clone(), one, 0.5).expect("fixture data is valid")
}

/// Result of [`spectral_oracle_projection`].
#[derive(Clone, Debug)]
pub struct ProjectionOracle {
    pub spectral: SpectralData,
    /// Character of `b` on the generators, estimated from probes.
    pub mu: Character,
    pub condition_alpha: f64,
    pub condition_alpha_mu: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub label: String,
    pub condition_alpha: f64,
    pub condition_alpha_mu: f64,
    pub c_alpha: f64,
    #[serde(with = "io::complex")]
    pub kappa_alpha_at_0: Complex64,
}

impl ProjectionOracle {
    pub fn report(&self) -> ConditionReport {
        ConditionReport {
            label: self.spectral.label.clone(),
            condition_alpha: self.condition_alpha,
            condition_alpha_mu: self.condition_alpha_mu,
            c_alpha: self.spectral.c_alpha,
            kappa_alpha_at_0: self.spectral.kappa_alpha(Complex64::new(0.0, 0.0)),
        }
    }
}

struct ProjectedKernel {
    coefficients: Vec<Complex64>,
    condition: f64,
}

fn project_szego(
    green: &GreenFunction,
    chi: &Character,
    theta: &Evaluator,
    order: usize,
    nodes: &[Complex64],
) -> Result<ProjectedKernel> {
    let q = nodes.len();
    let mut phi = CMat::zeros(q, order);
    for (j, &z) in nodes.iter().enumerate() {
        for m in 0..order {
            let h = move |w: Complex64| w.powu(m as u32);
            phi[(j, m)] = poincare_project(green, chi, theta.as_ref(), &h, z)?;
        }
    }
    let inv_q = Complex64::new(1.0 / q as f64, 0.0);
    let gram = phi.adjoint() * &phi * inv_q;
    let rhs = phi.adjoint() * nalgebra::DVector::from_element(q, Complex64::new(1.0, 0.0)) * inv_q;
    let condition = hermitian_condition(&gram);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let coefficients = gram
        .cholesky()
        .ok_or(Error::IllConditioned(condition))?
        .solve(&rhs)
        .iter()
        .cloned()
        .collect();
    Ok(ProjectedKernel {
        coefficients,
        condition,
    })
}

fn projected_evaluator(green: GreenFunction, chi: Character, theta: Evaluator, coeffs: Vec<Complex64>) -> Evaluator {
    evaluator(move |z| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &c) in coeffs.iter().enumerate() {
            let h = move |w: Complex64| w.powu(m as u32);
            match poincare_project(&green, &chi, theta.as_ref(), &h, z) {
                Ok(v) => acc += c * v,
                Err(_) => return Complex64::new(f64::NAN, f64::NAN),
            }
        }
        acc
    })
}

/// Approximates `k^α(·,0)` and `k^{αμ}(·,0)` by projecting the Szegő kernel
/// at the origin onto the span of Poincaré projections of `1, z, …, z^{M−1}`,
/// with inner products from near-boundary quadrature on `Q` nodes.
///
/// Experimental for non-trivial groups: `θ` is supplied by the caller and the
/// result carries the basis condition numbers.
pub fn spectral_oracle_projection(
    green: &GreenFunction,
    alpha: &Character,
    theta: Evaluator,
    order: usize,
    quadrature: usize,
    zb_at_0: f64,
) -> Result<ProjectionOracle> {
    if order == 0 {
        return Err(Error::InvalidInput("basis order must be positive".into()));
    }
    if quadrature < 1024 {
        return Err(Error::InvalidQuadrature(quadrature));
    }
    let mu = if green.group().rank() == 0 {
        Character::trivial(0)
    } else {
        green.generator_character(&circle_probes(8, 0.3, 0.1))?
    };
    let alpha_mu = alpha.mul(&mu)?;
    let nodes = circle_probes(quadrature, 1.0 - 1e-6, std::f64::consts::PI / quadrature as f64);
    let ka = project_szego(green, alpha, &theta, order, &nodes)?;
    let kam = project_szego(green, &alpha_mu, &theta, order, &nodes)?;
    let kappa_alpha = projected_evaluator(green.clone(), alpha.clone(), theta.clone(), ka.coefficients);
    let kappa_alpha_mu = projected_evaluator(green.clone(), alpha_mu, theta, kam.coefficients);
    let kam0 = kappa_alpha_mu(Complex64::new(0.0, 0.0));
    let c = c_alpha_from(zb_at_0, kam0.re)?;
    let spectral = SpectralData::new("projection-oracle", alpha.clone(), kappa_alpha, kappa_alpha_mu, c)?;
    Ok(ProjectionOracle {
        spectral,
        mu,
        condition_alpha: ka.condition,
        condition_alpha_mu: kam.condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{in_omega_plus, joukowski_fixture};
    use crate::fuchsian::GroupPresentation;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fixture() -> HardySpace {
        let green = GreenFunction::at_origin(&GroupPresentation::trivial(), 0).unwrap();
        HardySpace::new(spectral_oracle_trivial(), green, joukowski_fixture()).unwrap()
    }

    fn szego(z: Complex64, w: Complex64) -> Complex64 {
        (Complex64::new(1.0, 0.0) - z * w.conj()).inv()
    }

    #[test]
    fn c_alpha_examples() {
        let cov = joukowski_fixture();
        assert_eq!(c_alpha_compute(&cov, 1.0).unwrap(), 0.5);
        assert_eq!(c_alpha_compute(&cov, 2.0).unwrap(), 0.25);
        assert!(matches!(c_alpha_compute(&cov, 0.0), Err(Error::NonPositive(_))));
        assert!(matches!(c_alpha_compute(&cov, -1.0), Err(Error::NonPositive(_))));
    }

    #[test]
    fn normalization_turns_b_into_z() {
        let h = fixture();
        assert_eq!(h.phase(), c(-1.0, 0.0));
        assert_eq!(h.b(c(0.3, 0.2)), c(0.3, 0.2));
    }

    #[test]
    fn fixture_kernel_is_szego() {
        let h = fixture();
        let k = h.kernel_structure(c(0.5, 0.0), c(0.2, 0.0)).unwrap();
        assert!((k - c(1.0 / 0.9, 0.0)).norm() < 1e-12);
        for z in [c(0.3, 0.4), c(-0.7, 0.1), c(0.0, -0.5)] {
            assert!((h.kernel_structure(z, c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
            assert!((h.kernel_structure(c(0.0, 0.0), z).unwrap() - 1.0).norm() < 1e-14);
            let diag = h.kernel_structure(z, z).unwrap();
            assert!(diag.im.abs() < 1e-12);
        }
        let (z, w) = (c(0.5, -0.2), c(0.1, -0.3));
        let r = h.kernel_rewritten(z, w, Normalization::Sqrt2).unwrap();
        assert!((r - szego(z, w)).norm() < 1e-10);
    }

    #[test]
    fn richardson_handles_conjugate_points() {
        let h = fixture();
        let z = c(0.4, 0.3);
        let k = h.kernel_structure(z, z.conj()).unwrap();
        assert!((k - szego(z, z.conj())).norm() < 1e-10);
        for x in [0.6, 0.9, -0.3] {
            let real = c(x, 0.0);
            let k = h.kernel_structure(real, real).unwrap();
            assert!((k - szego(real, real)).norm() < 1e-10);
            let r = h.kernel_rewritten(real, real, Normalization::Sqrt2).unwrap();
            assert!((r - szego(real, real)).norm() < 1e-9);
        }
    }

    #[test]
    fn ab_and_s_alpha_fixture_values() {
        let h = fixture();
        let z = c(0.0, -0.5);
        let (a, b) = h.ab(z).unwrap();
        assert!((a - c(0.0, 1.5)).norm() < 1e-14);
        assert!((b - c(0.0, 0.5)).norm() < 1e-14);
        assert!((h.s_alpha(z).unwrap() - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
        assert!(matches!(h.ab(c(0.0, 0.0)), Err(Error::PoleHit(_))));
        assert_eq!(h.s_alpha(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        // S_α is unimodular where Im 𝔷 = 0.
        for x in [0.2, -0.5, 0.9] {
            assert!((h.s_alpha(c(x, 0.0)).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polarization_identity() {
        let h = fixture();
        let pts = [c(0.3, -0.4), c(-0.5, 0.2), c(0.1, 0.7)];
        for &z in &pts {
            for &w in &pts {
                let (az, bz) = h.ab(z).unwrap();
                let (aw, bw) = h.ab(w).unwrap();
                let lhs = az * aw.conj() - bz * bw.conj();
                let f = |x: Complex64| h.spectral().kappa_alpha_mu(x) / h.b(x);
                let g = |x: Complex64| h.spectral().kappa_alpha(x);
                let rhs = Complex64::i() * 0.5 * (g(z) * f(w).conj() - f(z) * g(w).conj());
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn s_alpha_contractive_on_omega_plus() {
        let h = fixture();
        let cov = joukowski_fixture();
        for k in 1..40 {
            let z = Complex64::from_polar(0.02 * k as f64 + 0.1, -0.07 * k as f64);
            if in_omega_plus(&cov, z).unwrap() {
                assert!(h.s_alpha(z).unwrap().norm() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn weight_limit_at_origin() {
        let h = fixture();
        let w0 = h.weight(c(0.0, 0.0), Normalization::Sqrt2).unwrap();
        assert!((w0 - c(0.0, SQRT_2)).norm() < 1e-14);
        let near = h.weight(c(1e-7, 1e-7), Normalization::Sqrt2).unwrap();
        assert!((near - w0).norm() < 1e-6);
    }

    #[test]
    fn constant_two_doubles_the_kernel() {
        let h = fixture();
        let (z, w) = (c(0.2, -0.6), c(-0.4, -0.1));
        let good = h.kernel_rewritten(z, w, Normalization::Sqrt2).unwrap();
        let bad = h.kernel_rewritten(z, w, Normalization::Two).unwrap();
        assert!((bad / good - 2.0).norm() < 1e-12);
    }

    #[test]
    fn projection_oracle_trivial_group() {
        let green = GreenFunction::at_origin(&GroupPresentation::trivial(), 0).unwrap();
        let one = evaluator(|_| c(1.0, 0.0));
        let oracle = spectral_oracle_projection(&green, &Character::trivial(0), one, 6, 1024, 0.5).unwrap();
        for z in [c(0.0, 0.0), c(0.3, -0.2), c(-0.6, 0.5)] {
            assert!((oracle.spectral.kappa_alpha(z) - 1.0).norm() < 1e-8);
            assert!((oracle.spectral.kappa_alpha_mu(z) - 1.0).norm() < 1e-8);
        }
        assert!((oracle.spectral.c_alpha() - 0.5).abs() < 1e-8);
        assert!(oracle.condition_alpha < 1.0 + 1e-4);
        assert!(matches!(
            spectral_oracle_projection(&green, &Character::trivial(0), evaluator(|_| c(1.0, 0.0)), 4, 512, 0.5),
            Err(Error::InvalidQuadrature(512))
        ));
    }
}
