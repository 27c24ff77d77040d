//! Truncated Green's-function Blaschke products over a group orbit, their
//! characters, and the Poincaré series projection.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuchsian::{orbit_enumerate, shell_statistics, Character, GroupPresentation, OrbitTruncation, Word};
use crate::io;
use crate::Evaluator;

const ZERO_POINT_TOL: f64 = 1e-14;
const PROBE_ZERO_TOL: f64 = 1e-6;
const CRITICAL_TOL: f64 = 1e-10;
const NEAR_ORIGIN: f64 = 1e-8;
const NEAR_BOUNDARY_RADIUS: f64 = 1.0 - 1e-6;

/// `b_ξ(z) = ∏ (γ(ξ) − z)/(1 − conj(γ(ξ)) z) · |γ(ξ)|/γ(ξ)` over the enumerated
/// orbit, with the factor for `γ(ξ) = 0` taken as `−z`.
#[derive(Clone)]
pub struct GreenFunction {
    group: GroupPresentation,
    base_point: Complex64,
    truncation: Arc<OrbitTruncation>,
    /// `γ_w(ξ)` in word order.
    zeros: Arc<Vec<Complex64>>,
    theta: Option<Evaluator>,
    /// Per-length sums of `1 − |γ(ξ)|`.
    shell_sums: Arc<Vec<f64>>,
    tail_bound: f64,
}

impl std::fmt::Debug for GreenFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenFunction")
            .field("rank", &self.group.rank())
            .field("base_point", &self.base_point)
            .field("depth", &self.truncation.max_word_length)
            .field("tail_bound", &self.tail_bound)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacterEstimate {
    #[serde(with = "io::complex")]
    pub value: Complex64,
    /// Largest deviation of a single probe ratio from `value`.
    pub deviation: f64,
}

impl GreenFunction {
    pub fn new(group: &GroupPresentation, base_point: Complex64, depth: usize) -> Result<Self> {
        if base_point.norm() >= 1.0 {
            return Err(Error::OutsideDisk(base_point));
        }
        let truncation = orbit_enumerate(group, depth)?;
        let zeros: Vec<Complex64> = truncation
            .elements
            .iter()
            .map(|w| w.transform().apply(base_point).expect("disk point"))
            .collect();
        let (shell_sums, tail_bound) = shell_statistics(&truncation.elements, depth, |w| {
            1.0 - w.transform().apply(base_point).expect("disk point").norm()
        });
        Ok(Self {
            group: group.clone(),
            base_point,
            truncation: Arc::new(truncation),
            zeros: Arc::new(zeros),
            theta: None,
            shell_sums: Arc::new(shell_sums),
            tail_bound,
        })
    }

    /// Green's function with respect to the origin.
    pub fn at_origin(group: &GroupPresentation, depth: usize) -> Result<Self> {
        Self::new(group, Complex64::new(0.0, 0.0), depth)
    }

    pub fn with_theta(mut self, theta: Evaluator) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn group(&self) -> &GroupPresentation {
        &self.group
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    pub fn truncation(&self) -> &OrbitTruncation {
        &self.truncation
    }

    pub fn depth(&self) -> usize {
        self.truncation.max_word_length
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn theta(&self) -> Option<&Evaluator> {
        self.theta.as_ref()
    }

    /// Extrapolated `Σ (1 − |γ(ξ)|)` over the factors left out of the product.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Extrapolated `Σ (1 − |γ_w(ξ)|)` over all words longer than `depth`,
    /// i.e. the tail of the product truncated at `depth ≤ L`.
    ///
    /// `b(γ_w z)/b(z)` regroups the factors of the depth-`L` product so that
    /// only words of length `≤ L − |w|` are guaranteed to pair up, which makes
    /// `tail_beyond(L − |w|)` the scale of the automorphy defect for `w`.
    pub fn tail_beyond(&self, depth: usize) -> f64 {
        self.shell_sums.iter().skip(depth + 1).sum::<f64>() + self.tail_bound
    }

    #[inline]
    fn factor(a: Complex64, z: Complex64) -> (Complex64, Complex64) {
        if a.norm() < ZERO_POINT_TOL {
            return (-z, Complex64::new(-1.0, 0.0));
        }
        let u = a.norm() / a;
        let den = Complex64::new(1.0, 0.0) - a.conj() * z;
        let value = (a - z) / den * u;
        let deriv = u * (a.norm_sqr() - 1.0) / (den * den);
        (value, deriv)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &a| acc * Self::factor(a, z).0)
    }

    /// `b(z)` with every `−z` factor (zero of `b` at the origin) replaced by `−1`;
    /// equals `b(z)/z` when `ξ` is the origin.
    pub fn eval_over_z(&self, z: Complex64) -> Complex64 {
        self.zeros.iter().fold(Complex64::new(1.0, 0.0), |acc, &a| {
            if a.norm() < ZERO_POINT_TOL {
                -acc
            } else {
                acc * Self::factor(a, z).0
            }
        })
    }

    /// Exact derivative of the truncated product by the product rule.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let parts: Vec<(Complex64, Complex64)> = self.zeros.iter().map(|&a| Self::factor(a, z)).collect();
        let n = parts.len();
        let mut suffix = vec![Complex64::new(1.0, 0.0); n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] * parts[k].0;
        }
        let mut prefix = Complex64::new(1.0, 0.0);
        let mut total = Complex64::new(0.0, 0.0);
        for k in 0..n {
            total += prefix * parts[k].1 * suffix[k + 1];
            prefix *= parts[k].0;
        }
        total
    }

    /// Estimates `μ(w) = b(γ_w(z))/b(z)` from probe points.
    pub fn character(&self, w: &Word, probes: &[Complex64]) -> Result<CharacterEstimate> {
        let ratios: Vec<Complex64> = probes
            .iter()
            .filter_map(|&z| {
                let bz = self.eval(z);
                if bz.norm() <= PROBE_ZERO_TOL {
                    return None;
                }
                let gz = w.transform().apply(z).ok()?;
                Some(self.eval(gz) / bz)
            })
            .collect();
        if ratios.is_empty() {
            return Err(Error::ProbeNearZero);
        }
        let mean: Complex64 = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
        let value = mean / mean.norm();
        let deviation = ratios.iter().map(|r| (r - value).norm()).fold(0.0, f64::max);
        Ok(CharacterEstimate { value, deviation })
    }

    /// Character of `b` on the generators, estimated from the given probes.
    pub fn generator_character(&self, probes: &[Complex64]) -> Result<Character> {
        let values = (0..self.group.rank())
            .map(|k| {
                let w = Word::from_letters(&self.group, &[crate::fuchsian::Letter::new(k, false)])?;
                Ok(self.character(&w, probes)?.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Character::new(values)
    }

    /// `max_z |b(γ_w(z)) − μ(w) b(z)|` over the probes.
    pub fn automorphy_residual(&self, w: &Word, mu: Complex64, probes: &[Complex64]) -> f64 {
        probes
            .iter()
            .map(|&z| {
                let gz = w.transform().apply(z).expect("disk point");
                (self.eval(gz) - mu * self.eval(z)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// CSV rows `re z, im z, re b, im b, re b', im b'` for the given points.
    pub fn grid_csv(&self, points: &[Complex64]) -> String {
        io::csv_string(
            &["re_z", "im_z", "re_b", "im_b", "re_db", "im_db"],
            points.iter().map(|&z| {
                let mut row = Vec::with_capacity(6);
                row.extend(io::complex_fields(z));
                row.extend(io::complex_fields(self.eval(z)));
                row.extend(io::complex_fields(self.derivative(z)));
                row
            }),
        )
    }

    /// Character table over all enumerated words of length `≤ max_len`.
    pub fn character_table(&self, max_len: usize, probes: &[Complex64]) -> Result<Vec<CharacterRow>> {
        self.truncation
            .elements
            .iter()
            .filter(|w| w.len() <= max_len)
            .map(|w| {
                let est = self.character(w, probes)?;
                Ok(CharacterRow {
                    word: w.to_string(),
                    mu: est.value,
                    residual: self.automorphy_residual(w, est.value, probes),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterRow {
    pub word: String,
    #[serde(with = "io::complex")]
    pub mu: Complex64,
    pub residual: f64,
}

/// Evenly spaced probes on a circle of the given radius.
pub fn circle_probes(count: usize, radius: f64, phase: f64) -> Vec<Complex64> {
    (0..count)
        .map(|j| Complex64::from_polar(radius, phase + std::f64::consts::TAU * j as f64 / count as f64))
        .collect()
}

/// The Poincaré series
/// `(b(z)/b'(z)) Σ_w conj(α(γ_w)) θ(γ_w z) h(γ_w z) γ_w'(z)/γ_w(z)`
/// summed over the orbit truncation of `green` (which must be based at the
/// origin) in length-lexicographic order.
pub fn poincare_project(
    green: &GreenFunction,
    alpha: &Character,
    theta: &dyn Fn(Complex64) -> Complex64,
    h: &dyn Fn(Complex64) -> Complex64,
    z: Complex64,
) -> Result<Complex64> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideDisk(z));
    }
    if alpha.rank() != green.group().rank() {
        return Err(Error::ArityMismatch {
            expected: green.group().rank(),
            found: alpha.rank(),
        });
    }
    if green.base_point().norm() > 0.0 {
        return Err(Error::InvalidInput(
            "Poincaré projection needs b based at the origin".into(),
        ));
    }
    let db = green.derivative(z);
    if db.norm() <= CRITICAL_TOL {
        return Err(Error::NearCriticalPoint(db.norm()));
    }
    let mut tail = Complex64::new(0.0, 0.0);
    for w in green.truncation().elements.iter().skip(1) {
        let g = w.transform();
        let gz = g.apply(z)?;
        if gz.norm() < 1e-14 {
            return Err(Error::PoleInTerm(w.to_string()));
        }
        tail += alpha.eval(w)?.conj() * theta(gz) * h(gz) * g.derivative(z)? / gz;
    }
    let identity_term = theta(z) * h(z);
    if z.norm() < NEAR_ORIGIN {
        // b(z)/z stays finite at the origin, so combine it with the ι term.
        Ok(identity_term * green.eval_over_z(z) / db + green.eval(z) / db * tail)
    } else {
        Ok(green.eval(z) / db * (identity_term / z + tail))
    }
}

/// `sqrt((1/Q) Σ |f(r e^{2πij/Q})|²)` at `r = 1 − 10⁻⁶`.
pub fn boundary_norm_h2(f: &dyn Fn(Complex64) -> Complex64, q: usize) -> Result<f64> {
    if q < 64 || !q.is_power_of_two() {
        return Err(Error::InvalidQuadrature(q));
    }
    let sum: f64 = circle_probes(q, NEAR_BOUNDARY_RADIUS, 0.0)
        .into_iter()
        .map(|z| f(z).norm_sqr())
        .sum();
    Ok((sum / q as f64).sqrt())
}
