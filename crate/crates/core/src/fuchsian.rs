//! Free Fuchsian groups on hyperbolic generators: reduced words, orbit
//! enumeration, convergence-type estimates, characters and depth-certified
//! membership in the normal fundamental domain.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moebius::{Classification, Moebius};

/// Default cap on the number of enumerated group elements.
pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

const GENERATOR_EQ_TOL: f64 = 1e-10;
const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupPresentation {
    generators: Vec<Moebius>,
}

impl GroupPresentation {
    /// Validates a free presentation: every generator hyperbolic, no generator
    /// equal to another one or to another one's inverse.
    pub fn new(generators: Vec<Moebius>) -> Result<Self> {
        for (k, g) in generators.iter().enumerate() {
            if g.classify() != Classification::Hyperbolic {
                return Err(Error::NotHyperbolic(k));
            }
        }
        for i in 0..generators.len() {
            for j in (i + 1)..generators.len() {
                let (g, h) = (&generators[i], &generators[j]);
                if g.approx_eq(h, GENERATOR_EQ_TOL) || g.approx_eq(&h.inverse(), GENERATOR_EQ_TOL) {
                    return Err(Error::DuplicateGenerator(i, j));
                }
            }
        }
        Ok(Self { generators })
    }

    pub fn trivial() -> Self {
        Self { generators: Vec::new() }
    }

    /// The cyclic group generated by `(cosh t, sinh t)`.
    pub fn cyclic_hyperbolic(t: f64) -> Self {
        Self::new(vec![Moebius::hyperbolic(t)]).expect("hyperbolic generator")
    }

    pub fn generators(&self) -> &[Moebius] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    fn letter_transform(&self, l: Letter) -> Moebius {
        let g = self.generators[l.generator];
        if l.inverse {
            g.inverse()
        } else {
            g
        }
    }

    /// Number of reduced words of length `≤ depth`: `1 + Σ 2n(2n−1)^{ℓ−1}`.
    pub fn word_count(&self, depth: usize) -> u128 {
        let n = self.rank() as u128;
        if n == 0 {
            return 1;
        }
        let mut total: u128 = 1;
        let mut shell: u128 = 2 * n;
        for _ in 0..depth {
            total = total.saturating_add(shell);
            shell = shell.saturating_mul(2 * n - 1);
        }
        total
    }
}

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Self { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

/// A reduced word together with its composed transform.
#[derive(Clone, PartialEq)]
pub struct Word {
    letters: Vec<Letter>,
    transform: Moebius,
}

impl Word {
    pub fn identity() -> Self {
        Self {
            letters: Vec::new(),
            transform: Moebius::IDENTITY,
        }
    }

    /// Builds a word from letters, freely reducing adjacent inverse pairs.
    pub fn from_letters(group: &GroupPresentation, letters: &[Letter]) -> Result<Self> {
        let mut w = Word::identity();
        for &l in letters {
            if l.generator >= group.rank() {
                return Err(Error::ArityMismatch {
                    expected: group.rank(),
                    found: l.generator + 1,
                });
            }
            w = w.multiply_letter(group, l);
        }
        Ok(w)
    }

    fn multiply_letter(&self, group: &GroupPresentation, l: Letter) -> Word {
        let mut letters = self.letters.clone();
        if letters.last() == Some(&l.inv()) {
            letters.pop();
            let transform = letters
                .iter()
                .fold(Moebius::IDENTITY, |acc, &x| acc.compose(&group.letter_transform(x)));
            Word { letters, transform }
        } else {
            letters.push(l);
            Word {
                letters,
                transform: self.transform.compose(&group.letter_transform(l)),
            }
        }
    }

    /// Reduced concatenation `self · other`.
    pub fn concat(&self, group: &GroupPresentation, other: &Word) -> Word {
        other
            .letters
            .iter()
            .fold(self.clone(), |acc, &l| acc.multiply_letter(group, l))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn transform(&self) -> &Moebius {
        &self.transform
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|p| p[1] != p[0].inv())
    }
}

impl fmt::Display for Word {
    /// Generator `k` prints as the `k`-th lowercase letter, its inverse in
    /// uppercase; the identity prints as `e`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for l in &self.letters {
            let base = if l.generator < 26 {
                (b'a' + l.generator as u8) as char
            } else {
                '?'
            };
            let ch = if l.inverse { base.to_ascii_uppercase() } else { base };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// All reduced words up to a fixed length, in length-lexicographic order.
#[derive(Debug, Clone)]
pub struct OrbitTruncation {
    pub max_word_length: usize,
    pub elements: Vec<Word>,
    /// Per-length sums of `1 − |γ(0)|²`, index = word length.
    pub shell_sums: Vec<f64>,
    pub tail_estimate: f64,
}

impl OrbitTruncation {
    /// Words of length exactly `len`.
    pub fn shell(&self, len: usize) -> impl Iterator<Item = &Word> {
        self.elements.iter().filter(move |w| w.len() == len)
    }
}

pub fn orbit_enumerate(group: &GroupPresentation, depth: usize) -> Result<OrbitTruncation> {
    orbit_enumerate_capped(group, depth, DEFAULT_ELEMENT_CAP)
}

/// Enumerates reduced words breadth-first. Letters are ordered
/// `g₀, g₀⁻¹, g₁, g₁⁻¹, …`, so extending each word of the previous shell in
/// that order yields length-lexicographic order.
pub fn orbit_enumerate_capped(group: &GroupPresentation, depth: usize, cap: usize) -> Result<OrbitTruncation> {
    let requested = group.word_count(depth);
    if requested > cap as u128 {
        return Err(Error::BudgetExceeded { requested, cap });
    }
    let alphabet: Vec<Letter> = (0..group.rank())
        .flat_map(|k| [Letter::new(k, false), Letter::new(k, true)])
        .collect();
    let transforms: Vec<Moebius> = alphabet.iter().map(|&l| group.letter_transform(l)).collect();

    let mut elements = Vec::with_capacity(requested as usize);
    elements.push(Word::identity());
    let mut shell_start = 0;
    for _ in 0..depth {
        let shell_end = elements.len();
        for i in shell_start..shell_end {
            for (l, t) in alphabet.iter().zip(&transforms) {
                let w: &Word = &elements[i];
                if w.letters.last() == Some(&l.inv()) {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(*l);
                let next = Word {
                    letters,
                    transform: w.transform.compose(t),
                };
                elements.push(next);
            }
        }
        shell_start = shell_end;
    }

    let zero = Complex64::new(0.0, 0.0);
    let (shell_sums, tail_estimate) = shell_statistics(&elements, depth, |w| 1.0 - orbit_point(w, zero).norm_sqr());
    Ok(OrbitTruncation {
        max_word_length: depth,
        elements,
        shell_sums,
        tail_estimate,
    })
}

fn orbit_point(w: &Word, z: Complex64) -> Complex64 {
    w.transform.apply(z).expect("disk points never hit the pole")
}

/// Per-length sums of `term` and the geometric tail extrapolation
/// `s_L·r/(1−r)` with `r = min(s_L/s_{L−1}, 0.99)`.
pub(crate) fn shell_statistics<F: Fn(&Word) -> f64>(elements: &[Word], depth: usize, term: F) -> (Vec<f64>, f64) {
    let mut sums = vec![0.0; depth + 1];
    for w in elements {
        sums[w.len()] += term(w);
    }
    let tail = if elements.len() <= 1 {
        0.0
    } else if depth == 0 {
        f64::INFINITY
    } else {
        let last = sums[depth];
        let ratio = (last / sums[depth - 1]).min(0.99);
        last * ratio / (1.0 - ratio)
    };
    (sums, tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceEstimate {
    pub partial_sum: f64,
    pub tail_estimate: f64,
}

/// `Σ_{|w|≤L} (1 − |γ_w(z)|²)` with a geometric tail extrapolation.
pub fn convergence_type_estimate(group: &GroupPresentation, z: Complex64, depth: usize) -> Result<ConvergenceEstimate> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideDisk(z));
    }
    let orbit = orbit_enumerate(group, depth)?;
    convergence_on_orbit(&orbit, z)
}

pub fn convergence_on_orbit(orbit: &OrbitTruncation, z: Complex64) -> Result<ConvergenceEstimate> {
    let depth = orbit.max_word_length;
    let (sums, tail) = shell_statistics(&orbit.elements, depth, |w| 1.0 - orbit_point(w, z).norm_sqr());
    if orbit.elements.len() > 1 && depth >= 2 && sums[depth] >= sums[depth - 2] {
        return Err(Error::DivergenceSuspected(sums[depth - 2..].to_vec()));
    }
    Ok(ConvergenceEstimate {
        partial_sum: sums.iter().sum(),
        tail_estimate: tail,
    })
}

/// A unimodular homomorphism on the free group, given by generator values.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Character {
    #[serde(with = "crate::io::complex_vec")]
    values: Vec<Complex64>,
}

impl Character {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        for &v in &values {
            if (v.norm() - 1.0).abs() > UNIMODULAR_TOL {
                return Err(Error::NotUnimodular(v));
            }
        }
        Ok(Self { values })
    }

    pub fn trivial(rank: usize) -> Self {
        Self {
            values: vec![Complex64::new(1.0, 0.0); rank],
        }
    }

    /// Character with values `e^{iφ_k}`.
    pub fn from_phases(phases: &[f64]) -> Self {
        Self {
            values: phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn eval(&self, w: &Word) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for l in w.letters() {
            let v = *self.values.get(l.generator).ok_or(Error::ArityMismatch {
                expected: self.rank(),
                found: l.generator + 1,
            })?;
            acc *= if l.inverse { v.conj() } else { v };
        }
        Ok(acc)
    }

    pub fn mul(&self, other: &Character) -> Result<Character> {
        self.check_arity(other)?;
        Ok(Character {
            values: self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect(),
        })
    }

    pub fn conj(&self) -> Character {
        Character {
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    fn check_arity(&self, other: &Character) -> Result<()> {
        if self.rank() != other.rank() {
            return Err(Error::ArityMismatch {
                expected: self.rank(),
                found: other.rank(),
            });
        }
        Ok(())
    }

    pub fn is_trivial(&self, tol: f64) -> bool {
        self.values.iter().all(|v| (v - 1.0).norm() <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainCertificate {
    pub inside: bool,
    pub margin: f64,
    pub depth: usize,
}

/// Tests `|γ'(z)| < 1` for every non-identity word of length `≤ depth`.
pub fn in_normal_fundamental_domain(
    group: &GroupPresentation,
    z: Complex64,
    depth: usize,
) -> Result<DomainCertificate> {
    let orbit = orbit_enumerate(group, depth)?;
    Ok(fundamental_domain_on_orbit(&orbit, z))
}

pub fn fundamental_domain_on_orbit(orbit: &OrbitTruncation, z: Complex64) -> DomainCertificate {
    let worst = orbit
        .elements
        .iter()
        .skip(1)
        .map(|w| w.transform().derivative(z).map(|d| d.norm()).unwrap_or(f64::INFINITY))
        .fold(0.0f64, f64::max);
    let margin = if orbit.elements.len() <= 1 { 1.0 } else { 1.0 - worst };
    DomainCertificate {
        inside: margin > 0.0,
        margin,
        depth: orbit.max_word_length,
    }
}
