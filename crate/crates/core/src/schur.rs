//! Positivity of Hermitian kernels on finite grids, de Branges–Rovnyak kernels,
//! Nevanlinna–Pick extension of sampled Schur data by a lurking isometry, and
//! the isometry between `H(𝒮_α)` and `H₂^α`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covering::{in_omega_plus, CoveringMap, Varsigma};
use crate::error::{Error, Result};
use crate::fuchsian::{fundamental_domain_on_orbit, OrbitTruncation};
use crate::io;
use crate::kernels::{HardySpace, Normalization};
use crate::linalg::{hermitian_defect, hermitian_eigen, operator_norm, polar_isometry, symmetrize, CMat};
use crate::Evaluator;

pub const DEFAULT_PSD_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-6;
const MIN_SEPARATION: f64 = 1e-8;
const PICK_TOL: f64 = 1e-8;
const SVD_RANK_TOL: f64 = 1e-12;
const INTERPOLATION_TOL: f64 = 1e-8;
const MAX_REJECTIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Disk,
    OmegaPlus,
    OmegaPlusAndF,
    Delta,
}

/// Distinct sample points tagged with the region they were drawn from.
#[derive(Debug, Clone, Serialize)]
pub struct SamplingGrid {
    #[serde(with = "io::complex_vec")]
    points: Vec<Complex64>,
    seed: u64,
    region: Region,
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform_disk(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
}

fn check_separation(points: &[Complex64]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() < MIN_SEPARATION {
                return Err(Error::DuplicateNode(i, j));
            }
        }
    }
    Ok(())
}

impl SamplingGrid {
    /// Wraps explicit points; only disk membership and separation are checked,
    /// the caller vouches for the region tag.
    pub fn from_points(points: Vec<Complex64>, region: Region, seed: u64) -> Result<Self> {
        if let Some(&z) = points.iter().find(|z| z.norm() >= 1.0) {
            return Err(Error::OutsideDisk(z));
        }
        check_separation(&points)?;
        Ok(Self { points, seed, region })
    }

    /// `n` uniform points in `|z| ≤ radius`. `stream` splits one seed into
    /// independent grids.
    pub fn disk(n: usize, radius: f64, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = seeded(seed, stream);
        let points = (0..n).map(|_| uniform_disk(&mut rng, radius)).collect();
        Self::from_points(points, Region::Disk, seed)
    }

    /// Rejection sampling of `n` points of `Ω₊ ∩ {|z| ≤ radius}`.
    pub fn omega_plus(cov: &CoveringMap, n: usize, radius: f64, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = seeded(seed, stream);
        let points = rejection(&mut rng, n, radius, |z| matches!(in_omega_plus(cov, z), Ok(true)))?;
        Self::from_points(points, Region::OmegaPlus, seed)
    }

    /// Rejection sampling of `Ω₊ ∩ ℱ`, with `ℱ` certified on the given orbit.
    pub fn omega_plus_and_f(
        cov: &CoveringMap,
        orbit: &OrbitTruncation,
        n: usize,
        radius: f64,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        let mut rng = seeded(seed, stream);
        let points = rejection(&mut rng, n, radius, |z| {
            matches!(in_omega_plus(cov, z), Ok(true)) && fundamental_domain_on_orbit(orbit, z).inside
        })?;
        Self::from_points(points, Region::OmegaPlusAndF, seed)
    }

    /// `n` points `λ` with `|λ| ≤ radius`, each certified to lie in
    /// `σ(Ω₊ ∩ ℱ)` by a successful inversion.
    pub fn delta(vs: &Varsigma<'_>, n: usize, radius: f64, seed: u64, stream: u64) -> Result<Self> {
        let mut rng = seeded(seed, stream);
        let points = rejection(&mut rng, n, radius, |l| vs.invert(l).is_ok())?;
        Self::from_points(points, Region::Delta, seed)
    }

    pub fn with_point(mut self, z: Complex64) -> Result<Self> {
        self.points.push(z);
        Self::from_points(self.points, self.region, self.seed)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn rejection<F: Fn(Complex64) -> bool>(
    rng: &mut ChaCha8Rng,
    n: usize,
    radius: f64,
    accept: F,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        if tries > MAX_REJECTIONS {
            return Err(Error::InvalidInput(format!(
                "region too small: {} of {n} points found",
                out.len()
            )));
        }
        let z = uniform_disk(rng, radius);
        if accept(z) {
            out.push(z);
        }
    }
    Ok(out)
}

/// Outcome of a finite-sample positivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdReport {
    pub n: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    pub tol: f64,
    pub pass: bool,
}

impl PsdReport {
    pub fn new(n: usize, min_eig: f64, max_eig: f64, tol: f64) -> Self {
        let pass = min_eig >= -tol * max_eig.max(1.0);
        Self {
            n,
            min_eig,
            max_eig,
            tol,
            pass,
        }
    }

    /// Worst case over several reports (largest tolerance kept).
    pub fn merge(reports: &[PsdReport]) -> Self {
        let n = reports.iter().map(|r| r.n).sum();
        let lo = reports.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min);
        let hi = reports.iter().map(|r| r.max_eig).fold(f64::NEG_INFINITY, f64::max);
        let tol = reports.iter().map(|r| r.tol).fold(0.0, f64::max);
        Self::new(n, lo, hi, tol)
    }

    pub fn of_matrix(g: &CMat, tol: f64) -> Result<Self> {
        let defect = hermitian_defect(g);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let (values, _) = hermitian_eigen(&symmetrize(g));
        let lo = values.first().copied().unwrap_or(0.0);
        let hi = values.last().copied().unwrap_or(0.0);
        Ok(Self::new(g.nrows(), lo, hi, tol))
    }
}

pub fn gram_matrix<K>(kernel: K, points: &[Complex64]) -> Result<CMat>
where
    K: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    let n = points.len();
    let mut g = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = kernel(points[i], points[j])?;
        }
    }
    Ok(g)
}

/// Eigenvalue range of the symmetrised Gram matrix `[K(p_i, p_j)]`.
pub fn gram_psd_check<K>(kernel: K, grid: &SamplingGrid, tol: f64) -> Result<PsdReport>
where
    K: Fn(Complex64, Complex64) -> Result<Complex64>,
{
    PsdReport::of_matrix(&gram_matrix(kernel, grid.points())?, tol)
}

/// State-space data `Σ(λ) = D + λ C (I − λA)⁻¹ B`.
#[derive(Debug, Clone)]
pub struct Realization {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct RealizationJson {
    k: usize,
    #[serde(with = "io::complex_rows")]
    A: Vec<Vec<Complex64>>,
    #[serde(with = "io::complex_rows")]
    B: Vec<Vec<Complex64>>,
    #[serde(with = "io::complex_rows")]
    C: Vec<Vec<Complex64>>,
    #[serde(with = "io::complex_rows")]
    D: Vec<Vec<Complex64>>,
}

fn rows_of(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

impl Serialize for Realization {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RealizationJson {
            k: self.state_dim(),
            A: rows_of(&self.a),
            B: rows_of(&self.b),
            C: rows_of(&self.c),
            D: rows_of(&self.d),
        }
        .serialize(s)
    }
}

impl Realization {
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn eval(&self, lambda: Complex64) -> Result<CMat> {
        let k = self.state_dim();
        if k == 0 {
            return Ok(self.d.clone());
        }
        let m = CMat::identity(k, k) - &self.a * lambda;
        let x = m.lu().solve(&self.b).ok_or(Error::PoleHit(lambda))?;
        Ok(&self.d + &self.c * x * lambda)
    }

    /// The block colligation `[[A, B], [C, D]]`.
    pub fn colligation(&self) -> CMat {
        let (k, q) = (self.a.nrows(), self.b.ncols());
        let p = self.c.nrows();
        let mut u = CMat::zeros(k + p, k + q);
        u.view_mut((0, 0), (k, k)).copy_from(&self.a);
        u.view_mut((0, k), (k, q)).copy_from(&self.b);
        u.view_mut((k, 0), (p, k)).copy_from(&self.c);
        u.view_mut((k, k), (p, q)).copy_from(&self.d);
        u
    }

    pub fn colligation_norm(&self) -> f64 {
        operator_norm(&self.colligation())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Scalar,
    TwoByTwo,
}

pub type MatrixEvaluator = Arc<dyn Fn(Complex64) -> CMat + Send + Sync>;

/// A (possibly matrix-valued) function on the disk, optionally backed by a
/// contractive realization.
#[derive(Clone)]
pub struct SchurEvaluator {
    shape: Shape,
    eval: MatrixEvaluator,
    realization: Option<Realization>,
    node_residual: f64,
}

impl std::fmt::Debug for SchurEvaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchurEvaluator")
            .field("shape", &self.shape)
            .field("realization", &self.realization)
            .field("node_residual", &self.node_residual)
            .finish()
    }
}

fn nan_matrix(rows: usize, cols: usize) -> CMat {
    CMat::from_element(rows, cols, Complex64::new(f64::NAN, f64::NAN))
}

impl SchurEvaluator {
    pub fn from_realization(realization: Realization, node_residual: f64) -> Self {
        let shape = if realization.d.nrows() == 1 && realization.d.ncols() == 1 {
            Shape::Scalar
        } else {
            Shape::TwoByTwo
        };
        let (rows, cols) = realization.d.shape();
        let r = realization.clone();
        let eval: MatrixEvaluator = Arc::new(move |l| r.eval(l).unwrap_or_else(|_| nan_matrix(rows, cols)));
        Self {
            shape,
            eval,
            realization: Some(realization),
            node_residual,
        }
    }

    pub fn scalar_fn(f: Evaluator) -> Self {
        let eval: MatrixEvaluator = Arc::new(move |l| CMat::from_element(1, 1, f(l)));
        Self {
            shape: Shape::Scalar,
            eval,
            realization: None,
            node_residual: 0.0,
        }
    }

    pub fn matrix_fn(f: MatrixEvaluator) -> Self {
        Self {
            shape: Shape::TwoByTwo,
            eval: f,
            realization: None,
            node_residual: 0.0,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn eval(&self, lambda: Complex64) -> CMat {
        (self.eval)(lambda)
    }

    /// Top-left entry; the value itself for scalar evaluators.
    pub fn scalar(&self, lambda: Complex64) -> Complex64 {
        self.eval(lambda)[(0, 0)]
    }

    pub fn realization(&self) -> Option<&Realization> {
        self.realization.as_ref()
    }

    /// Largest interpolation error at the construction nodes.
    pub fn node_residual(&self) -> f64 {
        self.node_residual
    }

    /// Largest operator norm over the given points.
    pub fn sampled_norm(&self, points: &[Complex64]) -> f64 {
        points.iter().map(|&l| operator_norm(&self.eval(l))).fold(0.0, f64::max)
    }
}

/// `(1 − S(λ)S(μ)*)/(1 − λμ̄)`.
pub fn dbr_kernel(s: &SchurEvaluator, lambda: Complex64, mu: Complex64) -> Complex64 {
    dbr_from_values(s.scalar(lambda), s.scalar(mu), lambda, mu)
}

fn dbr_from_values(s_l: Complex64, s_m: Complex64, lambda: Complex64, mu: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - s_l * s_m.conj()) / (Complex64::new(1.0, 0.0) - lambda * mu.conj())
}

/// Output of [`lurking_isometry`].
#[derive(Debug, Clone)]
pub struct LurkingIsometry {
    pub realization: Realization,
    pub rank: usize,
    pub pick_min_eig: f64,
    pub pick_max_eig: f64,
}

/// Builds a contractive colligation `U = [[A, B], [C, D]]` with
/// `a_i Σ(λ_i) = b_i`, where `a` is `n × p`, `b` is `n × q` and
/// `Σ(λ) = D + λC(I − λA)⁻¹B`.
///
/// The Pick matrix `P = (a a* − b b*)/(1 − λ λ̄*)` is factored as `M M*`; the
/// Gram identity `[λM, a][λM, a]* = [M, b][M, b]*` then defines a partial
/// isometry between row spaces, completed by zero on the complement.
pub fn lurking_isometry(nodes: &[Complex64], a: &CMat, b: &CMat) -> Result<LurkingIsometry> {
    let n = nodes.len();
    if a.nrows() != n || b.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "{n} nodes but {} and {} rows",
            a.nrows(),
            b.nrows()
        )));
    }
    if let Some(&z) = nodes.iter().find(|z| z.norm() >= 1.0) {
        return Err(Error::OutsideDisk(z));
    }
    check_separation(nodes)?;
    let (p, q) = (a.ncols(), b.ncols());
    let num = a * a.adjoint() - b * b.adjoint();
    let pick = symmetrize(&CMat::from_fn(n, n, |i, j| {
        num[(i, j)] / (Complex64::new(1.0, 0.0) - nodes[i] * nodes[j].conj())
    }));
    let (w, v) = hermitian_eigen(&pick);
    let lo = w.first().copied().unwrap_or(0.0);
    let hi = w.last().copied().unwrap_or(0.0);
    if lo < -PICK_TOL * hi.max(1.0) {
        return Err(Error::PickIndefinite {
            min_eig: lo,
            max_eig: hi,
        });
    }
    // Eigenvalues below roundoff relative to the data scale are treated as zero,
    // so exactly degenerate data (e.g. samples of an inner function) get r = 0.
    let scale = (0..n).map(|i| a.row(i).norm_squared()).fold(hi, f64::max);
    let floor = 4.0 * f64::EPSILON * scale;
    let kept: Vec<usize> = (0..n).filter(|&k| w[k] > floor).collect();
    let r = kept.len();
    let m = CMat::from_fn(n, r, |i, j| v[(i, kept[j])] * w[kept[j]].sqrt());

    let mut x = CMat::zeros(n, r + p);
    let mut y = CMat::zeros(n, r + q);
    for i in 0..n {
        for j in 0..r {
            x[(i, j)] = nodes[i] * m[(i, j)];
            y[(i, j)] = m[(i, j)];
        }
        for j in 0..p {
            x[(i, r + j)] = a[(i, j)];
        }
        for j in 0..q {
            y[(i, r + j)] = b[(i, j)];
        }
    }
    let svd = x.clone().svd(true, true);
    let ux = svd.u.expect("requested U");
    let vxt = svd.v_t.expect("requested V*");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > SVD_RANK_TOL * smax)
        .collect();
    let u = if idx.is_empty() {
        CMat::zeros(r + p, r + q)
    } else {
        let uk = CMat::from_fn(n, idx.len(), |i, j| ux[(i, idx[j])]);
        let vk = CMat::from_fn(r + p, idx.len(), |i, j| vxt[(idx[j], i)].conj());
        let mut vy = y.adjoint() * uk;
        for (j, &k) in idx.iter().enumerate() {
            let s = svd.singular_values[k];
            vy.column_mut(j).iter_mut().for_each(|e| *e /= s);
        }
        vk * polar_isometry(&vy).adjoint()
    };
    let realization = Realization {
        a: u.view((0, 0), (r, r)).into_owned(),
        b: u.view((0, r), (r, q)).into_owned(),
        c: u.view((r, 0), (p, r)).into_owned(),
        d: u.view((r, r), (p, q)).into_owned(),
    };
    Ok(LurkingIsometry {
        realization,
        rank: r,
        pick_min_eig: lo,
        pick_max_eig: hi,
    })
}

/// Largest `‖a_i Σ(λ_i) − b_i‖` over the nodes, with the index attaining it.
pub fn factorization_residual(r: &Realization, nodes: &[Complex64], a: &CMat, b: &CMat) -> Result<(usize, f64)> {
    let mut worst = (0, 0.0f64);
    for (i, &l) in nodes.iter().enumerate() {
        let sigma = r.eval(l)?;
        let res = (a.row(i) * sigma - b.row(i)).norm();
        if !(res <= worst.1) {
            worst = (i, res);
        }
    }
    Ok(worst)
}

/// Nevanlinna–Pick extension of scalar samples `(λ_j, v_j)` to a Schur
/// function with a contractive realization.
pub fn extend_schur_from_samples(samples: &[(Complex64, Complex64)]) -> Result<SchurEvaluator> {
    let nodes: Vec<Complex64> = samples.iter().map(|s| s.0).collect();
    let a = CMat::from_element(nodes.len(), 1, Complex64::new(1.0, 0.0));
    let b = CMat::from_iterator(nodes.len(), 1, samples.iter().map(|s| s.1));
    let li = lurking_isometry(&nodes, &a, &b)?;
    let (_, residual) = factorization_residual(&li.realization, &nodes, &a, &b)?;
    if li.rank == 0 && residual > INTERPOLATION_TOL {
        return Err(Error::RankCollapse(residual));
    }
    Ok(SchurEvaluator::from_realization(li.realization, residual))
}

/// 39 nodes on three concentric rings of radii `R`, `0.6R`, `0.25R`.
///
/// Interpolation nodes spread this way keep the extension accurate over the
/// whole disk `|λ| ≤ R`; uniformly random nodes leave gaps that cost several
/// digits.
pub fn ring_nodes(radius: f64) -> Vec<Complex64> {
    let ring = |count: usize, r: f64, offset: f64| {
        (0..count).map(move |k| Complex64::from_polar(r, 2.0 * PI * (k as f64 + offset) / count as f64))
    };
    ring(24, radius, 0.5)
        .chain(ring(12, 0.6 * radius, 0.25))
        .chain(ring(3, 0.25 * radius, 0.1))
        .collect()
}

/// `f = Σ_j c_j K_𝒮(·, μ_j)`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelCombination {
    #[serde(with = "io::complex_vec")]
    pub coeffs: Vec<Complex64>,
    #[serde(with = "io::complex_vec")]
    pub nodes: Vec<Complex64>,
}

impl KernelCombination {
    pub fn new(coeffs: Vec<Complex64>, nodes: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != nodes.len() {
            return Err(Error::InvalidInput("one coefficient per node".into()));
        }
        Ok(Self { coeffs, nodes })
    }

    pub fn eval(&self, s: &SchurEvaluator, lambda: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&self.nodes)
            .map(|(&c, &mu)| c * dbr_kernel(s, lambda, mu))
            .sum()
    }

    /// `‖f‖²` in `H(𝒮)` given the values `𝒮(μ_j)`.
    fn norm_sq(&self, s_values: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (&ci, &mi)) in self.coeffs.iter().zip(&self.nodes).enumerate() {
            for (j, (&cj, &mj)) in self.coeffs.iter().zip(&self.nodes).enumerate() {
                acc += cj * ci.conj() * dbr_from_values(s_values[i], s_values[j], mi, mj);
            }
        }
        acc.re
    }
}

/// `F(z) = √2 A^α(z)/(1 − i𝔷(z)) · f(σ(z))`, the image of `f ∈ H(𝒮_α)` in `H₂^α`.
pub fn hardy_element(
    f: &KernelCombination,
    s_ext: &SchurEvaluator,
    space: &HardySpace,
    z: Complex64,
) -> Result<Complex64> {
    let weight = space.weight(z, Normalization::Sqrt2)?;
    let lambda = space.sigma(z)?;
    Ok(weight * f.eval(s_ext, lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsometryCheck {
    /// `‖f‖²` in `H(𝒮_α)`.
    pub lhs: f64,
    /// `‖F‖²` in `H₂^α`, from the structure-formula kernel.
    pub rhs: f64,
}

impl IsometryCheck {
    pub fn holds(&self, tol: f64) -> bool {
        (self.lhs - self.rhs).abs() <= tol * self.lhs.max(1.0)
    }
}

/// Compares `‖f‖_{H(𝒮_α)}²` with `‖F‖_{H₂^α}²` for a kernel combination.
///
/// `F = Σ_j c_j/conj(w(z_j)) k^α(·, z_j)` with `z_j = ς(μ_j)` and `w` the
/// `√2 A/(1 − i𝔷)` weight, so the right side only uses `k^α` from the
/// structure formula and the weights.
pub fn hardy_isometry_check(f: &KernelCombination, space: &HardySpace, vs: &Varsigma<'_>) -> Result<IsometryCheck> {
    let zs = f.nodes.iter().map(|&mu| vs.invert(mu)).collect::<Result<Vec<_>>>()?;
    let s_values = zs.iter().map(|&z| space.s_alpha(z)).collect::<Result<Vec<_>>>()?;
    let lhs = f.norm_sq(&s_values);
    let scaled = zs
        .iter()
        .zip(&f.coeffs)
        .map(|(&z, &c)| Ok(c / space.weight(z, Normalization::Sqrt2)?.conj()))
        .collect::<Result<Vec<_>>>()?;
    let mut rhs = Complex64::new(0.0, 0.0);
    for (i, &zi) in zs.iter().enumerate() {
        for (j, &zj) in zs.iter().enumerate() {
            rhs += scaled[j] * scaled[i].conj() * space.kernel_structure(zi, zj)?;
        }
    }
    Ok(IsometryCheck { lhs, rhs: rhs.re })
}
