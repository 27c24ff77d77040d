//! Schur multipliers between character-automorphic Hardy spaces: detection by
//! kernel positivity, the pipeline `T → ℛ → (𝒜, ℬ) → Σ`, finite-node Leech
//! factorization and the linear-fractional reconstruction of `s` and `S_α`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covering::Varsigma;
use crate::error::{Error, Result};
use crate::fuchsian::{Character, OrbitTruncation};
use crate::io;
use crate::kernels::HardySpace;
use crate::linalg::CMat;
use crate::schur::{
    extend_schur_from_samples, factorization_residual, gram_psd_check, lurking_isometry, ring_nodes, MatrixEvaluator,
    PsdReport, SamplingGrid, SchurEvaluator, DEFAULT_PSD_TOL,
};
use crate::Evaluator;

const A_ZERO_TOL: f64 = 1e-12;
const LEECH_RESIDUAL_TOL: f64 = 1e-6;
const LFT_POLE_TOL: f64 = 1e-10;
// Truncating the Pick matrix at roundoff leaves node errors of order
// sqrt(eps·‖P‖), so stage gates use the Leech tolerance.
const INTERPOLATION_TOL: f64 = 1e-6;

/// A candidate multiplier `s^β`.
#[derive(Clone)]
pub struct MultiplierCandidate {
    beta: Character,
    eval: Evaluator,
    label: String,
}

impl std::fmt::Debug for MultiplierCandidate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultiplierCandidate")
            .field("label", &self.label)
            .field("beta", &self.beta)
            .finish()
    }
}

impl MultiplierCandidate {
    pub fn new(label: impl Into<String>, beta: Character, eval: Evaluator) -> Self {
        Self {
            beta,
            eval,
            label: label.into(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn beta(&self) -> &Character {
        &self.beta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `max |s(γ z) − β(γ) s(z)|` over the orbit words and probes.
    pub fn automorphy_residual(&self, orbit: &OrbitTruncation, probes: &[Complex64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for w in &orbit.elements {
            let beta = self.beta.eval(w)?;
            for &z in probes {
                let gz = w.transform().apply(z)?;
                worst = worst.max((self.eval(gz) - beta * self.eval(z)).norm());
            }
        }
        Ok(worst)
    }
}

/// `k^α(z, w) − s(z) conj(s(w)) k^{β̄α}(z, w)`.
pub fn multiplier_kernel(
    s: &MultiplierCandidate,
    h_alpha: &HardySpace,
    h_beta_alpha: &HardySpace,
    z: Complex64,
    w: Complex64,
) -> Result<Complex64> {
    Ok(h_alpha.kernel_structure(z, w)? - s.eval(z) * s.eval(w).conj() * h_beta_alpha.kernel_structure(z, w)?)
}

/// Positivity of the multiplier kernel, aggregated over all grids.
pub fn is_schur_multiplier(
    s: &MultiplierCandidate,
    h_alpha: &HardySpace,
    h_beta_alpha: &HardySpace,
    grids: &[SamplingGrid],
    tol: f64,
) -> Result<PsdReport> {
    let reports = grids
        .iter()
        .map(|g| gram_psd_check(|z, w| multiplier_kernel(s, h_alpha, h_beta_alpha, z, w), g, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(PsdReport::merge(&reports))
}

/// `T(z) = A^{β̄α}(z)/A^α(z) · s(z)`.
pub fn t_function(
    s: &MultiplierCandidate,
    h_alpha: &HardySpace,
    h_beta_alpha: &HardySpace,
    z: Complex64,
) -> Result<Complex64> {
    let (a, _) = match h_alpha.ab(z) {
        Ok(ab) => ab,
        Err(Error::PoleHit(_)) => return Ok(h_alpha.a_ratio(h_beta_alpha, z)? * s.eval(z)),
        Err(e) => return Err(e),
    };
    if a.norm() <= A_ZERO_TOL {
        return Err(Error::AZero(z));
    }
    Ok(h_alpha.a_ratio(h_beta_alpha, z)? * s.eval(z))
}

/// `ℛ` together with the 2×2 function it was read off from.
#[derive(Debug, Clone)]
pub struct RExtension {
    pub r: SchurEvaluator,
    pub sigma: SchurEvaluator,
    pub nodes: Vec<Complex64>,
    /// `T(ς(λ_j))`.
    pub values: Vec<Complex64>,
    pub node_residual: f64,
}

/// Extends `T∘ς` from the nodes to the disk.
///
/// The kernel `K_{𝒮_α} − v v* K_{𝒮_{β̄α}}` at the nodes equals
/// `(𝒜𝒜* − ℬℬ*)/(1 − λμ̄)` with `𝒜 = (1, v𝒮_{β̄α})`, `ℬ = (𝒮_α, v)`; a lurking
/// isometry gives `ℬ = 𝒜Σ` and `ℛ = Σ₁₂/(1 − 𝒮_{β̄α}Σ₂₂)`.
pub fn r_extension(
    s: &MultiplierCandidate,
    h_alpha: &HardySpace,
    h_beta_alpha: &HardySpace,
    vs: &Varsigma<'_>,
    nodes: &[Complex64],
    s_beta_alpha_ext: &SchurEvaluator,
) -> Result<RExtension> {
    let n = nodes.len();
    let mut a = CMat::zeros(n, 2);
    let mut b = CMat::zeros(n, 2);
    let mut values = Vec::with_capacity(n);
    for (i, &l) in nodes.iter().enumerate() {
        let z = vs.invert(l)?;
        let v = t_function(s, h_alpha, h_beta_alpha, z)?;
        let sa = h_alpha.s_alpha(z)?;
        // Use the extension's own node value so `ℛ` interpolates exactly.
        let sb = s_beta_alpha_ext.scalar(l);
        a[(i, 0)] = Complex64::new(1.0, 0.0);
        a[(i, 1)] = v * sb;
        b[(i, 0)] = sa;
        b[(i, 1)] = v;
        values.push(v);
    }
    let li = lurking_isometry(nodes, &a, &b)?;
    let sigma = SchurEvaluator::from_realization(li.realization, 0.0);
    let (sig, sb_ext) = (sigma.clone(), s_beta_alpha_ext.clone());
    let r_eval: Evaluator = crate::evaluator(move |l| {
        let m = sig.eval(l);
        m[(0, 1)] / (Complex64::new(1.0, 0.0) - sb_ext.scalar(l) * m[(1, 1)])
    });
    let r = SchurEvaluator::scalar_fn(r_eval);
    let node_residual = nodes
        .iter()
        .zip(&values)
        .map(|(&l, &v)| (r.scalar(l) - v).norm())
        .fold(0.0, f64::max);
    Ok(RExtension {
        r,
        sigma,
        nodes: nodes.to_vec(),
        values,
        node_residual,
    })
}

/// `𝒜(λ) = (1, ℛ(λ)𝒮_{β̄α}(λ))`, `ℬ(λ) = (𝒮_α(λ), ℛ(λ))`.
pub fn ab_rows(
    s_alpha_ext: &SchurEvaluator,
    s_beta_alpha_ext: &SchurEvaluator,
    r: &SchurEvaluator,
    lambda: Complex64,
) -> ([Complex64; 2], [Complex64; 2]) {
    let rv = r.scalar(lambda);
    (
        [Complex64::new(1.0, 0.0), rv * s_beta_alpha_ext.scalar(lambda)],
        [s_alpha_ext.scalar(lambda), rv],
    )
}

/// Node data for a Leech factorization `ℬ = 𝒜Σ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeechProblem {
    #[serde(with = "io::complex_vec")]
    pub nodes: Vec<Complex64>,
    #[serde(rename = "A_row", with = "io::complex_rows")]
    pub a_rows: Vec<Vec<Complex64>>,
    #[serde(rename = "B_row", with = "io::complex_rows")]
    pub b_rows: Vec<Vec<Complex64>>,
}

impl LeechProblem {
    pub fn new(nodes: Vec<Complex64>, a_rows: Vec<[Complex64; 2]>, b_rows: Vec<[Complex64; 2]>) -> Self {
        Self {
            nodes,
            a_rows: a_rows.into_iter().map(|r| r.to_vec()).collect(),
            b_rows: b_rows.into_iter().map(|r| r.to_vec()).collect(),
        }
    }

    fn matrices(&self) -> Result<(CMat, CMat)> {
        let n = self.nodes.len();
        if self.a_rows.len() != n || self.b_rows.len() != n {
            return Err(Error::InvalidInput(format!(
                "{n} nodes but {} A rows and {} B rows",
                self.a_rows.len(),
                self.b_rows.len()
            )));
        }
        let to_mat = |rows: &[Vec<Complex64>]| -> Result<CMat> {
            if let Some(r) = rows.iter().find(|r| r.len() != 2) {
                return Err(Error::ArityMismatch {
                    expected: 2,
                    found: r.len(),
                });
            }
            Ok(CMat::from_fn(n, 2, |i, j| rows[i][j]))
        };
        Ok((to_mat(&self.a_rows)?, to_mat(&self.b_rows)?))
    }

    /// Extreme eigenvalues of `[(𝒜_i𝒜_j* − ℬ_iℬ_j*)/(1 − λ_i λ̄_j)]`.
    pub fn solvability(&self) -> Result<PsdReport> {
        let (a, b) = self.matrices()?;
        let num = &a * a.adjoint() - &b * b.adjoint();
        let nodes = &self.nodes;
        let k = CMat::from_fn(nodes.len(), nodes.len(), |i, j| {
            num[(i, j)] / (Complex64::new(1.0, 0.0) - nodes[i] * nodes[j].conj())
        });
        PsdReport::of_matrix(&k, DEFAULT_PSD_TOL)
    }
}

/// A contractive 2×2 `Σ` with `𝒜(λ_j)Σ(λ_j) = ℬ(λ_j)` at every node.
pub fn leech_solve(problem: &LeechProblem) -> Result<SchurEvaluator> {
    let (a, b) = problem.matrices()?;
    let li = match lurking_isometry(&problem.nodes, &a, &b) {
        Err(Error::PickIndefinite { min_eig, .. }) => return Err(Error::Infeasible { min_eig }),
        other => other?,
    };
    let (node, residual) = factorization_residual(&li.realization, &problem.nodes, &a, &b)?;
    if !(residual <= LEECH_RESIDUAL_TOL) {
        return Err(Error::ResidualTooLarge { node, residual });
    }
    Ok(SchurEvaluator::from_realization(li.realization, residual))
}

/// `(s(z), S_α(z))` from `Σ` by the linear-fractional formulas
/// `s = A^α/A^{β̄α} · Σ₁₂/(1 − S_{β̄α}Σ₂₂)` and
/// `S_α = Σ₁₁ + Σ₁₂ S_{β̄α} Σ₂₁/(1 − S_{β̄α}Σ₂₂)`, with `Σ` evaluated at `σ(z)`.
pub fn lft_multiplier(
    sigma: &SchurEvaluator,
    h_alpha: &HardySpace,
    h_beta_alpha: &HardySpace,
    z: Complex64,
) -> Result<(Complex64, Complex64)> {
    let m = sigma.eval(h_alpha.sigma(z)?);
    let sb = h_beta_alpha.s_alpha(z)?;
    let den = Complex64::new(1.0, 0.0) - sb * m[(1, 1)];
    if den.norm() <= LFT_POLE_TOL {
        return Err(Error::LftPole(z));
    }
    let ratio = h_beta_alpha.a_ratio(h_alpha, z)?;
    let s_val = ratio * m[(0, 1)] / den;
    let s_alpha = m[(0, 0)] + m[(0, 1)] * sb * m[(1, 0)] / den;
    Ok((s_val, s_alpha))
}

/// Parameters of [`roundtrip_check`].
#[derive(Debug, Clone, Copy)]
pub struct RoundtripConfig {
    /// Interpolation and test nodes `λ` lie in `|λ| ≤ radius`.
    pub radius: f64,
    pub test_points: usize,
    pub grid_points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        Self {
            radius: 0.5,
            test_points: 50,
            grid_points: 30,
            seed: 0xA11CE,
            tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage {
    pub name: String,
    pub pass: bool,
    pub metric: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    /// `max |s_reconstructed − s|` over the test points.
    pub s_max: f64,
    /// `max |S_α(LFT) − S_α|` over the test points.
    pub s_alpha_max: f64,
    /// Smallest `|1 − S_{β̄α}Σ₂₂∘σ|` over the test points.
    pub lft_denominator_min: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub candidate: String,
    pub stages: Vec<Stage>,
    pub residuals: Option<Residuals>,
    pub pass: bool,
}

impl RoundtripReport {
    /// Name of the first failing stage.
    pub fn first_failure(&self) -> Option<&str> {
        self.stages.iter().find(|s| !s.pass).map(|s| s.name.as_str())
    }
}

/// Interpolation nodes used by the round trip: three rings plus one point on
/// the positive axis.
pub fn roundtrip_nodes(radius: f64) -> Vec<Complex64> {
    let mut nodes = vec![Complex64::new(radius * 2.0 / 7.0, 0.0)];
    nodes.extend(ring_nodes(radius));
    nodes
}

struct Pipeline<'r> {
    stages: &'r mut Vec<Stage>,
}

impl Pipeline<'_> {
    fn record(&mut self, name: &str, pass: bool, metric: f64) {
        self.stages.push(Stage {
            name: name.into(),
            pass,
            metric,
            error: None,
        });
    }

    fn fail(&mut self, name: &str, err: &Error) {
        let metric = match err {
            Error::PickIndefinite { min_eig, .. } | Error::Infeasible { min_eig } => *min_eig,
            Error::ResidualTooLarge { residual, .. } => *residual,
            _ => f64::NAN,
        };
        self.stages.push(Stage {
            name: name.into(),
            pass: false,
            metric,
            error: Some(err.to_string()),
        });
    }
}

fn extension_of(space: &HardySpace, vs: &Varsigma<'_>, nodes: &[Complex64]) -> Result<SchurEvaluator> {
    let samples = nodes
        .iter()
        .map(|&l| Ok((l, space.s_alpha(vs.invert(l)?)?)))
        .collect::<Result<Vec<_>>>()?;
    extend_schur_from_samples(&samples)
}

/// Runs `T → ℛ → (𝒜, ℬ) → Leech → LFT` and compares the reconstructed `s`
/// and `S_α` with the originals on certified test points.
pub fn roundtrip_check(
    s: &MultiplierCandidate,
    h_alpha: &HardySpace,
    h_beta_alpha: &HardySpace,
    vs: &Varsigma<'_>,
    cfg: &RoundtripConfig,
) -> RoundtripReport {
    let mut stages = Vec::new();
    let residuals = run_pipeline(s, h_alpha, h_beta_alpha, vs, cfg, &mut Pipeline { stages: &mut stages });
    let pass = residuals.is_some() && stages.iter().all(|s| s.pass);
    RoundtripReport {
        candidate: s.label.clone(),
        stages,
        residuals,
        pass,
    }
}

fn run_pipeline(
    s: &MultiplierCandidate,
    h_alpha: &HardySpace,
    h_beta_alpha: &HardySpace,
    vs: &Varsigma<'_>,
    cfg: &RoundtripConfig,
    p: &mut Pipeline<'_>,
) -> Option<Residuals> {
    macro_rules! stage {
        ($name:expr, $e:expr) => {
            match $e {
                Ok(v) => v,
                Err(err) => {
                    p.fail($name, &err);
                    return None;
                }
            }
        };
    }

    let grid = stage!(
        "multiplier_psd",
        SamplingGrid::omega_plus(h_alpha.cov(), cfg.grid_points, 0.95, cfg.seed, 0)
    );
    let psd = stage!(
        "multiplier_psd",
        is_schur_multiplier(s, h_alpha, h_beta_alpha, &[grid], DEFAULT_PSD_TOL)
    );
    p.record("multiplier_psd", psd.pass, psd.min_eig);

    let nodes = roundtrip_nodes(cfg.radius);
    let s_alpha_ext = stage!("extension_alpha", extension_of(h_alpha, vs, &nodes));
    p.record(
        "extension_alpha",
        s_alpha_ext.node_residual() <= INTERPOLATION_TOL,
        s_alpha_ext.node_residual(),
    );
    let s_beta_ext = stage!("extension_beta_alpha", extension_of(h_beta_alpha, vs, &nodes));
    p.record(
        "extension_beta_alpha",
        s_beta_ext.node_residual() <= INTERPOLATION_TOL,
        s_beta_ext.node_residual(),
    );

    let rext = stage!(
        "r_extension",
        r_extension(s, h_alpha, h_beta_alpha, vs, &nodes, &s_beta_ext)
    );
    p.record(
        "r_extension",
        rext.node_residual <= INTERPOLATION_TOL,
        rext.node_residual,
    );

    let (a_rows, b_rows): (Vec<_>, Vec<_>) = nodes
        .iter()
        .map(|&l| ab_rows(&s_alpha_ext, &s_beta_ext, &rext.r, l))
        .unzip();
    let problem = LeechProblem::new(nodes, a_rows, b_rows);
    let sigma = stage!("leech", leech_solve(&problem));
    p.record("leech", true, sigma.node_residual());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut res = Residuals {
        s_max: 0.0,
        s_alpha_max: 0.0,
        lft_denominator_min: f64::INFINITY,
    };
    for _ in 0..cfg.test_points {
        let l = Complex64::from_polar(
            cfg.radius * rng.random::<f64>().sqrt(),
            std::f64::consts::TAU * rng.random::<f64>(),
        );
        let z = stage!("lft", vs.invert(l));
        let (s_val, sa_val) = stage!("lft", lft_multiplier(&sigma, h_alpha, h_beta_alpha, z));
        let sa = stage!("lft", h_alpha.s_alpha(z));
        let m = sigma.eval(l);
        let sb = stage!("lft", h_beta_alpha.s_alpha(z));
        res.s_max = res.s_max.max((s_val - s.eval(z)).norm());
        res.s_alpha_max = res.s_alpha_max.max((sa_val - sa).norm());
        res.lft_denominator_min = res
            .lft_denominator_min
            .min((Complex64::new(1.0, 0.0) - sb * m[(1, 1)]).norm());
    }
    p.record(
        "lft",
        res.s_max <= cfg.tol && res.s_alpha_max <= cfg.tol,
        res.s_max.max(res.s_alpha_max),
    );
    Some(res)
}

/// Wraps a constant 2×2 matrix as a Schur evaluator.
pub fn constant_sigma(m: CMat) -> SchurEvaluator {
    let f: MatrixEvaluator = std::sync::Arc::new(move |_| m.clone());
    SchurEvaluator::matrix_fn(f)
}
