//! The Joukowski/Szegő fixture: trivial group, `𝔷(z) = (z + 1/z)/2`,
//! `b(z) = −z`, `k ≡ 1`, `c = 1/2`. Everything is available in closed form, so
//! the suite below checks the numerical pipeline end to end.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covering::{joukowski_fixture, Varsigma};
use crate::error::Result;
use crate::fuchsian::{Character, GroupPresentation};
use crate::green::GreenFunction;
use crate::kernels::{spectral_oracle_trivial, HardySpace, Normalization};
use crate::multiplier::{is_schur_multiplier, roundtrip_check, MultiplierCandidate, RoundtripConfig};
use crate::schur::{
    extend_schur_from_samples, gram_psd_check, hardy_isometry_check, KernelCombination, SamplingGrid, DEFAULT_PSD_TOL,
};
use crate::{evaluator, io};

pub const DEFAULT_SEED: u64 = 0xA11CE;

/// The fixture Hardy space `H₂` with its Szegő data.
pub fn fixture_space() -> HardySpace {
    let green = GreenFunction::at_origin(&GroupPresentation::trivial(), 0).expect("trivial group");
    HardySpace::new(spectral_oracle_trivial(), green, joukowski_fixture()).expect("fixture data is valid")
}

/// `ς(λ)`: the root inside the disk of `z² − 2τz + 1`, `τ = −i(λ − 1)/(λ + 1)`.
pub fn varsigma_closed(lambda: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let tau = -Complex64::i() * (lambda - one) / (lambda + one);
    let root = (tau * tau - one).sqrt();
    let (z1, z2) = (tau + root, tau - root);
    if z1.norm() < z2.norm() {
        z1
    } else {
        z2
    }
}

/// `𝒮_α(λ) = S_α(ς(λ))` with `S_α(z) = (1 − iz)/(1 + iz)`.
pub fn schur_closed(lambda: Complex64) -> Complex64 {
    let z = varsigma_closed(lambda);
    (Complex64::new(1.0, 0.0) - Complex64::i() * z) / (Complex64::new(1.0, 0.0) + Complex64::i() * z)
}

#[derive(Debug, Clone, Copy)]
pub struct FixtureConfig {
    pub normalization: Normalization,
    pub seed: u64,
    /// Points per side of the kernel-collapse grid.
    pub grid_n: usize,
    pub tol: f64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            normalization: Normalization::Sqrt2,
            seed: DEFAULT_SEED,
            grid_n: 20,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub metric: f64,
    pub threshold: f64,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureSummary {
    pub fixture: String,
    pub normalization: Normalization,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub first_failure: Option<String>,
}

impl FixtureSummary {
    pub fn to_json(&self) -> String {
        io::to_json_string(self).expect("summary serializes")
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn at_most(&mut self, name: &str, metric: f64, threshold: f64) {
        self.0.push(Check {
            name: name.into(),
            pass: metric <= threshold,
            metric,
            threshold,
            detail: None,
        });
    }

    fn flag(&mut self, name: &str, pass: bool, metric: f64, detail: Option<String>) {
        self.0.push(Check {
            name: name.into(),
            pass,
            metric,
            threshold: f64::NAN,
            detail,
        });
    }

    fn error(&mut self, name: &str, err: crate::Error) {
        self.0.push(Check {
            name: name.into(),
            pass: false,
            metric: f64::NAN,
            threshold: f64::NAN,
            detail: Some(err.to_string()),
        });
    }
}

/// `n` points with radii evenly spaced in `[0.05, 0.9]` and golden-angle
/// arguments.
pub fn collapse_points(n: usize) -> Vec<Complex64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let r = if n > 1 {
                0.05 + 0.85 * k as f64 / (n - 1) as f64
            } else {
                0.5
            };
            Complex64::from_polar(r, 0.3 + golden * k as f64)
        })
        .collect()
}

fn szego(z: Complex64, w: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - z * w.conj()).inv()
}

fn max_error<F: Fn(Complex64, Complex64) -> Result<Complex64>>(points: &[Complex64], f: F) -> Result<f64> {
    let mut worst = 0.0f64;
    for &z in points {
        for &w in points {
            worst = worst.max((f(z, w)? - szego(z, w)).norm());
        }
    }
    Ok(worst)
}

/// Runs every fixture check; the result depends only on `cfg`.
pub fn run_fixture_suite(cfg: &FixtureConfig) -> FixtureSummary {
    let space = fixture_space();
    let cov = joukowski_fixture();
    let group = GroupPresentation::trivial();
    let mut checks = Checks(Vec::new());
    let points = collapse_points(cfg.grid_n);
    let c = Complex64::new;

    match max_error(&points, |z, w| space.kernel_structure(z, w)) {
        Ok(e) => checks.at_most("kernel_collapse", e, cfg.tol),
        Err(e) => checks.error("kernel_collapse", e),
    }
    match max_error(&points, |z, w| space.kernel_rewritten(z, w, cfg.normalization)) {
        Ok(e) => checks.at_most("rewritten_collapse", e, cfg.tol),
        Err(e) => checks.error("rewritten_collapse", e),
    }
    let ratio = points
        .iter()
        .flat_map(|&z| points.iter().map(move |&w| (z, w)))
        .map(|(z, w)| Ok((space.kernel_rewritten(z, w, cfg.normalization)? / space.kernel_structure(z, w)?).re))
        .collect::<Result<Vec<f64>>>();
    match ratio {
        Ok(r) => {
            let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let uniform = hi - lo <= 1e-8;
            let pass = uniform && (hi - 1.0).abs() <= 1e-8;
            let detail = if pass {
                None
            } else if uniform {
                Some(format!(
                    "uniform factor-{:.6} mismatch between the rewritten and structure kernels",
                    hi
                ))
            } else {
                Some(format!("non-uniform ratio in [{lo}, {hi}]"))
            };
            checks.flag("normalization_ratio", pass, hi, detail);
        }
        Err(e) => checks.error("normalization_ratio", e),
    }

    match space.ab(c(0.0, -0.5)) {
        Ok((a, b)) => checks.at_most("ab_values", (a - c(0.0, 1.5)).norm() + (b - c(0.0, 0.5)).norm(), 1e-14),
        Err(e) => checks.error("ab_values", e),
    }
    match space.s_alpha(c(0.0, -0.5)) {
        Ok(s) => checks.at_most("s_alpha_value", (s - 1.0 / 3.0).norm(), 1e-14),
        Err(e) => checks.error("s_alpha_value", e),
    }

    let vs = match Varsigma::new(&cov, &group, 0) {
        Ok(vs) => vs,
        Err(e) => {
            checks.error("varsigma_inversion", e);
            return finish(cfg, checks);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(10);
    let mut worst = 0.0f64;
    let mut closed = 0.0f64;
    let mut failure = None;
    for _ in 0..200 {
        let l = Complex64::from_polar(
            0.95 * rng.random::<f64>().sqrt(),
            std::f64::consts::TAU * rng.random::<f64>(),
        );
        match vs.invert(l).and_then(|z| Ok((z, space.sigma(z)?))) {
            Ok((z, s)) => {
                worst = worst.max((s - l).norm());
                closed = closed.max((z - varsigma_closed(l)).norm());
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    match failure {
        Some(e) => checks.error("varsigma_inversion", e),
        None => {
            checks.at_most("varsigma_inversion", worst, 1e-10);
            checks.at_most("varsigma_closed_form", closed, 1e-9);
        }
    }
    match vs.invert(c(1.0 / 7.0, 0.0)) {
        Ok(z) => checks.at_most("varsigma_value", (z - c(0.0, -0.5)).norm(), 1e-10),
        Err(e) => checks.error("varsigma_value", e),
    }

    match SamplingGrid::disk(50, 0.95, cfg.seed, 11)
        .and_then(|g| gram_psd_check(|z, w| space.kernel_structure(z, w), &g, DEFAULT_PSD_TOL))
    {
        Ok(r) => checks.flag("szego_gram_psd", r.pass, r.min_eig, None),
        Err(e) => checks.error("szego_gram_psd", e),
    }

    let mut nodes = vec![c(1.0 / 7.0, 0.0)];
    nodes.extend(crate::schur::ring_nodes(0.5));
    let samples = nodes
        .iter()
        .map(|&l| Ok((l, space.s_alpha(vs.invert(l)?)?)))
        .collect::<Result<Vec<_>>>();
    match samples.and_then(|s| extend_schur_from_samples(&s)) {
        Ok(ext) => {
            checks.at_most(
                "extension_value",
                (ext.scalar(c(1.0 / 7.0, 0.0)) - 1.0 / 3.0).norm(),
                1e-8,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(12);
            let held_out = (0..100)
                .map(|_| {
                    let l = Complex64::from_polar(
                        0.5 * rng.random::<f64>().sqrt(),
                        std::f64::consts::TAU * rng.random::<f64>(),
                    );
                    Ok((ext.scalar(l) - space.s_alpha(vs.invert(l)?)?).norm())
                })
                .collect::<Result<Vec<f64>>>();
            match held_out {
                Ok(errs) => checks.at_most("extension_holdout", errs.into_iter().fold(0.0, f64::max), 1e-6),
                Err(e) => checks.error("extension_holdout", e),
            }
        }
        Err(e) => checks.error("extension_value", e),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(13);
    let mut coeffs = Vec::new();
    let mut mus = Vec::new();
    for _ in 0..5 {
        mus.push(Complex64::from_polar(
            0.8 * rng.random::<f64>().sqrt(),
            std::f64::consts::TAU * rng.random::<f64>(),
        ));
        coeffs.push(c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    }
    match KernelCombination::new(coeffs, mus).and_then(|f| hardy_isometry_check(&f, &space, &vs)) {
        Ok(chk) => checks.at_most("hardy_isometry", (chk.lhs - chk.rhs).abs() / chk.lhs.max(1.0), 1e-9),
        Err(e) => checks.error("hardy_isometry", e),
    }

    let trivial = Character::trivial(0);
    let shift = MultiplierCandidate::new("z", trivial.clone(), evaluator(|z| z));
    let double = MultiplierCandidate::new("2z", trivial.clone(), evaluator(|z| z * 2.0));
    let grids = (0..3)
        .map(|k| SamplingGrid::omega_plus(&cov, 50, 0.95, cfg.seed, 20 + k))
        .collect::<Result<Vec<_>>>();
    match grids.and_then(|g| is_schur_multiplier(&shift, &space, &space, &g, DEFAULT_PSD_TOL)) {
        Ok(r) => checks.flag("multiplier_shift", r.pass && r.min_eig >= -1e-10, r.min_eig, None),
        Err(e) => checks.error("multiplier_shift", e),
    }
    match SamplingGrid::disk(20, 0.5, cfg.seed, 23)
        .and_then(|g| g.with_point(c(0.9, 0.0)))
        .and_then(|g| is_schur_multiplier(&double, &space, &space, &[g], DEFAULT_PSD_TOL))
    {
        Ok(r) => checks.flag(
            "multiplier_double_rejected",
            !r.pass && r.min_eig <= -1.0,
            r.min_eig,
            None,
        ),
        Err(e) => checks.error("multiplier_double_rejected", e),
    }

    let rt_cfg = RoundtripConfig {
        seed: cfg.seed,
        ..RoundtripConfig::default()
    };
    let constant = MultiplierCandidate::new("0.3", trivial, evaluator(|_| Complex64::new(0.3, 0.0)));
    for (name, cand) in [("roundtrip_shift", &shift), ("roundtrip_constant", &constant)] {
        let rep = roundtrip_check(cand, &space, &space, &vs, &rt_cfg);
        let metric = rep.residuals.as_ref().map_or(f64::NAN, |r| r.s_max.max(r.s_alpha_max));
        let detail = rep.first_failure().map(|s| format!("stage {s} failed"));
        checks.0.push(Check {
            name: name.into(),
            pass: rep.pass,
            metric,
            threshold: rt_cfg.tol,
            detail,
        });
    }
    finish(cfg, checks)
}

fn finish(cfg: &FixtureConfig, checks: Checks) -> FixtureSummary {
    let first_failure = checks.0.iter().find(|c| !c.pass).map(|c| c.name.clone());
    FixtureSummary {
        fixture: "joukowski-szego".into(),
        normalization: cfg.normalization,
        seed: cfg.seed,
        pass: first_failure.is_none(),
        first_failure,
        checks: checks.0,
    }
}
