//! Acceptance criteria. Each test writes one `criterion N ... PASS|FAIL` line
//! straight to stderr so the lines show up without `--nocapture`.

use std::io::Write;
use std::time::Instant;

use chardy::covering::{joukowski_fixture, Varsigma};
use chardy::fixture::{collapse_points, fixture_space, run_fixture_suite, FixtureConfig};
use chardy::fuchsian::Character;
use chardy::green::{boundary_norm_h2, circle_probes, poincare_project};
use chardy::kernels::HardySpace;
use chardy::linalg::{operator_norm, CMat};
use chardy::multiplier::{
    is_schur_multiplier, leech_solve, multiplier_kernel, roundtrip_check, LeechProblem, MultiplierCandidate,
    RoundtripConfig,
};
use chardy::schur::{extend_schur_from_samples, ring_nodes, SamplingGrid, DEFAULT_PSD_TOL};
use chardy::{evaluator, Complex64, CoveringMap, Error, GreenFunction, GroupPresentation, Normalization, SpectralData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0xA11CE;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(n: usize, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "criterion {n:>2} {name}: {} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn disk_point(r: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(
        radius * r.random::<f64>().sqrt(),
        std::f64::consts::TAU * r.random::<f64>(),
    )
}

fn szego(z: Complex64, w: Complex64) -> Complex64 {
    (c(1.0, 0.0) - z * w.conj()).inv()
}

#[test]
fn criterion_01_fixture_kernel_collapse() {
    let start = Instant::now();
    let space = fixture_space();
    let pts = collapse_points(20);
    let mut worst = 0.0f64;
    for &z in &pts {
        for &w in &pts {
            worst = worst.max((space.kernel_structure(z, w).unwrap() - szego(z, w)).norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-10 && secs < 1.0;
    report(
        1,
        "fixture kernel collapse",
        pass,
        &format!("max error {worst:.2e} on 20x20 grid, {secs:.3} s"),
    );
    assert!(pass);
}

fn random_polynomial(r: &mut ChaCha8Rng, degree: usize) -> Vec<Complex64> {
    (0..=degree)
        .map(|_| c(r.random::<f64>() * 2.0 - 1.0, r.random::<f64>() * 2.0 - 1.0))
        .collect()
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a)
}

fn injected_space(r: &mut ChaCha8Rng, k: usize) -> HardySpace {
    let group = if k.is_multiple_of(2) {
        GroupPresentation::trivial()
    } else {
        GroupPresentation::cyclic_hyperbolic(1.0)
    };
    let green = GreenFunction::at_origin(&group, 6).unwrap();
    let fixture = joukowski_fixture();
    let cov = CoveringMap::new(
        "joukowski",
        evaluator(move |z| fixture.zmap(z).unwrap_or(c(f64::NAN, f64::NAN))),
        evaluator(|z| (c(1.0, 0.0) - (z * z).inv()) * 0.5),
        c(0.5, 0.0),
        green.derivative(c(0.0, 0.0)),
    )
    .unwrap();
    let pa = random_polynomial(r, 3);
    let pm = random_polynomial(r, 3);
    let c_alpha = 0.1 + 2.0 * r.random::<f64>();
    let spec = SpectralData::unchecked(
        format!("injected-{k}"),
        Character::trivial(group.rank()),
        evaluator(move |z| horner(&pa, z)),
        evaluator(move |z| horner(&pm, z)),
        c_alpha,
    )
    .unwrap();
    HardySpace::new(spec, green, cov).unwrap()
}

#[test]
fn criterion_02_structure_equals_rewritten() {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    let (mut ratio_lo, mut ratio_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut pairs = 0;
    for k in 0..5 {
        let space = injected_space(&mut r, k);
        let cov = space.cov().clone();
        let mut done = 0;
        while done < 100 {
            let (z, w) = (disk_point(&mut r, 0.9), disk_point(&mut r, 0.9));
            // Stay off the removable-singularity locus 𝔷(z) = conj 𝔷(w).
            if (cov.zmap(z).unwrap() - cov.zmap(w).unwrap().conj()).norm() < 1e-3 {
                continue;
            }
            let s = space.kernel_structure(z, w).unwrap();
            let good = space.kernel_rewritten(z, w, Normalization::Sqrt2).unwrap();
            let bad = space.kernel_rewritten(z, w, Normalization::Two).unwrap();
            worst = worst.max((good - s).norm() / s.norm().max(1.0));
            let ratio = (bad / good).re;
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
            done += 1;
            pairs += 1;
        }
    }
    let uniform_two = (ratio_lo - 2.0).abs() <= 1e-9 && (ratio_hi - 2.0).abs() <= 1e-9;
    let pass = worst <= 1e-9 && uniform_two;
    report(
        2,
        "structure formula equals rewritten form",
        pass,
        &format!(
            "max rel diff {worst:.2e} over {pairs} pairs; constant 2 gives ratio in [{ratio_lo:.12}, {ratio_hi:.12}]"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_03_green_automorphy() {
    let start = Instant::now();
    let depth = 12;
    let group = GroupPresentation::cyclic_hyperbolic(1.0);
    let green = GreenFunction::at_origin(&group, depth).unwrap();
    let probes = circle_probes(8, 0.5, 0.1);
    let mu = green.generator_character(&probes).unwrap();
    let tail = green.tail_bound();
    let mut worst = 0.0f64;
    let mut by_len = [0.0f64; 7];
    for w in green.truncation().elements.iter().filter(|w| w.len() <= 6) {
        let res = green.automorphy_residual(w, mu.eval(w).unwrap(), &probes);
        by_len[w.len()] = by_len[w.len()].max(res);
        worst = worst.max(res);
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 10.0 * tail && tail <= 1e-6 && secs < 5.0;
    let per_len: Vec<String> = (1..=6)
        .map(|m| {
            format!(
                "|w|={m}: {:.1e} vs depth-{} tail {:.1e}",
                by_len[m],
                depth - m,
                green.tail_beyond(depth - m)
            )
        })
        .collect();
    report(
        3,
        "green function automorphy",
        pass,
        &format!(
            "max residual {worst:.2e}, tail_bound {tail:.2e}, {secs:.2} s; {}",
            per_len.join("; ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_poincare_trivial_group() {
    let green = GreenFunction::at_origin(&GroupPresentation::trivial(), 0).unwrap();
    let alpha = Character::trivial(0);
    let one = |_: Complex64| c(1.0, 0.0);
    let mut r = rng(4);
    let (mut worst, mut at_zero, mut norm_gap) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for degree in 0..=8 {
        let p = random_polynomial(&mut r, degree);
        let h = |z: Complex64| horner(&p, z);
        for _ in 0..20 {
            let z = disk_point(&mut r, 0.95);
            worst = worst.max((poincare_project(&green, &alpha, &one, &h, z).unwrap() - h(z)).norm());
        }
        let f0 = poincare_project(&green, &alpha, &one, &h, c(0.0, 0.0)).unwrap();
        at_zero = at_zero.max((f0 - h(c(0.0, 0.0))).norm());
        let ph = |z: Complex64| poincare_project(&green, &alpha, &one, &h, z).unwrap();
        let gap = boundary_norm_h2(&ph, 1024).unwrap() - boundary_norm_h2(&h, 1024).unwrap();
        norm_gap = norm_gap.max(gap);
    }
    let pass = worst <= 1e-12 && at_zero <= 1e-8 && norm_gap <= 1e-6;
    report(
        4,
        "poincare operator on the trivial group",
        pass,
        &format!("|Ph - h| {worst:.2e}, |f(0) - h(0)| {at_zero:.2e}, norm gap {norm_gap:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_multiplier_detection() {
    let space = fixture_space();
    let cov = joukowski_fixture();
    let trivial = Character::trivial(0);
    let shift = MultiplierCandidate::new("z", trivial.clone(), evaluator(|z| z));
    let double = MultiplierCandidate::new("2z", trivial, evaluator(|z| z * 2.0));
    let grids: Vec<_> = (0..3)
        .map(|k| SamplingGrid::omega_plus(&cov, 50, 0.95, SEED, k).unwrap())
        .collect();
    let ok = is_schur_multiplier(&shift, &space, &space, &grids, DEFAULT_PSD_TOL).unwrap();
    let grid = SamplingGrid::omega_plus(&cov, 49, 0.95, SEED, 3)
        .unwrap()
        .with_point(c(0.9, 0.0))
        .unwrap();
    let bad = is_schur_multiplier(&double, &space, &space, &[grid], DEFAULT_PSD_TOL).unwrap();
    let diag = multiplier_kernel(&double, &space, &space, c(0.9, 0.0), c(0.9, 0.0))
        .unwrap()
        .re;
    let pass =
        ok.pass && ok.min_eig >= -1e-10 && !bad.pass && bad.min_eig <= -1.0 && (diag + 11.789473684).abs() < 1e-6;
    report(
        5,
        "multiplier detection",
        pass,
        &format!(
            "s=z min_eig {:.2e}; s=2z min_eig {:.3}, K(0.9,0.9) = {diag:.6}",
            ok.min_eig, bad.min_eig
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_schur_extension() {
    let space = fixture_space();
    let cov = joukowski_fixture();
    let vs = Varsigma::new(&cov, &GroupPresentation::trivial(), 0).unwrap();
    let mut nodes = vec![c(1.0 / 7.0, 0.0)];
    nodes.extend(ring_nodes(0.5));
    let samples: Vec<_> = nodes
        .iter()
        .map(|&l| (l, space.s_alpha(vs.invert(l).unwrap()).unwrap()))
        .collect();
    let ext = extend_schur_from_samples(&samples).unwrap();
    let mut r = rng(6);
    let mut held_out = 0.0f64;
    for _ in 0..100 {
        let l = disk_point(&mut r, 0.5);
        held_out = held_out.max((ext.scalar(l) - space.s_alpha(vs.invert(l).unwrap()).unwrap()).norm());
    }
    let at_node = (ext.scalar(c(1.0 / 7.0, 0.0)) - 1.0 / 3.0).norm();
    let pass = held_out <= 1e-6 && at_node <= 1e-8;
    report(
        6,
        "schur extension from samples",
        pass,
        &format!(
            "{} samples, held-out error {held_out:.2e}, |S(1/7) - 1/3| = {at_node:.2e}",
            samples.len()
        ),
    );
    assert!(pass);
}

fn random_sigma(r: &mut ChaCha8Rng, norm: f64) -> CMat {
    let m = CMat::from_fn(2, 2, |_, _| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5));
    let scale = norm / operator_norm(&m);
    m * c(scale, 0.0)
}

fn leech_instance(r: &mut ChaCha8Rng, sigma0: &CMat) -> LeechProblem {
    let nodes: Vec<_> = (0..8).map(|_| disk_point(r, 0.9)).collect();
    let p1 = random_polynomial(r, 3);
    let p2 = random_polynomial(r, 3);
    let scale = 1.0 / (p1.iter().chain(&p2).map(|a| a.norm()).sum::<f64>());
    let mut a_rows = Vec::new();
    let mut b_rows = Vec::new();
    for &l in &nodes {
        let a = CMat::from_row_slice(1, 2, &[horner(&p1, l) * scale, horner(&p2, l) * scale]);
        let b = &a * sigma0;
        a_rows.push([a[(0, 0)], a[(0, 1)]]);
        b_rows.push([b[(0, 0)], b[(0, 1)]]);
    }
    LeechProblem::new(nodes, a_rows, b_rows)
}

#[test]
fn criterion_07_leech_solver() {
    let start = Instant::now();
    let mut r = rng(7);
    let (mut residual, mut norm) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let target = 0.95 * r.random::<f64>() + 0.01;
        let sigma0 = random_sigma(&mut r, target);
        let problem = leech_instance(&mut r, &sigma0);
        let sigma = leech_solve(&problem).unwrap();
        residual = residual.max(sigma.node_residual());
        let test: Vec<_> = (0..200).map(|_| disk_point(&mut r, 0.999)).collect();
        norm = norm.max(sigma.sampled_norm(&test));
    }
    let mut rejected = 0;
    let mut worst_min_eig = f64::NEG_INFINITY;
    for _ in 0..20 {
        let problem = loop {
            let target = 1.2 + 2.0 * r.random::<f64>();
            let sigma0 = random_sigma(&mut r, target);
            let p = leech_instance(&mut r, &sigma0);
            if p.solvability().unwrap().min_eig <= -1e-3 {
                break p;
            }
        };
        worst_min_eig = worst_min_eig.max(problem.solvability().unwrap().min_eig);
        if matches!(leech_solve(&problem), Err(Error::Infeasible { .. })) {
            rejected += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = residual <= 1e-8 && norm <= 1.0 + 1e-8 && rejected == 20 && secs < 10.0;
    report(
        7,
        "leech solver",
        pass,
        &format!(
            "feasible: residual {residual:.2e}, sampled norm {norm:.12}; infeasible rejected {rejected}/20 (min eig <= {worst_min_eig:.2e}); {secs:.2} s"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_roundtrip() {
    let space = fixture_space();
    let cov = joukowski_fixture();
    let vs = Varsigma::new(&cov, &GroupPresentation::trivial(), 0).unwrap();
    let cfg = RoundtripConfig::default();
    let mut details = Vec::new();
    let mut pass = true;
    for (label, s) in [
        (
            "z",
            MultiplierCandidate::new("z", Character::trivial(0), evaluator(|z| z)),
        ),
        (
            "0.3",
            MultiplierCandidate::new("0.3", Character::trivial(0), evaluator(|_| c(0.3, 0.0))),
        ),
    ] {
        let rep = roundtrip_check(&s, &space, &space, &vs, &cfg);
        match &rep.residuals {
            Some(res) => {
                pass &= rep.pass && res.s_max <= 1e-5 && res.s_alpha_max <= 1e-5;
                details.push(format!(
                    "s={label}: s error {:.2e}, S_alpha error {:.2e}",
                    res.s_max, res.s_alpha_max
                ));
            }
            None => {
                pass = false;
                details.push(format!("s={label}: halted at {:?}", rep.first_failure()));
            }
        }
    }
    report(8, "multiplier round trip", pass, &details.join("; "));
    assert!(pass);
}

#[test]
fn criterion_09_varsigma_inversion() {
    let space = fixture_space();
    let cov = joukowski_fixture();
    let vs = Varsigma::new(&cov, &GroupPresentation::trivial(), 0).unwrap();
    let mut r = rng(9);
    let (mut worst, mut ambiguous, mut certified) = (0.0f64, 0, 0);
    while certified < 200 {
        let l = disk_point(&mut r, 0.95);
        match vs.invert(l) {
            Ok(z) => {
                worst = worst.max((space.sigma(z).unwrap() - l).norm());
                certified += 1;
            }
            Err(Error::AmbiguousRoot(..)) => {
                ambiguous += 1;
                certified += 1;
            }
            Err(e) => panic!("{e}"),
        }
    }
    let pass = worst <= 1e-10 && ambiguous == 0;
    report(
        9,
        "varsigma inversion",
        pass,
        &format!("max |sigma(varsigma(l)) - l| {worst:.2e}, ambiguous roots {ambiguous}"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_determinism() {
    let cfg = FixtureConfig::default();
    let a = run_fixture_suite(&cfg).to_json();
    let b = run_fixture_suite(&cfg).to_json();
    let pass = a == b;
    report(
        10,
        "deterministic fixture summary",
        pass,
        &format!("{} bytes, identical: {pass}", a.len()),
    );
    assert!(pass);
}
