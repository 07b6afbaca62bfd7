//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test -p volcone-core --test acceptance -- --nocapture`.
//!
//! Tolerances are pinned here and nowhere else:
//! exact criteria use rational equality; float criteria carry the stated
//! slack next to the assertion.

use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use volcone_core::lipschitz::{
    chain_inequality_check, empirical_lipschitz, lipschitz_certificate,
    lipschitz_certificate_with_sup, verify_axioms, ConeFunction,
};
use volcone_core::probes::{
    boundary_lipschitz_probe, concavity_check, hessian_probe, kt_probe,
    lipschitz_gradient_estimate, ConeScalar,
};
use volcone_core::rational::rat_to_f64;
use volcone_core::sample::{self, SampleBox};
use volcone_core::volume::WallKind;
use volcone_core::wolfe::{
    calibrate_line, segment_minus, segment_minus_derivative, segment_plus,
    segment_plus_derivative, wolfe_vol, BundleModel,
};
use volcone_core::{
    builtin_geometry, builtin_names, builtin_toric, chamber_scan, grad_vol, rat, rat_int,
    vol, zariski_decompose, DivisorClass, Rat, SurfaceGeometry,
};

/// Exact-equality criteria: no tolerance.
/// Lattice-count estimate at m = 200: relative tolerance.
const EMPIRICAL_REL_TOL: f64 = 5e-2;
/// Gradient vs central finite differences (step 1/10^4): relative tolerance.
const GRADIENT_FD_REL_TOL: f64 = 1e-6;
/// Gradient-difference quotient bound on the certification box.
const C11_QUOTIENT_SLACK: f64 = 1e-9;
/// Hessian jump and boundedness tolerance.
const HESSIAN_TOL: f64 = 1e-3;
/// Concavity margin floor (float sampling slack on exact statements).
const CONCAVITY_TOL: f64 = 1e-9;
/// Wolfe finite-difference vs closed-form derivative, relative.
const WOLFE_FD_REL_TOL: f64 = 1e-6;
/// Boundary difference quotient bound and slack.
const BOUNDARY_QUOTIENT_BOUND: f64 = 4.0;
const BOUNDARY_QUOTIENT_SLACK: f64 = 1e-6;
/// One-sided derivative mismatch detection threshold at the boundary.
const BOUNDARY_MISMATCH_MIN: f64 = 0.1;

fn pass(criterion: u32, title: &str, detail: String) {
    println!("acceptance {criterion:02} {title}: PASS ({detail})");
}

/// Random ray coefficients with denominators in {1, 2, 4}: at m = 200 the
/// scaled polytope has integer facet offsets.
fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rat> {
    (0..n)
        .map(|_| {
            let num = rng.gen_range(0..=8i64);
            let den = [1i64, 2, 4][rng.gen_range(0..3usize)];
            rat(num, den)
        })
        .collect()
}

#[test]
fn criterion_01_toric_oracle_equivalence() {
    let mut max_rel = 0.0f64;
    let mut checked = 0u32;
    for name in volcone_core::builtin_toric_names() {
        let t = builtin_toric(&name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + checked as u64);
        let mut found = 0;
        let mut tries = 0;
        while found < 200 {
            tries += 1;
            assert!(tries < 20_000, "sampler starved on {name}");
            let coeffs = random_coeffs(&mut rng, t.rays().len());
            let exact = t.volume_exact(&coeffs).unwrap();
            if exact < rat(1, 2) {
                continue; // keep unit-scale big classes
            }
            found += 1;
            // exact rational equality of the two volume routes
            let class = t.class_of(&coeffs).unwrap();
            assert_eq!(
                vol(&class).unwrap(),
                exact,
                "{name}: zariski vs polytope at {class}"
            );
            // lattice-count estimate at m = 200
            let est = t.volume_empirical(&coeffs, 200).unwrap();
            let rel = (est - rat_to_f64(&exact)).abs() / rat_to_f64(&exact);
            assert!(
                rel <= EMPIRICAL_REL_TOL,
                "{name}: estimate {est} vs exact {exact} (rel {rel})"
            );
            max_rel = max_rel.max(rel);
        }
        checked += 1;
    }
    pass(
        1,
        "toric oracle equivalence",
        format!("6 geometries x 200 classes exact; max count rel err {max_rel:.2e}"),
    );
}

/// The whole central stencil must be big with one support set, so the class
/// sits at least two steps inside its chamber.
fn interior_big_point(
    rng: &mut ChaCha8Rng,
    geom: &SurfaceGeometry,
    sbox: &SampleBox,
    step: &Rat,
) -> DivisorClass {
    'outer: for _ in 0..10_000 {
        let x = sample::class_in_box(rng, geom, sbox);
        let Ok(z) = zariski_decompose(&x) else {
            continue;
        };
        if !z.positive_square().is_positive() {
            continue;
        }
        let support = z.support().to_vec();
        for i in 0..geom.rank() {
            for sgn in [1i64, -1] {
                let shifted = &x + &geom.basis_class(i).scaled(&(step * rat_int(sgn)));
                match zariski_decompose(&shifted) {
                    Ok(zs)
                        if zs.positive_square().is_positive() && zs.support() == support => {}
                    _ => continue 'outer,
                }
            }
        }
        return x;
    }
    panic!("no interior big point found in {}", geom.name());
}

#[test]
fn criterion_02_gradient_formula_vs_finite_differences() {
    let step = rat(1, 10_000);
    let mut max_rel = 0.0f64;
    for name in ["bl1_p2", "bl2_p2", "hirzebruch_2"] {
        let geom = builtin_geometry(name).unwrap();
        let sbox = sample::default_box(&geom);
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        for _ in 0..100 {
            let x = interior_big_point(&mut rng, &geom, &sbox, &step);
            let grad = grad_vol(&x).unwrap();
            let mut num = Rat::zero();
            let mut den = Rat::zero();
            for i in 0..geom.rank() {
                let e = geom.basis_class(i);
                let plus = vol(&(&x + &e.scaled(&step))).unwrap();
                let minus = vol(&(&x - &e.scaled(&step))).unwrap();
                let fd = (plus - minus) / (&step * rat_int(2));
                num += (fd - &grad.coords()[i]).abs();
                den += grad.coords()[i].abs();
            }
            assert!(den.is_positive(), "gradient vanishes at a big point");
            let rel = rat_to_f64(&(num / den));
            assert!(
                rel <= GRADIENT_FD_REL_TOL,
                "{name}: gradient FD mismatch rel {rel}"
            );
            max_rel = max_rel.max(rel);
        }
    }
    pass(
        2,
        "gradient formula vs finite differences",
        format!("3 geometries x 100 interior points, max rel err {max_rel:.2e}"),
    );
}

#[test]
fn criterion_03_c11_certification_on_the_blowup_box() {
    let geom = builtin_geometry("bl1_p2").unwrap();
    // gradient-difference quotients on the box, cross-wall pairs included
    let region = SampleBox::parse("3/2:5/2,-1/2:1/2").unwrap();
    let bound = rat_int(2);
    let report =
        lipschitz_gradient_estimate(&geom, &region, 10_000, 300, Some(&bound)).unwrap();
    assert!(report.passed, "quotient bound failed: {report:?}");
    let max_q = report.value("max_quotient").unwrap();
    assert!(max_q <= 2.0 + C11_QUOTIENT_SLACK);

    // Hessian entries along the exceptional direction: bounded by 2, jump 2
    // across b = 0
    let base = geom.class_i64(&[2, 0]);
    let line = -&geom.basis_class(1);
    let e = geom.basis_class(1);
    let grid: Vec<Rat> = (0..20).map(|k| rat(-475 + 50 * k, 1000)).collect();
    let h = hessian_probe(&base, &line, &grid, &e, &e, &rat(1, 100)).unwrap();
    let sup = h.value("sup_abs_entry").unwrap();
    let jump = h.value("largest_adjacent_jump").unwrap();
    let loc = h.value("jump_location").unwrap();
    assert!(sup <= 2.0 + HESSIAN_TOL, "sup |hessian| = {sup}");
    assert!((jump - 2.0).abs() <= HESSIAN_TOL, "jump = {jump}");
    assert!(loc.abs() <= 0.025 + 1e-12, "jump located at {loc}");
    pass(
        3,
        "C^{1,1} certification",
        format!("max quotient {max_q:.12}, hessian sup {sup}, wall jump {jump} near b = {loc}"),
    );
}

#[test]
fn criterion_04_concavity_margins() {
    let mut details = Vec::new();
    for name in ["bl1_p2", "bl2_p2"] {
        let geom = builtin_geometry(name).unwrap();
        let region = sample::default_box(&geom);
        let sqrt_vol =
            concavity_check(&geom, &ConeScalar::Vol, &rat(1, 2), &region, 10_000, 400).unwrap();
        assert!(sqrt_vol.passed, "{name} sqrt-vol: {sqrt_vol:?}");
        let m1 = sqrt_vol.value("min_margin").unwrap();
        assert!(m1 >= -CONCAVITY_TOL);

        let pairing = ConeScalar::DualPairing(geom.basis_class(0));
        let linear =
            concavity_check(&geom, &pairing, &rat_int(1), &region, 10_000, 401).unwrap();
        assert!(linear.passed, "{name} dual pairing: {linear:?}");
        let m2 = linear.value("min_margin").unwrap();
        assert!(m2 >= -CONCAVITY_TOL);
        details.push(format!("{name}: {m1:.1e}/{m2:.1e}"));
    }
    pass(
        4,
        "concavity margins",
        format!("min margins {}", details.join(", ")),
    );
}

#[test]
fn criterion_05_khovanskii_teissier_exact() {
    let mut worst: Option<Rat> = None;
    for name in builtin_names() {
        let geom = builtin_geometry(&name).unwrap();
        let report = kt_probe(&geom, 10_000, 500).unwrap();
        assert!(report.passed, "{name}: {report:?}");
        let min_margin = report.stat("min_margin").unwrap().exact.clone().unwrap();
        let margin = volcone_core::parse_rat(&min_margin).unwrap();
        assert!(!margin.is_negative(), "{name}: margin {min_margin}");
        worst = Some(match worst {
            None => margin,
            Some(w) => w.min(margin),
        });
    }
    pass(
        5,
        "Khovanskii-Teissier margins",
        format!(
            "8 geometries x 10^4 nef pairs, exact; min margin {}",
            volcone_core::fmt_rat(&worst.unwrap())
        ),
    );
}

type CertificateConfig = (ConeFunction, Vec<Rat>, Rat, Vec<Vec<Rat>>, Option<Rat>);

#[test]
fn criterion_06_lipschitz_certificates() {
    let g = builtin_geometry("bl1_p2").unwrap();
    let std_basis = vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]];
    let configs: Vec<CertificateConfig> = vec![
        (
            ConeFunction::vol_on_big(&g),
            vec![rat_int(2), rat_int(0)],
            rat(1, 2),
            vec![vec![rat_int(1), rat_int(0)], vec![rat_int(1), rat_int(-1)]],
            None,
        ),
        (
            ConeFunction::monomial(1, 1),
            vec![rat_int(1), rat_int(1)],
            rat(1, 2),
            std_basis.clone(),
            Some(rat(25, 16)),
        ),
        (
            ConeFunction::linear_form(rat_int(2), rat_int(1)),
            vec![rat_int(1), rat_int(1)],
            rat(1, 2),
            std_basis,
            Some(rat_int(4)),
        ),
    ];
    let mut details = Vec::new();
    for (f, center, eps, basis, sup) in configs {
        let region = SampleBox::new(
            center
                .iter()
                .map(|c| (c - rat(1, 8), c + rat(1, 8)))
                .collect(),
        );
        let axioms = verify_axioms(&f, &region, 500, 600).unwrap();
        assert!(axioms.passed, "{}: axioms {axioms:?}", f.label);
        let cert = match &sup {
            Some(s) => lipschitz_certificate_with_sup(&f, &center, &eps, &basis, s).unwrap(),
            None => lipschitz_certificate(&f, &center, &eps, &basis, 2000, 601).unwrap(),
        };
        let mut max_q = 0.0f64;
        for seed in 0..5u64 {
            let emp = empirical_lipschitz(&f, &cert, 2_000, 610 + seed).unwrap();
            assert!(
                emp.passed,
                "{}: quotient exceeded L = {} ({emp:?})",
                f.label, cert.constant
            );
            max_q = max_q.max(emp.value("max_quotient").unwrap());
        }
        let chain = chain_inequality_check(&f, &cert, 1_000, 620).unwrap();
        assert!(chain.passed, "{}: chain {chain:?}", f.label);
        details.push(format!(
            "{}: max q {max_q:.4} <= L {:.4}",
            f.label, cert.constant
        ));
    }
    pass(6, "Lipschitz certificates", details.join("; "));
}

#[test]
fn criterion_07_wolfe_calibration_and_segment_identities() {
    // kappa_1 = 2 fits ten test classes on each of F1 and F2, exactly
    let degrees: Vec<Rat> = (0..10).map(rat_int).collect();
    assert_eq!(calibrate_line(1, &degrees).unwrap(), rat_int(2));
    assert_eq!(calibrate_line(2, &degrees).unwrap(), rat_int(2));

    // segment_plus(0) = wolfe_vol(D), exactly
    let model = BundleModel::over_line(1, rat(1, 2)).unwrap();
    assert_eq!(
        segment_plus(&model, &Rat::zero()).unwrap().exact,
        wolfe_vol(&model, &model.d_class()).unwrap().exact
    );
    let g = builtin_geometry("bl1_p2").unwrap();
    let surface = BundleModel::over_surface(&g, g.class_i64(&[2, -1]), g.class_i64(&[1, 0]))
        .unwrap();
    assert_eq!(
        segment_plus(&surface, &Rat::zero()).unwrap().exact,
        wolfe_vol(&surface, &surface.d_class()).unwrap().exact
    );

    // finite differences of both segments match the closed forms at 50 t each
    let h = rat(1, 10_000);
    let mut max_rel = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let minus_model = BundleModel::over_line(1, Rat::zero()).unwrap();
    for k in 0..50 {
        // plus segment on the surface model, t in (2h, 2]
        let t = sample::rat_uniform(&mut rng, &rat(1, 100), &rat_int(2));
        let fd = (segment_plus(&surface, &(&t + &h)).unwrap().exact.unwrap()
            - segment_plus(&surface, &(&t - &h)).unwrap().exact.unwrap())
            / (&h * rat_int(2));
        let closed = segment_plus_derivative(&surface, &t).unwrap();
        let rel = rat_to_f64(&((&fd - &closed).abs())) / rat_to_f64(&closed.abs()).max(1.0);
        assert!(rel <= WOLFE_FD_REL_TOL, "plus segment FD at t = {t}: {rel}");
        max_rel = max_rel.max(rel);

        // minus segment on the line model with Vol_B(D) = 0, t in (h, 1/2 - h)
        let tm = sample::rat_uniform(&mut rng, &rat(1, 100), &rat(48, 100));
        let fdm = (segment_minus(&minus_model, &(&tm + &h)).unwrap().exact.unwrap()
            - segment_minus(&minus_model, &(&tm - &h)).unwrap().exact.unwrap())
            / (&h * rat_int(2));
        let closedm = segment_minus_derivative(&minus_model, &tm).unwrap();
        let relm =
            rat_to_f64(&((&fdm - &closedm).abs())) / rat_to_f64(&closedm.abs()).max(1.0);
        assert!(relm <= WOLFE_FD_REL_TOL, "minus segment FD at t = {tm}: {relm}");
        max_rel = max_rel.max(relm);
        let _ = k;
    }
    pass(
        7,
        "Wolfe calibration and segment identities",
        format!("kappa_1 = 2 on F1/F2; identities exact; FD max rel err {max_rel:.2e}"),
    );
}

#[test]
fn criterion_08_boundary_lipschitz() {
    let g = builtin_geometry("bl1_p2").unwrap();
    let alpha = g.class_i64(&[1, -1]);
    let dirs = vec![g.class_i64(&[1, 1])];
    let report =
        boundary_lipschitz_probe(&alpha, &dirs, 10_000, 800, &rat(1, 4), None).unwrap();
    let max_q = report.value("max_quotient").unwrap();
    assert!(
        max_q <= BOUNDARY_QUOTIENT_BOUND + BOUNDARY_QUOTIENT_SLACK,
        "quotient {max_q}"
    );
    let mismatch = report.value("max_one_sided_mismatch").unwrap();
    assert!(
        mismatch >= BOUNDARY_MISMATCH_MIN,
        "no non-differentiability witness: mismatch {mismatch}"
    );
    pass(
        8,
        "boundary Lipschitz and kink witness",
        format!("max quotient {max_q:.6}, one-sided mismatch {mismatch}"),
    );
}

#[test]
fn criterion_09_chamber_structure() {
    let g = builtin_geometry("bl1_p2").unwrap();
    let alpha = g.class_i64(&[2, 1]);
    let beta = -&g.basis_class(1);
    let report = chamber_scan(&alpha, &beta, &Rat::zero(), &rat_int(4)).unwrap();

    let walls: Vec<Rat> = report.walls.iter().map(|w| w.t.clone()).collect();
    assert_eq!(walls, vec![rat_int(1), rat_int(3)], "wall locations");
    assert_eq!(report.chambers.len(), 3);
    assert_eq!(
        report.chambers[0].poly,
        [rat_int(4), rat_int(0), rat_int(0)]
    );
    assert_eq!(
        report.chambers[1].poly,
        [rat_int(3), rat_int(2), rat_int(-1)]
    );
    assert_eq!(
        report.chambers[2].poly,
        [rat_int(0), rat_int(0), rat_int(0)]
    );

    // interior support wall: value and first derivative match exactly
    let w0 = &report.walls[0];
    assert!(matches!(w0.kind, WallKind::SupportChange { .. }));
    assert!(w0.c1_matched);
    assert_eq!(w0.value_left, w0.value_right);
    assert_eq!(w0.derivative_left, w0.derivative_right);
    // big-cone boundary: value matches exactly; the derivative jump is the
    // expected boundary non-differentiability
    let w1 = &report.walls[1];
    assert!(matches!(w1.kind, WallKind::VolumeBoundary));
    assert_eq!(w1.value_left, w1.value_right);
    assert_eq!(w1.value_left, Rat::zero());
    assert_eq!(w1.derivative_left, rat_int(-4));
    assert_eq!(w1.derivative_right, Rat::zero());

    // third differences of the exact volume vanish identically per chamber
    let delta = rat(1, 16);
    for c in &report.chambers {
        let base = &c.lo + (&c.hi - &c.lo) / rat_int(4);
        let f = |k: i64| {
            let t = &base + &delta * rat_int(k);
            vol(&(&alpha + &beta.scaled(&t))).unwrap()
        };
        let third = f(3) - f(2) * rat_int(3) + f(1) * rat_int(3) - f(0);
        assert_eq!(third, Rat::zero(), "third difference in chamber");
    }
    pass(
        9,
        "chamber structure",
        "walls {1, 3} exact; polynomials 4, 4-(t-1)^2, 0; C^1 at the interior wall".to_string(),
    );
}

#[test]
fn criterion_10_reproducibility() {
    let started = std::time::Instant::now();
    let g = builtin_geometry("bl2_p2").unwrap();
    let a = kt_probe(&g, 2_000, 1000).unwrap();
    let b = kt_probe(&g, 2_000, 1000).unwrap();
    assert_eq!(a.to_json(), b.to_json(), "kt probe json differs");

    let region = sample::default_box(&g);
    let c1 = concavity_check(&g, &ConeScalar::Vol, &rat(1, 2), &region, 1_000, 1001).unwrap();
    let c2 = concavity_check(&g, &ConeScalar::Vol, &rat(1, 2), &region, 1_000, 1001).unwrap();
    assert_eq!(c1.to_json(), c2.to_json(), "concavity probe json differs");

    let alpha = builtin_geometry("bl1_p2").unwrap().class_i64(&[1, -1]);
    let d1 = boundary_lipschitz_probe(&alpha, &[], 1_000, 1002, &rat(1, 4), None).unwrap();
    let d2 = boundary_lipschitz_probe(&alpha, &[], 1_000, 1002, &rat(1, 4), None).unwrap();
    assert_eq!(d1.to_json(), d2.to_json(), "boundary probe json differs");

    // a different seed must change the report (the seed is not ignored)
    let e = kt_probe(&g, 2_000, 1003).unwrap();
    assert_ne!(a.to_json(), e.to_json());
    pass(
        10,
        "reproducibility",
        format!(
            "byte-identical probe reports per seed; rerun bundle took {:.2}s",
            started.elapsed().as_secs_f64()
        ),
    );
}
