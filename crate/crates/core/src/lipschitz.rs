//! Lipschitz-certificate harness for nonnegative, monotone, homogeneous
//! functions on open convex cones: axiom verification, an explicit constant
//! `L = (2^d / eps) * sup_U f * 1.05` valid on the quarter ball, and
//! empirical quotient fuzzing against it.

use crate::geometry::SurfaceGeometry;
use crate::linalg;
use crate::rational::{fmt_rat, rat, rat_int, rat_to_f64, Rat};
use crate::report::{ProbeReport, Stat, Witness};
use crate::sample::{self, SampleBox};
use crate::volume::vol;
use crate::zariski;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LipschitzError {
    #[error("basis is singular or has wrong dimension")]
    SingularBasis,
    #[error("cone membership holds at 0; the harness requires 0 outside the cone")]
    ConeContainsZero,
    #[error("center is not a member of the cone")]
    CenterOutside,
    #[error("basis vector {0} is not in the closure of the cone")]
    BasisOutsideCone(usize),
    #[error("ball containment failed at {0}; choose a smaller radius")]
    ContainmentFailed(String),
    #[error("cone sampler found no member in {0} attempts")]
    SamplerExhausted(usize),
    #[error("epsilon must be positive")]
    BadRadius,
}

type MemberFn = Arc<dyn Fn(&[Rat]) -> bool + Send + Sync>;
type EvalFn = Arc<dyn Fn(&[Rat]) -> f64 + Send + Sync>;
type SampleFn = Arc<dyn Fn(&mut ChaCha8Rng) -> Vec<Rat> + Send + Sync>;

/// A nonnegative function on an open convex cone, with an exact membership
/// predicate on rational points and a raw sampler for cone candidates.
#[derive(Clone)]
pub struct ConeFunction {
    pub label: String,
    pub dimension: usize,
    pub degree: Rat,
    /// Evaluation handles safe for concurrent calls; kept for callers that
    /// schedule work. The built-in functions are all concurrent.
    pub concurrent: bool,
    membership: MemberFn,
    eval: EvalFn,
    sampler: SampleFn,
}

impl ConeFunction {
    pub fn new(
        label: impl Into<String>,
        dimension: usize,
        degree: Rat,
        membership: MemberFn,
        eval: EvalFn,
        sampler: SampleFn,
    ) -> Self {
        assert!(degree >= Rat::one(), "homogeneity degree must be >= 1");
        Self {
            label: label.into(),
            dimension,
            degree,
            concurrent: true,
            membership,
            eval,
            sampler,
        }
    }

    pub fn member(&self, x: &[Rat]) -> bool {
        (self.membership)(x)
    }

    pub fn eval(&self, x: &[Rat]) -> f64 {
        (self.eval)(x)
    }

    /// `x^a y^b` on the open positive quadrant.
    pub fn monomial(a: u32, b: u32) -> Self {
        let degree = rat_int(a as i64 + b as i64);
        Self::new(
            format!("monomial:x^{a}y^{b}"),
            2,
            degree,
            Arc::new(|p: &[Rat]| p.iter().all(Rat::is_positive)),
            Arc::new(move |p: &[Rat]| {
                let v = pow_rat(&p[0], a) * pow_rat(&p[1], b);
                rat_to_f64(&v)
            }),
            Arc::new(|rng| {
                vec![
                    sample::rat_uniform(rng, &rat(1, 8), &rat_int(3)),
                    sample::rat_uniform(rng, &rat(1, 8), &rat_int(3)),
                ]
            }),
        )
    }

    /// `p x + q y` on the open positive quadrant, `p, q > 0` (a dual-cone
    /// linear form).
    pub fn linear_form(p: Rat, q: Rat) -> Self {
        assert!(p.is_positive() && q.is_positive(), "dual cone form");
        let label = format!("linear:{},{}", fmt_rat(&p), fmt_rat(&q));
        Self::new(
            label,
            2,
            Rat::one(),
            Arc::new(|x: &[Rat]| x.iter().all(Rat::is_positive)),
            Arc::new(move |x: &[Rat]| rat_to_f64(&(&p * &x[0] + &q * &x[1]))),
            Arc::new(|rng| {
                vec![
                    sample::rat_uniform(rng, &rat(1, 8), &rat_int(3)),
                    sample::rat_uniform(rng, &rat(1, 8), &rat_int(3)),
                ]
            }),
        )
    }

    /// The volume on the big cone of a surface geometry.
    pub fn vol_on_big(geom: &SurfaceGeometry) -> Self {
        let g1 = geom.clone();
        let g2 = geom.clone();
        let sbox = sample::default_box(geom);
        Self::new(
            format!("vol[{}]", geom.name()),
            geom.rank(),
            rat_int(2),
            Arc::new(move |x: &[Rat]| {
                g1.class(x.to_vec())
                    .ok()
                    .is_some_and(|c| zariski::is_big(&c).unwrap_or(false))
            }),
            Arc::new(move |x: &[Rat]| {
                let c = g2.class(x.to_vec()).expect("dimension");
                rat_to_f64(&vol(&c).expect("catalog data"))
            }),
            Arc::new(move |rng| sample::point_in_box(rng, &sbox)),
        )
    }

    /// Member point via rejection through the exact predicate.
    fn sample_member(
        &self,
        rng: &mut ChaCha8Rng,
        tries: usize,
    ) -> Result<Vec<Rat>, LipschitzError> {
        for _ in 0..tries {
            let cand = (self.sampler)(rng);
            if self.member(&cand) {
                return Ok(cand);
            }
        }
        Err(LipschitzError::SamplerExhausted(tries))
    }
}

fn pow_rat(x: &Rat, n: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Expand `v` in `basis` (exact solve) and return the l1 coefficient sum.
pub fn basis_norm(v: &[Rat], basis: &[Vec<Rat>]) -> Result<Rat, LipschitzError> {
    let n = v.len();
    if basis.len() != n || basis.iter().any(|b| b.len() != n) {
        return Err(LipschitzError::SingularBasis);
    }
    // columns are the basis vectors
    let m: Vec<Vec<Rat>> = (0..n)
        .map(|row| (0..n).map(|col| basis[col][row].clone()).collect())
        .collect();
    let coeffs = linalg::solve(&m, v).map_err(|_| LipschitzError::SingularBasis)?;
    Ok(coeffs.iter().map(|c| c.abs()).sum())
}

/// Verify homogeneity, monotonicity in cone directions, and local
/// boundedness on sampled points; failures become report entries.
pub fn verify_axioms(
    f: &ConeFunction,
    region: &SampleBox,
    samples: u64,
    seed: u64,
) -> Result<ProbeReport, LipschitzError> {
    const REL_TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witnesses = Vec::new();
    let mut max_homogeneity_dev: f64 = 0.0;
    let mut monotonicity_failures = 0u64;
    let mut homogeneity_failures = 0u64;
    let mut sup: f64 = 0.0;
    let mut convexity_failures = 0u64;
    for _ in 0..samples {
        let x = sample_member_in_box(f, region, &mut rng)?;
        let fx = f.eval(&x);
        sup = sup.max(fx);
        // (a) homogeneity at a rational lambda in [1/2, 2]
        let lam = sample::rat_uniform(&mut rng, &rat(1, 2), &rat_int(2));
        let lx: Vec<Rat> = x.iter().map(|c| c * &lam).collect();
        let expected = rat_to_f64(&lam).powf(rat_to_f64(&f.degree)) * fx;
        let dev = (f.eval(&lx) - expected).abs();
        let rel = dev / expected.abs().max(1e-300);
        max_homogeneity_dev = max_homogeneity_dev.max(rel);
        if rel > REL_TOL {
            homogeneity_failures += 1;
            if witnesses.len() < 4 {
                witnesses.push(
                    Witness::point("homogeneity failure", &x)
                        .with(Stat::float("relative_deviation", rel)),
                );
            }
        }
        // (b) monotonicity along a cone direction
        let y = f.sample_member(&mut rng, 256)?;
        let xy: Vec<Rat> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        if f.eval(&xy) < fx * (1.0 - REL_TOL) {
            monotonicity_failures += 1;
            if witnesses.len() < 4 {
                witnesses.push(
                    Witness::pair("monotonicity failure", &x, &y)
                        .with(Stat::float("f(x)", fx))
                        .with(Stat::float("f(x+y)", f.eval(&xy))),
                );
            }
        }
        // convexity spot check of the membership predicate
        let mid: Vec<Rat> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a + b) / rat_int(2))
            .collect();
        if !f.member(&mid) {
            convexity_failures += 1;
        }
    }
    let passed =
        homogeneity_failures == 0 && monotonicity_failures == 0 && convexity_failures == 0;
    Ok(ProbeReport {
        kind: format!("axioms[{}]", f.label),
        geometry: f.label.clone(),
        region: region.describe(),
        seed,
        samples,
        statistics: vec![
            Stat::float("max_homogeneity_rel_dev", max_homogeneity_dev),
            Stat::count("homogeneity_failures", homogeneity_failures),
            Stat::count("monotonicity_failures", monotonicity_failures),
            Stat::count("convexity_spot_failures", convexity_failures),
            Stat::float("sup_over_region", sup),
        ],
        witnesses,
        passed,
    })
}

fn sample_member_in_box(
    f: &ConeFunction,
    region: &SampleBox,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Rat>, LipschitzError> {
    for _ in 0..512 {
        let cand = sample::point_in_box(rng, region);
        if f.member(&cand) {
            return Ok(cand);
        }
    }
    Err(LipschitzError::SamplerExhausted(512))
}

/// An explicit local Lipschitz constant for a cone function, valid on the
/// quarter ball of its certification radius.
#[derive(Debug, Clone)]
pub struct LipschitzCertificate {
    pub label: String,
    pub center: Vec<Rat>,
    pub epsilon: Rat,
    pub basis: Vec<Vec<Rat>>,
    pub degree: Rat,
    /// Supremum of `f` over the epsilon ball: sampled, or exact if supplied.
    pub sup_u: f64,
    pub sup_exact: Option<Rat>,
    /// `L = (2^degree / epsilon) * sup_u * 1.05`.
    pub constant: f64,
    /// The certificate bounds quotients within this basis-norm radius.
    pub validity_radius: Rat,
}

/// Declared safety inflation on the sampled supremum.
pub const SUP_SAFETY: f64 = 1.05;

/// Certify ball containment exactly (cross-polytope vertices and convexity)
/// and produce the constant from a sampled supremum.
pub fn lipschitz_certificate(
    f: &ConeFunction,
    center: &[Rat],
    epsilon: &Rat,
    basis: &[Vec<Rat>],
    sup_samples: u64,
    seed: u64,
) -> Result<LipschitzCertificate, LipschitzError> {
    let sup = sampled_sup(f, center, epsilon, basis, sup_samples, seed)?;
    certificate_with_sup(f, center, epsilon, basis, sup, None)
}

/// Certificate with a closed-form supremum supplied by the caller.
pub fn lipschitz_certificate_with_sup(
    f: &ConeFunction,
    center: &[Rat],
    epsilon: &Rat,
    basis: &[Vec<Rat>],
    sup: &Rat,
) -> Result<LipschitzCertificate, LipschitzError> {
    certificate_with_sup(f, center, epsilon, basis, rat_to_f64(sup), Some(sup.clone()))
}

fn certificate_with_sup(
    f: &ConeFunction,
    center: &[Rat],
    epsilon: &Rat,
    basis: &[Vec<Rat>],
    sup_u: f64,
    sup_exact: Option<Rat>,
) -> Result<LipschitzCertificate, LipschitzError> {
    check_geometry(f, center, epsilon, basis)?;
    let two_pow_d = 2f64.powf(rat_to_f64(&f.degree));
    let constant = two_pow_d / rat_to_f64(epsilon) * sup_u * SUP_SAFETY;
    Ok(LipschitzCertificate {
        label: f.label.clone(),
        center: center.to_vec(),
        epsilon: epsilon.clone(),
        basis: basis.to_vec(),
        degree: f.degree.clone(),
        sup_u,
        sup_exact,
        constant,
        validity_radius: epsilon / rat_int(4),
    })
}

fn check_geometry(
    f: &ConeFunction,
    center: &[Rat],
    epsilon: &Rat,
    basis: &[Vec<Rat>],
) -> Result<(), LipschitzError> {
    if !epsilon.is_positive() {
        return Err(LipschitzError::BadRadius);
    }
    let n = f.dimension;
    if center.len() != n || basis.len() != n || basis.iter().any(|b| b.len() != n) {
        return Err(LipschitzError::SingularBasis);
    }
    if linalg::rank(basis) != n {
        return Err(LipschitzError::SingularBasis);
    }
    let zero = vec![Rat::zero(); n];
    if f.member(&zero) {
        return Err(LipschitzError::ConeContainsZero);
    }
    if !f.member(center) {
        return Err(LipschitzError::CenterOutside);
    }
    // basis vectors lie in the closure: mixing toward the interior center
    // must land inside the open cone
    let sigma = rat(1, 16);
    let one_minus = rat_int(1) - &sigma;
    for (i, e) in basis.iter().enumerate() {
        let mix: Vec<Rat> = e
            .iter()
            .zip(center)
            .map(|(ei, ci)| ei * &one_minus + ci * &sigma)
            .collect();
        if !f.member(&mix) {
            return Err(LipschitzError::BasisOutsideCone(i));
        }
    }
    // ball containment: the open basis-norm ball is the interior of the hull
    // of the cross-polytope vertices, so it lies in the open cone as soon as
    // every vertex lies in the closure. Closure membership is tested exactly
    // on a mix pulled slightly toward the ball center.
    let pull = rat(1, 1024);
    let keep = rat_int(1) - &pull;
    for (label, c) in [
        ("B_eps(center)", center.to_vec()),
        (
            "B_eps(center/2)",
            center.iter().map(|x| x / rat_int(2)).collect::<Vec<_>>(),
        ),
    ] {
        if !f.member(&c) {
            return Err(LipschitzError::ContainmentFailed(format!(
                "{label} center"
            )));
        }
        for e in basis {
            for sgn in [1i64, -1] {
                let v: Vec<Rat> = c
                    .iter()
                    .zip(e)
                    .map(|(ci, ei)| ci + ei * epsilon * rat_int(sgn))
                    .collect();
                let pulled: Vec<Rat> = v
                    .iter()
                    .zip(&c)
                    .map(|(vi, ci)| vi * &keep + ci * &pull)
                    .collect();
                if !f.member(&v) && !f.member(&pulled) {
                    return Err(LipschitzError::ContainmentFailed(format!(
                        "{label} vertex {}",
                        v.iter().map(fmt_rat).collect::<Vec<_>>().join(",")
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Sampled supremum over the epsilon ball: vertices, edge midpoints, and
/// random boundary points.
fn sampled_sup(
    f: &ConeFunction,
    center: &[Rat],
    epsilon: &Rat,
    basis: &[Vec<Rat>],
    samples: u64,
    seed: u64,
) -> Result<f64, LipschitzError> {
    let mut sup = f.eval(center);
    let eval_at = |h: &[Rat], sup: &mut f64| {
        let p: Vec<Rat> = center.iter().zip(h).map(|(c, d)| c + d).collect();
        *sup = sup.max(f.eval(&p));
    };
    let mut vertex_dirs: Vec<Vec<Rat>> = Vec::new();
    for e in basis {
        for sgn in [1i64, -1] {
            vertex_dirs.push(e.iter().map(|x| x * epsilon * rat_int(sgn)).collect());
        }
    }
    for d in &vertex_dirs {
        eval_at(d, &mut sup);
    }
    for i in 0..vertex_dirs.len() {
        for j in i + 1..vertex_dirs.len() {
            let mid: Vec<Rat> = vertex_dirs[i]
                .iter()
                .zip(&vertex_dirs[j])
                .map(|(a, b)| (a + b) / rat_int(2))
                .collect();
            eval_at(&mid, &mut sup);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let h = random_ball_direction(&mut rng, basis, epsilon, true);
        eval_at(&h, &mut sup);
    }
    Ok(sup)
}

/// Random direction of basis norm exactly `radius` (boundary) or up to it.
fn random_ball_direction(
    rng: &mut ChaCha8Rng,
    basis: &[Vec<Rat>],
    radius: &Rat,
    boundary: bool,
) -> Vec<Rat> {
    let n = basis.len();
    let dim = basis[0].len();
    loop {
        let mut weights: Vec<Rat> = (0..n)
            .map(|_| sample::rat_uniform(rng, &Rat::zero(), &Rat::one()))
            .collect();
        let total: Rat = weights.iter().sum();
        if total.is_zero() {
            continue;
        }
        let scale = if boundary {
            radius / &total
        } else {
            let u = sample::rat_uniform(rng, &Rat::zero(), &Rat::one());
            radius * u / &total
        };
        for w in &mut weights {
            *w *= &scale;
            if rng.gen_bool(0.5) {
                *w = -w.clone();
            }
        }
        let mut h = vec![Rat::zero(); dim];
        for (w, e) in weights.iter().zip(basis) {
            for (hi, ei) in h.iter_mut().zip(e) {
                *hi += w * ei;
            }
        }
        return h;
    }
}

/// Max difference quotient over random pairs in the quarter ball; must stay
/// below the certificate constant.
pub fn empirical_lipschitz(
    f: &ConeFunction,
    cert: &LipschitzCertificate,
    pairs: u64,
    seed: u64,
) -> Result<ProbeReport, LipschitzError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_q: f64 = 0.0;
    let mut witness: Option<(Vec<Rat>, Vec<Rat>)> = None;
    let mut used = 0u64;
    for _ in 0..pairs {
        let h1 = random_ball_direction(&mut rng, &cert.basis, &cert.validity_radius, false);
        let h2 = random_ball_direction(&mut rng, &cert.basis, &cert.validity_radius, false);
        let a1: Vec<Rat> = cert.center.iter().zip(&h1).map(|(c, d)| c + d).collect();
        let a2: Vec<Rat> = cert.center.iter().zip(&h2).map(|(c, d)| c + d).collect();
        if a1 == a2 {
            continue; // identical pair skipped
        }
        used += 1;
        let diff: Vec<Rat> = a1.iter().zip(&a2).map(|(x, y)| x - y).collect();
        let den = basis_norm(&diff, &cert.basis)?;
        let q = (f.eval(&a1) - f.eval(&a2)).abs() / rat_to_f64(&den);
        if q > max_q {
            max_q = q;
            witness = Some((a1, a2));
        }
    }
    let passed = max_q <= cert.constant;
    let mut witnesses = Vec::new();
    if let Some((a, b)) = witness {
        witnesses
            .push(Witness::pair("max quotient pair", &a, &b).with(Stat::float("quotient", max_q)));
    }
    Ok(ProbeReport {
        kind: format!("empirical_lipschitz[{}]", f.label),
        geometry: f.label.clone(),
        region: format!(
            "B_{}({})",
            fmt_rat(&cert.validity_radius),
            cert.center.iter().map(fmt_rat).collect::<Vec<_>>().join(",")
        ),
        seed,
        samples: used,
        statistics: vec![
            Stat::float("max_quotient", max_q),
            Stat::float("certificate_constant", cert.constant),
        ],
        witnesses,
        passed,
    })
}

/// The two-sided sandwich inequalities behind the certificate, sampled at
/// `(alpha, h)` with `alpha` in the epsilon ball and `h` a cone member of
/// norm below epsilon.
pub fn chain_inequality_check(
    f: &ConeFunction,
    cert: &LipschitzCertificate,
    samples: u64,
    seed: u64,
) -> Result<ProbeReport, LipschitzError> {
    const REL_TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rat_to_f64(&cert.degree);
    let two_pow_d = 2f64.powf(d);
    let eps = rat_to_f64(&cert.epsilon);
    let mut violations = 0u64;
    let mut worst: f64 = f64::INFINITY;
    let mut witnesses = Vec::new();
    for _ in 0..samples {
        let ha = random_ball_direction(&mut rng, &cert.basis, &cert.epsilon, false);
        let alpha: Vec<Rat> = cert.center.iter().zip(&ha).map(|(c, x)| c + x).collect();
        // cone member scaled to basis norm strictly below epsilon
        let m = f.sample_member(&mut rng, 512)?;
        let norm_m = basis_norm(&m, &cert.basis)?;
        if norm_m.is_zero() {
            continue;
        }
        let u = sample::rat_uniform(&mut rng, &rat(1, 100), &rat(99, 100));
        let scale = &cert.epsilon * u / norm_m;
        let h: Vec<Rat> = m.iter().map(|x| x * &scale).collect();
        let norm_h = rat_to_f64(&basis_norm(&h, &cert.basis)?);
        let fa = f.eval(&alpha);
        let minus: Vec<Rat> = alpha.iter().zip(&h).map(|(a, x)| a - x).collect();
        let plus: Vec<Rat> = alpha.iter().zip(&h).map(|(a, x)| a + x).collect();
        let fm = f.eval(&minus);
        let fp = f.eval(&plus);
        let tol = REL_TOL * (1.0 + fa.abs());
        let margins = [
            fa - fm,
            fm - (1.0 - d * norm_h / eps) * fa,
            fp - fa,
            (1.0 + two_pow_d * norm_h / eps) * fa - fp,
        ];
        for m in margins {
            if m < worst {
                worst = m;
            }
        }
        if margins.iter().any(|m| *m < -tol) {
            violations += 1;
            if witnesses.len() < 4 {
                witnesses.push(
                    Witness::pair("chain violation", &alpha, &h)
                        .with(Stat::float("worst_margin", worst)),
                );
            }
        }
    }
    Ok(ProbeReport {
        kind: format!("chain_inequalities[{}]", f.label),
        geometry: f.label.clone(),
        region: format!("B_{}(center)", fmt_rat(&cert.epsilon)),
        seed,
        samples,
        statistics: vec![
            Stat::float("worst_margin", worst),
            Stat::count("violations", violations),
        ],
        witnesses,
        passed: violations == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_geometry;

    #[test]
    fn basis_norm_examples() {
        let std_basis = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ];
        assert_eq!(
            basis_norm(&[rat_int(3), rat_int(-4)], &std_basis).unwrap(),
            rat_int(7)
        );
        let skew = vec![vec![rat_int(1), rat_int(1)], vec![rat_int(1), rat_int(-1)]];
        assert_eq!(
            basis_norm(&[rat_int(2), rat_int(0)], &skew).unwrap(),
            rat_int(2)
        );
        assert_eq!(
            basis_norm(&[Rat::zero(), Rat::zero()], &std_basis).unwrap(),
            Rat::zero()
        );
        let singular = vec![vec![rat_int(1), rat_int(1)], vec![rat_int(2), rat_int(2)]];
        assert!(matches!(
            basis_norm(&[rat_int(1), rat_int(0)], &singular),
            Err(LipschitzError::SingularBasis)
        ));
    }

    #[test]
    fn axioms_pass_for_monomial_and_vol() {
        let region = SampleBox::parse("1/4:3,1/4:3").unwrap();
        let f = ConeFunction::monomial(1, 1);
        let r = verify_axioms(&f, &region, 200, 3).unwrap();
        assert!(r.passed, "{:?}", r.statistics);

        let g = builtin_geometry("bl1_p2").unwrap();
        let fv = ConeFunction::vol_on_big(&g);
        let region_v = SampleBox::parse("1:3,-1:1").unwrap();
        let rv = verify_axioms(&fv, &region_v, 200, 3).unwrap();
        assert!(rv.passed, "{:?}", rv.statistics);
    }

    #[test]
    fn decreasing_function_fails_monotonicity() {
        // f(x, y) = x - y is not monotone in the quadrant directions; clamp
        // at zero to keep it nonnegative on the sampled region
        let f = ConeFunction::new(
            "x-minus-y",
            2,
            Rat::one(),
            Arc::new(|p: &[Rat]| p.iter().all(Rat::is_positive)),
            Arc::new(|p: &[Rat]| rat_to_f64(&(&p[0] - &p[1])).max(0.0)),
            Arc::new(|rng| {
                vec![
                    sample::rat_uniform(rng, &rat(1, 8), &rat_int(3)),
                    sample::rat_uniform(rng, &rat(1, 8), &rat_int(3)),
                ]
            }),
        );
        let region = SampleBox::parse("2:3,1/8:1/4").unwrap();
        let r = verify_axioms(&f, &region, 200, 5).unwrap();
        assert!(!r.passed);
        assert!(r.value("monotonicity_failures").unwrap() > 0.0);
    }

    #[test]
    fn certificate_matches_closed_form_for_monomial() {
        let f = ConeFunction::monomial(1, 1);
        let center = [rat_int(1), rat_int(1)];
        let eps = rat(1, 2);
        let basis = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ];
        // closed-form sup over the l1 ball: 25/16 at (5/4, 5/4)
        let cert =
            lipschitz_certificate_with_sup(&f, &center, &eps, &basis, &rat(25, 16)).unwrap();
        assert!((cert.constant - 13.125).abs() < 1e-12);

        // the sampled route finds the edge-midpoint maximizer exactly
        let cert2 = lipschitz_certificate(&f, &center, &eps, &basis, 500, 11).unwrap();
        assert!((cert2.sup_u - 25.0 / 16.0).abs() < 1e-12);

        let emp = empirical_lipschitz(&f, &cert, 2000, 13).unwrap();
        assert!(emp.passed);
        // gradient magnitude near the ball stays close to 5/4 per coordinate
        let q = emp.value("max_quotient").unwrap();
        assert!(q < 1.5, "quotient {q}");
    }

    #[test]
    fn certificate_rejects_oversized_radius() {
        let f = ConeFunction::monomial(1, 1);
        let center = [rat_int(1), rat_int(1)];
        let basis = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ];
        let err =
            lipschitz_certificate(&f, &center, &rat_int(2), &basis, 10, 1).unwrap_err();
        assert!(matches!(err, LipschitzError::ContainmentFailed(_)));
    }

    #[test]
    fn certificate_scaling_in_epsilon() {
        let f = ConeFunction::monomial(1, 1);
        let center = [rat_int(1), rat_int(1)];
        let basis = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ];
        let sup = rat(25, 16);
        let c1 = lipschitz_certificate_with_sup(&f, &center, &rat(1, 2), &basis, &sup).unwrap();
        let c2 = lipschitz_certificate_with_sup(&f, &center, &rat(1, 4), &basis, &sup).unwrap();
        assert!((c2.constant - 2.0 * c1.constant).abs() < 1e-9);
    }

    #[test]
    fn vol_certificate_on_blowup() {
        let g = builtin_geometry("bl1_p2").unwrap();
        let f = ConeFunction::vol_on_big(&g);
        let center = [rat_int(2), rat_int(0)];
        let eps = rat(1, 2);
        let basis = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(1), rat_int(-1)],
        ];
        let cert = lipschitz_certificate(&f, &center, &eps, &basis, 500, 17).unwrap();
        // sup over the ball is 25/4 at the vertex 5/2 H
        assert!((cert.sup_u - 6.25).abs() < 1e-12);
        let emp = empirical_lipschitz(&f, &cert, 2000, 19).unwrap();
        assert!(emp.passed);
        let chain = chain_inequality_check(&f, &cert, 500, 23).unwrap();
        assert!(chain.passed, "{:?}", chain.statistics);
    }

    #[test]
    fn linear_form_quotients_match_coefficients() {
        let f = ConeFunction::linear_form(rat_int(2), rat_int(1));
        let center = [rat_int(1), rat_int(1)];
        let eps = rat(1, 2);
        let basis = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ];
        let cert = lipschitz_certificate(&f, &center, &eps, &basis, 200, 29).unwrap();
        let emp = empirical_lipschitz(&f, &cert, 2000, 31).unwrap();
        assert!(emp.passed);
        let q = emp.value("max_quotient").unwrap();
        assert!(q <= 2.0 + 1e-9, "quotient {q} lead coefficient 2");
    }
}
