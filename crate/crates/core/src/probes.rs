//! Randomized certification probes for the regularity of the volume function:
//! concavity margins, log-concavity of nef intersection numbers, bounded
//! Hessians with wall jumps, gradient Lipschitz quotients, and boundary
//! difference quotients.
//!
//! Sampling is exact-rational and seeded; identical `(seed, parameters)`
//! reproduce identical reports, independent of thread count.

use crate::geometry::{DivisorClass, GeometryError, SurfaceGeometry};
use crate::rational::{fmt_rat, rat, rat_int, rat_to_f64, Rat};
use crate::report::{ProbeReport, Stat, Witness};
use crate::sample::{self, SampleBox, SampleError};
use crate::volume::{grad_vol, vol, VolumeError};
use crate::zariski::{self, ZariskiError};
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Float slack allowed on exact statements probed through `f64` powers.
pub const FLOAT_MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("class is not nef")]
    NotNef,
    #[error("base point must be pseudo-effective with zero volume")]
    NotOnBoundary,
    #[error("region corner {0} escapes the big cone")]
    RegionEscapesBigCone(String),
    #[error("geometry has no nef dual generators; nef sampling unavailable")]
    NoNefDuals,
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Zariski(#[from] ZariskiError),
    #[error(transparent)]
    Volume(#[from] VolumeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Scalar cone functions the concavity probe understands.
#[derive(Debug, Clone)]
pub enum ConeScalar {
    /// The volume itself.
    Vol,
    /// `alpha -> omega . P(alpha)`, pairing against a fixed class.
    DualPairing(DivisorClass),
}

impl ConeScalar {
    pub fn label(&self) -> String {
        match self {
            ConeScalar::Vol => "vol".to_string(),
            ConeScalar::DualPairing(w) => format!("dual({w})"),
        }
    }

    /// Exact value; zero outside the pseudo-effective cone.
    pub fn eval(&self, d: &DivisorClass) -> Result<Rat, ZariskiError> {
        match self {
            ConeScalar::Vol => vol(d),
            ConeScalar::DualPairing(w) => match zariski::zariski_decompose(d) {
                Ok(z) => Ok(z.positive().intersect(w)?),
                Err(ZariskiError::NotPseudoEffective) => Ok(Rat::zero()),
                Err(e) => Err(e),
            },
        }
    }
}

/// Midpoint-style concavity margins of `f^exponent` on random big segments.
/// Positive margins mean concavity holds; the minimum margin is reported.
pub fn concavity_check(
    geom: &SurfaceGeometry,
    f: &ConeScalar,
    exponent: &Rat,
    region: &SampleBox,
    samples: u64,
    seed: u64,
) -> Result<ProbeReport, ProbeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let x = sample::big_class_in_box(&mut rng, geom, region, 256)?;
        let y = sample::big_class_in_box(&mut rng, geom, region, 256)?;
        pairs.push((x, y));
    }
    let e = rat_to_f64(exponent);
    let ts = [rat(1, 4), rat(1, 2), rat(3, 4)];
    let margins: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(x, y)| {
            let fx = rat_to_f64(&f.eval(x).expect("catalog data")).powf(e);
            let fy = rat_to_f64(&f.eval(y).expect("catalog data")).powf(e);
            let mut worst = f64::INFINITY;
            let mut at = 0.0;
            for t in &ts {
                let one_minus = rat_int(1) - t;
                let mix = &x.scaled(t) + &y.scaled(&one_minus);
                let fm = rat_to_f64(&f.eval(&mix).expect("catalog data")).powf(e);
                let tf = rat_to_f64(t);
                let margin = fm - (tf * fx + (1.0 - tf) * fy);
                if margin < worst {
                    worst = margin;
                    at = tf;
                }
            }
            (worst, at)
        })
        .collect();
    let mut min_margin = f64::INFINITY;
    let mut witness_idx = 0;
    let mut witness_t = 0.0;
    for (i, (m, t)) in margins.iter().enumerate() {
        if *m < min_margin {
            min_margin = *m;
            witness_idx = i;
            witness_t = *t;
        }
    }
    let (wx, wy) = &pairs[witness_idx];
    let witness = Witness::pair("min margin pair", wx.coords(), wy.coords())
        .with(Stat::float("margin", min_margin))
        .with(Stat::float("t", witness_t));
    Ok(ProbeReport {
        kind: format!("concavity[{}^{}]", f.label(), fmt_rat(exponent)),
        geometry: geom.name().to_string(),
        region: region.describe(),
        seed,
        samples,
        statistics: vec![Stat::float("min_margin", min_margin)],
        witnesses: vec![witness],
        passed: min_margin >= -FLOAT_MARGIN_TOL,
    })
}

/// Log-concavity margin `(A.B)^2 - (A.A)(B.B)` for a nef pair, exact.
pub fn kt_check(a: &DivisorClass, b: &DivisorClass) -> Result<Rat, ProbeError> {
    if !zariski::is_nef(a)? || !zariski::is_nef(b)? {
        return Err(ProbeError::NotNef);
    }
    let ab = a.intersect(b)?;
    let aa = a.self_intersection();
    let bb = b.self_intersection();
    Ok(&ab * &ab - aa * bb)
}

/// Exact log-concavity margins over random nef pairs; every tenth pair is
/// proportional to pin the equality case.
pub fn kt_probe(
    geom: &SurfaceGeometry,
    samples: u64,
    seed: u64,
) -> Result<ProbeReport, ProbeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(samples as usize);
    for k in 0..samples {
        let a = sample::nef_class(&mut rng, geom).ok_or(ProbeError::NoNefDuals)?;
        let b = if k % 10 == 9 {
            let lam = sample::rat_uniform(&mut rng, &rat(1, 4), &rat_int(3));
            (a.scaled(&lam), true)
        } else {
            (
                sample::nef_class(&mut rng, geom).ok_or(ProbeError::NoNefDuals)?,
                false,
            )
        };
        pairs.push((a, b.0, b.1));
    }
    let margins: Vec<Rat> = pairs
        .par_iter()
        .map(|(a, b, _)| kt_check(a, b).expect("construction is nef"))
        .collect();
    let mut min_margin = margins[0].clone();
    let mut witness_idx = 0;
    let mut proportional_ok = true;
    for (i, m) in margins.iter().enumerate() {
        if *m < min_margin {
            min_margin = m.clone();
            witness_idx = i;
        }
        if pairs[i].2 && !m.is_zero() {
            proportional_ok = false;
        }
    }
    let passed = !min_margin.is_negative() && proportional_ok;
    let (wa, wb, _) = &pairs[witness_idx];
    Ok(ProbeReport {
        kind: "khovanskii_teissier".into(),
        geometry: geom.name().to_string(),
        region: "nef cone (dual generator combinations)".into(),
        seed,
        samples,
        statistics: vec![
            Stat::exact("min_margin", &min_margin),
            Stat::count("proportional_pairs_exact_zero", u64::from(proportional_ok)),
        ],
        witnesses: vec![Witness::pair("min margin pair", wa.coords(), wb.coords())
            .with(Stat::exact("margin", &min_margin))],
        passed,
    })
}

/// Second central differences of the volume along a one-parameter family
/// `t -> base + t line`, in the directions `dir1`, `dir2`. Samples whose
/// stencil leaves the big cone are flagged, not fatal.
#[allow(clippy::too_many_arguments)]
pub fn hessian_probe(
    base: &DivisorClass,
    line: &DivisorClass,
    grid: &[Rat],
    dir1: &DivisorClass,
    dir2: &DivisorClass,
    step: &Rat,
) -> Result<ProbeReport, ProbeError> {
    assert!(step.is_positive(), "step must be positive");
    let geom = base.geometry();
    let pure = dir1.coords() == dir2.coords();
    let entries: Vec<Option<Rat>> = grid
        .par_iter()
        .map(|t| {
            let x = base + &line.scaled(t);
            second_difference(&x, dir1, dir2, step, pure)
        })
        .collect::<Result<_, ProbeError>>()?;
    let flagged = entries.iter().filter(|e| e.is_none()).count() as u64;
    let mut sup_entry = Rat::zero();
    for e in entries.iter().flatten() {
        if e.abs() > sup_entry {
            sup_entry = e.abs();
        }
    }
    // adjacent jumps between consecutive usable samples
    let mut diffs: Vec<(Rat, Rat)> = Vec::new(); // (|jump|, midpoint t)
    for i in 1..entries.len() {
        if let (Some(a), Some(b)) = (&entries[i - 1], &entries[i]) {
            let mid = (&grid[i - 1] + &grid[i]) / rat_int(2);
            diffs.push(((b - a).abs(), mid));
        }
    }
    let (largest_jump, jump_at) = diffs
        .iter()
        .max_by(|a, b| a.0.cmp(&b.0))
        .map(|(j, t)| (j.clone(), t.clone()))
        .unwrap_or((Rat::zero(), Rat::zero()));
    // a jump counts when it exceeds 10x the typical within-chamber variation
    let typical = median(&mut diffs.iter().map(|(j, _)| j.clone()).collect::<Vec<_>>());
    let threshold = &typical * rat_int(10);
    let is_jump = largest_jump > threshold && largest_jump.is_positive();
    let mut statistics = vec![
        Stat::exact("sup_abs_entry", &sup_entry),
        Stat::exact("largest_adjacent_jump", &largest_jump),
        Stat::exact("jump_location", &jump_at),
        Stat::count("jump_detected", u64::from(is_jump)),
        Stat::count("flagged_samples", flagged),
    ];
    statistics.push(Stat::exact("step", step));
    Ok(ProbeReport {
        kind: if pure {
            "hessian[pure]".into()
        } else {
            "hessian[mixed]".into()
        },
        geometry: geom.name().to_string(),
        region: format!(
            "{base} + t ({line}), t in [{}, {}]",
            fmt_rat(grid.first().unwrap_or(&Rat::zero())),
            fmt_rat(grid.last().unwrap_or(&Rat::zero())),
        ),
        seed: 0,
        samples: grid.len() as u64,
        statistics,
        witnesses: vec![],
        passed: flagged < grid.len() as u64,
    })
}

fn second_difference(
    x: &DivisorClass,
    dir1: &DivisorClass,
    dir2: &DivisorClass,
    step: &Rat,
    pure: bool,
) -> Result<Option<Rat>, ProbeError> {
    let h = step;
    let hh = h * h;
    let big = |c: &DivisorClass| zariski::is_big(c);
    if pure {
        let stencil = [
            x.clone(),
            x + &dir1.scaled(h),
            x - &dir1.scaled(h),
            x + &dir1.scaled(&(h * rat_int(2))),
            x - &dir1.scaled(&(h * rat_int(2))),
        ];
        for p in &stencil {
            if !big(p)? {
                return Ok(None);
            }
        }
        let v = (vol(&stencil[1])? - vol(&stencil[0])? * rat_int(2) + vol(&stencil[2])?) / hh;
        Ok(Some(v))
    } else {
        let pp = x + &(&dir1.scaled(h) + &dir2.scaled(h));
        let pm = x + &(&dir1.scaled(h) - &dir2.scaled(h));
        let mp = x - &(&dir1.scaled(h) - &dir2.scaled(h));
        let mm = x - &(&dir1.scaled(h) + &dir2.scaled(h));
        let margin = [
            x.clone(),
            x + &dir1.scaled(&(h * rat_int(2))),
            x - &dir1.scaled(&(h * rat_int(2))),
            x + &dir2.scaled(&(h * rat_int(2))),
            x - &dir2.scaled(&(h * rat_int(2))),
        ];
        for p in margin.iter().chain([&pp, &pm, &mp, &mm]) {
            if !big(p)? {
                return Ok(None);
            }
        }
        let v = (vol(&pp)? - vol(&pm)? - vol(&mp)? + vol(&mm)?) / (hh * rat_int(4));
        Ok(Some(v))
    }
}

fn median(values: &mut [Rat]) -> Rat {
    if values.is_empty() {
        return Rat::zero();
    }
    values.sort();
    values[values.len() / 2].clone()
}

/// Max gradient difference quotient `|grad(x) - grad(y)|_1 / |x - y|_1` over
/// random pairs in a box that must sit inside the big cone (corners checked
/// exactly). An optional exact bound is asserted into `passed`.
pub fn lipschitz_gradient_estimate(
    geom: &SurfaceGeometry,
    region: &SampleBox,
    pairs: u64,
    seed: u64,
    bound: Option<&Rat>,
) -> Result<ProbeReport, ProbeError> {
    if region.dim() != geom.rank() {
        return Err(ProbeError::Sample(SampleError::BoxRank {
            got: region.dim(),
            want: geom.rank(),
        }));
    }
    for corner in region.corners() {
        let c = geom.class(corner.clone())?;
        if !zariski::is_big(&c)? {
            return Err(ProbeError::RegionEscapesBigCone(
                corner.iter().map(fmt_rat).collect::<Vec<_>>().join(","),
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled = Vec::with_capacity(pairs as usize);
    for _ in 0..pairs {
        let x = sample::class_in_box(&mut rng, geom, region);
        let y = sample::class_in_box(&mut rng, geom, region);
        if x.coords() == y.coords() {
            continue; // zero denominator excluded
        }
        sampled.push((x, y));
    }
    let quotients: Vec<Rat> = sampled
        .par_iter()
        .map(|(x, y)| {
            let gx = grad_vol(x).expect("box inside big cone");
            let gy = grad_vol(y).expect("box inside big cone");
            let num: Rat = gx
                .coords()
                .iter()
                .zip(gy.coords())
                .map(|(a, b)| (a - b).abs())
                .sum();
            let den: Rat = x
                .coords()
                .iter()
                .zip(y.coords())
                .map(|(a, b)| (a - b).abs())
                .sum();
            num / den
        })
        .collect();
    let mut max_q = Rat::zero();
    let mut witness_idx = 0;
    for (i, q) in quotients.iter().enumerate() {
        if *q > max_q {
            max_q = q.clone();
            witness_idx = i;
        }
    }
    let passed = bound.is_none_or(|b| &max_q <= b);
    let mut statistics = vec![Stat::exact("max_quotient", &max_q)];
    if let Some(b) = bound {
        statistics.push(Stat::exact("bound", b));
    }
    let witnesses = if sampled.is_empty() {
        vec![]
    } else {
        let (wx, wy) = &sampled[witness_idx];
        vec![Witness::pair("max quotient pair", wx.coords(), wy.coords())
            .with(Stat::exact("quotient", &max_q))]
    };
    Ok(ProbeReport {
        kind: "lipschitz_gradient".into(),
        geometry: geom.name().to_string(),
        region: region.describe(),
        seed,
        samples: sampled.len() as u64,
        statistics,
        witnesses,
        passed,
    })
}

/// Difference quotients of the volume at a boundary class (zero volume,
/// pseudo-effective), over random directions of `l1` norm at most `radius`,
/// plus exact one-sided directional derivatives along chosen directions.
pub fn boundary_lipschitz_probe(
    alpha: &DivisorClass,
    directions: &[DivisorClass],
    samples: u64,
    seed: u64,
    radius: &Rat,
    quotient_bound: Option<&Rat>,
) -> Result<ProbeReport, ProbeError> {
    if !vol(alpha)?.is_zero() || !zariski::is_pseff(alpha)? {
        return Err(ProbeError::NotOnBoundary);
    }
    let geom = alpha.geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hs: Vec<Vec<Rat>> = (0..samples)
        .map(|_| sample::l1_direction(&mut rng, geom.rank(), radius))
        .collect();
    let quotients: Vec<Rat> = hs
        .par_iter()
        .map(|h| {
            let shifted = geom.class(
                alpha
                    .coords()
                    .iter()
                    .zip(h)
                    .map(|(a, d)| a + d)
                    .collect::<Vec<_>>(),
            )
            .expect("rank");
            let v = vol(&shifted).expect("catalog data");
            v / sample::l1_norm(h)
        })
        .collect();
    let mut max_q = Rat::zero();
    let mut witness_idx = 0;
    for (i, q) in quotients.iter().enumerate() {
        if *q > max_q {
            max_q = q.clone();
            witness_idx = i;
        }
    }
    // one-sided derivatives: two-point extrapolation is exact on a chamber
    let s = rat(1, 1000);
    let mut witnesses = Vec::new();
    let mut max_mismatch = Rat::zero();
    for d in directions {
        let right = one_sided(alpha, d, &s)?;
        let left = -one_sided(alpha, &-d, &s)?;
        let mismatch = (&right - &left).abs();
        if mismatch > max_mismatch {
            max_mismatch = mismatch.clone();
        }
        witnesses.push(
            Witness::point(format!("direction {d}"), d.coords())
                .with(Stat::exact("derivative_into", &right))
                .with(Stat::exact("derivative_out", &left))
                .with(Stat::exact("mismatch", &mismatch)),
        );
    }
    if !hs.is_empty() {
        witnesses.push(
            Witness::point("max quotient direction", &hs[witness_idx])
                .with(Stat::exact("quotient", &max_q)),
        );
    }
    let passed = quotient_bound.is_none_or(|b| &max_q <= b);
    let mut statistics = vec![
        Stat::exact("max_quotient", &max_q),
        Stat::exact("max_one_sided_mismatch", &max_mismatch),
        Stat::exact("radius", radius),
    ];
    if let Some(b) = quotient_bound {
        statistics.push(Stat::exact("bound", b));
    }
    Ok(ProbeReport {
        kind: "boundary_lipschitz".into(),
        geometry: geom.name().to_string(),
        region: format!("{alpha} + h, |h|_1 <= {}", fmt_rat(radius)),
        seed,
        samples,
        statistics,
        witnesses,
        passed,
    })
}

/// One-sided derivative of `s -> Vol(alpha + s d)` at `0+`: the two-point
/// Richardson value `2 q(s/2) - q(s)` of the difference quotients, which is
/// exact once the small segment stays in one chamber.
fn one_sided(alpha: &DivisorClass, d: &DivisorClass, s: &Rat) -> Result<Rat, ProbeError> {
    let half = s / rat_int(2);
    let q_full = vol(&(alpha + &d.scaled(s)))? / s;
    let q_half = vol(&(alpha + &d.scaled(&half)))? / half;
    Ok(q_half * rat_int(2) - q_full)
}
