//! The volume function on a surface lattice, its gradient, segment profiles,
//! and exact chamber decompositions along rational segments.
//!
//! On a chamber (constant Zariski support) the volume restricted to a segment
//! is an exact quadratic; walls are located by exact root-finding on the
//! affine support data, never by floating point.

use crate::geometry::{DivisorClass, GeometryError};
use crate::rational::{rat_int, rat_sqrt_exact, rat_to_f64, Rat};
use crate::zariski::{self, solve_orthogonality, ZariskiError};
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VolumeError {
    #[error("gradient is defined only on the big cone")]
    NotBig,
    #[error("degenerate segment: direction class is zero")]
    DegenerateDirection,
    #[error("empty scan range: t0 must be strictly below t1")]
    EmptyRange,
    #[error(
        "volume boundary wall at an irrational parameter (quadratic {c2}t^2 + {c1}t + {c0} = 0, near t = {approx})"
    )]
    IrrationalWall {
        c0: String,
        c1: String,
        c2: String,
        approx: f64,
    },
    #[error("chamber scan failed to stabilize: {0}")]
    ScanFailure(String),
    #[error("chamber polynomial fit failed at t = {0}")]
    ChamberFit(String),
    #[error(transparent)]
    Zariski(#[from] ZariskiError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `P.P` for big classes, `0` on the pseudo-effective boundary and outside.
pub fn vol(d: &DivisorClass) -> Result<Rat, ZariskiError> {
    match zariski::zariski_decompose(d) {
        Ok(z) => Ok(z.positive_square()),
        Err(ZariskiError::NotPseudoEffective) => Ok(Rat::zero()),
        Err(e) => Err(e),
    }
}

/// The gradient of the volume at a big class, as an exact covector: the
/// derivative along `beta` is `2 beta . P`.
#[derive(Debug, Clone)]
pub struct VolumeGradient {
    at: DivisorClass,
    coords: Vec<Rat>,
}

impl VolumeGradient {
    pub fn at(&self) -> &DivisorClass {
        &self.at
    }

    /// Coordinates of the covector against the geometry basis.
    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    /// Directional derivative along `beta`.
    pub fn apply(&self, beta: &DivisorClass) -> Result<Rat, GeometryError> {
        if !self.at.geometry().same_space(beta.geometry()) {
            return Err(GeometryError::Mismatch(
                self.at.geometry().name().to_string(),
                beta.geometry().name().to_string(),
            ));
        }
        Ok(self
            .coords
            .iter()
            .zip(beta.coords())
            .map(|(g, b)| g * b)
            .sum())
    }
}

/// Gradient via the positive part: `beta -> 2 beta . P`.
pub fn grad_vol(d: &DivisorClass) -> Result<VolumeGradient, VolumeError> {
    let z = zariski::zariski_decompose(d).map_err(|e| match e {
        ZariskiError::NotPseudoEffective => VolumeError::NotBig,
        other => VolumeError::Zariski(other),
    })?;
    if !z.positive_square().is_positive() {
        return Err(VolumeError::NotBig);
    }
    let geom = d.geometry();
    let p = z.positive().coords();
    let two = rat_int(2);
    let coords: Vec<Rat> = (0..geom.rank())
        .map(|i| {
            let mut acc = Rat::zero();
            for (j, pj) in p.iter().enumerate() {
                if pj.is_zero() || geom.intersection_matrix()[i][j] == 0 {
                    continue;
                }
                acc += pj * rat_int(geom.intersection_matrix()[i][j]);
            }
            acc * &two
        })
        .collect();
    Ok(VolumeGradient {
        at: d.clone(),
        coords,
    })
}

/// One sampled row of a segment profile.
#[derive(Debug, Clone)]
pub struct ProfileRow {
    pub t: Rat,
    pub volume: Rat,
    /// Directional derivative where the class is big; absent otherwise.
    pub derivative: Option<Rat>,
    pub chamber: usize,
}

/// Grid samples of `t -> Vol(alpha + t beta)` with derivatives and chamber ids.
#[derive(Debug, Clone)]
pub struct SegmentProfile {
    pub alpha: DivisorClass,
    pub beta: DivisorClass,
    pub rows: Vec<ProfileRow>,
}

/// Sample the segment on a rational grid; the grid is expected sorted, so
/// chamber ids partition the rows into intervals.
pub fn segment_profile(
    alpha: &DivisorClass,
    beta: &DivisorClass,
    grid: &[Rat],
) -> Result<SegmentProfile, VolumeError> {
    let mut keys: Vec<Option<Vec<usize>>> = Vec::new();
    let mut rows = Vec::with_capacity(grid.len());
    for t in grid {
        let d = alpha + &beta.scaled(t);
        let (volume, derivative, key) = match zariski::zariski_decompose(&d) {
            Ok(z) => {
                let v = z.positive_square();
                if v.is_positive() {
                    let deriv = z.positive().intersect(beta)? * rat_int(2);
                    (v, Some(deriv), Some(z.support().to_vec()))
                } else {
                    (Rat::zero(), None, None)
                }
            }
            Err(ZariskiError::NotPseudoEffective) => (Rat::zero(), None, None),
            Err(e) => return Err(e.into()),
        };
        let chamber = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                keys.len() - 1
            }
        };
        rows.push(ProfileRow {
            t: t.clone(),
            volume,
            derivative,
            chamber,
        });
    }
    Ok(SegmentProfile {
        alpha: alpha.clone(),
        beta: beta.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WallKind {
    /// The Zariski support set changes across the wall.
    SupportChange {
        gained: Vec<usize>,
        lost: Vec<usize>,
    },
    /// The segment leaves the big cone: the volume vanishes beyond.
    VolumeBoundary,
}

/// An interior wall of the scanned segment, with the exact polynomial data of
/// the two adjacent chambers evaluated at the wall.
#[derive(Debug, Clone)]
pub struct Wall {
    pub t: Rat,
    pub kind: WallKind,
    pub value_left: Rat,
    pub value_right: Rat,
    pub derivative_left: Rat,
    pub derivative_right: Rat,
    /// Exact agreement of value and first derivative across the wall.
    pub c1_matched: bool,
    /// Jump of the second derivative across the wall.
    pub second_derivative_jump: Rat,
}

/// A maximal interval with constant Zariski support (or zero volume), carrying
/// the exact quadratic `q(t) = c[0] + c[1] t + c[2] t^2` equal to the volume.
#[derive(Debug, Clone)]
pub struct Chamber {
    pub lo: Rat,
    pub hi: Rat,
    /// Support curve indices; `None` on the zero-volume complement.
    pub support: Option<Vec<usize>>,
    pub poly: [Rat; 3],
}

impl Chamber {
    pub fn eval(&self, t: &Rat) -> Rat {
        &self.poly[0] + &self.poly[1] * t + &self.poly[2] * t * t
    }

    pub fn derivative(&self, t: &Rat) -> Rat {
        &self.poly[1] + &self.poly[2] * rat_int(2) * t
    }
}

/// Exact chamber decomposition of `t -> Vol(alpha + t beta)` over `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct ChamberReport {
    pub alpha: DivisorClass,
    pub beta: DivisorClass,
    pub t0: Rat,
    pub t1: Rat,
    pub chambers: Vec<Chamber>,
    pub walls: Vec<Wall>,
}

impl ChamberReport {
    /// Exact volume lookup through the chamber polynomials.
    pub fn eval(&self, t: &Rat) -> Option<Rat> {
        self.chambers
            .iter()
            .find(|c| &c.lo <= t && t <= &c.hi)
            .map(|c| c.eval(t))
    }
}

/// Affine continuation of the decomposition on a fixed support set: the
/// support coefficients and positive part are affine in the segment parameter,
/// so the volume is an exact quadratic and every chamber-exit condition is a
/// linear or quadratic root.
struct AffineModel {
    /// `P(t).P(t)` coefficients: q[0] + q[1] t + q[2] t^2.
    q: [Rat; 3],
    /// Linear functions `f(t) = f0 + f1 t` that stay nonnegative inside the
    /// chamber: support coefficients and off-support curve pairings.
    events: Vec<(Rat, Rat)>,
}

impl AffineModel {
    fn build(
        alpha: &DivisorClass,
        beta: &DivisorClass,
        support: &[usize],
    ) -> Result<Self, VolumeError> {
        let geom = alpha.geometry();
        let a0 = solve_orthogonality(geom, alpha, support)?;
        let a1 = solve_orthogonality(geom, beta, support)?;
        let mut p0 = alpha.coords().to_vec();
        let mut p1 = beta.coords().to_vec();
        for ((&i, c0), c1) in support.iter().zip(&a0).zip(&a1) {
            for ((x0, x1), cc) in p0.iter_mut().zip(p1.iter_mut()).zip(geom.curve_coords(i)) {
                *x0 -= c0 * cc;
                *x1 -= c1 * cc;
            }
        }
        let q0 = geom.pair(&p0, &p0);
        let q1 = geom.pair(&p0, &p1) * rat_int(2);
        let q2 = geom.pair(&p1, &p1);
        let mut events: Vec<(Rat, Rat)> = a0.iter().cloned().zip(a1.iter().cloned()).collect();
        for j in 0..geom.curve_count() {
            if support.contains(&j) {
                continue;
            }
            let f0 = geom.pair(&p0, geom.curve_coords(j));
            let f1 = geom.pair(&p1, geom.curve_coords(j));
            events.push((f0, f1));
        }
        Ok(Self {
            q: [q0, q1, q2],
            events,
        })
    }

    /// Strictly inside the chamber: every event function positive (or
    /// identically zero) and the volume quadratic positive.
    fn clean_at(&self, t: &Rat) -> bool {
        if !self.q_eval(t).is_positive() {
            return false;
        }
        for (f0, f1) in &self.events {
            let v = f0 + f1 * t;
            if v.is_negative() {
                return false;
            }
            if v.is_zero() && !(f0.is_zero() && f1.is_zero()) {
                return false;
            }
        }
        true
    }

    fn q_eval(&self, t: &Rat) -> Rat {
        &self.q[0] + &self.q[1] * t + &self.q[2] * t * t
    }

    /// Earliest linear event strictly after `from`.
    fn next_linear_event(&self, from: &Rat) -> Option<Rat> {
        let mut best: Option<Rat> = None;
        for (f0, f1) in &self.events {
            if f1.is_zero() {
                continue;
            }
            let root = -(f0 / f1);
            if &root > from && best.as_ref().is_none_or(|b| root < *b) {
                best = Some(root);
            }
        }
        best
    }

    /// Does `q` have a root in `(from, upto]`, given `q(from) > 0`?
    /// Exact decision; the root itself may be irrational.
    fn q_root_in(&self, from: &Rat, upto: &Rat) -> bool {
        if upto <= from {
            return false;
        }
        let (q1, q2) = (&self.q[1], &self.q[2]);
        if q2.is_zero() {
            if q1.is_zero() {
                return false;
            }
            let root = -(&self.q[0] / q1);
            return &root > from && &root <= upto;
        }
        if !self.q_eval(upto).is_positive() {
            return true;
        }
        if q2.is_positive() {
            let vertex = -(q1 / (q2 * rat_int(2)));
            if &vertex > from && &vertex < upto && !self.q_eval(&vertex).is_positive() {
                return true;
            }
        }
        false
    }

    /// Smallest root of `q` strictly after `from`, as an exact rational;
    /// `Err` when that root is irrational.
    fn q_first_root_after(&self, from: &Rat) -> Result<Option<Rat>, VolumeError> {
        let (q0, q1, q2) = (&self.q[0], &self.q[1], &self.q[2]);
        if q2.is_zero() {
            if q1.is_zero() {
                return Ok(None);
            }
            let root = -(q0 / q1);
            return Ok(if &root > from { Some(root) } else { None });
        }
        let disc = q1 * q1 - q0 * q2 * rat_int(4);
        if disc.is_negative() {
            return Ok(None);
        }
        match rat_sqrt_exact(&disc) {
            Some(s) => {
                let two_q2 = q2 * rat_int(2);
                let r1 = (-(q1.clone()) + &s) / &two_q2;
                let r2 = (-(q1.clone()) - &s) / &two_q2;
                let mut roots = [r1, r2];
                roots.sort();
                Ok(roots.into_iter().find(|r| r > from))
            }
            None => {
                // irrational roots; report the one the scan is about to hit
                let a = rat_to_f64(q2);
                let b = rat_to_f64(q1);
                let c = rat_to_f64(q0);
                let sq = (b * b - 4.0 * a * c).max(0.0).sqrt();
                let cands = [(-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)];
                let from_f = rat_to_f64(from);
                let approx = cands
                    .into_iter()
                    .filter(|r| *r > from_f)
                    .fold(f64::INFINITY, f64::min);
                Err(VolumeError::IrrationalWall {
                    c0: crate::rational::fmt_rat(q0),
                    c1: crate::rational::fmt_rat(q1),
                    c2: crate::rational::fmt_rat(q2),
                    approx,
                })
            }
        }
    }

    /// All event functions stay nonnegative on `(lo, at]`, and the volume
    /// quadratic stays positive on `(lo, at)`. Used to confirm a probe lies in
    /// the chamber that starts at `lo`.
    fn valid_back_to(&self, lo: &Rat, at: &Rat) -> bool {
        for (f0, f1) in &self.events {
            let v_lo = f0 + f1 * lo;
            if v_lo.is_negative() {
                return false;
            }
        }
        if self.q_eval(lo).is_negative() {
            return false;
        }
        let q2 = &self.q[2];
        if q2.is_positive() {
            let vertex = -(&self.q[1] / (q2 * rat_int(2)));
            if &vertex > lo && &vertex < at && !self.q_eval(&vertex).is_positive() {
                return false;
            }
        }
        true
    }
}

/// Exact scan of `[t0, t1]`: locate walls, fit and verify per-chamber
/// quadratics, and record wall matching data.
pub fn chamber_scan(
    alpha: &DivisorClass,
    beta: &DivisorClass,
    t0: &Rat,
    t1: &Rat,
) -> Result<ChamberReport, VolumeError> {
    if beta.is_zero() {
        return Err(VolumeError::DegenerateDirection);
    }
    if t0 >= t1 {
        return Err(VolumeError::EmptyRange);
    }
    let anchor = find_clean_anchor(alpha, beta, t0, t1)?;
    let mut intervals: Vec<(Rat, Rat, Option<Vec<usize>>)> = Vec::new();
    match anchor {
        None => {
            intervals.push((t0.clone(), t1.clone(), None));
        }
        Some(anchor) => {
            let (right, right_boundary) = walk(alpha, beta, &anchor, t1)?;
            let minus_beta = -beta;
            let (left_raw, left_boundary) = walk(alpha, &minus_beta, &(-anchor.clone()), &-t0.clone())?;
            // mirror the left walk back to t-coordinates
            let mut left: Vec<(Rat, Rat, Vec<usize>)> = left_raw
                .into_iter()
                .map(|(lo, hi, s)| (-hi, -lo, s))
                .collect();
            left.reverse();
            if let Some(b) = left_boundary {
                let b = -b;
                if &b > t0 {
                    intervals.push((t0.clone(), b, None));
                }
            }
            // merge the anchor chamber shared by both walks
            let mut merged: Vec<(Rat, Rat, Vec<usize>)> = left;
            for seg in right {
                match merged.last_mut() {
                    Some(last) if last.2 == seg.2 && last.1 == seg.0 => {
                        last.1 = seg.1;
                    }
                    _ => merged.push(seg),
                }
            }
            for (lo, hi, s) in merged {
                intervals.push((lo, hi, Some(s)));
            }
            if let Some(b) = right_boundary {
                if &b < t1 {
                    intervals.push((b, t1.clone(), None));
                }
            }
        }
    }
    // polynomials: symbolic from the affine model, cross-fitted from samples
    let mut chambers = Vec::with_capacity(intervals.len());
    for (lo, hi, support) in &intervals {
        let poly = match support {
            Some(s) => chamber_poly(alpha, beta, lo, hi, s)?,
            None => {
                verify_zero_chamber(alpha, beta, lo, hi)?;
                [Rat::zero(), Rat::zero(), Rat::zero()]
            }
        };
        chambers.push(Chamber {
            lo: lo.clone(),
            hi: hi.clone(),
            support: support.clone(),
            poly,
        });
    }
    let mut walls = Vec::new();
    for w in 1..chambers.len() {
        let (l, r) = (&chambers[w - 1], &chambers[w]);
        let t = l.hi.clone();
        let kind = match (&l.support, &r.support) {
            (Some(a), Some(b)) => WallKind::SupportChange {
                gained: b.iter().copied().filter(|i| !a.contains(i)).collect(),
                lost: a.iter().copied().filter(|i| !b.contains(i)).collect(),
            },
            _ => WallKind::VolumeBoundary,
        };
        let value_left = l.eval(&t);
        let value_right = r.eval(&t);
        let derivative_left = l.derivative(&t);
        let derivative_right = r.derivative(&t);
        let c1_matched = value_left == value_right && derivative_left == derivative_right;
        let second_derivative_jump = (&r.poly[2] - &l.poly[2]) * rat_int(2);
        walls.push(Wall {
            t,
            kind,
            value_left,
            value_right,
            derivative_left,
            derivative_right,
            c1_matched,
            second_derivative_jump,
        });
    }
    Ok(ChamberReport {
        alpha: alpha.clone(),
        beta: beta.clone(),
        t0: t0.clone(),
        t1: t1.clone(),
        chambers,
        walls,
    })
}

fn class_at(alpha: &DivisorClass, beta: &DivisorClass, t: &Rat) -> DivisorClass {
    alpha + &beta.scaled(t)
}

/// A grid point of `[t0, t1]` that is big and sits in a chamber interior,
/// or `None` when the scan grid sees no big class at all.
fn find_clean_anchor(
    alpha: &DivisorClass,
    beta: &DivisorClass,
    t0: &Rat,
    t1: &Rat,
) -> Result<Option<Rat>, VolumeError> {
    const GRID: i64 = 128;
    let width = t1 - t0;
    let mut big_points = Vec::new();
    for k in 0..=GRID {
        let t = t0 + &width * rat_int(k) / rat_int(GRID);
        let d = class_at(alpha, beta, &t);
        if zariski::is_big(&d)? {
            big_points.push(t);
        }
    }
    for t in &big_points {
        // perturbation ladder off walls, staying inside the range
        for j in 0..16 {
            let cand = if j == 0 {
                t.clone()
            } else {
                let delta = &width / rat_int(GRID * (1 << j.min(12)));
                if t + &delta < *t1 {
                    t + &delta
                } else {
                    t - &delta
                }
            };
            if is_clean_point(alpha, beta, &cand)? {
                return Ok(Some(cand));
            }
        }
    }
    if big_points.is_empty() {
        Ok(None)
    } else {
        Err(VolumeError::ScanFailure(
            "no chamber-interior anchor found near the sampled big points".into(),
        ))
    }
}

fn is_clean_point(
    alpha: &DivisorClass,
    beta: &DivisorClass,
    t: &Rat,
) -> Result<bool, VolumeError> {
    let d = class_at(alpha, beta, t);
    let z = match zariski::zariski_decompose(&d) {
        Ok(z) => z,
        Err(ZariskiError::NotPseudoEffective) => return Ok(false),
        Err(e) => return Err(e.into()),
    };
    if !z.positive_square().is_positive() {
        return Ok(false);
    }
    let model = AffineModel::build(alpha, beta, z.support())?;
    Ok(model.clean_at(t))
}

/// Walk right from a clean anchor: chambers until the range end or the big
/// cone boundary. Returns half-open coverage `[anchor, X]` and the boundary
/// parameter when the volume hits zero at `X < hi`.
#[allow(clippy::type_complexity)]
fn walk(
    alpha: &DivisorClass,
    beta: &DivisorClass,
    anchor: &Rat,
    hi: &Rat,
) -> Result<(Vec<(Rat, Rat, Vec<usize>)>, Option<Rat>), VolumeError> {
    let mut segs: Vec<(Rat, Rat, Vec<usize>)> = Vec::new();
    let mut chamber_start = anchor.clone();
    let mut probe = anchor.clone();
    for _guard in 0..512 {
        let d = class_at(alpha, beta, &probe);
        let z = zariski::zariski_decompose(&d)?;
        let support = z.support().to_vec();
        let model = AffineModel::build(alpha, beta, &support)?;
        let lin = model.next_linear_event(&probe).filter(|e| e <= hi);
        let horizon = lin.clone().unwrap_or_else(|| hi.clone());
        let boundary = if model.q_root_in(&probe, &horizon) {
            model.q_first_root_after(&probe)?
        } else {
            None
        };
        match (lin, boundary) {
            (_, Some(b)) if segs_boundary_first(&b, &model, &probe) => {
                segs.push((chamber_start, b.clone(), support));
                return Ok((segs, Some(b)));
            }
            (Some(e), _) => {
                segs.push((chamber_start.clone(), e.clone(), support.clone()));
                if e == *hi {
                    // the wall sits exactly on the range end
                    return Ok((segs, None));
                }
                chamber_start = e.clone();
                // probe the next chamber, refining until the affine model there
                // is valid all the way back to the wall
                let mut upper = hi.clone();
                let mut accepted = None;
                for _tries in 0..256 {
                    let cand = (&e + &upper) / rat_int(2);
                    let dc = class_at(alpha, beta, &cand);
                    let zc = match zariski::zariski_decompose(&dc) {
                        Ok(z) => z,
                        Err(ZariskiError::NotPseudoEffective) => {
                            upper = cand;
                            continue;
                        }
                        Err(err) => return Err(err.into()),
                    };
                    if !zc.positive_square().is_positive() {
                        upper = cand;
                        continue;
                    }
                    let mc = AffineModel::build(alpha, beta, zc.support())?;
                    if mc.clean_at(&cand) && mc.valid_back_to(&e, &cand) {
                        accepted = Some(cand);
                        break;
                    }
                    upper = cand;
                }
                probe = accepted.ok_or_else(|| {
                    VolumeError::ScanFailure(format!(
                        "could not enter the chamber after the wall at t = {}",
                        crate::rational::fmt_rat(&e)
                    ))
                })?;
            }
            (None, _) => {
                segs.push((chamber_start, hi.clone(), support));
                return Ok((segs, None));
            }
        }
    }
    Err(VolumeError::ScanFailure(
        "wall budget exhausted; catalog data may be inconsistent".into(),
    ))
}

/// With both a boundary root and possibly a linear event present, the
/// boundary wins when it comes first (ties classify as boundary).
fn segs_boundary_first(boundary: &Rat, model: &AffineModel, probe: &Rat) -> bool {
    match model.next_linear_event(probe) {
        None => true,
        Some(e) => boundary <= &e,
    }
}

/// Exact quadratic on a big chamber: symbolic from the affine support data,
/// confirmed by interpolation through volume samples (fit on four points,
/// verified on four more).
fn chamber_poly(
    alpha: &DivisorClass,
    beta: &DivisorClass,
    lo: &Rat,
    hi: &Rat,
    support: &[usize],
) -> Result<[Rat; 3], VolumeError> {
    let model = AffineModel::build(alpha, beta, support)?;
    let symbolic = model.q.clone();
    let width = hi - lo;
    let samples: Vec<Rat> = (1..=8)
        .map(|k| lo + &width * rat_int(k) / rat_int(9))
        .collect();
    let values: Vec<Rat> = samples
        .iter()
        .map(|t| vol(&class_at(alpha, beta, t)).map_err(VolumeError::from))
        .collect::<Result<_, _>>()?;
    // interpolate through the first three samples
    let vander: Vec<Vec<Rat>> = samples[..3]
        .iter()
        .map(|t| vec![rat_int(1), t.clone(), t * t])
        .collect();
    let fitted = crate::linalg::solve(&vander, &values[..3])
        .map_err(|e| VolumeError::ScanFailure(e.to_string()))?;
    let fitted = [fitted[0].clone(), fitted[1].clone(), fitted[2].clone()];
    for (t, v) in samples.iter().zip(&values) {
        let q = &fitted[0] + &fitted[1] * t + &fitted[2] * t * t;
        if &q != v {
            return Err(VolumeError::ChamberFit(crate::rational::fmt_rat(t)));
        }
    }
    if fitted != symbolic {
        return Err(VolumeError::ChamberFit(format!(
            "fit disagrees with support data on [{}, {}]",
            crate::rational::fmt_rat(lo),
            crate::rational::fmt_rat(hi)
        )));
    }
    Ok(symbolic)
}

fn verify_zero_chamber(
    alpha: &DivisorClass,
    beta: &DivisorClass,
    lo: &Rat,
    hi: &Rat,
) -> Result<(), VolumeError> {
    let width = hi - lo;
    for k in 1..=8 {
        let t = lo + &width * rat_int(k) / rat_int(9);
        if !vol(&class_at(alpha, beta, &t))?.is_zero() {
            return Err(VolumeError::ChamberFit(format!(
                "volume positive at t = {} inside a zero chamber",
                crate::rational::fmt_rat(&t)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::builtin_geometry;
    use crate::rational::rat;

    #[test]
    fn vol_examples() {
        let g = builtin_geometry("bl1_p2").unwrap();
        assert_eq!(vol(&g.class_i64(&[2, -1])).unwrap(), rat_int(3));
        assert_eq!(vol(&g.class_i64(&[2, 1])).unwrap(), rat_int(4));
        assert_eq!(vol(&g.class_i64(&[1, -2])).unwrap(), rat_int(0));
    }

    #[test]
    fn vol_is_degree_two_homogeneous() {
        let g = builtin_geometry("bl2_p2").unwrap();
        let d = g.class_i64(&[3, -1, 1]);
        let lam = rat(5, 3);
        assert_eq!(
            vol(&d.scaled(&lam)).unwrap(),
            vol(&d).unwrap() * &lam * &lam
        );
    }

    #[test]
    fn gradient_examples() {
        let g = builtin_geometry("bl1_p2").unwrap();
        let h = g.basis_class(0);
        let e = g.basis_class(1);

        let d = g.class_i64(&[2, -1]);
        let grad = grad_vol(&d).unwrap();
        assert_eq!(grad.apply(&h).unwrap(), rat_int(4));

        let d2 = g.class_i64(&[2, 1]);
        let grad2 = grad_vol(&d2).unwrap();
        assert_eq!(grad2.apply(&e).unwrap(), rat_int(0));

        // Euler relation for a degree-2 homogeneous function
        assert_eq!(grad.apply(&d).unwrap(), vol(&d).unwrap() * rat_int(2));

        assert!(matches!(
            grad_vol(&g.class_i64(&[1, -1])),
            Err(VolumeError::NotBig)
        ));
    }

    #[test]
    fn profile_on_shrinking_exceptional_direction() {
        let g = builtin_geometry("bl1_p2").unwrap();
        let alpha = g.class_i64(&[2, 0]);
        let beta = -&g.basis_class(1); // -E
        let grid = vec![Rat::zero(), rat(1, 2), rat_int(1)];
        let p = segment_profile(&alpha, &beta, &grid).unwrap();
        let vols: Vec<Rat> = p.rows.iter().map(|r| r.volume.clone()).collect();
        assert_eq!(vols, vec![rat_int(4), rat(15, 4), rat_int(3)]);
        assert_eq!(p.rows[1].derivative, Some(rat_int(-1)));
    }

    #[test]
    fn profile_constant_on_contracted_direction() {
        let g = builtin_geometry("bl1_p2").unwrap();
        let alpha = g.class_i64(&[2, 0]);
        let beta = g.basis_class(1); // +E
        let grid: Vec<Rat> = (0..=4).map(rat_int).collect();
        let p = segment_profile(&alpha, &beta, &grid).unwrap();
        for row in &p.rows {
            assert_eq!(row.volume, rat_int(4));
            assert_eq!(row.derivative, Some(Rat::zero()));
        }
    }

    #[test]
    fn chamber_scan_blowup_example() {
        let g = builtin_geometry("bl1_p2").unwrap();
        let alpha = g.class_i64(&[2, 1]);
        let beta = -&g.basis_class(1);
        let report = chamber_scan(&alpha, &beta, &Rat::zero(), &rat_int(4)).unwrap();

        assert_eq!(report.chambers.len(), 3);
        let walls: Vec<Rat> = report.walls.iter().map(|w| w.t.clone()).collect();
        assert_eq!(walls, vec![rat_int(1), rat_int(3)]);

        // polynomials 4, 4 - (t-1)^2 = 3 + 2t - t^2, 0
        assert_eq!(report.chambers[0].poly, [rat_int(4), rat_int(0), rat_int(0)]);
        assert_eq!(
            report.chambers[1].poly,
            [rat_int(3), rat_int(2), rat_int(-1)]
        );
        assert_eq!(report.chambers[2].poly, [rat_int(0), rat_int(0), rat_int(0)]);

        // C1 matching at the interior support wall
        let w0 = &report.walls[0];
        assert!(matches!(w0.kind, WallKind::SupportChange { .. }));
        assert!(w0.c1_matched);
        assert_eq!(w0.value_left, rat_int(4));
        assert_eq!(w0.derivative_left, rat_int(0));

        // value continuity but derivative jump at the big cone boundary
        let w1 = &report.walls[1];
        assert!(matches!(w1.kind, WallKind::VolumeBoundary));
        assert_eq!(w1.value_left, rat_int(0));
        assert_eq!(w1.value_right, rat_int(0));
        assert_eq!(w1.derivative_left, rat_int(-4));
        assert_eq!(w1.derivative_right, rat_int(0));
        assert!(!w1.c1_matched);
    }

    #[test]
    fn chamber_scan_single_nef_chamber() {
        let g = builtin_geometry("p1xp1").unwrap();
        let alpha = g.class_i64(&[1, 1]);
        let beta = g.class_i64(&[1, 0]);
        let report = chamber_scan(&alpha, &beta, &Rat::zero(), &rat_int(1)).unwrap();
        assert_eq!(report.chambers.len(), 1);
        assert!(report.walls.is_empty());
        // Vol = 2(1+t)
        assert_eq!(
            report.chambers[0].poly,
            [rat_int(2), rat_int(2), rat_int(0)]
        );
    }

    #[test]
    fn chamber_scan_rejects_degenerate_direction() {
        let g = builtin_geometry("p1xp1").unwrap();
        let alpha = g.class_i64(&[1, 1]);
        let beta = g.zero_class();
        assert!(matches!(
            chamber_scan(&alpha, &beta, &Rat::zero(), &rat_int(1)),
            Err(VolumeError::DegenerateDirection)
        ));
    }

    #[test]
    fn chamber_scan_all_zero_segment() {
        let g = builtin_geometry("bl1_p2").unwrap();
        let alpha = g.class_i64(&[-3, 0]);
        let beta = g.basis_class(1);
        let report = chamber_scan(&alpha, &beta, &Rat::zero(), &rat_int(1)).unwrap();
        assert_eq!(report.chambers.len(), 1);
        assert_eq!(report.chambers[0].support, None);
    }

    #[test]
    fn chamber_scan_entering_and_leaving_big_cone() {
        // on p1xp1, Vol((t-1)F1 + (3-t)F2) = 2(t-1)(3-t): big exactly on (1, 3)
        let g = builtin_geometry("p1xp1").unwrap();
        let alpha = g.class_i64(&[-1, 3]);
        let beta = g.class_i64(&[1, -1]);
        let report = chamber_scan(&alpha, &beta, &Rat::zero(), &rat_int(4)).unwrap();
        assert_eq!(report.chambers.len(), 3);
        let walls: Vec<Rat> = report.walls.iter().map(|w| w.t.clone()).collect();
        assert_eq!(walls, vec![rat_int(1), rat_int(3)]);
        assert_eq!(report.chambers[0].support, None);
        assert_eq!(report.chambers[2].support, None);
        // middle: 2(t-1)(3-t) = -6 + 8t - 2t^2
        assert_eq!(
            report.chambers[1].poly,
            [rat_int(-6), rat_int(8), rat_int(-2)]
        );
    }

    #[test]
    fn chamber_scan_five_chambers_on_bl2() {
        // D(t) = 3H + (1-t)E1 + (1-2t)E2: the exceptional curves leave the
        // support one after the other, then H-E1-E2 enters, then the segment
        // exits the big cone
        let g = builtin_geometry("bl2_p2").unwrap();
        let alpha = g.class_i64(&[3, 1, 1]);
        let beta = g.class_i64(&[0, -1, -2]);
        let report = chamber_scan(&alpha, &beta, &Rat::zero(), &rat_int(3)).unwrap();
        let walls: Vec<Rat> = report.walls.iter().map(|w| w.t.clone()).collect();
        assert_eq!(walls, vec![rat(1, 2), rat_int(1), rat(5, 3), rat_int(2)]);
        let polys: Vec<[Rat; 3]> = report.chambers.iter().map(|c| c.poly.clone()).collect();
        assert_eq!(
            polys,
            vec![
                [rat_int(9), rat_int(0), rat_int(0)],
                [rat_int(8), rat_int(4), rat_int(-4)],
                [rat_int(7), rat_int(6), rat_int(-5)],
                [rat_int(32), rat_int(-24), rat_int(4)],
                [rat_int(0), rat_int(0), rat_int(0)],
            ]
        );
        // C1 across every interior wall of the big cone, kink at the boundary
        for w in &report.walls[..3] {
            assert!(w.c1_matched, "wall at {}", crate::rational::fmt_rat(&w.t));
        }
        assert!(!report.walls[3].c1_matched);
        assert_eq!(report.walls[3].derivative_left, rat_int(-8));
        // support sets hand over one curve at a time
        let supports: Vec<Option<Vec<usize>>> =
            report.chambers.iter().map(|c| c.support.clone()).collect();
        assert_eq!(
            supports,
            vec![
                Some(vec![0, 1]),
                Some(vec![0]),
                Some(vec![]),
                Some(vec![2]),
                None,
            ]
        );
    }

    #[test]
    fn chamber_scan_irrational_boundary_is_reported() {
        // Builtin catalogs cut the big cone along rational walls, so an
        // irrational volume boundary needs a geometry whose cone data leaves
        // the round quadric exposed: rank 3 with an empty catalog.
        let g = crate::geometry::SurfaceGeometry::new(
            "round3",
            vec!["H".into(), "A".into(), "B".into()],
            vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]],
            vec![],
            Some(vec![vec![rat_int(1), rat_int(0), rat_int(0)]]),
        )
        .unwrap();
        // Vol(2H + tA + (1+t)B) = 4 - t^2 - (1+t)^2; positive root (-1+sqrt(7))/2
        let alpha = g.class_i64(&[2, 0, 1]);
        let beta = g.class_i64(&[0, 1, 1]);
        let err = chamber_scan(&alpha, &beta, &Rat::zero(), &rat_int(2)).unwrap_err();
        match err {
            VolumeError::IrrationalWall { approx, .. } => {
                let expect = (-1.0 + 7.0_f64.sqrt()) / 2.0;
                assert!((approx - expect).abs() < 1e-9, "approx {approx}");
            }
            other => panic!("expected irrational wall, got {other:?}"),
        }
    }
}
