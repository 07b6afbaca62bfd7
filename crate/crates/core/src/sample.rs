//! Deterministic rational sampling for the probe suites.
//!
//! Floats never enter the cone tests: samples are dyadic rationals drawn from
//! a seeded generator, then accepted or rejected with exact arithmetic.

use crate::geometry::{DivisorClass, SurfaceGeometry};
use crate::rational::{parse_rat, rat_int, Rat};
use crate::zariski;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Grid resolution of uniform rational draws.
const DENOM: i64 = 1 << 12;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("invalid box spec `{0}`: want lo:hi pairs, comma separated")]
    BadBoxSpec(String),
    #[error("box has {got} coordinate ranges, geometry rank is {want}")]
    BoxRank { got: usize, want: usize },
    #[error("rejection sampling found no admissible point in {0} attempts")]
    EmptyRegion(usize),
}

/// A coordinate box with rational bounds.
#[derive(Debug, Clone)]
pub struct SampleBox {
    pub ranges: Vec<(Rat, Rat)>,
}

impl SampleBox {
    pub fn new(ranges: Vec<(Rat, Rat)>) -> Self {
        Self { ranges }
    }

    /// Parse `"lo:hi,lo:hi,..."` with rational endpoints.
    pub fn parse(spec: &str) -> Result<Self, SampleError> {
        let mut ranges = Vec::new();
        for part in spec.split(',') {
            let mut ends = part.split(':');
            let (Some(lo), Some(hi), None) = (ends.next(), ends.next(), ends.next()) else {
                return Err(SampleError::BadBoxSpec(spec.to_string()));
            };
            let lo = parse_rat(lo).map_err(|_| SampleError::BadBoxSpec(spec.to_string()))?;
            let hi = parse_rat(hi).map_err(|_| SampleError::BadBoxSpec(spec.to_string()))?;
            if lo > hi {
                return Err(SampleError::BadBoxSpec(spec.to_string()));
            }
            ranges.push((lo, hi));
        }
        if ranges.is_empty() {
            return Err(SampleError::BadBoxSpec(spec.to_string()));
        }
        Ok(Self { ranges })
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    /// All corner points of the box.
    pub fn corners(&self) -> Vec<Vec<Rat>> {
        let n = self.dim();
        (0..(1usize << n))
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        if mask >> i & 1 == 0 {
                            self.ranges[i].0.clone()
                        } else {
                            self.ranges[i].1.clone()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        self.ranges
            .iter()
            .map(|(lo, hi)| {
                format!(
                    "{}:{}",
                    crate::rational::fmt_rat(lo),
                    crate::rational::fmt_rat(hi)
                )
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Uniform dyadic rational in `[lo, hi]`.
pub fn rat_uniform(rng: &mut ChaCha8Rng, lo: &Rat, hi: &Rat) -> Rat {
    let k = rng.gen_range(0..=DENOM);
    lo + (hi - lo) * rat_int(k) / rat_int(DENOM)
}

/// Uniform point of the box.
pub fn point_in_box(rng: &mut ChaCha8Rng, sbox: &SampleBox) -> Vec<Rat> {
    sbox.ranges
        .iter()
        .map(|(lo, hi)| rat_uniform(rng, lo, hi))
        .collect()
}

/// Uniform class of the box.
pub fn class_in_box(
    rng: &mut ChaCha8Rng,
    geom: &SurfaceGeometry,
    sbox: &SampleBox,
) -> DivisorClass {
    geom.class(point_in_box(rng, sbox)).expect("box matches rank")
}

/// Rejection-sampled big class in the box; exact bigness test.
pub fn big_class_in_box(
    rng: &mut ChaCha8Rng,
    geom: &SurfaceGeometry,
    sbox: &SampleBox,
    max_tries: usize,
) -> Result<DivisorClass, SampleError> {
    for _ in 0..max_tries {
        let c = class_in_box(rng, geom, sbox);
        if zariski::is_big(&c).unwrap_or(false) {
            return Ok(c);
        }
    }
    Err(SampleError::EmptyRegion(max_tries))
}

/// Nonnegative rational combination of the nef dual generators; nef by
/// convexity, exactly.
pub fn nef_class(rng: &mut ChaCha8Rng, geom: &SurfaceGeometry) -> Option<DivisorClass> {
    let duals = geom.nef_duals()?;
    let mut coords = vec![Rat::zero(); geom.rank()];
    let zero = Rat::zero();
    let four = rat_int(4);
    for dual in duals {
        let c = rat_uniform(rng, &zero, &four);
        for (x, d) in coords.iter_mut().zip(dual) {
            *x += &c * d;
        }
    }
    Some(geom.class(coords).expect("rank"))
}

/// Random direction with `l1` norm exactly `radius * u`, `u` uniform in (0,1].
pub fn l1_direction(rng: &mut ChaCha8Rng, dim: usize, radius: &Rat) -> Vec<Rat> {
    loop {
        let raw: Vec<Rat> = (0..dim)
            .map(|_| rat_uniform(rng, &rat_int(-1), &rat_int(1)))
            .collect();
        let norm: Rat = raw.iter().map(|c| c.abs()).sum();
        if norm.is_zero() {
            continue;
        }
        let k = rng.gen_range(1..=DENOM);
        let target = radius * rat_int(k) / rat_int(DENOM);
        let scale = &target / &norm;
        return raw.iter().map(|c| c * &scale).collect();
    }
}

/// Default big-cone sampling box per builtin geometry, covering chamber walls.
pub fn default_box(geom: &SurfaceGeometry) -> SampleBox {
    let one = rat_int(1);
    let three = rat_int(3);
    let mut ranges = vec![(one.clone(), three.clone())];
    match geom.name() {
        "p1xp1" | "hirzebruch_0" => ranges.push((one, three)),
        name if name.starts_with("hirzebruch_") => {
            // C0 coefficient small positive, fiber coefficient larger
            ranges = vec![
                (crate::rational::rat(1, 4), one.clone()),
                (one, rat_int(4)),
            ];
        }
        _ => {
            for _ in 1..geom.rank() {
                ranges.push((rat_int(-1), rat_int(1)));
            }
        }
    }
    SampleBox::new(ranges)
}

/// `l1` norm of coordinates.
pub fn l1_norm(coords: &[Rat]) -> Rat {
    coords.iter().map(|c| c.abs()).sum()
}
