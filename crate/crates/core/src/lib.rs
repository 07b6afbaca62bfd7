//! Exact-arithmetic laboratory for the volume function of divisor classes on
//! algebraic surfaces and projectivized rank-2 bundles over them.
//!
//! The core computes volumes, positive parts, and gradients in exact rational
//! arithmetic, cross-checks them against a toric section-counting oracle, and
//! runs randomized certification probes for the regularity of the volume:
//! Lipschitz gradients on the big cone, boundary Lipschitz bounds, concavity,
//! log-concavity of intersection numbers, and bundle segment identities.

pub mod geometry;
pub mod linalg;
pub mod lipschitz;
pub mod probes;
pub mod rational;
pub mod report;
pub mod sample;
pub mod toric;
pub mod volume;
pub mod wolfe;
pub mod zariski;

pub use geometry::{
    builtin_geometry, builtin_names, geometry_from_json, geometry_to_json, load_geometry,
    save_geometry, DivisorClass, GeometryDocument, GeometryError, SurfaceGeometry,
};
pub use rational::{decimal_12, fmt_rat, parse_rat, rat, rat_int, rat_to_f64, Rat};
pub use toric::{builtin_toric, builtin_toric_names, SectionsPolytope, ToricError, ToricSurface};
pub use volume::{
    chamber_scan, grad_vol, segment_profile, vol, Chamber, ChamberReport, SegmentProfile,
    VolumeError, VolumeGradient, Wall, WallKind,
};
pub use zariski::{is_big, is_nef, is_pseff, zariski_decompose, ZariskiDecomposition, ZariskiError};
