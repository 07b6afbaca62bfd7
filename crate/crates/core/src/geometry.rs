//! Picard-lattice models of surfaces: basis, intersection pairing, negative
//! curve catalogs, nef dual generators, builtin families, and the JSON
//! geometry document format.

use crate::linalg;
use crate::rational::{fmt_rat, parse_rat, rat_int, Rat, RationalParseError};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("classes belong to different geometries ({0} vs {1})")]
    Mismatch(String, String),
    #[error("intersection matrix is not symmetric")]
    NonSymmetric,
    #[error("intersection form has signature ({pos},{neg},{zero}), want (1,{want_neg},0)")]
    SignatureFailure {
        pos: usize,
        neg: usize,
        zero: usize,
        want_neg: usize,
    },
    #[error("catalog curve {index} has self-intersection {square} >= 0")]
    NonNegativeCurve { index: usize, square: String },
    #[error("unknown builtin geometry `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid geometry document: {0}")]
    InvalidDocument(String),
    #[error("coordinate vector has length {got}, geometry rank is {want}")]
    CoordinateLength { got: usize, want: usize },
    #[error("invalid rational in document: {0}")]
    Rational(#[from] RationalParseError),
}

#[derive(Debug, PartialEq, Eq)]
struct GeometryData {
    name: String,
    rank: usize,
    basis_labels: Vec<String>,
    intersection: Vec<Vec<i64>>,
    negative_curves: Vec<Vec<Rat>>,
    nef_duals: Option<Vec<Vec<Rat>>>,
    /// Gram matrix of the catalog curves, cached for decomposition solves.
    catalog_gram: Vec<Vec<Rat>>,
}

/// An immutable surface lattice: rank, intersection form, curve catalog, and
/// optional nef dual generators. Cheap to clone and safe to share across
/// threads.
#[derive(Clone)]
pub struct SurfaceGeometry {
    inner: Arc<GeometryData>,
}

impl PartialEq for SurfaceGeometry {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for SurfaceGeometry {}

impl fmt::Debug for SurfaceGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SurfaceGeometry({}, rank {})", self.name(), self.rank())
    }
}

impl SurfaceGeometry {
    /// Build and validate a geometry. Checks symmetry, the (1, rank-1)
    /// signature of the intersection form, and negativity of catalog curves.
    pub fn new(
        name: impl Into<String>,
        basis_labels: Vec<String>,
        intersection: Vec<Vec<i64>>,
        negative_curves: Vec<Vec<Rat>>,
        nef_duals: Option<Vec<Vec<Rat>>>,
    ) -> Result<Self, GeometryError> {
        let name = name.into();
        let rank = basis_labels.len();
        if rank == 0 {
            return Err(GeometryError::InvalidDocument("rank must be >= 1".into()));
        }
        if intersection.len() != rank || intersection.iter().any(|r| r.len() != rank) {
            return Err(GeometryError::InvalidDocument(format!(
                "intersection matrix must be {rank}x{rank}"
            )));
        }
        if !signature_check(&intersection)? {
            let q: Vec<Vec<Rat>> = intersection
                .iter()
                .map(|r| r.iter().map(|&x| rat_int(x)).collect())
                .collect();
            let (pos, neg, zero) = linalg::signature(&q);
            return Err(GeometryError::SignatureFailure {
                pos,
                neg,
                zero,
                want_neg: rank - 1,
            });
        }
        for (label_count, v) in negative_curves.iter().enumerate() {
            if v.len() != rank {
                return Err(GeometryError::CoordinateLength {
                    got: v.len(),
                    want: rank,
                });
            }
            let sq = pair_with(&intersection, v, v);
            if !sq.is_negative() {
                return Err(GeometryError::NonNegativeCurve {
                    index: label_count,
                    square: fmt_rat(&sq),
                });
            }
        }
        if let Some(duals) = &nef_duals {
            for v in duals {
                if v.len() != rank {
                    return Err(GeometryError::CoordinateLength {
                        got: v.len(),
                        want: rank,
                    });
                }
            }
        }
        let catalog_gram: Vec<Vec<Rat>> = negative_curves
            .iter()
            .map(|ci| {
                negative_curves
                    .iter()
                    .map(|cj| pair_with(&intersection, ci, cj))
                    .collect()
            })
            .collect();
        Ok(Self {
            inner: Arc::new(GeometryData {
                name,
                rank,
                basis_labels,
                intersection,
                negative_curves,
                nef_duals,
                catalog_gram,
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn rank(&self) -> usize {
        self.inner.rank
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.inner.basis_labels
    }

    pub fn intersection_matrix(&self) -> &[Vec<i64>] {
        &self.inner.intersection
    }

    pub fn curve_count(&self) -> usize {
        self.inner.negative_curves.len()
    }

    pub fn curve_coords(&self, i: usize) -> &[Rat] {
        &self.inner.negative_curves[i]
    }

    pub fn curve(&self, i: usize) -> DivisorClass {
        DivisorClass {
            geom: self.clone(),
            coords: self.inner.negative_curves[i].clone(),
        }
    }

    pub fn nef_duals(&self) -> Option<&[Vec<Rat>]> {
        self.inner.nef_duals.as_deref()
    }

    pub fn nef_dual(&self, i: usize) -> Option<DivisorClass> {
        self.inner.nef_duals.as_ref().map(|d| DivisorClass {
            geom: self.clone(),
            coords: d[i].clone(),
        })
    }

    pub(crate) fn catalog_gram(&self) -> &[Vec<Rat>] {
        &self.inner.catalog_gram
    }

    /// Same lattice: pointer-equal or structurally equal.
    pub fn same_space(&self, other: &SurfaceGeometry) -> bool {
        self == other
    }

    /// Class from exact coordinates in the geometry basis.
    pub fn class(&self, coords: Vec<Rat>) -> Result<DivisorClass, GeometryError> {
        if coords.len() != self.rank() {
            return Err(GeometryError::CoordinateLength {
                got: coords.len(),
                want: self.rank(),
            });
        }
        Ok(DivisorClass {
            geom: self.clone(),
            coords,
        })
    }

    /// Convenience constructor from integer coordinates.
    pub fn class_i64(&self, coords: &[i64]) -> DivisorClass {
        self.class(coords.iter().map(|&c| rat_int(c)).collect())
            .expect("coordinate length")
    }

    /// Basis class `e_i`.
    pub fn basis_class(&self, i: usize) -> DivisorClass {
        let mut coords = vec![Rat::zero(); self.rank()];
        coords[i] = rat_int(1);
        DivisorClass {
            geom: self.clone(),
            coords,
        }
    }

    pub fn zero_class(&self) -> DivisorClass {
        DivisorClass {
            geom: self.clone(),
            coords: vec![Rat::zero(); self.rank()],
        }
    }

    /// Exact pairing of raw coordinate vectors through the intersection form.
    pub fn pair(&self, a: &[Rat], b: &[Rat]) -> Rat {
        pair_with(&self.inner.intersection, a, b)
    }
}

fn pair_with(q: &[Vec<i64>], a: &[Rat], b: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        let mut row = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() || q[i][j] == 0 {
                continue;
            }
            row += bj * rat_int(q[i][j]);
        }
        acc += ai * row;
    }
    acc
}

/// `true` iff the symmetric integer matrix has signature `(1, n-1)`.
#[allow(clippy::needless_range_loop)]
pub fn signature_check(q: &[Vec<i64>]) -> Result<bool, GeometryError> {
    let n = q.len();
    for i in 0..n {
        if q[i].len() != n {
            return Err(GeometryError::InvalidDocument(
                "intersection matrix must be square".into(),
            ));
        }
        for j in 0..i {
            if q[i][j] != q[j][i] {
                return Err(GeometryError::NonSymmetric);
            }
        }
    }
    let m: Vec<Vec<Rat>> = q
        .iter()
        .map(|r| r.iter().map(|&x| rat_int(x)).collect())
        .collect();
    Ok(linalg::signature(&m) == (1, n - 1, 0))
}

/// A divisor class: exact rational coordinates in the basis of its geometry.
#[derive(Clone, PartialEq, Eq)]
pub struct DivisorClass {
    geom: SurfaceGeometry,
    coords: Vec<Rat>,
}

impl DivisorClass {
    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geom
    }

    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Rat::is_zero)
    }

    /// Exact intersection number through the geometry's form.
    pub fn intersect(&self, other: &DivisorClass) -> Result<Rat, GeometryError> {
        if !self.geom.same_space(&other.geom) {
            return Err(GeometryError::Mismatch(
                self.geom.name().to_string(),
                other.geom.name().to_string(),
            ));
        }
        Ok(self.geom.pair(&self.coords, &other.coords))
    }

    pub fn self_intersection(&self) -> Rat {
        self.geom.pair(&self.coords, &self.coords)
    }

    pub fn scaled(&self, factor: &Rat) -> DivisorClass {
        DivisorClass {
            geom: self.geom.clone(),
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }

    fn assert_same_space(&self, other: &DivisorClass) {
        assert!(
            self.geom.same_space(&other.geom),
            "divisor classes from different geometries ({} vs {})",
            self.geom.name(),
            other.geom.name()
        );
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;

    fn add(self, rhs: &DivisorClass) -> DivisorClass {
        self.assert_same_space(rhs);
        DivisorClass {
            geom: self.geom.clone(),
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;

    fn sub(self, rhs: &DivisorClass) -> DivisorClass {
        self.assert_same_space(rhs);
        DivisorClass {
            geom: self.geom.clone(),
            coords: self
                .coords
                .iter()
                .zip(&rhs.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;

    fn neg(self) -> DivisorClass {
        DivisorClass {
            geom: self.geom.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for DivisorClass {
    /// Signed combination over basis labels, e.g. `2H - 3/2E`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = self.geom.basis_labels();
        let mut wrote = false;
        for (c, label) in self.coords.iter().zip(labels) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if wrote {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            if mag != rat_int(1) {
                write!(f, "{}", fmt_rat(&mag))?;
            }
            write!(f, "{label}")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Builtin geometry families. `hirzebruch_E` takes any integer `E >= 0`.
pub fn builtin_geometry(name: &str) -> Result<SurfaceGeometry, GeometryError> {
    let v = |coords: &[i64]| -> Vec<Rat> { coords.iter().map(|&c| rat_int(c)).collect() };
    match name {
        "p2" => SurfaceGeometry::new(
            "p2",
            vec!["H".into()],
            vec![vec![1]],
            vec![],
            Some(vec![v(&[1])]),
        ),
        "bl1_p2" => SurfaceGeometry::new(
            "bl1_p2",
            vec!["H".into(), "E".into()],
            vec![vec![1, 0], vec![0, -1]],
            vec![v(&[0, 1])],
            Some(vec![v(&[1, 0]), v(&[1, -1])]),
        ),
        "bl2_p2" => SurfaceGeometry::new(
            "bl2_p2",
            vec!["H".into(), "E1".into(), "E2".into()],
            vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]],
            vec![v(&[0, 1, 0]), v(&[0, 0, 1]), v(&[1, -1, -1])],
            Some(vec![v(&[1, 0, 0]), v(&[1, -1, 0]), v(&[1, 0, -1])]),
        ),
        "p1xp1" => SurfaceGeometry::new(
            "p1xp1",
            vec!["F1".into(), "F2".into()],
            vec![vec![0, 1], vec![1, 0]],
            vec![],
            Some(vec![v(&[1, 0]), v(&[0, 1])]),
        ),
        _ => {
            if let Some(rest) = name.strip_prefix("hirzebruch_") {
                let e: i64 = rest
                    .parse()
                    .map_err(|_| GeometryError::UnknownBuiltin(name.to_string()))?;
                if e < 0 {
                    return Err(GeometryError::UnknownBuiltin(name.to_string()));
                }
                let curves = if e >= 1 { vec![v(&[1, 0])] } else { vec![] };
                SurfaceGeometry::new(
                    name,
                    vec!["C0".into(), "F".into()],
                    vec![vec![-e, 1], vec![1, 0]],
                    curves,
                    Some(vec![v(&[0, 1]), v(&[1, e])]),
                )
            } else {
                Err(GeometryError::UnknownBuiltin(name.to_string()))
            }
        }
    }
}

/// Names accepted by [`builtin_geometry`], with the Hirzebruch family shown
/// for small parameters.
pub fn builtin_names() -> Vec<String> {
    let mut names: Vec<String> = ["p2", "bl1_p2", "bl2_p2", "p1xp1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for e in 0..=3 {
        names.push(format!("hirzebruch_{e}"));
    }
    names
}

/// Rational entry in a geometry document: plain integer or `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalToken {
    Int(i64),
    Text(String),
}

impl RationalToken {
    fn to_rat(&self) -> Result<Rat, RationalParseError> {
        match self {
            RationalToken::Int(n) => Ok(rat_int(*n)),
            RationalToken::Text(s) => parse_rat(s),
        }
    }

    fn from_rat(r: &Rat) -> RationalToken {
        if r.is_integer() {
            if let Ok(n) = i64::try_from(r.to_integer()) {
                return RationalToken::Int(n);
            }
        }
        RationalToken::Text(fmt_rat(r))
    }
}

/// On-disk representation of a [`SurfaceGeometry`]; round-trips losslessly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometryDocument {
    pub name: String,
    pub rank: usize,
    pub basis: Vec<String>,
    pub intersection: Vec<Vec<i64>>,
    pub negative_curves: Vec<Vec<RationalToken>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nef_duals: Option<Vec<Vec<RationalToken>>>,
}

/// Validate a document and build the geometry.
pub fn load_geometry(doc: &GeometryDocument) -> Result<SurfaceGeometry, GeometryError> {
    if doc.basis.len() != doc.rank {
        return Err(GeometryError::InvalidDocument(format!(
            "rank is {} but basis lists {} labels",
            doc.rank,
            doc.basis.len()
        )));
    }
    let parse_rows = |rows: &[Vec<RationalToken>]| -> Result<Vec<Vec<Rat>>, GeometryError> {
        rows.iter()
            .map(|row| {
                row.iter()
                    .map(|t| t.to_rat().map_err(GeometryError::from))
                    .collect()
            })
            .collect()
    };
    let curves = parse_rows(&doc.negative_curves)?;
    let duals = doc.nef_duals.as_deref().map(parse_rows).transpose()?;
    SurfaceGeometry::new(
        doc.name.clone(),
        doc.basis.clone(),
        doc.intersection.clone(),
        curves,
        duals,
    )
}

/// Document form of a geometry; `load_geometry(save_geometry(g)) == g`.
pub fn save_geometry(g: &SurfaceGeometry) -> GeometryDocument {
    let encode = |rows: &[Vec<Rat>]| -> Vec<Vec<RationalToken>> {
        rows.iter()
            .map(|row| row.iter().map(RationalToken::from_rat).collect())
            .collect()
    };
    GeometryDocument {
        name: g.name().to_string(),
        rank: g.rank(),
        basis: g.basis_labels().to_vec(),
        intersection: g.intersection_matrix().to_vec(),
        negative_curves: encode(&g.inner.negative_curves),
        nef_duals: g.inner.nef_duals.as_deref().map(encode),
    }
}

/// Parse a geometry document from JSON text.
pub fn geometry_from_json(text: &str) -> Result<SurfaceGeometry, GeometryError> {
    let doc: GeometryDocument = serde_json::from_str(text)
        .map_err(|e| GeometryError::InvalidDocument(e.to_string()))?;
    load_geometry(&doc)
}

/// Serialize a geometry to pretty JSON.
pub fn geometry_to_json(g: &SurfaceGeometry) -> String {
    serde_json::to_string_pretty(&save_geometry(g)).expect("document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn intersect_basis_examples() {
        let g = builtin_geometry("bl1_p2").unwrap();
        let h = g.basis_class(0);
        let e = g.basis_class(1);
        assert_eq!(h.intersect(&h).unwrap(), rat_int(1));
        assert_eq!(h.intersect(&e).unwrap(), rat_int(0));
        let a = g.class_i64(&[2, -1]);
        let b = g.class_i64(&[1, -1]);
        assert_eq!(a.intersect(&b).unwrap(), rat_int(1));
    }

    #[test]
    fn intersect_rejects_mismatched_geometries() {
        let g1 = builtin_geometry("bl1_p2").unwrap();
        let g2 = builtin_geometry("p1xp1").unwrap();
        let a = g1.class_i64(&[1, 0]);
        let b = g2.class_i64(&[1, 0]);
        assert!(matches!(
            a.intersect(&b),
            Err(GeometryError::Mismatch(_, _))
        ));
    }

    #[test]
    fn signature_check_examples() {
        assert!(signature_check(&[vec![1, 0], vec![0, -1]]).unwrap());
        assert!(!signature_check(&[vec![1, 0], vec![0, 1]]).unwrap());
        // Hirzebruch F1 in the (C0, F) basis
        assert!(signature_check(&[vec![-1, 1], vec![1, 0]]).unwrap());
        assert!(matches!(
            signature_check(&[vec![0, 1], vec![2, 0]]),
            Err(GeometryError::NonSymmetric)
        ));
    }

    #[test]
    fn builtin_shapes() {
        let g = builtin_geometry("bl1_p2").unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.intersection_matrix(), &[vec![1, 0], vec![0, -1]]);

        let f2 = builtin_geometry("hirzebruch_2").unwrap();
        assert_eq!(f2.intersection_matrix(), &[vec![-2, 1], vec![1, 0]]);
        assert_eq!(f2.curve_count(), 1);

        let f0 = builtin_geometry("hirzebruch_0").unwrap();
        assert_eq!(f0.curve_count(), 0);

        let b2 = builtin_geometry("bl2_p2").unwrap();
        assert_eq!(b2.curve_count(), 3);
        for i in 0..3 {
            assert_eq!(b2.curve(i).self_intersection(), rat_int(-1));
        }

        assert!(builtin_geometry("nope").is_err());
        assert!(builtin_geometry("hirzebruch_-1").is_err());
    }

    #[test]
    fn builtins_pass_signature_and_duals_span() {
        for name in builtin_names() {
            let g = builtin_geometry(&name).unwrap();
            assert!(signature_check(g.intersection_matrix()).unwrap(), "{name}");
            let duals = g.nef_duals().expect("builtins carry nef duals");
            assert_eq!(linalg::rank(duals), g.rank(), "{name} duals span");
        }
    }

    #[test]
    fn document_round_trip() {
        let g = builtin_geometry("p1xp1").unwrap();
        let doc = save_geometry(&g);
        let g2 = load_geometry(&doc).unwrap();
        assert_eq!(g, g2);

        let json = geometry_to_json(&g);
        let g3 = geometry_from_json(&json).unwrap();
        assert_eq!(g, g3);
    }

    #[test]
    fn document_rejects_identity_form() {
        let doc = GeometryDocument {
            name: "bad".into(),
            rank: 2,
            basis: vec!["A".into(), "B".into()],
            intersection: vec![vec![1, 0], vec![0, 1]],
            negative_curves: vec![],
            nef_duals: None,
        };
        assert!(matches!(
            load_geometry(&doc),
            Err(GeometryError::SignatureFailure { .. })
        ));
    }

    #[test]
    fn document_rejects_nonnegative_curve() {
        // H on bl1_p2 has square 1 >= 0
        let doc = GeometryDocument {
            name: "bad".into(),
            rank: 2,
            basis: vec!["H".into(), "E".into()],
            intersection: vec![vec![1, 0], vec![0, -1]],
            negative_curves: vec![vec![RationalToken::Int(1), RationalToken::Int(0)]],
            nef_duals: None,
        };
        assert!(matches!(
            load_geometry(&doc),
            Err(GeometryError::NonNegativeCurve { .. })
        ));
    }

    #[test]
    fn rational_tokens_accept_fractions() {
        let doc = GeometryDocument {
            name: "frac".into(),
            rank: 2,
            basis: vec!["H".into(), "E".into()],
            intersection: vec![vec![1, 0], vec![0, -1]],
            negative_curves: vec![vec![
                RationalToken::Int(0),
                RationalToken::Text("3/2".into()),
            ]],
            nef_duals: None,
        };
        let g = load_geometry(&doc).unwrap();
        assert_eq!(g.curve_coords(0)[1], rat(3, 2));
        // save encodes the fraction back as a string token
        let saved = save_geometry(&g);
        assert_eq!(saved.negative_curves[0][1], RationalToken::Text("3/2".into()));
    }

    #[test]
    fn class_display() {
        let g = builtin_geometry("bl1_p2").unwrap();
        assert_eq!(g.class_i64(&[2, -1]).to_string(), "2H - E");
        assert_eq!(
            g.class(vec![rat(3, 2), rat_int(0)]).unwrap().to_string(),
            "3/2H"
        );
        assert_eq!(g.zero_class().to_string(), "0");
        assert_eq!(g.class_i64(&[-1, 2]).to_string(), "-H + 2E");
    }
}
