//! Independent ground truth for the volume: section counts of toric divisors
//! as lattice points of rational sections polygons.

use crate::geometry::{builtin_geometry, DivisorClass, GeometryError, SurfaceGeometry};
use crate::rational::{rat_int, sign, Rat};
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToricError {
    #[error("unknown builtin toric surface `{0}`")]
    UnknownBuiltin(String),
    #[error("coefficient list has length {got}, fan has {want} rays")]
    CoefficientLength { got: usize, want: usize },
    #[error("fan is not complete / not counterclockwise at rays {0} and {1}")]
    BadFan(usize, usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A complete smooth toric surface: primitive ray generators in
/// counterclockwise order, plus the linear map from ray coefficients onto the
/// class basis of the matching [`SurfaceGeometry`].
#[derive(Debug, Clone)]
pub struct ToricSurface {
    name: String,
    rays: Vec<[i64; 2]>,
    geometry: SurfaceGeometry,
    /// `rank x nrays` integer matrix: class coords = map . ray coefficients.
    class_map: Vec<Vec<i64>>,
}

impl ToricSurface {
    fn new(
        name: &str,
        rays: Vec<[i64; 2]>,
        geometry: SurfaceGeometry,
        class_map: Vec<Vec<i64>>,
    ) -> Result<Self, ToricError> {
        // consecutive rays must be positively oriented and wrap the plane once
        let n = rays.len();
        for i in 0..n {
            let a = rays[i];
            let b = rays[(i + 1) % n];
            if cross(a, b) <= 0 {
                return Err(ToricError::BadFan(i, (i + 1) % n));
            }
        }
        Ok(Self {
            name: name.to_string(),
            rays,
            geometry,
            class_map,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rays(&self) -> &[[i64; 2]] {
        &self.rays
    }

    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geometry
    }

    /// Divisor class of the toric divisor with the given ray coefficients.
    pub fn class_of(&self, coeffs: &[Rat]) -> Result<DivisorClass, ToricError> {
        self.check_len(coeffs)?;
        let coords: Vec<Rat> = self
            .class_map
            .iter()
            .map(|row| {
                row.iter()
                    .zip(coeffs)
                    .map(|(&m, a)| a * rat_int(m))
                    .sum::<Rat>()
            })
            .collect();
        Ok(self.geometry.class(coords)?)
    }

    fn check_len(&self, coeffs: &[Rat]) -> Result<(), ToricError> {
        if coeffs.len() != self.rays.len() {
            return Err(ToricError::CoefficientLength {
                got: coeffs.len(),
                want: self.rays.len(),
            });
        }
        Ok(())
    }

    /// Exact vertex description of `{u : <u, v_i> >= -a_i}`.
    pub fn sections_polytope(&self, coeffs: &[Rat]) -> Result<SectionsPolytope, ToricError> {
        self.check_len(coeffs)?;
        let halfplanes: Vec<HalfPlane> = self
            .rays
            .iter()
            .zip(coeffs)
            .map(|(&normal, offset)| HalfPlane {
                normal,
                offset: offset.clone(),
            })
            .collect();
        Ok(SectionsPolytope::from_halfplanes(halfplanes))
    }

    /// Lattice points of `m . (sections polytope)`, by exact column scan.
    pub fn count_sections(&self, coeffs: &[Rat], m: u64) -> Result<u64, ToricError> {
        let poly = self.sections_polytope(coeffs)?;
        Ok(poly.scaled_lattice_points(m))
    }

    /// Twice the exact polygon area; the normalized section growth rate.
    pub fn volume_exact(&self, coeffs: &[Rat]) -> Result<Rat, ToricError> {
        let poly = self.sections_polytope(coeffs)?;
        Ok(poly.area() * rat_int(2))
    }

    /// Two-point Richardson estimate of the volume from section counts at
    /// `m_max` and `m_max / 2`; converges to [`Self::volume_exact`].
    pub fn volume_empirical(&self, coeffs: &[Rat], m_max: u64) -> Result<f64, ToricError> {
        let m = m_max.max(1);
        let est = |k: u64, count: u64| 2.0 * count as f64 / (k as f64 * k as f64);
        let e_m = est(m, self.count_sections(coeffs, m)?);
        if m < 2 {
            return Ok(e_m);
        }
        let h = m / 2;
        let e_h = est(h, self.count_sections(coeffs, h)?);
        // eliminate the 1/m error term: (m E(m) - h E(h)) / (m - h)
        Ok((m as f64 * e_m - h as f64 * e_h) / (m - h) as f64)
    }
}

fn cross(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

#[derive(Debug, Clone)]
pub struct HalfPlane {
    pub normal: [i64; 2],
    pub offset: Rat,
}

/// Convex rational polygon `{u : <u, v_i> >= -a_i}`, possibly empty or lower
/// dimensional.
#[derive(Debug, Clone)]
pub struct SectionsPolytope {
    halfplanes: Vec<HalfPlane>,
    vertices: Vec<[Rat; 2]>,
}

impl SectionsPolytope {
    fn from_halfplanes(halfplanes: Vec<HalfPlane>) -> Self {
        let mut vertices: Vec<[Rat; 2]> = Vec::new();
        let n = halfplanes.len();
        for i in 0..n {
            for j in i + 1..n {
                let (vi, vj) = (&halfplanes[i], &halfplanes[j]);
                let det = cross(vi.normal, vj.normal);
                if det == 0 {
                    continue;
                }
                // solve <u, v_i> = -a_i, <u, v_j> = -a_j
                let det = rat_int(det);
                let bi = -vi.offset.clone();
                let bj = -vj.offset.clone();
                let x = (&bi * rat_int(vj.normal[1]) - &bj * rat_int(vi.normal[1])) / &det;
                let y = (&bj * rat_int(vi.normal[0]) - &bi * rat_int(vj.normal[0])) / &det;
                let u = [x, y];
                if halfplanes.iter().all(|h| {
                    let lhs = &u[0] * rat_int(h.normal[0]) + &u[1] * rat_int(h.normal[1]);
                    lhs >= -h.offset.clone()
                }) && !vertices.contains(&u)
                {
                    vertices.push(u);
                }
            }
        }
        sort_counterclockwise(&mut vertices);
        Self {
            halfplanes,
            vertices,
        }
    }

    pub fn halfplanes(&self) -> &[HalfPlane] {
        &self.halfplanes
    }

    pub fn vertices(&self) -> &[[Rat; 2]] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Exact area by the shoelace formula on the ordered vertices.
    pub fn area(&self) -> Rat {
        if self.vertices.len() < 3 {
            return Rat::zero();
        }
        let n = self.vertices.len();
        let mut twice = Rat::zero();
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            twice += &a[0] * &b[1] - &b[0] * &a[1];
        }
        twice.abs() / rat_int(2)
    }

    /// Integer points of the polytope scaled by `m`, counted column by column
    /// with denominators cleared to integer arithmetic.
    pub fn scaled_lattice_points(&self, m: u64) -> u64 {
        if self.vertices.is_empty() {
            return 0;
        }
        let m_rat = rat_int(m as i64);
        let xs: Vec<Rat> = self.vertices.iter().map(|v| &v[0] * &m_rat).collect();
        let x_min = ceil_rat(xs.iter().min().unwrap());
        let x_max = floor_rat(xs.iter().max().unwrap());
        // integer constraint data: A x + B y >= C
        struct IntConstraint {
            a: i128,
            b: i128,
            c: i128,
        }
        let constraints: Vec<IntConstraint> = self
            .halfplanes
            .iter()
            .map(|h| {
                let scaled = &h.offset * &m_rat; // p/q reduced, q > 0
                let q: i128 = i128::try_from(scaled.denom().clone()).expect("desk-scale offset");
                let p: i128 = i128::try_from(scaled.numer().clone()).expect("desk-scale offset");
                IntConstraint {
                    a: h.normal[0] as i128 * q,
                    b: h.normal[1] as i128 * q,
                    c: -p,
                }
            })
            .collect();
        let mut count: u64 = 0;
        let mut x = x_min;
        while x <= x_max {
            let mut lo = i128::MIN;
            let mut hi = i128::MAX;
            let mut feasible = true;
            for cst in &constraints {
                let rhs = cst.c - cst.a * x;
                match cst.b.cmp(&0) {
                    std::cmp::Ordering::Equal => {
                        if rhs > 0 {
                            feasible = false;
                            break;
                        }
                    }
                    std::cmp::Ordering::Greater => {
                        // y >= rhs / b
                        lo = lo.max(div_ceil_i128(rhs, cst.b));
                    }
                    std::cmp::Ordering::Less => {
                        // y <= rhs / b; normalize to a positive divisor
                        hi = hi.min(div_floor_i128(-rhs, -cst.b));
                    }
                }
            }
            if feasible && lo <= hi {
                count += (hi - lo + 1) as u64;
            }
            x += 1;
        }
        count
    }
}

fn div_floor_i128(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn div_ceil_i128(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

fn ceil_rat(r: &Rat) -> i128 {
    i128::try_from(r.ceil().to_integer()).expect("desk-scale bound")
}

fn floor_rat(r: &Rat) -> i128 {
    i128::try_from(r.floor().to_integer()).expect("desk-scale bound")
}

/// Exact counterclockwise order around the centroid, with exact angular
/// comparisons (upper/lower halfplane, then cross product sign).
fn sort_counterclockwise(vertices: &mut [[Rat; 2]]) {
    if vertices.len() < 3 {
        return;
    }
    let n = rat_int(vertices.len() as i64);
    let cx = vertices.iter().map(|v| v[0].clone()).sum::<Rat>() / &n;
    let cy = vertices.iter().map(|v| v[1].clone()).sum::<Rat>() / &n;
    let half = |dx: &Rat, dy: &Rat| -> u8 {
        // 0 for the upper half (dy > 0, or dy = 0 and dx > 0), 1 otherwise
        match sign(dy) {
            1 => 0,
            -1 => 1,
            _ => {
                if sign(dx) >= 0 {
                    0
                } else {
                    1
                }
            }
        }
    };
    vertices.sort_by(|p, q| {
        let (pdx, pdy) = (&p[0] - &cx, &p[1] - &cy);
        let (qdx, qdy) = (&q[0] - &cx, &q[1] - &cy);
        let (hp, hq) = (half(&pdx, &pdy), half(&qdx, &qdy));
        if hp != hq {
            return hp.cmp(&hq);
        }
        // same halfplane: p before q iff cross(p, q) > 0
        let c = &pdx * &qdy - &qdx * &pdy;
        match sign(&c) {
            1 => std::cmp::Ordering::Less,
            -1 => std::cmp::Ordering::Greater,
            _ => std::cmp::Ordering::Equal,
        }
    });
}

/// Builtin toric models: `p2`, `p1xp1`, `hirzebruch_E`, and the one-point
/// blowup of the plane in its `(H, E)` basis.
pub fn builtin_toric(name: &str) -> Result<ToricSurface, ToricError> {
    match name {
        "p2" => ToricSurface::new(
            "p2",
            vec![[1, 0], [0, 1], [-1, -1]],
            builtin_geometry("p2")?,
            vec![vec![1, 1, 1]],
        ),
        "p1xp1" => ToricSurface::new(
            "p1xp1",
            vec![[1, 0], [0, 1], [-1, 0], [0, -1]],
            builtin_geometry("p1xp1")?,
            vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]],
        ),
        "bl1_p2" => {
            // F1 fan; classes written in the (H, E) blowup basis:
            // D1 = D3 = H - E, D2 = E, D4 = H
            ToricSurface::new(
                "bl1_p2",
                vec![[1, 0], [0, 1], [-1, 1], [0, -1]],
                builtin_geometry("bl1_p2")?,
                vec![vec![1, 0, 1, 1], vec![-1, 1, -1, 0]],
            )
        }
        _ => {
            if let Some(rest) = name.strip_prefix("hirzebruch_") {
                let e: i64 = rest
                    .parse()
                    .map_err(|_| ToricError::UnknownBuiltin(name.to_string()))?;
                if e < 0 {
                    return Err(ToricError::UnknownBuiltin(name.to_string()));
                }
                // D1 = D3 = F, D2 = C0, D4 = C0 + eF
                ToricSurface::new(
                    name,
                    vec![[1, 0], [0, 1], [-1, e], [0, -1]],
                    builtin_geometry(name)?,
                    vec![vec![0, 1, 0, 1], vec![1, 0, 1, e]],
                )
            } else {
                Err(ToricError::UnknownBuiltin(name.to_string()))
            }
        }
    }
}

/// Toric builtin names with geometry counterparts.
pub fn builtin_toric_names() -> Vec<String> {
    vec![
        "p2".into(),
        "p1xp1".into(),
        "hirzebruch_1".into(),
        "hirzebruch_2".into(),
        "hirzebruch_3".into(),
        "bl1_p2".into(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_to_f64};

    fn coeffs(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat_int(x)).collect()
    }

    #[test]
    fn p2_hyperplane_polytope() {
        let t = builtin_toric("p2").unwrap();
        let p = t.sections_polytope(&coeffs(&[1, 0, 0])).unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(p.area(), rat(1, 2));
        assert_eq!(t.volume_exact(&coeffs(&[1, 0, 0])).unwrap(), rat_int(1));
        assert_eq!(t.volume_exact(&coeffs(&[2, 0, 0])).unwrap(), rat_int(4));
    }

    #[test]
    fn p1xp1_rectangle() {
        let t = builtin_toric("p1xp1").unwrap();
        // class (1, 2) via coefficients on the -x / -y rays
        let a = coeffs(&[0, 0, 1, 2]);
        let p = t.sections_polytope(&a).unwrap();
        assert_eq!(p.area(), rat_int(2));
        let cls = t.class_of(&a).unwrap();
        assert_eq!(cls.coords(), &[rat_int(1), rat_int(2)]);
    }

    #[test]
    fn f1_fixed_component_does_not_enlarge_sections() {
        let t = builtin_toric("bl1_p2").unwrap();
        // coefficients mapping to 2H + E and to 2H
        let with_e = coeffs(&[0, 1, 0, 2]);
        let plain = coeffs(&[0, 0, 0, 2]);
        assert_eq!(
            t.class_of(&with_e).unwrap().coords(),
            &[rat_int(2), rat_int(1)]
        );
        assert_eq!(t.volume_exact(&with_e).unwrap(), rat_int(4));
        assert_eq!(t.volume_exact(&plain).unwrap(), rat_int(4));
        assert_eq!(
            t.sections_polytope(&with_e).unwrap().area(),
            rat_int(2)
        );
    }

    #[test]
    fn section_counts() {
        let p2 = builtin_toric("p2").unwrap();
        assert_eq!(p2.count_sections(&coeffs(&[1, 0, 0]), 3).unwrap(), 10);

        let q = builtin_toric("p1xp1").unwrap();
        assert_eq!(q.count_sections(&coeffs(&[0, 0, 1, 1]), 2).unwrap(), 9);

        let f1 = builtin_toric("bl1_p2").unwrap();
        let a = coeffs(&[0, 1, 0, 2]); // maps to 2H + E
        let b = coeffs(&[0, 0, 0, 2]); // maps to 2H
        assert_eq!(f1.count_sections(&a, 5).unwrap(), 66);
        assert_eq!(
            f1.count_sections(&a, 5).unwrap(),
            f1.count_sections(&b, 5).unwrap()
        );
    }

    #[test]
    fn empty_polytope_for_non_effective_class() {
        let t = builtin_toric("bl1_p2").unwrap();
        // H - 2E = (H) + (-2)(E): coefficients a2 = -2, a4 = 1
        let a = vec![rat_int(0), rat_int(-2), rat_int(0), rat_int(1)];
        assert_eq!(
            t.class_of(&a).unwrap().coords(),
            &[rat_int(1), rat_int(-2)]
        );
        let p = t.sections_polytope(&a).unwrap();
        assert!(p.is_empty());
        assert_eq!(t.volume_exact(&a).unwrap(), rat_int(0));
        assert_eq!(t.count_sections(&a, 7).unwrap(), 0);
    }

    #[test]
    fn volume_scaling_is_exact() {
        let t = builtin_toric("hirzebruch_2").unwrap();
        let a = vec![rat(1, 2), rat(3, 1), rat(1, 1), rat(2, 1)];
        let v1 = t.volume_exact(&a).unwrap();
        let a3: Vec<Rat> = a.iter().map(|x| x * rat_int(3)).collect();
        assert_eq!(t.volume_exact(&a3).unwrap(), v1 * rat_int(9));
    }

    #[test]
    fn empirical_estimate_approaches_exact() {
        let t = builtin_toric("p2").unwrap();
        let a = coeffs(&[2, 0, 0]);
        let exact = rat_to_f64(&t.volume_exact(&a).unwrap());
        let est = t.volume_empirical(&a, 200).unwrap();
        assert!((est - exact).abs() / exact < 5e-2, "est {est} vs {exact}");
    }

    #[test]
    fn coefficient_length_is_checked() {
        let t = builtin_toric("p2").unwrap();
        assert!(matches!(
            t.count_sections(&coeffs(&[1, 0]), 3),
            Err(ToricError::CoefficientLength { .. })
        ));
    }

    #[test]
    fn degenerate_polytopes_count_correctly() {
        let t = builtin_toric("p2").unwrap();
        // zero class: single point polytope
        let z = coeffs(&[0, 0, 0]);
        assert_eq!(t.count_sections(&z, 5).unwrap(), 1);
        assert_eq!(t.volume_exact(&z).unwrap(), rat_int(0));
    }
}
