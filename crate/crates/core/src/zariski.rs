//! Zariski decomposition on surfaces: the exact engine behind the volume,
//! positive parts, and the cone membership tests.

use crate::geometry::{DivisorClass, GeometryError, SurfaceGeometry};
use crate::linalg::{self, LinalgError};
use crate::rational::Rat;
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ZariskiError {
    #[error("class is not pseudo-effective relative to the catalog")]
    NotPseudoEffective,
    #[error("geometry has no nef dual generators; nef test unavailable")]
    MissingNefDuals,
    #[error("catalog inconsistency: {0}")]
    CatalogInconsistency(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<LinalgError> for ZariskiError {
    fn from(e: LinalgError) -> Self {
        ZariskiError::CatalogInconsistency(e.to_string())
    }
}

/// The unique splitting `D = P + sum a_i C_i` with `P` nef, `a_i >= 0`,
/// `P . C_i = 0` on the support, and negative definite support Gram matrix.
#[derive(Debug, Clone)]
pub struct ZariskiDecomposition {
    input: DivisorClass,
    positive: DivisorClass,
    /// One coefficient per catalog curve; zero off the support.
    negative_coeffs: Vec<Rat>,
    /// Catalog indices with strictly positive coefficient.
    support: Vec<usize>,
}

impl ZariskiDecomposition {
    pub fn input(&self) -> &DivisorClass {
        &self.input
    }

    pub fn positive(&self) -> &DivisorClass {
        &self.positive
    }

    pub fn negative_coeffs(&self) -> &[Rat] {
        &self.negative_coeffs
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// `N = sum a_i C_i` as a class.
    pub fn negative_class(&self) -> DivisorClass {
        &self.input - &self.positive
    }

    /// `P . P`, the volume of the input class.
    pub fn positive_square(&self) -> Rat {
        self.positive.self_intersection()
    }
}

/// Iterative support enlargement: seed with the curves pairing negatively
/// against `D`, solve the orthogonality system on the support, enlarge while
/// the candidate positive part still meets a catalog curve negatively.
///
/// Errors with [`ZariskiError::NotPseudoEffective`] when the converged data
/// violates a decomposition invariant (negative coefficient, `P.P < 0`, or a
/// failing nef dual test).
pub fn zariski_decompose(d: &DivisorClass) -> Result<ZariskiDecomposition, ZariskiError> {
    let geom = d.geometry().clone();
    let ncurves = geom.curve_count();
    let pair_curve = |x: &[Rat], i: usize| geom.pair(x, geom.curve_coords(i));

    let mut support: BTreeSet<usize> = (0..ncurves)
        .filter(|&i| pair_curve(d.coords(), i).is_negative())
        .collect();

    loop {
        let idx: Vec<usize> = support.iter().copied().collect();
        // a valid catalog keeps support Gram matrices negative definite for
        // every pseudo-effective class; losing definiteness during the
        // enlargement means the class left the supported region
        if !gram_is_negative_definite(&geom, &idx) {
            return Err(ZariskiError::NotPseudoEffective);
        }
        let coeffs = solve_orthogonality(&geom, d, &idx)?;
        let mut p_coords = d.coords().to_vec();
        for (&i, a) in idx.iter().zip(&coeffs) {
            for (pc, cc) in p_coords.iter_mut().zip(geom.curve_coords(i)) {
                *pc -= a * cc;
            }
        }
        let mut grew = false;
        for i in 0..ncurves {
            if !support.contains(&i) && pair_curve(&p_coords, i).is_negative() {
                support.insert(i);
                grew = true;
            }
        }
        if grew {
            continue;
        }
        // converged; validate
        if coeffs.iter().any(Rat::is_negative) {
            return Err(ZariskiError::NotPseudoEffective);
        }
        if geom.pair(&p_coords, &p_coords).is_negative() {
            return Err(ZariskiError::NotPseudoEffective);
        }
        if let Some(duals) = geom.nef_duals() {
            for ell in duals {
                if geom.pair(&p_coords, ell).is_negative() {
                    return Err(ZariskiError::NotPseudoEffective);
                }
            }
        }
        let mut negative_coeffs = vec![Rat::zero(); ncurves];
        for (&i, a) in idx.iter().zip(&coeffs) {
            negative_coeffs[i] = a.clone();
        }
        let support: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&i| negative_coeffs[i].is_positive())
            .collect();
        let positive = geom.class(p_coords)?;
        return Ok(ZariskiDecomposition {
            input: d.clone(),
            positive,
            negative_coeffs,
            support,
        });
    }
}

fn support_gram(geom: &SurfaceGeometry, idx: &[usize]) -> Vec<Vec<Rat>> {
    let full = geom.catalog_gram();
    idx.iter()
        .map(|&i| idx.iter().map(|&j| full[i][j].clone()).collect())
        .collect()
}

pub(crate) fn gram_is_negative_definite(geom: &SurfaceGeometry, idx: &[usize]) -> bool {
    idx.is_empty() || linalg::is_negative_definite(&support_gram(geom, idx))
}

/// Solve `(D - sum a_i C_i) . C_j = 0` for `j` in `idx` on the support Gram
/// matrix, asserting negative definiteness first.
pub(crate) fn solve_orthogonality(
    geom: &SurfaceGeometry,
    d: &DivisorClass,
    idx: &[usize],
) -> Result<Vec<Rat>, ZariskiError> {
    if idx.is_empty() {
        return Ok(vec![]);
    }
    let gram = support_gram(geom, idx);
    if !linalg::is_negative_definite(&gram) {
        return Err(ZariskiError::CatalogInconsistency(format!(
            "support Gram matrix of curves {idx:?} is not negative definite"
        )));
    }
    let rhs: Vec<Rat> = idx
        .iter()
        .map(|&j| geom.pair(d.coords(), geom.curve_coords(j)))
        .collect();
    Ok(linalg::solve(&gram, &rhs)?)
}

/// Nef test: nonnegative against every catalog curve and every nef dual
/// generator. Requires the geometry to carry nef duals.
pub fn is_nef(d: &DivisorClass) -> Result<bool, ZariskiError> {
    let geom = d.geometry();
    if geom.nef_duals().is_none() {
        return Err(ZariskiError::MissingNefDuals);
    }
    for i in 0..geom.curve_count() {
        if geom.pair(d.coords(), geom.curve_coords(i)).is_negative() {
            return Ok(false);
        }
    }
    for ell in geom.nef_duals().unwrap() {
        if geom.pair(d.coords(), ell).is_negative() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pseudo-effective relative to the catalog: the decomposition exists.
pub fn is_pseff(d: &DivisorClass) -> Result<bool, ZariskiError> {
    match zariski_decompose(d) {
        Ok(_) => Ok(true),
        Err(ZariskiError::NotPseudoEffective) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Big: the decomposition exists with `P.P > 0`.
pub fn is_big(d: &DivisorClass) -> Result<bool, ZariskiError> {
    match zariski_decompose(d) {
        Ok(z) => Ok(z.positive_square().is_positive()),
        Err(ZariskiError::NotPseudoEffective) => Ok(false),
        Err(e) => Err(e),
    }
}
