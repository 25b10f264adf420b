//! Structural predicates for weighted families: completeness, minimality,
//! biorthogonal families, Riesz decompositions, exactness, and
//! orthogonalization of minimal families.
//!
//! In finite dimension all of these reduce to rank computations on the
//! pooled basis vectors; the per-index intersection formulation is kept as
//! an independent cross-check.

use crate::error::{Error, Result};
use crate::fusion::{WeightedFamily, FRAME_TOL_REL};
use crate::linalg::{self, Mat};
use crate::subspace::{apply_operator, Subspace};

/// Pairwise projector products of an orthogonal family must stay below
/// this bound.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// The predicate lattice of a family in one record.
///
/// Invariants: `riesz_decomposition == complete && minimal`;
/// a Riesz decomposition is always exact; an orthonormal basis of
/// subspaces is always a Riesz decomposition. The converse of the second
/// implication fails (overlapping coordinate families are exact but not
/// minimal).
#[derive(Debug, Clone)]
pub struct StructureReport {
    pub complete: bool,
    pub minimal: bool,
    pub riesz_decomposition: bool,
    pub exact: bool,
    pub onb_of_subspaces: bool,
    pub dims: Vec<usize>,
    pub total_dim: usize,
    pub ambient_dim: usize,
}

/// Completeness: the subspaces together span the ambient space, decided by
/// the rank of the pooled basis vectors.
pub fn is_complete(family: &WeightedFamily) -> Result<bool> {
    let rank = linalg::numerical_rank(&family.stacked_bases(), None)?;
    Ok(rank == family.ambient_dim())
}

/// Minimality: no subspace meets the closed span of the others. Decided by
/// the pooled rank test (the pooled basis vectors are linearly
/// independent exactly when the family is minimal).
pub fn is_minimal(family: &WeightedFamily) -> Result<bool> {
    let rank = linalg::numerical_rank(&family.stacked_bases(), None)?;
    Ok(rank == family.total_dim())
}

/// Minimality by the defining per-index test:
/// `W_i` intersected with the span of the others is trivial for every `i`.
/// Cross-check for [`is_minimal`]; quadratically more expensive.
pub fn minimal_by_intersection(family: &WeightedFamily) -> Result<bool> {
    for i in 0..family.len() {
        let others: Vec<usize> = (0..family.len()).filter(|&j| j != i).collect();
        let span_others = family.subfamily(&others)?.span()?;
        let cap = family.subspace(i).intersect(&span_others)?;
        if cap.dim() > 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Injectivity of the synthesis operator: the weighted pooled vectors have
/// full column rank.
pub fn synthesis_injective(family: &WeightedFamily) -> Result<bool> {
    let rank = linalg::numerical_rank(&family.stacked_weighted_bases(), None)?;
    Ok(rank == family.total_dim())
}

/// The maximal biorthogonal family: `V_i` is the orthogonal complement of
/// the span of all subspaces except the `i`-th. When the family is
/// minimal, `W_j` is orthogonal to `V_i` for `j != i` and no nonzero
/// vector of `W_i` is orthogonal to `V_i`.
pub fn biorthogonal_family(family: &WeightedFamily) -> Result<Vec<Subspace>> {
    let mut out = Vec::with_capacity(family.len());
    for i in 0..family.len() {
        let others: Vec<usize> = (0..family.len()).filter(|&j| j != i).collect();
        let span_others = family.subfamily(&others)?.span()?;
        out.push(span_others.complement()?);
    }
    Ok(out)
}

/// For each index, whether the projection onto `V_i` restricted to `W_i`
/// has trivial kernel (rank equal to `dim W_i`). All-true exactly when the
/// biorthogonal family separates the subspaces, which is the minimality
/// criterion.
pub fn biorthogonal_nondegenerate(
    family: &WeightedFamily,
    biorthogonal: &[Subspace],
) -> Result<Vec<bool>> {
    if biorthogonal.len() != family.len() {
        return Err(Error::invalid(
            "biorthogonal family size does not match the family",
        ));
    }
    let mut out = Vec::with_capacity(family.len());
    for (i, v_i) in biorthogonal.iter().enumerate() {
        let w_i = family.subspace(i);
        if w_i.dim() == 0 {
            out.push(true);
            continue;
        }
        let restricted: Mat = v_i.projector() * w_i.basis();
        let rank = linalg::numerical_rank(&restricted, None)?;
        out.push(rank == w_i.dim());
    }
    Ok(out)
}

/// Riesz decomposition: every vector decomposes uniquely over the family.
/// Equivalent to complete plus minimal, i.e. the pooled rank equals both
/// the ambient dimension and the total dimension.
pub fn is_riesz_decomposition(family: &WeightedFamily) -> Result<bool> {
    let rank = linalg::numerical_rank(&family.stacked_bases(), None)?;
    Ok(rank == family.ambient_dim() && rank == family.total_dim())
}

/// Exactness: deleting any single subspace destroys the frame property.
/// By the removal dichotomy a deletion leaves either a frame or an
/// incomplete family, and in finite dimension complete families are
/// frames, so exactness reduces to: every deletion leaves an incomplete
/// family.
pub fn is_exact(family: &WeightedFamily) -> Result<bool> {
    let bounds = family.frame_bounds(None)?;
    if !bounds.is_frame {
        return Err(Error::invalid("exactness is defined only for frames"));
    }
    for i in 0..family.len() {
        let others: Vec<usize> = (0..family.len()).filter(|&j| j != i).collect();
        let reduced = family.subfamily(&others)?;
        let rank = linalg::numerical_rank(&reduced.stacked_bases(), None)?;
        if rank == family.ambient_dim() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Map a minimal frame through `S^{-1/2}`: the images form an orthogonal
/// family of subspaces (pairwise projector products vanish).
pub fn orthogonalize_minimal(family: &WeightedFamily) -> Result<Vec<Subspace>> {
    let bounds = family.frame_bounds(None)?;
    if !bounds.is_frame {
        return Err(Error::invalid(
            "orthogonalization requires the family to be a frame",
        ));
    }
    if !is_minimal(family)? {
        return Err(Error::invalid(
            "orthogonalization requires the family to be minimal",
        ));
    }
    let s = family.frame_operator()?;
    let root_inv = linalg::herm_inv_sqrt(&s, FRAME_TOL_REL)?;
    family
        .items()
        .iter()
        .map(|(w, _)| Ok(apply_operator(&root_inv, w)?.subspace))
        .collect()
}

/// All predicates in one pass (one rank computation plus the per-deletion
/// completeness scan for exactness). `exact` is false for non-frames.
pub fn structure_report(
    family: &WeightedFamily,
    frame_tol: Option<f64>,
) -> Result<StructureReport> {
    let rank = linalg::numerical_rank(&family.stacked_bases(), None)?;
    let complete = rank == family.ambient_dim();
    let minimal = rank == family.total_dim();
    let riesz = complete && minimal;
    let bounds = family.frame_bounds(frame_tol)?;
    let exact = if bounds.is_frame {
        is_exact(family)?
    } else {
        false
    };
    Ok(StructureReport {
        complete,
        minimal,
        riesz_decomposition: riesz,
        exact,
        onb_of_subspaces: bounds.is_onb,
        dims: family.dims(),
        total_dim: family.total_dim(),
        ambient_dim: family.ambient_dim(),
    })
}

/// Largest pairwise projector product among a list of subspaces; zero for
/// an orthogonal family.
pub fn max_pairwise_projector_product(subspaces: &[Subspace]) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..subspaces.len() {
        for j in (i + 1)..subspaces.len() {
            let prod = subspaces[i].projector() * subspaces[j].projector();
            worst = worst.max(linalg::op_norm(&prod)?);
        }
    }
    Ok(worst)
}
