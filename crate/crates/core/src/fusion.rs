//! The fusion-frame calculus: weighted families of subspaces, their
//! analysis/synthesis/frame operators, optimal bounds and classification
//! flags, duals, reconstruction, and equivalence verification.
//!
//! A family `{(W_i, v_i)}` is a frame of subspaces when
//! `C |f|^2 <= sum_i v_i^2 |P_i f|^2 <= D |f|^2` for all `f`. The optimal
//! bounds are the extreme eigenvalues of the frame operator
//! `S = sum_i v_i^2 P_i`; weights enter squared everywhere, reports always
//! state the unsquared `v_i`.

use crate::error::{Error, Result};
use crate::linalg::{self, re, Mat, Vector};
use crate::subspace::{apply_operator, Subspace};

/// A family is a frame when the smallest eigenvalue of its frame operator
/// exceeds `FRAME_TOL_REL * lambda_max`.
pub const FRAME_TOL_REL: f64 = 1e-10;

/// Parseval check: all eigenvalues of S within this distance of one.
pub const PARSEVAL_TOL: f64 = 1e-9;

/// Tightness check: spread of the spectrum relative to its size. Twice the
/// Parseval tolerance so that Parseval always implies tight.
pub const TIGHT_TOL: f64 = 2e-9;

/// Relative tolerance for weight comparisons (uniformity, weight one).
pub const WEIGHT_TOL: f64 = 1e-12;

/// Synthesis coefficients must lie in their subspaces to this tolerance.
pub const BLOCK_TOL: f64 = 1e-8;

/// Subspace distances and unitarity defects in equivalence checks.
pub const EQUIV_TOL: f64 = 1e-8;

/// An ordered family of subspaces with positive weights in a common
/// ambient space: the fusion-frame candidate.
#[derive(Debug, Clone)]
pub struct WeightedFamily {
    ambient_dim: usize,
    items: Vec<(Subspace, f64)>,
}

/// Optimal bounds of a family together with its classification flags and
/// the full spectrum of the frame operator.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub is_frame: bool,
    pub is_tight: bool,
    pub is_parseval: bool,
    pub is_uniform: bool,
    pub is_onb: bool,
    pub eigenvalues: Vec<f64>,
}

/// Analysis coefficients: one block per family index, each living in its
/// subspace.
#[derive(Debug, Clone)]
pub struct CoefficientBlocks {
    blocks: Vec<Vector>,
}

impl CoefficientBlocks {
    pub fn new(blocks: Vec<Vector>) -> Self {
        CoefficientBlocks { blocks }
    }

    pub fn blocks(&self) -> &[Vector] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn total_norm_sqr(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }
}

impl WeightedFamily {
    pub fn new(ambient_dim: usize, items: Vec<(Subspace, f64)>) -> Result<Self> {
        linalg::ensure_dim(ambient_dim)?;
        for (k, (w, v)) in items.iter().enumerate() {
            if w.ambient_dim() != ambient_dim {
                return Err(Error::invalid(format!(
                    "subspace {k} has ambient dimension {} but the family is in dimension {ambient_dim}",
                    w.ambient_dim()
                )));
            }
            if !(*v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "weight {k} must be a positive finite number, got {v}"
                )));
            }
        }
        Ok(WeightedFamily { ambient_dim, items })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[(Subspace, f64)] {
        &self.items
    }

    pub fn subspace(&self, i: usize) -> &Subspace {
        &self.items[i].0
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.items[i].1
    }

    pub fn weights(&self) -> Vec<f64> {
        self.items.iter().map(|(_, v)| *v).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.items.iter().map(|(w, _)| w.dim()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().sum()
    }

    /// Family restricted to the given indices (weights kept).
    pub fn subfamily(&self, indices: &[usize]) -> Result<WeightedFamily> {
        let mut items = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::invalid(format!(
                    "subfamily index {i} out of range for a family of size {}",
                    self.len()
                )));
            }
            items.push(self.items[i].clone());
        }
        WeightedFamily::new(self.ambient_dim, items)
    }

    /// All basis columns stacked side by side.
    pub fn stacked_bases(&self) -> Mat {
        self.stacked(false)
    }

    /// Basis columns scaled by their weights: the pooled vectors whose rank
    /// decides surjectivity/injectivity of the synthesis operator.
    pub fn stacked_weighted_bases(&self) -> Mat {
        self.stacked(true)
    }

    fn stacked(&self, weighted: bool) -> Mat {
        let cols = self.total_dim();
        let mut out = Mat::zeros(self.ambient_dim, cols);
        let mut at = 0;
        for (w, v) in &self.items {
            let scale = if weighted { *v } else { 1.0 };
            for j in 0..w.dim() {
                out.set_column(at, &(w.basis().column(j) * re(scale)));
                at += 1;
            }
        }
        out
    }

    /// Closed span of all subspaces in the family.
    pub fn span(&self) -> Result<Subspace> {
        if self.is_empty() {
            return Subspace::zero(self.ambient_dim);
        }
        Subspace::from_spanning(&self.stacked_bases(), None)
    }

    /// The frame operator `S = sum_i v_i^2 P_i`, accumulated in index order.
    pub fn frame_operator(&self) -> Result<Mat> {
        if self.is_empty() {
            return Err(Error::invalid(
                "frame operator of an empty family is undefined",
            ));
        }
        let n = self.ambient_dim;
        let mut s = Mat::zeros(n, n);
        for (w, v) in &self.items {
            s += w.projector().scale(v * v);
        }
        Ok(s)
    }

    /// Optimal bounds `C = lambda_min(S)`, `D = lambda_max(S)` and the
    /// classification flags. `frame_tol` is the absolute threshold on the
    /// lower bound; the default is `1e-10 * lambda_max`.
    pub fn frame_bounds(&self, frame_tol: Option<f64>) -> Result<BoundsReport> {
        let s = self.frame_operator()?;
        let eig = linalg::herm_eig(&s)?;
        let lower = eig.min().max(0.0);
        let upper = eig.max();
        let tol = frame_tol.unwrap_or(FRAME_TOL_REL * upper);
        let is_frame = lower > tol;
        let is_parseval = eig
            .eigenvalues
            .iter()
            .all(|&l| (l - 1.0).abs() <= PARSEVAL_TOL);
        let is_tight = is_parseval || (upper - lower) <= TIGHT_TOL * upper.max(1.0);
        let is_uniform = self.weights_uniform();
        let weight_one = self
            .items
            .iter()
            .all(|(_, v)| (v - 1.0).abs() <= WEIGHT_TOL);
        let is_onb = weight_one && is_parseval && self.total_dim() == self.ambient_dim;
        Ok(BoundsReport {
            lower,
            upper,
            is_frame,
            is_tight,
            is_parseval,
            is_uniform,
            is_onb,
            eigenvalues: eig.eigenvalues,
        })
    }

    fn weights_uniform(&self) -> bool {
        match self.items.first() {
            None => true,
            Some((_, v0)) => self
                .items
                .iter()
                .all(|(_, v)| (v - v0).abs() <= WEIGHT_TOL * v0.abs().max(1.0)),
        }
    }

    /// Bessel flag and bound. Finite families are always Bessel; the empty
    /// family has bound zero.
    pub fn is_bessel(&self) -> Result<(bool, f64)> {
        if self.is_empty() {
            return Ok((true, 0.0));
        }
        let s = self.frame_operator()?;
        let eig = linalg::herm_eig(&s)?;
        Ok((true, eig.max()))
    }

    /// Analysis operator: `f -> { v_i P_i f }`.
    pub fn analysis(&self, f: &Vector) -> Result<CoefficientBlocks> {
        self.check_vector(f)?;
        let blocks = self
            .items
            .iter()
            .map(|(w, v)| w.project(f) * re(*v))
            .collect();
        Ok(CoefficientBlocks { blocks })
    }

    /// Synthesis operator: `{f_i} -> sum_i v_i f_i`. Each block must lie in
    /// its subspace to [`BLOCK_TOL`].
    pub fn synthesis(&self, coeffs: &CoefficientBlocks) -> Result<Vector> {
        if coeffs.len() != self.len() {
            return Err(Error::InvalidCoefficients(format!(
                "expected {} blocks, got {}",
                self.len(),
                coeffs.len()
            )));
        }
        let mut out = Vector::zeros(self.ambient_dim);
        for (k, ((w, v), block)) in self.items.iter().zip(coeffs.blocks()).enumerate() {
            if block.len() != self.ambient_dim {
                return Err(Error::InvalidCoefficients(format!(
                    "block {k} has length {}, expected {}",
                    block.len(),
                    self.ambient_dim
                )));
            }
            if !w.contains(block, BLOCK_TOL) {
                return Err(Error::InvalidCoefficients(format!(
                    "block {k} does not lie in its subspace"
                )));
            }
            out += block * re(*v);
        }
        Ok(out)
    }

    /// Reconstruction through the frame operator:
    /// `f_rec = sum_i v_i^2 S^{-1} P_i f`, with the relative residual
    /// `|f_rec - f| / max(|f|, 1)`.
    pub fn reconstruct(&self, f: &Vector) -> Result<(Vector, f64)> {
        self.check_vector(f)?;
        let s = self.frame_operator()?;
        let s_inv = self.invert_frame_operator(&s)?;
        let mut rec = Vector::zeros(self.ambient_dim);
        for (w, v) in &self.items {
            rec += (&s_inv * w.project(f)) * re(v * v);
        }
        let residual = (&rec - f).norm() / f.norm().max(1.0);
        Ok((rec, residual))
    }

    fn invert_frame_operator(&self, s: &Mat) -> Result<Mat> {
        linalg::herm_inverse(s, FRAME_TOL_REL).map_err(|e| match e {
            Error::SingularOperator(_) => {
                Error::singular("the family is not a frame: frame operator is singular")
            }
            other => other,
        })
    }

    /// The dual family `{S^{-1} W_i}` with the same weights.
    pub fn dual(&self) -> Result<WeightedFamily> {
        let s = self.frame_operator()?;
        let s_inv = self.invert_frame_operator(&s)?;
        let items = self
            .items
            .iter()
            .map(|(w, v)| Ok((apply_operator(&s_inv, w)?.subspace, *v)))
            .collect::<Result<Vec<_>>>()?;
        WeightedFamily::new(self.ambient_dim, items)
    }

    /// Orthogonal projection onto the closed span of the family, computed
    /// through the frame operator restricted to that span:
    /// `pi_V f = S^+ (S f)`.
    pub fn project_onto_span(&self, f: &Vector) -> Result<Vector> {
        self.check_vector(f)?;
        if self.is_empty() {
            return Ok(Vector::zeros(self.ambient_dim));
        }
        let s = self.frame_operator()?;
        let pinv = linalg::herm_pinv(&s, FRAME_TOL_REL)?;
        Ok(&pinv * (&s * f))
    }

    fn check_vector(&self, f: &Vector) -> Result<()> {
        if f.len() != self.ambient_dim {
            return Err(Error::invalid(format!(
                "vector has length {}, expected {}",
                f.len(),
                self.ambient_dim
            )));
        }
        if !f.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("vector contains non-finite entries"));
        }
        Ok(())
    }
}

/// Frame operator `sum_j f_j f_j*` of a flat vector system given as matrix
/// columns.
pub fn vector_frame_operator(vectors: &Mat) -> Mat {
    vectors * vectors.adjoint()
}

/// Extreme eigenvalues of the flat system's frame operator on the full
/// ambient space.
pub fn vector_frame_bounds(vectors: &Mat) -> Result<(f64, f64)> {
    let eig = linalg::herm_eig(&vector_frame_operator(vectors))?;
    Ok((eig.min().max(0.0), eig.max()))
}

/// Extreme nonzero eigenvalues of the flat system's frame operator
/// restricted to the span of the vectors, plus the span itself. These are
/// the frame-sequence bounds of the system.
pub fn vector_frame_bounds_on_span(vectors: &Mat) -> Result<(f64, f64, Subspace)> {
    let span = Subspace::from_spanning(vectors, None)?;
    if span.dim() == 0 {
        return Err(Error::invalid(
            "cannot compute frame-sequence bounds of an all-zero system",
        ));
    }
    let s = vector_frame_operator(vectors);
    let restricted = span.basis().adjoint() * s * span.basis();
    let eig = linalg::herm_eig(&restricted)?;
    Ok((eig.min().max(0.0), eig.max(), span))
}

/// Check that `U` carries the family `G` onto the family `F` subspace by
/// subspace: `F_i = U(G_i)` to [`EQUIV_TOL`]. With `unitary_required`, `U`
/// must additionally satisfy `|U* U - I| <= EQUIV_TOL`.
pub fn verify_equivalence(
    u: &Mat,
    f: &WeightedFamily,
    g: &WeightedFamily,
    unitary_required: bool,
) -> Result<bool> {
    linalg::ensure_finite(u)?;
    let n = f.ambient_dim();
    if g.ambient_dim() != n || u.nrows() != n || u.ncols() != n {
        return Err(Error::invalid(
            "operator and families must share one ambient dimension",
        ));
    }
    if f.len() != g.len() {
        return Err(Error::invalid(format!(
            "family sizes differ: {} vs {}",
            f.len(),
            g.len()
        )));
    }
    for i in 0..f.len() {
        let (vf, vg) = (f.weight(i), g.weight(i));
        if (vf - vg).abs() > WEIGHT_TOL * vf.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "weights differ at index {i}: {vf} vs {vg}"
            )));
        }
    }
    if linalg::numerical_rank(u, None)? < n {
        return Err(Error::invalid("equivalence operator must be invertible"));
    }
    if unitary_required {
        let defect = linalg::herm_norm(&(u.adjoint() * u - Mat::identity(n, n)))?;
        if defect > EQUIV_TOL {
            return Ok(false);
        }
    }
    for i in 0..f.len() {
        let image = apply_operator(u, g.subspace(i))?.subspace;
        if image.distance(f.subspace(i))? > EQUIV_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
