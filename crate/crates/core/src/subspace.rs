//! Closed subspaces of the ambient space, stored as orthonormal bases.
//!
//! Every subspace is represented by an orthonormal column basis, so the
//! orthogonal projection is exact up to one matrix product. Zero-dimensional
//! subspaces are first-class values.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

/// Tolerance for accepting a caller-supplied basis as orthonormal.
pub const BASIS_TOL: f64 = 1e-10;

/// Eigenvalue cutoff for the intersection computation: eigenvectors of
/// `P_W P_V P_W` with eigenvalue at least `1 - INTERSECT_TOL` span the
/// intersection.
pub const INTERSECT_TOL: f64 = 1e-8;

/// A closed subspace with an orthonormal column basis. The basis may have
/// zero columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: Mat,
}

impl Subspace {
    /// Wrap a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: Mat) -> Result<Self> {
        linalg::ensure_finite(&basis)?;
        linalg::ensure_dim(basis.nrows())?;
        let k = basis.ncols();
        if k > basis.nrows() {
            return Err(Error::invalid(format!(
                "basis has {} columns in ambient dimension {}",
                k,
                basis.nrows()
            )));
        }
        let defect = (basis.adjoint() * &basis - Mat::identity(k, k)).norm();
        if defect > BASIS_TOL {
            return Err(Error::invalid(format!(
                "basis columns are not orthonormal: defect {defect:.3e}"
            )));
        }
        Ok(Subspace { basis })
    }

    /// The column span of an arbitrary spanning set; the dimension is the
    /// numerical rank of `vectors` at relative tolerance `rel_tol`.
    pub fn from_spanning(vectors: &Mat, rel_tol: Option<f64>) -> Result<Self> {
        let basis = linalg::orthonormalize(vectors, rel_tol)?;
        Ok(Subspace { basis })
    }

    /// Span of a single vector (zero-dimensional for the zero vector).
    pub fn from_vector(v: &Vector) -> Result<Self> {
        let m = Mat::from_columns(&[v.clone()]);
        Self::from_spanning(&m, None)
    }

    pub fn zero(ambient_dim: usize) -> Result<Self> {
        linalg::ensure_dim(ambient_dim)?;
        Ok(Subspace {
            basis: Mat::zeros(ambient_dim, 0),
        })
    }

    pub fn full(ambient_dim: usize) -> Result<Self> {
        linalg::ensure_dim(ambient_dim)?;
        Ok(Subspace {
            basis: Mat::identity(ambient_dim, ambient_dim),
        })
    }

    /// Span of a set of coordinate axes.
    pub fn coordinate(ambient_dim: usize, axes: &[usize]) -> Result<Self> {
        linalg::ensure_dim(ambient_dim)?;
        let mut basis = Mat::zeros(ambient_dim, axes.len());
        for (j, &ax) in axes.iter().enumerate() {
            if ax >= ambient_dim {
                return Err(Error::invalid(format!(
                    "axis {ax} out of range for ambient dimension {ambient_dim}"
                )));
            }
            basis[(ax, j)] = linalg::re(1.0);
        }
        Self::from_orthonormal(basis)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// The orthogonal projection `B B*` onto this subspace.
    pub fn projector(&self) -> Mat {
        &self.basis * self.basis.adjoint()
    }

    /// Project a vector onto this subspace.
    pub fn project(&self, f: &Vector) -> Vector {
        // B (B* f): two thin products instead of forming the projector
        &self.basis * (self.basis.adjoint() * f)
    }

    /// Membership test relative to the vector's scale.
    pub fn contains(&self, f: &Vector, tol: f64) -> bool {
        let defect = (self.project(f) - f).norm();
        defect <= tol * f.norm().max(1.0)
    }

    /// Intersection of two subspaces, computed from the eigenspace of
    /// `P_W P_V P_W` at eigenvalue one.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same_ambient(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient_dim());
        }
        let pw = self.projector();
        let pv = other.projector();
        let m = &pw * &pv * &pw;
        let eig = linalg::herm_eig(&m)?;
        let keep: Vec<usize> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l >= 1.0 - INTERSECT_TOL)
            .map(|(k, _)| k)
            .collect();
        let mut basis = Mat::zeros(self.ambient_dim(), keep.len());
        for (j, &k) in keep.iter().enumerate() {
            basis.set_column(j, &eig.eigenvectors.column(k));
        }
        Subspace::from_orthonormal(basis)
    }

    /// Orthogonal complement within the ambient space.
    pub fn complement(&self) -> Result<Subspace> {
        let n = self.ambient_dim();
        if self.dim() == 0 {
            return Subspace::full(n);
        }
        if self.dim() == n {
            return Subspace::zero(n);
        }
        // Eigenvectors of the projector split into eigenvalue ~1 (the
        // subspace) and ~0 (its complement).
        let eig = linalg::herm_eig(&self.projector())?;
        let keep: Vec<usize> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l < 0.5)
            .map(|(k, _)| k)
            .collect();
        let mut basis = Mat::zeros(n, keep.len());
        for (j, &k) in keep.iter().enumerate() {
            basis.set_column(j, &eig.eigenvectors.column(k));
        }
        Subspace::from_orthonormal(basis)
    }

    /// Operator-norm distance between projectors. Zero exactly when the
    /// subspaces agree; in `[0, 1]` whenever the dimensions match.
    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        self.check_same_ambient(other)?;
        let diff = self.projector() - other.projector();
        linalg::herm_norm(&diff)
    }

    pub(crate) fn check_same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::invalid(format!(
                "ambient dimensions differ: {} vs {}",
                self.ambient_dim(),
                other.ambient_dim()
            )));
        }
        Ok(())
    }
}

/// Image of a subspace under an operator. `collapsed` records that the
/// operator lowered the dimension (possible only for singular operators).
#[derive(Debug, Clone)]
pub struct OperatorImage {
    pub subspace: Subspace,
    pub collapsed: bool,
}

/// The subspace `T(W)`, re-orthonormalized. For invertible `T` the
/// dimension is preserved and `collapsed` is false.
pub fn apply_operator(t: &Mat, w: &Subspace) -> Result<OperatorImage> {
    linalg::ensure_finite(t)?;
    let n = w.ambient_dim();
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::invalid(format!(
            "operator is {}x{} but the ambient dimension is {n}",
            t.nrows(),
            t.ncols()
        )));
    }
    let mapped = t * w.basis();
    let subspace = Subspace::from_spanning(&mapped, None)?;
    let collapsed = subspace.dim() < w.dim();
    Ok(OperatorImage { subspace, collapsed })
}
