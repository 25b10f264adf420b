//! Dense linear-algebra kernel: orthonormalization, Hermitian eigenanalysis,
//! matrix functions of Hermitian matrices, and numerical rank.
//!
//! All computations run in complex double precision. Real problems are
//! complex problems whose imaginary parts happen to be zero; nothing in
//! this module branches on the scalar field.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Scalar = Complex64;
pub type Mat = DMatrix<Scalar>;
pub type Vector = DVector<Scalar>;

/// Ambient dimensions are capped: this is a desk-scale verification tool,
/// not an HPC kernel.
pub const DIM_CAP: usize = 4096;

/// Iteration cap handed to the nalgebra QL/SVD drivers.
const MAX_SWEEPS: usize = 10_000;

/// Complex scalar from a real value.
#[inline]
pub fn re(x: f64) -> Scalar {
    Complex64::new(x, 0.0)
}

/// Complex scalar from real and imaginary parts.
#[inline]
pub fn cx(x: f64, y: f64) -> Scalar {
    Complex64::new(x, y)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are real and ascending; the eigenvector matrix is unitary
/// with the column phases fixed so that the largest-magnitude component
/// of each eigenvector is real and positive.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat,
}

impl EigResult {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

pub(crate) fn ensure_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("matrix contains non-finite entries"))
    }
}

pub(crate) fn ensure_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("ambient dimension must be at least 1"));
    }
    if n > DIM_CAP {
        return Err(Error::invalid(format!(
            "ambient dimension {n} exceeds the configured cap {DIM_CAP}"
        )));
    }
    Ok(())
}

/// Default relative rank tolerance: `max(rows, cols) * eps`, applied to the
/// largest singular value.
pub fn default_rank_tol(m: &Mat) -> f64 {
    m.nrows().max(m.ncols()) as f64 * f64::EPSILON
}

fn svd(m: &Mat) -> Result<nalgebra::SVD<Scalar, nalgebra::Dyn, nalgebra::Dyn>> {
    m.clone()
        .try_svd(true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::NumericalFailure("singular value decomposition did not converge".into()))
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut sv: Vec<f64> = svd(m)?.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Numerical rank: the number of singular values exceeding
/// `rel_tol * sigma_max` (default tolerance [`default_rank_tol`]).
pub fn numerical_rank(m: &Mat, rel_tol: Option<f64>) -> Result<usize> {
    let sv = singular_values(m)?;
    let tol = rel_tol.unwrap_or_else(|| default_rank_tol(m));
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|&&s| s > tol * sigma_max && s > 0.0).count())
}

/// Operator (spectral) norm.
pub fn op_norm(m: &Mat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Fix the phase of each column so its largest-magnitude entry is real
/// and positive. Makes eigenvector and basis output deterministic.
fn fix_column_phases(m: &mut Mat) {
    for j in 0..m.ncols() {
        let mut best = 0usize;
        let mut best_mod = -1.0f64;
        for i in 0..m.nrows() {
            let nm = m[(i, j)].norm();
            if nm > best_mod {
                best_mod = nm;
                best = i;
            }
        }
        if best_mod > 0.0 {
            let z = m[(best, j)];
            let phase = z.conj() / z.norm();
            for i in 0..m.nrows() {
                m[(i, j)] *= phase;
            }
        }
    }
}

/// Orthonormal basis for the column space of `m`.
///
/// Returns a matrix with as many columns as the numerical rank of `m`,
/// computed rank-revealingly from the singular value decomposition with
/// relative tolerance `rel_tol` (default [`default_rank_tol`]). The output
/// is deterministic for a fixed input.
pub fn orthonormalize(m: &Mat, rel_tol: Option<f64>) -> Result<Mat> {
    ensure_finite(m)?;
    ensure_dim(m.nrows())?;
    if let Some(t) = rel_tol {
        if !(t > 0.0) {
            return Err(Error::invalid("rank tolerance must be positive"));
        }
    }
    if m.ncols() == 0 {
        return Ok(m.clone());
    }
    let decomposition = svd(m)?;
    let u = decomposition
        .u
        .as_ref()
        .ok_or_else(|| Error::NumericalFailure("svd did not return singular vectors".into()))?;
    let tol = rel_tol.unwrap_or_else(|| default_rank_tol(m));
    let sigma_max = decomposition
        .singular_values
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    // nalgebra orders singular values descending together with u's columns.
    let rank = decomposition
        .singular_values
        .iter()
        .filter(|&&s| s > tol * sigma_max && s > 0.0)
        .count();
    let mut q = u.columns(0, rank).into_owned();
    fix_column_phases(&mut q);
    Ok(q)
}

fn frobenius(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative Hermitian deviation tolerance for `herm_eig` inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Full eigendecomposition of a Hermitian matrix.
///
/// The input must satisfy `|A - A*| <= 1e-10 |A|`; it is symmetrized
/// before factorization so that roundoff in the caller's accumulation
/// cannot leak into complex eigenvalues.
pub fn herm_eig(a: &Mat) -> Result<EigResult> {
    ensure_finite(a)?;
    if a.nrows() != a.ncols() {
        return Err(Error::invalid(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_dim(a.nrows())?;
    let norm = frobenius(a);
    let dev = frobenius(&(a - a.adjoint()));
    if dev > HERMITIAN_TOL * norm {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian: |A - A*| = {dev:.3e} exceeds {HERMITIAN_TOL:.0e} * |A|"
        )));
    }
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h
        .try_symmetric_eigen(f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::NumericalFailure("eigendecomposition did not converge".into()))?;

    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    fix_column_phases(&mut eigenvectors);
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Apply a real function to a Hermitian matrix through its spectrum:
/// `V f(Lambda) V*`. The function returns `None` where it is undefined,
/// which surfaces as a singular-operator error naming the eigenvalue.
pub fn herm_fn(a: &Mat, f: impl Fn(f64) -> Option<f64>) -> Result<Mat> {
    let eig = herm_eig(a)?;
    let mut mapped = DVector::<Scalar>::zeros(eig.eigenvalues.len());
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        match f(lambda) {
            Some(y) => mapped[k] = re(y),
            None => {
                return Err(Error::singular(format!(
                    "matrix function undefined at eigenvalue {lambda:.6e}"
                )))
            }
        }
    }
    let v = &eig.eigenvectors;
    Ok(v * Mat::from_diagonal(&mapped) * v.adjoint())
}

fn spectral_floor(eig_max: f64, rel_tol: f64) -> f64 {
    rel_tol * eig_max.max(f64::MIN_POSITIVE)
}

/// Inverse of a Hermitian positive-definite matrix. Eigenvalues at or
/// below `rel_tol * lambda_max` are treated as singular.
pub fn herm_inverse(a: &Mat, rel_tol: f64) -> Result<Mat> {
    let eig = herm_eig(a)?;
    let floor = spectral_floor(eig.max(), rel_tol);
    herm_fn(a, |lambda| (lambda > floor).then(|| 1.0 / lambda))
}

/// Inverse square root of a Hermitian positive-definite matrix.
pub fn herm_inv_sqrt(a: &Mat, rel_tol: f64) -> Result<Mat> {
    let eig = herm_eig(a)?;
    let floor = spectral_floor(eig.max(), rel_tol);
    herm_fn(a, |lambda| (lambda > floor).then(|| 1.0 / lambda.sqrt()))
}

/// Moore-Penrose pseudo-inverse of a Hermitian positive-semidefinite
/// matrix: eigenvalues at or below the floor invert to zero.
pub fn herm_pinv(a: &Mat, rel_tol: f64) -> Result<Mat> {
    let eig = herm_eig(a)?;
    let floor = spectral_floor(eig.max(), rel_tol);
    herm_fn(a, |lambda| {
        Some(if lambda > floor { 1.0 / lambda } else { 0.0 })
    })
}

/// Spectral norm of a Hermitian matrix: max |eigenvalue|.
pub fn herm_norm(a: &Mat) -> Result<f64> {
    let eig = herm_eig(a)?;
    Ok(eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_from_rows(rows: &[&[f64]]) -> Mat {
        let r = rows.len();
        let c = rows[0].len();
        Mat::from_fn(r, c, |i, j| re(rows[i][j]))
    }

    fn random_mat(rng: &mut impl rand::Rng, rows: usize, cols: usize, complex: bool) -> Mat {
        Mat::from_fn(rows, cols, |_, _| {
            let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            cx(rng.gen_range(-1.0..1.0), im)
        })
    }

    fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
        use rand::SeedableRng;
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    // Independent oracle: classical Gram-Schmidt with one reorthogonalization
    // pass, no rank decisions beyond a plain norm cutoff.
    fn gram_schmidt_oracle(m: &Mat, tol: f64) -> Mat {
        let n = m.nrows();
        let mut basis: Vec<Vector> = Vec::new();
        for j in 0..m.ncols() {
            let mut v: Vector = m.column(j).into_owned();
            for _pass in 0..2 {
                for q in &basis {
                    let coeff = q.dotc(&v);
                    v -= q * coeff;
                }
            }
            if v.norm() > tol {
                let norm = v.norm();
                basis.push(v.unscale(norm));
            }
        }
        let mut out = Mat::zeros(n, basis.len());
        for (j, q) in basis.iter().enumerate() {
            out.set_column(j, q);
        }
        out
    }

    #[test]
    fn orthonormalize_identity_is_identity() {
        let id = Mat::identity(3, 3);
        let q = orthonormalize(&id, None).unwrap();
        assert_eq!(q.ncols(), 3);
        assert!((q.clone() * q.adjoint() - Mat::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn orthonormalize_collapses_dependent_columns() {
        let m = mat_from_rows(&[&[1.0, 2.0], &[0.0, 0.0]]);
        let q = orthonormalize(&m, None).unwrap();
        assert_eq!(q.ncols(), 1);
        assert!((q[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(q[(1, 0)].norm() < 1e-12);
    }

    #[test]
    fn orthonormalize_matches_gram_schmidt_projector() {
        let mut rng = seeded(11);
        for trial in 0..20 {
            let m = random_mat(&mut rng, 5, 3, trial % 2 == 0);
            let q = orthonormalize(&m, None).unwrap();
            assert_eq!(q.ncols(), 3, "random 5x3 should be full rank");
            let gram = (q.adjoint() * &q - Mat::identity(3, 3)).norm();
            assert!(gram < 1e-12, "orthonormality defect {gram:.3e}");
            let oracle = gram_schmidt_oracle(&m, 1e-10);
            let p_impl = &q * q.adjoint();
            let p_orac = &oracle * oracle.adjoint();
            assert!((p_impl - p_orac).norm() < 1e-10, "column spaces differ");
        }
    }

    #[test]
    fn orthonormalize_rejects_non_finite() {
        let mut m = Mat::identity(2, 2);
        m[(0, 0)] = re(f64::NAN);
        assert!(matches!(
            orthonormalize(&m, None),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn herm_eig_diagonal() {
        let a = Mat::from_diagonal(&Vector::from_vec(vec![re(1.0), re(1.0), re(2.0)]));
        let eig = herm_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn herm_eig_symmetric_swap() {
        let a = mat_from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let eig = herm_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn herm_eig_trace_identity() {
        let mut rng = seeded(23);
        for _ in 0..10 {
            let g = random_mat(&mut rng, 8, 8, true);
            let a = (&g + g.adjoint()).scale(0.5);
            let eig = herm_eig(&a).unwrap();
            let trace: f64 = (0..8).map(|i| a[(i, i)].re).sum();
            let eig_sum: f64 = eig.eigenvalues.iter().sum();
            assert!((trace - eig_sum).abs() <= 1e-10 * trace.abs().max(1.0));
            // reconstruction residual
            let lam = Mat::from_diagonal(&Vector::from_iterator(
                8,
                eig.eigenvalues.iter().map(|&l| re(l)),
            ));
            let rec = &eig.eigenvectors * lam * eig.eigenvectors.adjoint();
            assert!((&a - rec).norm() <= 1e-10 * frobenius(&a));
        }
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let a = mat_from_rows(&[&[0.0, 1.0], &[2.0, 0.0]]);
        assert!(matches!(herm_eig(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn herm_eig_sorted_and_phase_fixed() {
        let mut rng = seeded(5);
        let g = random_mat(&mut rng, 6, 6, true);
        let a = (&g + g.adjoint()).scale(0.5);
        let eig = herm_eig(&a).unwrap();
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        for j in 0..6 {
            let col = eig.eigenvectors.column(j);
            let top = col.iter().cloned().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
            assert!(top.im.abs() < 1e-12 && top.re > 0.0);
        }
    }

    #[test]
    fn herm_fn_inverse_diagonal() {
        let a = Mat::from_diagonal(&Vector::from_vec(vec![re(2.0), re(4.0)]));
        let inv = herm_inverse(&a, 1e-12).unwrap();
        assert!((inv[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((inv[(1, 1)].re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn herm_fn_sqrt_identity() {
        let a = Mat::identity(4, 4);
        let s = herm_fn(&a, |l| Some(l.sqrt())).unwrap();
        assert!((s - Mat::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn herm_inv_sqrt_defining_identity() {
        let mut rng = seeded(31);
        let g = random_mat(&mut rng, 6, 6, true);
        // HPD by construction
        let a = &g * g.adjoint() + Mat::identity(6, 6).scale(0.5);
        let r = herm_inv_sqrt(&a, 1e-12).unwrap();
        let defect = (&r * &a * &r - Mat::identity(6, 6)).norm();
        assert!(defect <= 1e-9, "RAR - I defect {defect:.3e}");
    }

    #[test]
    fn herm_fn_singular_inverse_errors() {
        let a = Mat::from_diagonal(&Vector::from_vec(vec![re(1.0), re(0.0)]));
        assert!(matches!(
            herm_inverse(&a, 1e-12),
            Err(Error::SingularOperator(_))
        ));
    }

    #[test]
    fn herm_fn_identity_function_returns_input() {
        let mut rng = seeded(41);
        let g = random_mat(&mut rng, 5, 5, true);
        let a = (&g + g.adjoint()).scale(0.5);
        let b = herm_fn(&a, Some).unwrap();
        assert!((&a - b).norm() <= 1e-10 * frobenius(&a).max(1.0));
    }

    #[test]
    fn psd_eigenvalues_nonnegative_to_tolerance() {
        let mut rng = seeded(53);
        for _ in 0..10 {
            let g = random_mat(&mut rng, 7, 4, true);
            let a = &g * g.adjoint();
            let eig = herm_eig(&a).unwrap();
            let scale = frobenius(&a);
            assert!(eig.min() >= -1e-10 * scale);
        }
    }

    #[test]
    fn numerical_rank_thresholds() {
        let m = mat_from_rows(&[&[1.0, 1.0], &[0.0, 1e-14]]);
        assert_eq!(numerical_rank(&m, Some(1e-10)).unwrap(), 1);
        assert_eq!(numerical_rank(&m, Some(1e-16)).unwrap(), 2);
    }

    #[test]
    fn dim_cap_enforced() {
        let m = Mat::zeros(2, 2);
        assert!(ensure_dim(m.nrows()).is_ok());
        assert!(ensure_dim(DIM_CAP + 1).is_err());
    }
}
