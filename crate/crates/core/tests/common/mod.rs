//! Shared test support: independent numerical oracles and random
//! instance generators.
//!
//! The oracles here deliberately avoid the library's eigensolver and
//! orthonormalizer so that every golden value is confirmed through a
//! second algorithmic route.

use fusionframes::linalg::{cx, re, Mat, Scalar, Vector};
use fusionframes::subspace::Subspace;
use fusionframes::WeightedFamily;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_scalar(rng: &mut impl Rng, complex: bool) -> Scalar {
    let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
    cx(rng.gen_range(-1.0..1.0), im)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, complex: bool) -> Mat {
    Mat::from_fn(rows, cols, |_, _| random_scalar(rng, complex))
}

pub fn random_vector(rng: &mut impl Rng, n: usize, complex: bool) -> Vector {
    Vector::from_fn(n, |_, _| random_scalar(rng, complex))
}

#[allow(dead_code)]
pub fn random_unitary(rng: &mut impl Rng, n: usize, complex: bool) -> Mat {
    loop {
        let g = random_matrix(rng, n, n, complex);
        let q = mgs_orthonormalize(&g, 1e-8);
        if q.ncols() == n {
            return q;
        }
    }
}

pub fn random_subspace(rng: &mut impl Rng, n: usize, dim: usize, complex: bool) -> Subspace {
    loop {
        let m = random_matrix(rng, n, dim, complex);
        let w = Subspace::from_spanning(&m, None).unwrap();
        if w.dim() == dim {
            return w;
        }
    }
}

/// A random weighted family that is certainly a frame and not borderline:
/// the smallest eigenvalue of its frame operator exceeds `1e-6` times the
/// largest.
pub fn random_frame_family(
    rng: &mut impl Rng,
    n: usize,
    count: usize,
    complex: bool,
) -> WeightedFamily {
    loop {
        let items: Vec<(Subspace, f64)> = (0..count)
            .map(|_| {
                let dim = rng.gen_range(1..=n);
                (
                    random_subspace(rng, n, dim, complex),
                    rng.gen_range(0.4..1.8),
                )
            })
            .collect();
        let family = WeightedFamily::new(n, items).unwrap();
        let bounds = family.frame_bounds(None).unwrap();
        if bounds.is_frame && bounds.lower > 1e-6 * bounds.upper {
            return family;
        }
    }
}

/// Two 3-dimensional coordinate subspaces of R^5 sharing the middle axis
/// (the basis is ordered e_{-2}..e_2, so the shared axis is index 2):
/// frame operator diag(1,1,2,1,1), exact but not a Riesz decomposition.
#[allow(dead_code)]
pub fn overlap_family() -> WeightedFamily {
    coordinate_family(5, &[&[2, 3, 4], &[0, 1, 2]], &[1.0, 1.0])
}

pub fn coordinate_family(n: usize, groups: &[&[usize]], weights: &[f64]) -> WeightedFamily {
    let items = groups
        .iter()
        .zip(weights)
        .map(|(axes, &v)| (Subspace::coordinate(n, axes).unwrap(), v))
        .collect();
    WeightedFamily::new(n, items).unwrap()
}

/// Modified Gram-Schmidt with one reorthogonalization pass: the
/// independent orthonormalization oracle.
pub fn mgs_orthonormalize(m: &Mat, tol: f64) -> Mat {
    let n = m.nrows();
    let mut basis: Vec<Vector> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: Vector = m.column(j).into_owned();
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dotc(&v);
                v -= q * coeff;
            }
        }
        let norm = v.norm();
        if norm > tol {
            basis.push(v.unscale(norm));
        }
    }
    let mut out = Mat::zeros(n, basis.len());
    for (j, q) in basis.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}

/// Eigenvalues of a Hermitian matrix by cyclic 2x2 diagonalization: each
/// sweep zeroes every off-diagonal pair with the exact eigenvectors of
/// the corresponding 2x2 Hermitian block. Independent of the library's
/// eigensolver. Returns the spectrum in ascending order.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "oracle needs a square matrix");
    let mut work = (a + a.adjoint()).scale(0.5);
    let scale: f64 = work.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += work[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = work[(p, q)];
                if apq.norm() <= 1e-18 * scale {
                    continue;
                }
                let app = work[(p, p)].re;
                let aqq = work[(q, q)].re;
                // exact eigenvectors of [[app, apq], [conj(apq), aqq]]
                let tau = app + aqq;
                let disc = ((app - aqq) * (app - aqq) + 4.0 * apq.norm_sqr()).sqrt();
                let lambda = 0.5 * (tau + disc);
                // eigenvector (apq, lambda - app)
                let mut u1 = (apq, cx(lambda - app, 0.0));
                let norm1 = (u1.0.norm_sqr() + u1.1.norm_sqr()).sqrt();
                if norm1 < 1e-300 {
                    continue;
                }
                u1 = (u1.0 / re(norm1), u1.1 / re(norm1));
                // orthogonal partner
                let u2 = (-u1.1.conj(), u1.0.conj());
                let mut g = Mat::identity(n, n);
                g[(p, p)] = u1.0;
                g[(q, p)] = u1.1;
                g[(p, q)] = u2.0;
                g[(q, q)] = u2.1;
                work = g.adjoint() * work * g;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| work[(i, i)].re).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Frame operator of flat columns accumulated entry by entry with scalar
/// arithmetic only (no matrix products): the brute-force side of pooled
/// bound checks.
pub fn brute_force_frame_operator(vectors: &Mat) -> Mat {
    let n = vectors.nrows();
    let mut s = Mat::zeros(n, n);
    for j in 0..vectors.ncols() {
        for r in 0..n {
            for c in 0..n {
                let add = vectors[(r, j)] * vectors[(c, j)].conj();
                s[(r, c)] += add;
            }
        }
    }
    s
}

#[allow(dead_code)]
pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual:.17e}, expected {expected:.17e} (tol {tol:.1e})"
    );
}
