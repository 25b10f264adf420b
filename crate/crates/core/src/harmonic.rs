//! Harmonic families of subspaces: unitary orbits of a seed subspace with
//! the wrap-around check, and finite Gabor systems over the cyclic group
//! Z_L partitioned by modulation residue.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fusion::{verify_equivalence, WeightedFamily};
use crate::linalg::{self, cx, re, Mat, Vector};
use crate::report::Certificate;
use crate::subspace::{apply_operator, Subspace};

/// Unitarity tolerance for orbit steps.
pub const UNITARY_TOL: f64 = 1e-10;

/// Subspace-distance tolerance for wrap-around and modulation stepping.
pub const WRAP_TOL: f64 = 1e-8;

/// Orbit description: a unitary step, a seed subspace, the orbit length,
/// and one weight per step.
#[derive(Debug, Clone)]
pub struct HarmonicSpec {
    pub step: Mat,
    pub seed: Subspace,
    pub count: usize,
    pub weights: Vec<f64>,
}

impl HarmonicSpec {
    pub fn new(step: Mat, seed: Subspace, count: usize, weights: Vec<f64>) -> Result<Self> {
        linalg::ensure_finite(&step)?;
        let n = seed.ambient_dim();
        if step.nrows() != n || step.ncols() != n {
            return Err(Error::invalid(
                "orbit step must be square in the seed's ambient dimension",
            ));
        }
        let defect = linalg::herm_norm(&(step.adjoint() * &step - Mat::identity(n, n)))?;
        if defect > UNITARY_TOL {
            return Err(Error::invalid(format!(
                "orbit step is not unitary: defect {defect:.3e}"
            )));
        }
        if count == 0 {
            return Err(Error::invalid("orbit length must be at least 1"));
        }
        if weights.len() != count {
            return Err(Error::invalid(format!(
                "expected {count} weights, got {}",
                weights.len()
            )));
        }
        Ok(HarmonicSpec {
            step,
            seed,
            count,
            weights,
        })
    }

    pub fn uniform(step: Mat, seed: Subspace, count: usize, weight: f64) -> Result<Self> {
        Self::new(step, seed, count, vec![weight; count])
    }
}

/// The orbit `{U^i W_0}` together with the unitary that generated it.
#[derive(Debug, Clone)]
pub struct OrbitFamily {
    pub family: WeightedFamily,
    pub step: Mat,
}

pub fn orbit_family(spec: &HarmonicSpec) -> Result<OrbitFamily> {
    let mut items = Vec::with_capacity(spec.count);
    let mut current = spec.seed.clone();
    for i in 0..spec.count {
        items.push((current.clone(), spec.weights[i]));
        if i + 1 < spec.count {
            current = apply_operator(&spec.step, &current)?.subspace;
        }
    }
    Ok(OrbitFamily {
        family: WeightedFamily::new(spec.seed.ambient_dim(), items)?,
        step: spec.step.clone(),
    })
}

/// Wrap-around check: the distance between `U(W_{N-1})` and `W_0`. For a
/// uniform Parseval orbit the wrap-around holds automatically.
#[derive(Debug, Clone)]
pub struct WraparoundReport {
    pub distance: f64,
    pub holds: bool,
    /// Whether the orbit family is uniform and Parseval, in which case
    /// `holds` is guaranteed.
    pub uniform_parseval: bool,
}

pub fn check_wraparound(spec: &HarmonicSpec) -> Result<WraparoundReport> {
    let orbit = orbit_family(spec)?;
    let last = orbit.family.subspace(spec.count - 1);
    let wrapped = apply_operator(&spec.step, last)?.subspace;
    let distance = wrapped.distance(orbit.family.subspace(0))?;
    let bounds = orbit.family.frame_bounds(None)?;
    Ok(WraparoundReport {
        distance,
        holds: distance <= WRAP_TOL,
        uniform_parseval: bounds.is_uniform && bounds.is_parseval,
    })
}

/// Modulation operator on C^L: `(M_m x)_t = e^{2 pi i m t / L} x_t`.
pub fn modulation(length: usize, m: usize) -> Mat {
    let diag = Vector::from_fn(length, |t, _| {
        let phase = TAU * (m as f64) * (t as f64) / (length as f64);
        cx(phase.cos(), phase.sin())
    });
    Mat::from_diagonal(&diag)
}

/// Translation operator on C^L: `(T_n x)_t = x_{(t - n) mod L}`.
pub fn translation(length: usize, n: usize) -> Mat {
    Mat::from_fn(length, length, |t, s| {
        re(if (t + length - n % length) % length == s {
            1.0
        } else {
            0.0
        })
    })
}

/// A finite Gabor specification: signal length, window, and the number of
/// modulation residue classes `q` (a divisor of the length).
#[derive(Debug, Clone)]
pub struct GaborSpec {
    pub length: usize,
    pub window: Vector,
    pub modulation_classes: usize,
}

impl GaborSpec {
    pub fn new(length: usize, window: Vector, modulation_classes: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::invalid("signal length must be at least 1"));
        }
        if window.len() != length {
            return Err(Error::invalid(format!(
                "window has length {}, expected {length}",
                window.len()
            )));
        }
        if !window.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("window contains non-finite entries"));
        }
        if window.norm() == 0.0 {
            return Err(Error::invalid("window must be nonzero"));
        }
        let q = modulation_classes;
        if q == 0 || length % q != 0 {
            return Err(Error::invalid(format!(
                "modulation classes ({q}) must divide the length ({length})"
            )));
        }
        Ok(GaborSpec {
            length,
            window,
            modulation_classes,
        })
    }

    /// Dirac window at time zero.
    pub fn delta_window(length: usize) -> Vector {
        Vector::from_fn(length, |t, _| re(if t == 0 { 1.0 } else { 0.0 }))
    }
}

/// The full finite Gabor system `{M_m T_n g}` as flat columns plus the
/// fusion family of modulation-residue subspaces
/// `W_j = span{ M_{mq+j} T_n g }` with unit weights.
#[derive(Debug, Clone)]
pub struct GaborFamily {
    pub family: WeightedFamily,
    pub flat: Mat,
}

pub fn gabor_family(spec: &GaborSpec) -> Result<GaborFamily> {
    let l = spec.length;
    let q = spec.modulation_classes;
    let mut flat = Mat::zeros(l, l * l);
    for m in 0..l {
        let mod_m = modulation(l, m);
        for n in 0..l {
            let atom = &mod_m * translation(l, n) * &spec.window;
            flat.set_column(m * l + n, &atom);
        }
    }
    let mut items = Vec::with_capacity(q);
    for j in 0..q {
        let per_class = (l / q) * l;
        let mut cell = Mat::zeros(l, per_class);
        let mut at = 0;
        for m_step in 0..(l / q) {
            let m = m_step * q + j;
            for n in 0..l {
                cell.set_column(at, &flat.column(m * l + n));
                at += 1;
            }
        }
        items.push((Subspace::from_spanning(&cell, None)?, 1.0));
    }
    Ok(GaborFamily {
        family: WeightedFamily::new(l, items)?,
        flat,
    })
}

/// Stepping report of the harmonic structure of a Gabor partition: one
/// modulation unit maps each residue subspace onto the next, cyclically,
/// so the partition is a finite harmonic frame of subspaces.
#[derive(Debug, Clone)]
pub struct GaborHarmonicReport {
    /// `distance(M_1(W_j), W_{j+1 mod q})` for each residue `j`.
    pub step_distances: Vec<f64>,
    pub steps_hold: bool,
    /// All residue subfamilies are unitarily equivalent through `M_1`.
    pub unitarily_equivalent: bool,
    pub certificates: Vec<Certificate>,
}

pub fn harmonic_gabor_check(spec: &GaborSpec) -> Result<GaborHarmonicReport> {
    let gabor = gabor_family(spec)?;
    let q = spec.modulation_classes;
    let step = modulation(spec.length, 1);
    let mut step_distances = Vec::with_capacity(q);
    let mut certificates = Vec::with_capacity(q);
    for j in 0..q {
        let image = apply_operator(&step, gabor.family.subspace(j))?.subspace;
        let target = gabor.family.subspace((j + 1) % q);
        let d = image.distance(target)?;
        certificates.push(Certificate::less_equal(
            format!("modulation_step_{j}"),
            d,
            WRAP_TOL,
            0.0,
        ));
        step_distances.push(d);
    }
    let steps_hold = step_distances.iter().all(|&d| d <= WRAP_TOL);

    // the rotated family {W_1, ..., W_{q-1}, W_0} is the image of the
    // family under one modulation step
    let rotated_items: Vec<(Subspace, f64)> = (0..q)
        .map(|j| {
            (
                gabor.family.subspace((j + 1) % q).clone(),
                gabor.family.weight(j),
            )
        })
        .collect();
    let rotated = WeightedFamily::new(spec.length, rotated_items)?;
    let unitarily_equivalent = verify_equivalence(&step, &rotated, &gabor.family, true)?;

    Ok(GaborHarmonicReport {
        step_distances,
        steps_hold,
        unitarily_equivalent,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cyclic_shift(n: usize) -> Mat {
        Mat::from_fn(n, n, |i, j| re(if (j + 1) % n == i { 1.0 } else { 0.0 }))
    }

    #[test]
    fn orbit_of_cyclic_shift_is_coordinate_onb() {
        let seed = Subspace::coordinate(3, &[0]).unwrap();
        let spec = HarmonicSpec::uniform(cyclic_shift(3), seed, 3, 1.0).unwrap();
        let orbit = orbit_family(&spec).unwrap();
        let bounds = orbit.family.frame_bounds(None).unwrap();
        assert!(bounds.is_parseval && bounds.is_onb);
        for (i, (w, _)) in orbit.family.items().iter().enumerate() {
            let axis = Subspace::coordinate(3, &[i]).unwrap();
            assert!(w.distance(&axis).unwrap() < 1e-12);
        }
        let report = check_wraparound(&spec).unwrap();
        assert!(report.holds && report.uniform_parseval);
    }

    #[test]
    fn quarter_rotation_orbit_is_tight_with_bound_two() {
        let rot = Mat::from_fn(2, 2, |i, j| {
            re(match (i, j) {
                (0, 0) | (1, 1) => 0.0,
                (0, 1) => -1.0,
                (1, 0) => 1.0,
                _ => unreachable!(),
            })
        });
        let seed = Subspace::coordinate(2, &[0]).unwrap();
        let spec = HarmonicSpec::uniform(rot, seed, 4, 1.0).unwrap();
        let orbit = orbit_family(&spec).unwrap();
        // two distinct lines, each visited twice: S = 2I
        let bounds = orbit.family.frame_bounds(None).unwrap();
        assert!((bounds.lower - 2.0).abs() < 1e-12);
        assert!((bounds.upper - 2.0).abs() < 1e-12);
        assert!(bounds.is_tight && !bounds.is_parseval);
        let report = check_wraparound(&spec).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn singleton_orbit_frame_iff_seed_full() {
        let full = Subspace::full(2).unwrap();
        let spec = HarmonicSpec::uniform(Mat::identity(2, 2), full, 1, 1.0).unwrap();
        assert!(orbit_family(&spec)
            .unwrap()
            .family
            .frame_bounds(None)
            .unwrap()
            .is_frame);

        let line = Subspace::coordinate(2, &[0]).unwrap();
        let spec = HarmonicSpec::uniform(Mat::identity(2, 2), line, 1, 1.0).unwrap();
        assert!(!orbit_family(&spec)
            .unwrap()
            .family
            .frame_bounds(None)
            .unwrap()
            .is_frame);
    }

    #[test]
    fn non_unitary_step_rejected() {
        let seed = Subspace::coordinate(2, &[0]).unwrap();
        let stretch = Mat::identity(2, 2).scale(2.0);
        assert!(matches!(
            HarmonicSpec::uniform(stretch, seed, 2, 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn irrational_rotation_orbit_reports_distance_only() {
        let theta: f64 = 1.0; // not a rational multiple of 2 pi / 3
        let rot = Mat::from_fn(2, 2, |i, j| {
            re(match (i, j) {
                (0, 0) | (1, 1) => theta.cos(),
                (0, 1) => -theta.sin(),
                (1, 0) => theta.sin(),
                _ => unreachable!(),
            })
        });
        let seed = Subspace::coordinate(2, &[0]).unwrap();
        let spec = HarmonicSpec::uniform(rot, seed, 3, 1.0).unwrap();
        let report = check_wraparound(&spec).unwrap();
        assert!(!report.uniform_parseval || report.holds);
        assert!(report.distance > 0.1, "orbit should not wrap");
    }

    #[test]
    fn block_permutation_orbit_wraps_per_theorem() {
        // unitary permuting three 2-blocks of C^6 with random unitary
        // transitions, conjugated by a random global unitary
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut random_unitary = |n: usize| -> Mat {
            let g = Mat::from_fn(n, n, |_, _| {
                cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            linalg::orthonormalize(&g, None).unwrap()
        };
        let blocks = 3usize;
        let bdim = 2usize;
        let n = blocks * bdim;
        let mut u = Mat::zeros(n, n);
        for b in 0..blocks {
            let t = random_unitary(bdim);
            let dst = ((b + 1) % blocks) * bdim;
            let src = b * bdim;
            u.view_mut((dst, src), (bdim, bdim)).copy_from(&t);
        }
        let conj = random_unitary(n);
        let u = &conj * u * conj.adjoint();
        let seed_basis = conj.columns(0, bdim).into_owned();
        let seed = Subspace::from_orthonormal(seed_basis).unwrap();
        let spec = HarmonicSpec::uniform(u, seed, blocks, 1.0).unwrap();
        let report = check_wraparound(&spec).unwrap();
        assert!(report.uniform_parseval, "orbit covers the blocks exactly");
        assert!(report.holds, "wrap distance {}", report.distance);
    }

    #[test]
    fn modulation_translation_commutation() {
        // M_m T_n = e^{2 pi i m n / L} T_n M_m
        let l = 6;
        let (m, n) = (2, 3);
        let lhs = modulation(l, m) * translation(l, n);
        let phase = TAU * (m as f64) * (n as f64) / (l as f64);
        let rhs = translation(l, n) * modulation(l, m) * cx(phase.cos(), phase.sin());
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn delta_window_full_gabor_is_tight() {
        let spec = GaborSpec::new(4, GaborSpec::delta_window(4), 1).unwrap();
        let gabor = gabor_family(&spec).unwrap();
        assert_eq!(gabor.family.len(), 1);
        assert_eq!(gabor.family.subspace(0).dim(), 4);
        let bounds = gabor.family.frame_bounds(None).unwrap();
        assert!((bounds.lower - 1.0).abs() < 1e-12 && (bounds.upper - 1.0).abs() < 1e-12);
        // flat system: S = L |g|^2 I = 4 I
        let s_flat = crate::fusion::vector_frame_operator(&gabor.flat);
        assert!((s_flat - Mat::identity(4, 4).scale(4.0)).norm() < 1e-10);
    }

    #[test]
    fn delta_window_two_classes() {
        let spec = GaborSpec::new(4, GaborSpec::delta_window(4), 2).unwrap();
        let gabor = gabor_family(&spec).unwrap();
        assert_eq!(gabor.family.len(), 2);
        let bounds = gabor.family.frame_bounds(None).unwrap();
        // each residue class spans the full space for the Dirac window
        assert!((bounds.lower - 2.0).abs() < 1e-10 && (bounds.upper - 2.0).abs() < 1e-10);
    }

    #[test]
    fn flat_frame_operator_commutes_with_translations() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let l = 6;
        let window = Vector::from_fn(l, |_, _| {
            cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let spec = GaborSpec::new(l, window, 2).unwrap();
        let gabor = gabor_family(&spec).unwrap();
        let s = crate::fusion::vector_frame_operator(&gabor.flat);
        for n in 0..l {
            let t = translation(l, n);
            let comm = &s * &t - &t * &s;
            assert!(comm.norm() <= 1e-9, "commutator defect {}", comm.norm());
        }
    }

    #[test]
    fn harmonic_step_check_various_windows() {
        // q = 1 is vacuous
        let spec = GaborSpec::new(4, GaborSpec::delta_window(4), 1).unwrap();
        let report = harmonic_gabor_check(&spec).unwrap();
        assert!(report.steps_hold && report.unitarily_equivalent);

        let spec = GaborSpec::new(4, GaborSpec::delta_window(4), 2).unwrap();
        let report = harmonic_gabor_check(&spec).unwrap();
        assert!(report.steps_hold && report.unitarily_equivalent);

        // random window on Z_8 with q = 2: structure is window-independent
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let window = Vector::from_fn(8, |_, _| {
            cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let spec = GaborSpec::new(8, window, 2).unwrap();
        let report = harmonic_gabor_check(&spec).unwrap();
        assert!(report.steps_hold && report.unitarily_equivalent);
        assert!(report.certificates.iter().all(|c| c.pass));
    }

    #[test]
    fn zero_window_rejected() {
        assert!(matches!(
            GaborSpec::new(4, Vector::zeros(4), 1),
            Err(Error::InvalidInput(_))
        ));
    }
}
