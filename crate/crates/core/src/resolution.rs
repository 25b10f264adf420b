//! Resolutions of the identity induced by fusion frames: the two
//! canonical constructions, subset lower bounds, the projected-operator
//! sandwich, and l2-resolution certificates.
//!
//! Quadratic forms `sum_i v_i^2 |T_i f|^2` are certified through the
//! Hermitian matrix `sum_i v_i^2 T_i* T_i` (extreme eigenvalues); random
//! probes remain available as an independent oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::LocalFrame;
use crate::error::{Error, Result};
use crate::fusion::{vector_frame_bounds_on_span, WeightedFamily, FRAME_TOL_REL};
use crate::linalg::{self, cx, re, Mat, Vector};
use crate::report::Certificate;
use crate::subspace::Subspace;

/// Identity-resolution defect tolerance.
pub const RESOLUTION_TOL: f64 = 1e-9;

/// Slack tolerance for sandwich certificates.
pub const SANDWICH_TOL: f64 = 1e-8;

/// Ranges of the operators must lie in their subspaces to this tolerance.
pub const RANGE_TOL: f64 = 1e-8;

/// An ordered family of square operators with positive weights, claimed to
/// resolve the identity. The list order is recorded and sums are always
/// accumulated in it; for the finite sums computed here the ordering is
/// immaterial, but reports state it.
#[derive(Debug, Clone)]
pub struct OperatorFamily {
    ops: Vec<Mat>,
    weights: Vec<f64>,
    range_hints: Option<Vec<Subspace>>,
}

impl OperatorFamily {
    pub fn new(ops: Vec<Mat>, weights: Vec<f64>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::invalid("operator family must be nonempty"));
        }
        if ops.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} operators but {} weights",
                ops.len(),
                weights.len()
            )));
        }
        let n = ops[0].nrows();
        for (k, t) in ops.iter().enumerate() {
            linalg::ensure_finite(t)?;
            if t.nrows() != n || t.ncols() != n {
                return Err(Error::invalid(format!(
                    "operator {k} is {}x{}, expected {n}x{n}",
                    t.nrows(),
                    t.ncols()
                )));
            }
        }
        for (k, v) in weights.iter().enumerate() {
            if !(*v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "weight {k} must be a positive finite number"
                )));
            }
        }
        Ok(OperatorFamily {
            ops,
            weights,
            range_hints: None,
        })
    }

    /// Attach the subspaces the operators are claimed to map into. The
    /// containment `range(T_i) <= W_i` is validated.
    pub fn with_range_hints(mut self, hints: Vec<Subspace>) -> Result<Self> {
        if hints.len() != self.ops.len() {
            return Err(Error::invalid("one range hint per operator required"));
        }
        for (k, (t, w)) in self.ops.iter().zip(&hints).enumerate() {
            let outside = (Mat::identity(self.dim(), self.dim()) - w.projector()) * t;
            let defect = linalg::op_norm(&outside)?;
            if defect > RANGE_TOL * linalg::op_norm(t)?.max(1.0) {
                return Err(Error::invalid(format!(
                    "operator {k} does not map into its hinted subspace (defect {defect:.3e})"
                )));
            }
        }
        self.range_hints = Some(hints);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn ops(&self) -> &[Mat] {
        &self.ops
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn range_hints(&self) -> Option<&[Subspace]> {
        self.range_hints.as_deref()
    }

    /// `sum_i T_i`, or `sum_i v_i^2 T_i` when `scaled`.
    pub fn operator_sum(&self, scaled: bool) -> Mat {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for (t, v) in self.ops.iter().zip(&self.weights) {
            let factor = if scaled { v * v } else { 1.0 };
            out += t.scale(factor);
        }
        out
    }

    /// The Hermitian matrix `sum_i v_i^2 T_i* T_i` certifying the
    /// quadratic form `sum_i v_i^2 |T_i f|^2`.
    pub fn quadratic_form_matrix(&self) -> Mat {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for (t, v) in self.ops.iter().zip(&self.weights) {
            out += (t.adjoint() * t).scale(v * v);
        }
        out
    }

    fn quadratic_form_matrix_subset(&self, indices: &[usize], weight_exp: f64) -> Mat {
        let n = self.dim();
        let mut out = Mat::zeros(n, n);
        for &i in indices {
            let t = &self.ops[i];
            out += (t.adjoint() * t).scale(self.weights[i].powf(weight_exp));
        }
        out
    }
}

/// Identity-resolution defect `|sum_i (v_i^2) T_i - I|` in operator norm.
pub fn resolution_defect(of: &OperatorFamily, scaled: bool) -> Result<f64> {
    let n = of.dim();
    let sum = of.operator_sum(scaled) - Mat::identity(n, n);
    linalg::op_norm(&sum)
}

/// Whether the family resolves the identity to tolerance `tol`
/// (with `scaled`, the weighted family `{v_i^2 T_i}` is tested).
pub fn is_resolution(of: &OperatorFamily, scaled: bool, tol: f64) -> Result<bool> {
    Ok(resolution_defect(of, scaled)? <= tol)
}

/// Certificates attached to a constructed resolution.
#[derive(Debug, Clone)]
pub struct ResolutionCertificate {
    /// Defect of the identity resolution.
    pub defect: f64,
    /// Whether the resolution identity holds to [`RESOLUTION_TOL`].
    pub resolves: bool,
    /// Extreme eigenvalues of `sum_i v_i^2 T_i* T_i`.
    pub quad_min: f64,
    pub quad_max: f64,
    pub certificates: Vec<Certificate>,
}

fn quad_extremes(of: &OperatorFamily) -> Result<(f64, f64)> {
    let eig = linalg::herm_eig(&of.quadratic_form_matrix())?;
    Ok((eig.min().max(0.0), eig.max()))
}

/// The resolution `T_i = pi_{W_i} S^{-1}`: the scaled family
/// `{v_i^2 T_i}` sums to the identity, and the quadratic form lies within
/// `[C/D^2, D/C^2]`.
pub fn resolution_from_frame_operator(
    family: &WeightedFamily,
) -> Result<(OperatorFamily, ResolutionCertificate)> {
    let bounds = family.frame_bounds(None)?;
    if !bounds.is_frame {
        return Err(Error::singular(
            "resolution construction requires a fusion frame",
        ));
    }
    let s = family.frame_operator()?;
    let s_inv = linalg::herm_inverse(&s, FRAME_TOL_REL)?;
    let ops: Vec<Mat> = family
        .items()
        .iter()
        .map(|(w, _)| w.projector() * &s_inv)
        .collect();
    let hints: Vec<Subspace> = family.items().iter().map(|(w, _)| w.clone()).collect();
    let of = OperatorFamily::new(ops, family.weights())?.with_range_hints(hints)?;

    let defect = resolution_defect(&of, true)?;
    let (quad_min, quad_max) = quad_extremes(&of)?;
    let (c, d) = (bounds.lower, bounds.upper);
    let certificates = vec![
        Certificate::less_equal("resolution_identity_defect", defect, RESOLUTION_TOL, 0.0),
        Certificate::less_equal(
            "quad_lower: C/D^2 <= lambda_min",
            c / (d * d),
            quad_min,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "quad_upper: lambda_max <= D/C^2",
            quad_max,
            d / (c * c),
            SANDWICH_TOL,
        ),
    ];
    let resolves = defect <= RESOLUTION_TOL;
    Ok((
        of,
        ResolutionCertificate {
            defect,
            resolves,
            quad_min,
            quad_max,
            certificates,
        },
    ))
}

/// The resolution built from the canonical dual of the pooled local
/// frames: `T_i f = sum_j <f, S_vf^{-1} v_i f_ij> v_i f_ij`. The unscaled
/// family sums to the identity, and with local bounds `A <= B` (of the
/// scaled locals) and fusion bounds `C <= D`, the quadratic form lies
/// within `[A C / (B^2 D^2), B^2 D^3 / (A^2 C^2)]`.
pub fn resolution_from_dual_frame(
    family: &WeightedFamily,
    locals: &[LocalFrame],
) -> Result<(OperatorFamily, ResolutionCertificate)> {
    if locals.len() != family.len() {
        return Err(Error::invalid(format!(
            "{} locals for a family of {} subspaces",
            locals.len(),
            family.len()
        )));
    }
    let n = family.ambient_dim();
    let bounds = family.frame_bounds(None)?;
    if !bounds.is_frame {
        return Err(Error::invalid(
            "dual-frame resolution requires a fusion frame",
        ));
    }

    // scaled local systems v_i * f_ij, their spans, and their bounds
    let mut scaled_locals = Vec::with_capacity(locals.len());
    let mut local_lower = f64::INFINITY;
    let mut local_upper = 0.0f64;
    let mut pooled_cols = 0usize;
    for (k, local) in locals.iter().enumerate() {
        if local.vectors.nrows() != n {
            return Err(Error::invalid("locals live in a different ambient space"));
        }
        let scaled = local.vectors.scale(family.weight(k));
        let (a, b, span) = vector_frame_bounds_on_span(&scaled)?;
        if a <= FRAME_TOL_REL * b {
            return Err(Error::invalid(format!(
                "local {k} is not a frame for its span"
            )));
        }
        if span.dim() != family.subspace(k).dim()
            || span.distance(family.subspace(k))? > RANGE_TOL
        {
            return Err(Error::invalid(format!(
                "local {k} does not span its family subspace"
            )));
        }
        local_lower = local_lower.min(a);
        local_upper = local_upper.max(b);
        pooled_cols += scaled.ncols();
        scaled_locals.push(scaled);
    }

    let mut pooled = Mat::zeros(n, pooled_cols);
    let mut at = 0;
    for m in &scaled_locals {
        for j in 0..m.ncols() {
            pooled.set_column(at, &m.column(j));
            at += 1;
        }
    }
    let s_vf = &pooled * pooled.adjoint();
    let s_inv = linalg::herm_inverse(&s_vf, FRAME_TOL_REL).map_err(|_| {
        Error::invalid("pooled local vectors are not a frame for the ambient space")
    })?;

    // T_i = (v_i F_i)(v_i F_i)* S_vf^{-1}
    let ops: Vec<Mat> = scaled_locals
        .iter()
        .map(|m| m * m.adjoint() * &s_inv)
        .collect();
    let hints: Vec<Subspace> = family.items().iter().map(|(w, _)| w.clone()).collect();
    let of = OperatorFamily::new(ops, family.weights())?.with_range_hints(hints)?;

    let defect = resolution_defect(&of, false)?;
    let (quad_min, quad_max) = quad_extremes(&of)?;
    let (a, b) = (local_lower, local_upper);
    let (c, d) = (bounds.lower, bounds.upper);
    let certificates = vec![
        Certificate::less_equal("resolution_identity_defect", defect, RESOLUTION_TOL, 0.0),
        Certificate::less_equal(
            "quad_lower: AC/(B^2 D^2) <= lambda_min",
            a * c / (b * b * d * d),
            quad_min,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "quad_upper: lambda_max <= B^2 D^3/(A^2 C^2)",
            quad_max,
            b * b * d * d * d / (a * a * c * c),
            SANDWICH_TOL,
        ),
    ];
    let resolves = defect <= RESOLUTION_TOL;
    Ok((
        of,
        ResolutionCertificate {
            defect,
            resolves,
            quad_min,
            quad_max,
            certificates,
        },
    ))
}

/// Slack record for one subset in the subset-lower-bound certificate.
#[derive(Debug, Clone)]
pub struct SubsetSlack {
    pub indices: Vec<usize>,
    /// `lambda_min(sum_J v^2 T*T - (1/D) M_J* M_J)` with
    /// `M_J = sum_J v^2 T`: nonnegative when the inequality holds as an
    /// operator inequality.
    pub eigen_slack: f64,
    /// Worst probe slack `rhs - lhs` over the random probes.
    pub probe_slack: f64,
}

#[derive(Debug, Clone)]
pub struct SubsetLowerReport {
    pub per_subset: Vec<SubsetSlack>,
    pub worst_eigen_slack: f64,
    pub worst_probe_slack: f64,
    pub probes: usize,
    pub seed: u64,
    pub pass: bool,
}

fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let norm = v.norm();
        if norm > 1e-3 {
            return v.unscale(norm);
        }
    }
}

/// Subset lower bound: for every `J` and every `f`,
/// `(1/D) |sum_{j in J} v_j^2 T_j f|^2 <= sum_{j in J} v_j^2 |T_j f|^2`.
/// Certified both at the operator level (eigenvalue of the difference) and
/// on random probes. `D` is the upper frame bound of the family.
pub fn subset_lower_certificate(
    family: &WeightedFamily,
    of: &OperatorFamily,
    subsets: &[Vec<usize>],
    probes: usize,
    seed: u64,
) -> Result<SubsetLowerReport> {
    validate_resolution_for(family, of, true)?;
    let d = family.frame_bounds(None)?.upper;
    let n = of.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_subset = Vec::with_capacity(subsets.len());
    let mut worst_eigen = f64::INFINITY;
    let mut worst_probe = f64::INFINITY;

    for indices in subsets {
        for &i in indices {
            if i >= of.len() {
                return Err(Error::invalid(format!("subset index {i} out of range")));
            }
        }
        if indices.is_empty() {
            continue;
        }
        // operator-level: sum_J v^2 T*T - (1/D) M* M  with  M = sum_J v^2 T
        let rhs = of.quadratic_form_matrix_subset(indices, 2.0);
        let mut m = Mat::zeros(n, n);
        for &i in indices {
            let v = of.weights()[i];
            m += of.ops()[i].scale(v * v);
        }
        let lhs = (m.adjoint() * &m).unscale(d);
        let eig = linalg::herm_eig(&(rhs - &lhs))?;
        let eigen_slack = eig.min();

        let mut probe_slack = f64::INFINITY;
        for _ in 0..probes {
            let f = random_unit_vector(&mut rng, n);
            let mut sum_norms = 0.0;
            let mut sum_vec = Vector::zeros(n);
            for &i in indices {
                let v = of.weights()[i];
                let tf = &of.ops()[i] * &f;
                sum_norms += v * v * tf.norm_squared();
                sum_vec += tf * re(v * v);
            }
            let slack = sum_norms - sum_vec.norm_squared() / d;
            probe_slack = probe_slack.min(slack);
        }

        worst_eigen = worst_eigen.min(eigen_slack);
        worst_probe = worst_probe.min(probe_slack);
        per_subset.push(SubsetSlack {
            indices: indices.clone(),
            eigen_slack,
            probe_slack,
        });
    }

    let pass = worst_eigen >= -SANDWICH_TOL && worst_probe >= -SANDWICH_TOL;
    Ok(SubsetLowerReport {
        per_subset,
        worst_eigen_slack: worst_eigen,
        worst_probe_slack: worst_probe,
        probes,
        seed,
        pass,
    })
}

fn validate_resolution_for(
    family: &WeightedFamily,
    of: &OperatorFamily,
    scaled: bool,
) -> Result<()> {
    if of.len() != family.len() || of.dim() != family.ambient_dim() {
        return Err(Error::invalid(
            "operator family does not match the weighted family",
        ));
    }
    if !is_resolution(of, scaled, RESOLUTION_TOL)? {
        return Err(Error::invalid(
            "operators do not resolve the identity at the required tolerance",
        ));
    }
    Ok(())
}

/// Report of the projected-operator sandwich. With `T_i pi_{W_i} = T_i`
/// and `{v_i^2 T_i}` resolving the identity, the quadratic form is bounded
/// below by `1/D`. Two candidate upper bounds are checked: the stated
/// `D*E` with `E = sup_i |T_i|`, and the conservative `D*E^2`; the report
/// records which of them holds.
#[derive(Debug, Clone)]
pub struct TpiSandwichReport {
    /// False when the preconditions fail; no certificate is then claimed.
    pub applicable: bool,
    pub projection_defect: f64,
    pub operator_sup: f64,
    pub quad_min: f64,
    pub quad_max: f64,
    pub lower_holds: bool,
    pub upper_de_holds: bool,
    pub upper_de2_holds: bool,
    pub certificates: Vec<Certificate>,
}

pub fn tpi_sandwich(family: &WeightedFamily, of: &OperatorFamily) -> Result<TpiSandwichReport> {
    if of.len() != family.len() || of.dim() != family.ambient_dim() {
        return Err(Error::invalid(
            "operator family does not match the weighted family",
        ));
    }
    // preconditions reported, not thrown
    let mut projection_defect = 0.0f64;
    for ((w, _), t) in family.items().iter().zip(of.ops()) {
        let diff = t * w.projector() - t;
        projection_defect = projection_defect.max(linalg::op_norm(&diff)?);
    }
    let resolves = is_resolution(of, true, RESOLUTION_TOL)?;
    if projection_defect > RANGE_TOL || !resolves {
        return Ok(TpiSandwichReport {
            applicable: false,
            projection_defect,
            operator_sup: f64::NAN,
            quad_min: f64::NAN,
            quad_max: f64::NAN,
            lower_holds: false,
            upper_de_holds: false,
            upper_de2_holds: false,
            certificates: Vec::new(),
        });
    }

    let mut operator_sup = 0.0f64;
    for t in of.ops() {
        operator_sup = operator_sup.max(linalg::op_norm(t)?);
    }
    let d = family.frame_bounds(None)?.upper;
    let (quad_min, quad_max) = quad_extremes(of)?;

    let certificates = vec![
        Certificate::less_equal(
            "tpi_lower: 1/D <= lambda_min",
            1.0 / d,
            quad_min,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "tpi_upper_de: lambda_max <= D*E",
            quad_max,
            d * operator_sup,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "tpi_upper_de2: lambda_max <= D*E^2",
            quad_max,
            d * operator_sup * operator_sup,
            SANDWICH_TOL,
        ),
    ];
    Ok(TpiSandwichReport {
        applicable: true,
        projection_defect,
        operator_sup,
        quad_min,
        quad_max,
        lower_holds: certificates[0].pass,
        upper_de_holds: certificates[1].pass,
        upper_de2_holds: certificates[2].pass,
        certificates,
    })
}

/// l2-resolution certificate: the family must resolve the identity
/// unscaled, and the inverse-weighted quadratic form must satisfy
/// `lambda_max(sum_i v_i^{-2} T_i* T_i) <= B_req`.
#[derive(Debug, Clone)]
pub struct L2ResolutionReport {
    pub pass: bool,
    /// `lambda_max` of the inverse-weighted quadratic form.
    pub l2_bound: f64,
    /// Implied two-sided bounds for `sum_i v_i^2 |T_i f|^2`, available
    /// when range hints provide a fusion frame: the subset lemma gives the
    /// lower constant `min_i v_i^4 / D` and the l2 bound gives the upper
    /// constant `max_i v_i^4 * B_req`.
    pub implied: Option<(f64, f64)>,
    pub certificates: Vec<Certificate>,
}

pub fn l2_resolution_certificate(of: &OperatorFamily, b_req: f64) -> Result<L2ResolutionReport> {
    if !(b_req > 0.0) || !b_req.is_finite() {
        return Err(Error::invalid("the requested bound must be positive"));
    }
    if !is_resolution(of, false, RESOLUTION_TOL)? {
        return Err(Error::invalid(
            "l2 certificate requires an unscaled resolution of the identity",
        ));
    }
    let all: Vec<usize> = (0..of.len()).collect();
    let inv_weighted = of.quadratic_form_matrix_subset(&all, -2.0);
    let eig = linalg::herm_eig(&inv_weighted)?;
    let l2_bound = eig.max();
    let mut certificates = vec![Certificate::less_equal(
        "l2_bound: lambda_max(sum v^-2 T*T) <= B_req",
        l2_bound,
        b_req,
        RESOLUTION_TOL * b_req.max(1.0),
    )];
    let pass = certificates[0].pass;

    let implied = if pass {
        if let Some(hints) = of.range_hints() {
            let items: Vec<(Subspace, f64)> = hints
                .iter()
                .cloned()
                .zip(of.weights().iter().copied())
                .collect();
            let family = WeightedFamily::new(of.dim(), items)?;
            let bounds = family.frame_bounds(None)?;
            if bounds.is_frame {
                let v_min = of.weights().iter().cloned().fold(f64::INFINITY, f64::min);
                let v_max = of.weights().iter().cloned().fold(0.0f64, f64::max);
                let lower = v_min.powi(4) / bounds.upper;
                let upper = v_max.powi(4) * b_req;
                let (quad_min, quad_max) = quad_extremes(of)?;
                certificates.push(Certificate::less_equal(
                    "implied_lower: min v^4/D <= lambda_min(sum v^2 T*T)",
                    lower,
                    quad_min,
                    SANDWICH_TOL,
                ));
                certificates.push(Certificate::less_equal(
                    "implied_upper: lambda_max(sum v^2 T*T) <= max v^4*B_req",
                    quad_max,
                    upper,
                    SANDWICH_TOL,
                ));
                Some((lower, upper))
            } else {
                None
            }
        } else {
            None
        }
    } else {
        None
    };

    Ok(L2ResolutionReport {
        pass,
        l2_bound,
        implied,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::Subspace;

    fn coordinate_family(n: usize, groups: &[&[usize]], weights: &[f64]) -> WeightedFamily {
        let items = groups
            .iter()
            .zip(weights)
            .map(|(axes, &v)| (Subspace::coordinate(n, axes).unwrap(), v))
            .collect();
        WeightedFamily::new(n, items).unwrap()
    }

    fn overlap_family() -> WeightedFamily {
        coordinate_family(5, &[&[2, 3, 4], &[0, 1, 2]], &[1.0, 1.0])
    }

    fn random_frame_family(seed: u64, n: usize, count: usize) -> WeightedFamily {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let items: Vec<(Subspace, f64)> = (0..count)
                .map(|_| {
                    let k = rng.gen_range(1..=n);
                    let m = Mat::from_fn(n, k, |_, _| {
                        cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    });
                    (
                        Subspace::from_spanning(&m, None).unwrap(),
                        rng.gen_range(0.4..1.8),
                    )
                })
                .collect();
            let family = WeightedFamily::new(n, items).unwrap();
            if family.frame_bounds(None).unwrap().is_frame {
                return family;
            }
        }
    }

    #[test]
    fn projectors_of_onb_family_resolve_scaled() {
        let family = coordinate_family(4, &[&[0, 1], &[2], &[3]], &[1.0; 3]);
        let ops: Vec<Mat> = family.items().iter().map(|(w, _)| w.projector()).collect();
        let of = OperatorFamily::new(ops, family.weights()).unwrap();
        assert!(is_resolution(&of, true, 1e-12).unwrap());
    }

    #[test]
    fn halved_duplicated_projectors_resolve_unscaled() {
        let family = coordinate_family(3, &[&[0], &[1], &[2]], &[1.0; 3]);
        let mut ops = Vec::new();
        let mut weights = Vec::new();
        for (w, _) in family.items() {
            for _ in 0..2 {
                ops.push(w.projector().scale(0.5));
                weights.push(1.0);
            }
        }
        let of = OperatorFamily::new(ops, weights).unwrap();
        assert!(is_resolution(&of, false, 1e-12).unwrap());
    }

    #[test]
    fn scaled_dual_projections_resolve_unscaled() {
        let family = random_frame_family(3, 5, 3);
        let s = family.frame_operator().unwrap();
        let s_inv = linalg::herm_inverse(&s, FRAME_TOL_REL).unwrap();
        let ops: Vec<Mat> = family
            .items()
            .iter()
            .map(|(w, v)| (w.projector() * &s_inv).scale(v * v))
            .collect();
        let of = OperatorFamily::new(ops, family.weights()).unwrap();
        assert!(is_resolution(&of, false, 1e-10).unwrap());
    }

    #[test]
    fn frame_operator_construction_parseval() {
        let family = coordinate_family(4, &[&[0, 1], &[2], &[3]], &[1.0; 3]);
        let (of, cert) = resolution_from_frame_operator(&family).unwrap();
        assert!(cert.resolves);
        for ((w, _), t) in family.items().iter().zip(of.ops()) {
            assert!((t - w.projector()).norm() < 1e-12);
        }
        assert!((cert.quad_min - 1.0).abs() < 1e-10);
        assert!((cert.quad_max - 1.0).abs() < 1e-10);
        assert!(cert.certificates.iter().all(|c| c.pass));
    }

    #[test]
    fn frame_operator_construction_overlap_family() {
        let (_, cert) = resolution_from_frame_operator(&overlap_family()).unwrap();
        // C = 1, D = 2: certified window [1/4, 2]
        assert!(cert.resolves);
        assert!(cert.quad_min >= 0.25 - 1e-10);
        assert!(cert.quad_max <= 2.0 + 1e-10);
        assert!(cert.certificates.iter().all(|c| c.pass));
    }

    #[test]
    fn frame_operator_construction_diagonal_weights() {
        let family = coordinate_family(2, &[&[0], &[1]], &[2.0, 1.0]);
        let (of, cert) = resolution_from_frame_operator(&family).unwrap();
        // S = diag(4, 1): T_1 = diag(1/4, 0), T_2 = diag(0, 1)
        assert!((of.ops()[0][(0, 0)].re - 0.25).abs() < 1e-12);
        assert!((of.ops()[1][(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(cert.resolves);
    }

    #[test]
    fn frame_operator_construction_rejects_non_frame() {
        let family = coordinate_family(3, &[&[0], &[1]], &[1.0, 1.0]);
        assert!(matches!(
            resolution_from_frame_operator(&family),
            Err(Error::SingularOperator(_))
        ));
    }

    #[test]
    fn dual_frame_construction_onb_locals() {
        let family = coordinate_family(2, &[&[0], &[1]], &[1.0, 1.0]);
        let locals = vec![
            LocalFrame::new(Mat::from_fn(2, 1, |i, _| re(if i == 0 { 1.0 } else { 0.0 }))),
            LocalFrame::new(Mat::from_fn(2, 1, |i, _| re(if i == 1 { 1.0 } else { 0.0 }))),
        ];
        let (of, cert) = resolution_from_dual_frame(&family, &locals).unwrap();
        assert!(cert.resolves);
        for ((w, _), t) in family.items().iter().zip(of.ops()) {
            assert!((t - w.projector()).norm() < 1e-12);
        }
        assert!(cert.certificates.iter().all(|c| c.pass));
    }

    #[test]
    fn dual_frame_construction_doubled_local() {
        // W = span{e1} with local {e1, e1}, W' = span{e2} with {e2}
        let family = coordinate_family(2, &[&[0], &[1]], &[1.0, 1.0]);
        let mut doubled = Mat::zeros(2, 2);
        doubled[(0, 0)] = re(1.0);
        doubled[(0, 1)] = re(1.0);
        let locals = vec![
            LocalFrame::new(doubled),
            LocalFrame::new(Mat::from_fn(2, 1, |i, _| re(if i == 1 { 1.0 } else { 0.0 }))),
        ];
        let (of, cert) = resolution_from_dual_frame(&family, &locals).unwrap();
        assert!(cert.resolves, "defect {}", cert.defect);
        let sum = of.operator_sum(false);
        assert!((sum - Mat::identity(2, 2)).norm() < 1e-12);
        assert!(cert.certificates.iter().all(|c| c.pass));
    }

    #[test]
    fn dual_frame_construction_random_instance() {
        let family = random_frame_family(17, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let locals: Vec<LocalFrame> = family
            .items()
            .iter()
            .map(|(w, _)| {
                let extra = w.dim() + 1;
                let coeffs = Mat::from_fn(w.dim(), extra, |_, _| {
                    cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                LocalFrame::new(w.basis() * coeffs)
            })
            .collect();
        let (_, cert) = resolution_from_dual_frame(&family, &locals).unwrap();
        assert!(cert.resolves, "defect {}", cert.defect);
        assert!(
            cert.certificates.iter().all(|c| c.pass),
            "{:?}",
            cert.certificates
        );
    }

    #[test]
    fn subset_lower_all_indices_parseval_is_equality() {
        let family = coordinate_family(4, &[&[0, 1], &[2], &[3]], &[1.0; 3]);
        let (of, _) = resolution_from_frame_operator(&family).unwrap();
        let subsets = vec![vec![0, 1, 2]];
        let report = subset_lower_certificate(&family, &of, &subsets, 50, 7).unwrap();
        assert!(report.pass);
        // Parseval: lhs = |f|^2 = rhs, slack ~ 0
        assert!(report.worst_probe_slack.abs() < 1e-10);
    }

    #[test]
    fn subset_lower_all_subsets_overlap_family() {
        let family = overlap_family();
        let (of, _) = resolution_from_frame_operator(&family).unwrap();
        let subsets = vec![vec![0], vec![1], vec![0, 1]];
        let report = subset_lower_certificate(&family, &of, &subsets, 100, 11).unwrap();
        assert!(report.pass, "worst slacks {:?}", (report.worst_eigen_slack, report.worst_probe_slack));
        assert!(report.worst_eigen_slack >= -SANDWICH_TOL);
    }

    #[test]
    fn tpi_sandwich_projectors_on_onb_family() {
        let family = coordinate_family(4, &[&[0, 1], &[2], &[3]], &[1.0; 3]);
        let ops: Vec<Mat> = family.items().iter().map(|(w, _)| w.projector()).collect();
        let of = OperatorFamily::new(ops, family.weights()).unwrap();
        let report = tpi_sandwich(&family, &of).unwrap();
        assert!(report.applicable);
        assert!((report.operator_sup - 1.0).abs() < 1e-12);
        assert!((report.quad_min - 1.0).abs() < 1e-10);
        assert!((report.quad_max - 1.0).abs() < 1e-10);
        assert!(report.lower_holds && report.upper_de_holds && report.upper_de2_holds);
    }

    #[test]
    fn tpi_sandwich_overlap_family_dual_projections() {
        let family = overlap_family();
        let (of, _) = resolution_from_frame_operator(&family).unwrap();
        let report = tpi_sandwich(&family, &of).unwrap();
        assert!(report.applicable);
        assert!(report.lower_holds);
        // at least the conservative E^2 bound must hold
        assert!(report.upper_de2_holds);
    }

    #[test]
    fn tpi_sandwich_not_applicable_without_projection_property() {
        let family = coordinate_family(2, &[&[0], &[1]], &[1.0, 1.0]);
        // operators map out of their subspaces
        let swap = Mat::from_fn(2, 2, |i, j| re(if i + j == 1 { 0.5 } else { 0.5 }));
        let of = OperatorFamily::new(vec![swap.clone(), swap], vec![1.0, 1.0]).unwrap();
        let report = tpi_sandwich(&family, &of).unwrap();
        assert!(!report.applicable);
    }

    #[test]
    fn l2_certificate_projectors_unit_weights() {
        let family = coordinate_family(3, &[&[0], &[1], &[2]], &[1.0; 3]);
        let ops: Vec<Mat> = family.items().iter().map(|(w, _)| w.projector()).collect();
        let hints: Vec<Subspace> = family.items().iter().map(|(w, _)| w.clone()).collect();
        let of = OperatorFamily::new(ops, family.weights())
            .unwrap()
            .with_range_hints(hints)
            .unwrap();
        let report = l2_resolution_certificate(&of, 1.0).unwrap();
        assert!(report.pass, "l2 bound {}", report.l2_bound);
        let implied = report.implied.expect("range hints present");
        assert!(implied.0 <= 1.0 + 1e-12 && implied.1 >= 1.0 - 1e-12);
    }

    #[test]
    fn l2_certificate_scales_with_weights() {
        let family = coordinate_family(3, &[&[0], &[1], &[2]], &[2.0; 3]);
        let ops: Vec<Mat> = family.items().iter().map(|(w, _)| w.projector()).collect();
        let of = OperatorFamily::new(ops, family.weights()).unwrap();
        let report = l2_resolution_certificate(&of, 0.25).unwrap();
        assert!(report.pass, "l2 bound {}", report.l2_bound);
        assert!((report.l2_bound - 0.25).abs() < 1e-12);
    }

    #[test]
    fn l2_certificate_eigen_matches_probe_maximization() {
        let family = random_frame_family(29, 4, 3);
        let s = family.frame_operator().unwrap();
        let s_inv = linalg::herm_inverse(&s, FRAME_TOL_REL).unwrap();
        let ops: Vec<Mat> = family
            .items()
            .iter()
            .map(|(w, v)| (w.projector() * &s_inv).scale(v * v))
            .collect();
        let of = OperatorFamily::new(ops, family.weights()).unwrap();
        let report = l2_resolution_certificate(&of, 1e6).unwrap();
        // probe maximization never exceeds the eigen certificate
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut best = 0.0f64;
        for _ in 0..10_000 {
            let f = random_unit_vector(&mut rng, 4);
            let total: f64 = of
                .ops()
                .iter()
                .zip(of.weights())
                .map(|(t, v)| (t * &f).norm_squared() / (v * v))
                .sum();
            best = best.max(total);
        }
        // one-sided: probe maximization never exceeds the certificate
        assert!(best <= report.l2_bound * (1.0 + 1e-6));
        assert!(best > 0.0);
    }
}
