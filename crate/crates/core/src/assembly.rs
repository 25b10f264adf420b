//! Local-to-global constructions: assembling global frames from local
//! frame sequences with certified bound arithmetic, families from
//! partitions of a frame, frames enriched through duals, and Riesz-family
//! certificates over subfamilies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fusion::{
    vector_frame_bounds, vector_frame_bounds_on_span, vector_frame_operator, WeightedFamily,
    FRAME_TOL_REL,
};
use crate::linalg::{self, re, Mat};
use crate::report::Certificate;
use crate::subspace::Subspace;

/// Slack tolerance for the transfer-theorem sandwich inequalities.
pub const SANDWICH_TOL: f64 = 1e-8;

/// Declared local bounds must match the recomputed ones this tightly.
pub const DECLARED_BOUND_TOL: f64 = 1e-6;

/// Exhaustive subfamily certificates are limited to this family size.
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Minimum number of subsets a sampled certificate inspects.
pub const MIN_SAMPLED_SUBSETS: usize = 200;

/// A local frame sequence: column vectors spanning one subspace, with an
/// optional claimed span and optional declared frame-sequence bounds.
/// Bounds are always recomputed; declared values are only validated.
#[derive(Debug, Clone)]
pub struct LocalFrame {
    pub vectors: Mat,
    pub subspace_hint: Option<Subspace>,
    pub declared_bounds: Option<(f64, f64)>,
}

impl LocalFrame {
    pub fn new(vectors: Mat) -> Self {
        LocalFrame {
            vectors,
            subspace_hint: None,
            declared_bounds: None,
        }
    }

    pub fn with_hint(mut self, hint: Subspace) -> Self {
        self.subspace_hint = Some(hint);
        self
    }

    pub fn with_declared_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.declared_bounds = Some((lower, upper));
        self
    }
}

/// A validated local frame: its span and its frame-sequence bounds
/// (extreme eigenvalues of the local frame operator on the span).
#[derive(Debug, Clone)]
pub struct LocalSummary {
    pub span: Subspace,
    pub lower: f64,
    pub upper: f64,
}

pub fn local_summary(local: &LocalFrame) -> Result<LocalSummary> {
    let (lower, upper, span) = vector_frame_bounds_on_span(&local.vectors)?;
    if lower <= FRAME_TOL_REL * upper {
        return Err(Error::invalid(
            "local vectors are not a frame for their span",
        ));
    }
    if let Some((a, b)) = local.declared_bounds {
        if (lower - a).abs() > DECLARED_BOUND_TOL * a.abs().max(1.0)
            || (upper - b).abs() > DECLARED_BOUND_TOL * b.abs().max(1.0)
        {
            return Err(Error::invalid(format!(
                "declared local bounds ({a}, {b}) disagree with recomputed ({lower}, {upper})"
            )));
        }
    }
    if let Some(hint) = &local.subspace_hint {
        if hint.dim() != span.dim() || hint.distance(&span)? > SANDWICH_TOL {
            return Err(Error::invalid(
                "claimed local span does not match the span of the vectors",
            ));
        }
    }
    Ok(LocalSummary { span, lower, upper })
}

/// Bound arithmetic of the local-to-global transfer: with local bounds
/// `A <= B` and fusion bounds `C <= D`, the pooled system has bounds
/// within `[A C, B D]`, and conversely the fusion bounds lie within
/// `[C_g / B, D_g / A]`.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub local_lower: f64,
    pub local_upper: f64,
    pub fusion_lower: f64,
    pub fusion_upper: f64,
    pub global_lower: f64,
    pub global_upper: f64,
    pub flat_is_frame: bool,
    pub pooled_onb_is_frame: bool,
    pub fusion_is_frame: bool,
    pub predicates_agree: bool,
    pub certificates: Vec<Certificate>,
}

/// Result of assembling local frames into one global system.
#[derive(Debug, Clone)]
pub struct AssembledFrame {
    /// All weighted local vectors `v_i f_ij`, pooled as columns.
    pub flat: Mat,
    /// The fusion family of local spans with the given weights.
    pub family: WeightedFamily,
    pub report: TransferReport,
}

/// Pool weighted local frames into a global system and certify the
/// equivalence of the three frame predicates (pooled vectors / pooled
/// orthonormal bases / fusion family) together with both bound sandwiches.
pub fn assemble_global(locals: &[(LocalFrame, f64)]) -> Result<AssembledFrame> {
    if locals.is_empty() {
        return Err(Error::invalid("cannot assemble an empty list of locals"));
    }
    let n = locals[0].0.vectors.nrows();
    let mut summaries = Vec::with_capacity(locals.len());
    let mut flat_cols = 0usize;
    for (local, v) in locals {
        if local.vectors.nrows() != n {
            return Err(Error::invalid("locals live in different ambient spaces"));
        }
        if !(*v > 0.0) || !v.is_finite() {
            return Err(Error::invalid("weights must be positive finite numbers"));
        }
        flat_cols += local.vectors.ncols();
        summaries.push(local_summary(local)?);
    }

    let local_lower = summaries.iter().map(|s| s.lower).fold(f64::INFINITY, f64::min);
    let local_upper = summaries.iter().map(|s| s.upper).fold(0.0f64, f64::max);

    let mut flat = Mat::zeros(n, flat_cols);
    let mut at = 0;
    for (local, v) in locals {
        for j in 0..local.vectors.ncols() {
            flat.set_column(at, &(local.vectors.column(j) * re(*v)));
            at += 1;
        }
    }

    let items: Vec<(Subspace, f64)> = summaries
        .iter()
        .zip(locals)
        .map(|(s, (_, v))| (s.span.clone(), *v))
        .collect();
    let family = WeightedFamily::new(n, items)?;
    let bounds = family.frame_bounds(None)?;

    let (global_lower, global_upper) = vector_frame_bounds(&flat)?;
    let flat_is_frame = global_lower > FRAME_TOL_REL * global_upper;

    // replace each local by an orthonormal basis of its span, keep weights
    let (onb_lower, onb_upper) = vector_frame_bounds(&family.stacked_weighted_bases())?;
    let pooled_onb_is_frame = onb_lower > FRAME_TOL_REL * onb_upper;

    let certificates = vec![
        Certificate::less_equal(
            "transfer_lower: A*C <= C_g",
            local_lower * bounds.lower,
            global_lower,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "transfer_upper: D_g <= B*D",
            global_upper,
            local_upper * bounds.upper,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "transfer_fusion_lower: C_g/B <= C",
            global_lower / local_upper,
            bounds.lower,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "transfer_fusion_upper: D <= D_g/A",
            bounds.upper,
            global_upper / local_lower,
            SANDWICH_TOL,
        ),
    ];

    let predicates_agree =
        flat_is_frame == pooled_onb_is_frame && pooled_onb_is_frame == bounds.is_frame;

    Ok(AssembledFrame {
        flat,
        family,
        report: TransferReport {
            local_lower,
            local_upper,
            fusion_lower: bounds.lower,
            fusion_upper: bounds.upper,
            global_lower,
            global_upper,
            flat_is_frame,
            pooled_onb_is_frame,
            fusion_is_frame: bounds.is_frame,
            predicates_agree,
            certificates,
        },
    })
}

fn validate_partition(total: usize, partition: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; total];
    for cell in partition {
        for &j in cell {
            if j >= total {
                return Err(Error::invalid(format!(
                    "partition index {j} out of range for {total} vectors"
                )));
            }
            if seen[j] {
                return Err(Error::invalid(format!(
                    "partition cells overlap at index {j}"
                )));
            }
            seen[j] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::invalid(format!(
            "partition does not cover vector {missing}"
        )));
    }
    Ok(())
}

fn columns(vectors: &Mat, cell: &[usize]) -> Mat {
    let mut out = Mat::zeros(vectors.nrows(), cell.len());
    for (k, &j) in cell.iter().enumerate() {
        out.set_column(k, &vectors.column(j));
    }
    out
}

/// Spans of the cells of a partition of a frame, as a weighted family.
/// Any finite partition of a frame yields a frame of subspaces; the
/// numeric bounds come from [`WeightedFamily::frame_bounds`].
pub fn from_partition(
    vectors: &Mat,
    partition: &[Vec<usize>],
    weights: &[f64],
) -> Result<WeightedFamily> {
    if partition.len() != weights.len() {
        return Err(Error::invalid(format!(
            "{} cells but {} weights",
            partition.len(),
            weights.len()
        )));
    }
    if partition.is_empty() {
        return Err(Error::invalid("partition must have at least one cell"));
    }
    validate_partition(vectors.ncols(), partition)?;
    let (a, b) = vector_frame_bounds(vectors)?;
    if a <= FRAME_TOL_REL * b {
        return Err(Error::invalid(
            "input vectors are not a frame for the ambient space",
        ));
    }
    let items: Vec<(Subspace, f64)> = partition
        .iter()
        .zip(weights)
        .map(|(cell, &v)| Ok((Subspace::from_spanning(&columns(vectors, cell), None)?, v)))
        .collect::<Result<Vec<_>>>()?;
    WeightedFamily::new(vectors.nrows(), items)
}

/// Certificate for the partition lower bound: with input frame bounds
/// `A <= B`, the unweighted projector sum satisfies
/// `A/B <= lambda_min(sum_i P_i)` and `lambda_max <= |I|`.
#[derive(Debug, Clone)]
pub struct PartitionCertificate {
    pub input_lower: f64,
    pub input_upper: f64,
    pub proj_sum_min: f64,
    pub proj_sum_max: f64,
    pub certificates: Vec<Certificate>,
    pub pass: bool,
}

pub fn p17_certificate(vectors: &Mat, partition: &[Vec<usize>]) -> Result<PartitionCertificate> {
    let weights = vec![1.0; partition.len()];
    let family = from_partition(vectors, partition, &weights)?;
    let (input_lower, input_upper) = vector_frame_bounds(vectors)?;
    let s = family.frame_operator()?;
    let eig = linalg::herm_eig(&s)?;
    let proj_sum_min = eig.min().max(0.0);
    let proj_sum_max = eig.max();
    let certificates = vec![
        Certificate::less_equal(
            "partition_lower: A/B <= lambda_min(sum P_i)",
            input_lower / input_upper,
            proj_sum_min,
            1e-9,
        ),
        Certificate::less_equal(
            "partition_upper: lambda_max(sum P_i) <= |I|",
            proj_sum_max,
            partition.len() as f64,
            1e-9,
        ),
    ];
    let pass = certificates.iter().all(|c| c.pass);
    Ok(PartitionCertificate {
        input_lower,
        input_upper,
        proj_sum_min,
        proj_sum_max,
        certificates,
        pass,
    })
}

/// Per-subspace frames obtained by projecting the dual images of a frame
/// into each subspace, plus the pooled weighted union.
#[derive(Debug, Clone)]
pub struct Enriched {
    /// For each family index, the vectors `pi_{W_i} S^{-1} f_j` as columns.
    pub per_subspace_vectors: Vec<Mat>,
    /// All per-subspace vectors pooled, scaled by the family weights.
    pub flat: Mat,
    pub report: EnrichReport,
}

#[derive(Debug, Clone)]
pub struct EnrichReport {
    /// Frame-sequence bounds of each per-subspace system inside its
    /// subspace; `(0, 0)` for zero-dimensional subspaces.
    pub per_subspace_bounds: Vec<(f64, f64)>,
    pub min_lower: f64,
    pub max_upper: f64,
    /// Bounds of the pooled weighted union on the ambient space.
    pub pooled: (f64, f64),
    pub certificates: Vec<Certificate>,
}

/// Project the dual images `S^{-1} f_j` of a frame into every subspace of
/// a fusion frame. Each projected system is a frame for its subspace with
/// bounds independent of the index, and the pooled weighted union is a
/// frame for the whole space.
pub fn enrich(family: &WeightedFamily, vectors: &Mat) -> Result<Enriched> {
    if vectors.nrows() != family.ambient_dim() {
        return Err(Error::invalid(
            "vector system and family live in different ambient spaces",
        ));
    }
    let bounds = family.frame_bounds(None)?;
    if !bounds.is_frame {
        return Err(Error::invalid("enrichment requires a fusion frame"));
    }
    let (a_in, b_in) = vector_frame_bounds(vectors)?;
    if a_in <= FRAME_TOL_REL * b_in {
        return Err(Error::invalid(
            "enrichment requires the vectors to be a frame for the ambient space",
        ));
    }
    let s = family.frame_operator()?;
    let s_inv = linalg::herm_inverse(&s, FRAME_TOL_REL)?;
    let dual_vectors = &s_inv * vectors;

    let mut per_subspace_vectors = Vec::with_capacity(family.len());
    let mut per_subspace_bounds = Vec::with_capacity(family.len());
    let mut flat = Mat::zeros(family.ambient_dim(), family.len() * vectors.ncols());
    let mut at = 0;
    for (w, v) in family.items() {
        let projected = w.projector() * &dual_vectors;
        for j in 0..projected.ncols() {
            flat.set_column(at, &(projected.column(j) * re(*v)));
            at += 1;
        }
        if w.dim() == 0 {
            per_subspace_bounds.push((0.0, 0.0));
        } else {
            // restrict the local frame operator to the subspace
            let local_op = vector_frame_operator(&projected);
            let restricted = w.basis().adjoint() * local_op * w.basis();
            let eig = linalg::herm_eig(&restricted)?;
            per_subspace_bounds.push((eig.min().max(0.0), eig.max()));
        }
        per_subspace_vectors.push(projected);
    }

    let nonzero: Vec<&(f64, f64)> = family
        .items()
        .iter()
        .zip(&per_subspace_bounds)
        .filter(|((w, _), _)| w.dim() > 0)
        .map(|(_, b)| b)
        .collect();
    let min_lower = nonzero.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let max_upper = nonzero.iter().map(|b| b.1).fold(0.0f64, f64::max);
    let pooled = vector_frame_bounds(&flat)?;

    // one-sided envelope: the dual images form a frame with bounds within
    // [A/D^2, B/C^2], and projections onto a subspace keep those bounds
    let lower_envelope = a_in / (bounds.upper * bounds.upper);
    let upper_envelope = b_in / (bounds.lower * bounds.lower);
    let certificates = vec![
        Certificate::less_equal(
            "enrich_lower_envelope: A/D^2 <= min_i A_i",
            lower_envelope,
            min_lower,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "enrich_upper_envelope: max_i B_i <= B/C^2",
            max_upper,
            upper_envelope,
            SANDWICH_TOL,
        ),
        Certificate::less_equal(
            "enrich_pooled_is_frame: tol < C_g",
            FRAME_TOL_REL * pooled.1,
            pooled.0,
            0.0,
        ),
    ];

    Ok(Enriched {
        per_subspace_vectors,
        flat,
        report: EnrichReport {
            per_subspace_bounds,
            min_lower,
            max_upper,
            pooled,
            certificates,
        },
    })
}

/// Bounds of the subfamily `{(W_j, v_j)}_{j in J}` computed for its own
/// closed span: the frame operator of the subfamily is conjugated into an
/// orthonormal basis of the span and its extreme eigenvalues are taken
/// there.
pub fn subfamily_span_bounds(family: &WeightedFamily, indices: &[usize]) -> Result<(f64, f64)> {
    let sub = family.subfamily(indices)?;
    if sub.is_empty() {
        return Err(Error::invalid("subfamily must be nonempty"));
    }
    let span = sub.span()?;
    if span.dim() == 0 {
        return Err(Error::invalid("subfamily spans only the zero space"));
    }
    let s = sub.frame_operator()?;
    let restricted = span.basis().adjoint() * s * span.basis();
    let eig = linalg::herm_eig(&restricted)?;
    Ok((eig.min().max(0.0), eig.max()))
}

/// Subset selection strategy for the Riesz-family certificate.
#[derive(Debug, Clone, Copy)]
pub enum SubsetMode {
    /// All nonempty subsets; family size limited to [`EXHAUSTIVE_LIMIT`].
    Exhaustive,
    /// At least [`MIN_SAMPLED_SUBSETS`] random nonempty subsets drawn from
    /// the recorded seed.
    Sampled { count: usize, seed: u64 },
}

/// Worst-case subfamily bounds: a family is a Riesz frame of subspaces
/// when every subfamily is a frame for its span with uniform bounds.
#[derive(Debug, Clone)]
pub struct RieszFamilyReport {
    pub min_lower: f64,
    pub max_upper: f64,
    pub worst_lower_subset: Vec<usize>,
    pub worst_upper_subset: Vec<usize>,
    pub subsets_checked: usize,
    /// Seed used for sampling, recorded for reproducibility.
    pub seed: Option<u64>,
    pub required_lower: Option<f64>,
    pub required_upper: Option<f64>,
    /// Whether the required bounds hold; `None` when none were requested.
    pub pass: Option<bool>,
}

pub fn riesz_family_certificate(
    family: &WeightedFamily,
    mode: SubsetMode,
    required_lower: Option<f64>,
    required_upper: Option<f64>,
) -> Result<RieszFamilyReport> {
    if family.is_empty() {
        return Err(Error::invalid(
            "Riesz certificate of an empty family is undefined",
        ));
    }
    let k = family.len();
    let mut min_lower = f64::INFINITY;
    let mut max_upper = 0.0f64;
    let mut worst_lower_subset = Vec::new();
    let mut worst_upper_subset = Vec::new();
    let mut subsets_checked = 0usize;
    let mut seed_used = None;

    let consider = |indices: &[usize],
                        min_lower: &mut f64,
                        max_upper: &mut f64,
                        worst_lower: &mut Vec<usize>,
                        worst_upper: &mut Vec<usize>|
     -> Result<()> {
        let (lo, hi) = subfamily_span_bounds(family, indices)?;
        if lo < *min_lower {
            *min_lower = lo;
            *worst_lower = indices.to_vec();
        }
        if hi > *max_upper {
            *max_upper = hi;
            *worst_upper = indices.to_vec();
        }
        Ok(())
    };

    match mode {
        SubsetMode::Exhaustive => {
            if k > EXHAUSTIVE_LIMIT {
                return Err(Error::invalid(format!(
                    "exhaustive mode supports at most {EXHAUSTIVE_LIMIT} subspaces, got {k}"
                )));
            }
            for mask in 1u32..(1u32 << k) {
                let indices: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
                consider(
                    &indices,
                    &mut min_lower,
                    &mut max_upper,
                    &mut worst_lower_subset,
                    &mut worst_upper_subset,
                )?;
                subsets_checked += 1;
            }
        }
        SubsetMode::Sampled { count, seed } => {
            seed_used = Some(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let target = count.max(MIN_SAMPLED_SUBSETS);
            while subsets_checked < target {
                let indices: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.5)).collect();
                if indices.is_empty() {
                    continue;
                }
                consider(
                    &indices,
                    &mut min_lower,
                    &mut max_upper,
                    &mut worst_lower_subset,
                    &mut worst_upper_subset,
                )?;
                subsets_checked += 1;
            }
        }
    }

    let pass = match (required_lower, required_upper) {
        (None, None) => None,
        (lo, hi) => {
            let lower_ok = lo.map_or(true, |c| min_lower >= c - 1e-9);
            let upper_ok = hi.map_or(true, |d| max_upper <= d + 1e-9);
            Some(lower_ok && upper_ok)
        }
    };

    Ok(RieszFamilyReport {
        min_lower,
        max_upper,
        worst_lower_subset,
        worst_upper_subset,
        subsets_checked,
        seed: seed_used,
        required_lower,
        required_upper,
        pass,
    })
}
