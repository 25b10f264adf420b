//! Certificates and the report document emitted by the tool.
//!
//! Every inequality the library claims is recorded as a [`Certificate`]
//! with explicit left- and right-hand sides, so downstream users can
//! recompute any bound instead of trusting a flag.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fusion::WeightedFamily;
use crate::structure;

/// A named inequality `lhs <= rhs` with `slack = rhs - lhs`; it passes
/// when the slack is at least `-tol`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl Certificate {
    pub fn less_equal(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        Certificate {
            name: name.into(),
            lhs,
            rhs,
            slack,
            pass: slack >= -tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsSection {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FlagsSection {
    pub frame: bool,
    pub tight: bool,
    pub parseval: bool,
    pub uniform: bool,
    pub onb: bool,
    pub complete: bool,
    pub minimal: bool,
    pub riesz_decomposition: bool,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    /// Indices of input subspaces whose bases had to be re-orthonormalized
    /// on load.
    pub reorthonormalized_subspaces: Vec<usize>,
}

impl Provenance {
    pub fn new(seed: u64) -> Self {
        Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            tolerances: BTreeMap::new(),
            reorthonormalized_subspaces: Vec::new(),
        }
    }

    pub fn with_tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }
}

/// The report document: optimal bounds, the full spectrum of the frame
/// operator, classification flags, certificates, and provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub bounds: BoundsSection,
    pub eigenvalues: Vec<f64>,
    pub flags: FlagsSection,
    pub certificates: Vec<Certificate>,
    pub provenance: Provenance,
}

/// Bounds, spectrum, and all classification flags of a family in one pass.
pub fn analyze_family(family: &WeightedFamily, frame_tol: Option<f64>) -> Result<ReportFile> {
    let bounds = family.frame_bounds(frame_tol)?;
    let report = structure::structure_report(family, frame_tol)?;
    Ok(ReportFile {
        bounds: BoundsSection {
            lower: bounds.lower,
            upper: bounds.upper,
        },
        eigenvalues: bounds.eigenvalues,
        flags: FlagsSection {
            frame: bounds.is_frame,
            tight: bounds.is_tight,
            parseval: bounds.is_parseval,
            uniform: bounds.is_uniform,
            onb: bounds.is_onb,
            complete: report.complete,
            minimal: report.minimal,
            riesz_decomposition: report.riesz_decomposition,
            exact: report.exact,
        },
        certificates: Vec::new(),
        provenance: Provenance::new(0),
    })
}

/// Human-readable rendering for standard output.
pub fn render_text(report: &ReportFile) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "bounds: C = {:.17e}  D = {:.17e}",
        report.bounds.lower, report.bounds.upper
    );
    let eigs: Vec<String> = report
        .eigenvalues
        .iter()
        .map(|l| format!("{l:.12e}"))
        .collect();
    let _ = writeln!(out, "eigenvalues: [{}]", eigs.join(", "));
    let f = &report.flags;
    let _ = writeln!(
        out,
        "flags: frame={} tight={} parseval={} uniform={} onb={}",
        f.frame, f.tight, f.parseval, f.uniform, f.onb
    );
    let _ = writeln!(
        out,
        "       complete={} minimal={} riesz_decomposition={} exact={}",
        f.complete, f.minimal, f.riesz_decomposition, f.exact
    );
    if !report.certificates.is_empty() {
        let _ = writeln!(out, "certificates:");
        for c in &report.certificates {
            let _ = writeln!(
                out,
                "  [{}] {}: lhs = {:.6e}  rhs = {:.6e}  slack = {:.3e}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.lhs,
                c.rhs,
                c.slack
            );
        }
    }
    let p = &report.provenance;
    let _ = writeln!(
        out,
        "provenance: version={} seed={} tolerances={:?}",
        p.tool_version, p.seed, p.tolerances
    );
    if !p.reorthonormalized_subspaces.is_empty() {
        let _ = writeln!(
            out,
            "note: subspace bases {:?} were re-orthonormalized on load",
            p.reorthonormalized_subspaces
        );
    }
    out
}
