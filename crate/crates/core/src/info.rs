//! KL divergence, mutual information and lautum information, in nats.
//!
//! Terms at points the integrating measure does not charge are skipped, which
//! is the `0 ln 0 = 0` convention.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::kernel::ConditionalKernel;
use crate::measure::{ensure_same_space, ProbabilityMeasure, SignedMeasure};
use crate::report::{CheckReport, TheoremId};
use crate::rnd::rnd;
use crate::tolerance;

/// An information quantity and the contribution of each input point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfoResult {
    pub value: f64,
    pub decomposition: Vec<f64>,
}

/// `sum_{P(x) > 0} P(x) ln(P(x) / Q(x))`; `Q` may be any nonnegative measure.
fn relative_entropy(
    p: &SignedMeasure,
    q: &SignedMeasure,
    p_name: &str,
    q_name: &str,
) -> Result<f64> {
    p.ensure_absolutely_continuous(q, p_name, q_name)?;
    let g = rnd(p, q)?;
    Ok(p.support().map(|i| p.weight(i) * g.value(i).ln()).sum())
}

/// `D(P || Q)` in nats.
pub fn kl_divergence(p: &ProbabilityMeasure, q: &ProbabilityMeasure) -> Result<f64> {
    relative_entropy(p, q, "P", "Q")
}

/// `I = sum_x P_X(x) D(P_{Y|X=x} || P_Y)`.
pub fn mutual_information(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
) -> Result<InfoResult> {
    let py = kernel.output_marginal(px)?;
    let mut decomposition = Vec::with_capacity(px.len());
    for (x, row) in kernel.rows().iter().enumerate() {
        let label = format!("P_{{Y|X={}}}", px.space().label(x));
        let d = relative_entropy(row, &py, &label, "P_Y")?;
        decomposition.push(px.weight(x) * d);
    }
    Ok(InfoResult {
        value: decomposition.iter().sum(),
        decomposition,
    })
}

/// `L = sum_x P_X(x) D(P_Y || P_{Y|X=x})`.
pub fn lautum_information(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
) -> Result<InfoResult> {
    let py = kernel.output_marginal(px)?;
    let mut decomposition = Vec::with_capacity(px.len());
    for (x, row) in kernel.rows().iter().enumerate() {
        let label = format!("P_{{Y|X={}}}", px.space().label(x));
        let d = relative_entropy(&py, row, "P_Y", &label)?;
        decomposition.push(px.weight(x) * d);
    }
    Ok(InfoResult {
        value: decomposition.iter().sum(),
        decomposition,
    })
}

/// Right-hand side of the `I + L` identity for a reference measure `Q`:
///
/// `sum_x P_X(x) [ E_{P_{Y|X=x}} ln dP_{Y|X=x}/dQ - E_{P_Y} ln dP_{Y|X=x}/dQ ]`
///
/// Requires `P_Y << P_{Y|X=x} << Q << P_Y` for every x.
pub fn identity_rhs(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
    q: &SignedMeasure,
) -> Result<f64> {
    ensure_same_space(kernel.output_space(), q.space())?;
    if let Some(i) = q.weights().iter().position(|&w| w < 0.0) {
        return Err(Error::Domain(format!(
            "reference measure Q has negative weight at {}",
            q.space().label(i)
        )));
    }
    let py = kernel.output_marginal(px)?;
    let mut first = 0.0;
    let mut second = 0.0;
    for (x, row) in kernel.rows().iter().enumerate() {
        let row_name = format!("P_{{Y|X={}}}", px.space().label(x));
        py.ensure_absolutely_continuous(
            row,
            "P_Y",
            &format!("{row_name} (link P_Y << {row_name})"),
        )?;
        row.ensure_absolutely_continuous(q, &row_name, &format!("Q (link {row_name} << Q)"))?;
        q.ensure_absolutely_continuous(&py, "Q", "P_Y (link Q << P_Y)")?;
        let g = rnd(row, q)?;
        let under_row: f64 = row.support().map(|y| row.weight(y) * g.value(y).ln()).sum();
        let under_py: f64 = py.support().map(|y| py.weight(y) * g.value(y).ln()).sum();
        first += px.weight(x) * under_row;
        second += px.weight(x) * under_py;
    }
    Ok(first - second)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhsEntry {
    #[serde(rename = "Q")]
    pub q: String,
    pub value: f64,
}

/// `I + L` against `identity_rhs` for several reference measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IlIdentityReport {
    #[serde(rename = "I_nats")]
    pub mutual: f64,
    #[serde(rename = "L_nats")]
    pub lautum: f64,
    pub identity_rhs: Vec<RhsEntry>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IlIdentityReport {
    pub fn sum(&self) -> f64 {
        self.mutual + self.lautum
    }

    pub fn to_check_report(
        &self,
        kernel: &ConditionalKernel,
        px: &ProbabilityMeasure,
    ) -> CheckReport {
        let witness = self
            .identity_rhs
            .iter()
            .find(|e| (e.value - self.sum()).abs() > self.tolerance)
            .map(|e| e.q.clone());
        let mut report = CheckReport::new(
            TheoremId::IlIdentity,
            json!({
                "kernel": kernel.rows_matrix(),
                "P_X": px.weights(),
                "I_nats": self.mutual,
                "L_nats": self.lautum,
                "identity_rhs": self.identity_rhs,
            }),
            self.max_deviation,
            self.tolerance,
            witness,
        );
        report.pass = self.pass;
        report
    }
}

/// `|I + L - identity_rhs(Q)| <= 1e-9` for every named `Q`.
pub fn check_il_identity(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
    references: &[(String, SignedMeasure)],
) -> Result<IlIdentityReport> {
    let mutual = mutual_information(kernel, px)?.value;
    let lautum = lautum_information(kernel, px)?.value;
    let sum = mutual + lautum;
    let mut entries = Vec::with_capacity(references.len());
    let mut max_deviation = 0.0_f64;
    for (name, q) in references {
        let value = identity_rhs(kernel, px, q)?;
        let d = (value - sum).abs();
        max_deviation = if d.is_nan() {
            f64::INFINITY
        } else {
            max_deviation.max(d)
        };
        entries.push(RhsEntry {
            q: name.clone(),
            value,
        });
    }
    Ok(IlIdentityReport {
        mutual,
        lautum,
        identity_rhs: entries,
        max_deviation,
        tolerance: tolerance::INFO_IDENTITY,
        pass: max_deviation <= tolerance::INFO_IDENTITY,
    })
}
