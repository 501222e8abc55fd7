//! Radon-Nikodym derivatives between measures on a finite space.
//!
//! On a finite space with power-set sigma-algebra the derivative of `P` with
//! respect to `Q` is the pointwise weight ratio wherever `Q` charges a point.
//! At `Q`-null points any value satisfies the defining identity, so this
//! module fixes the representative to exactly `0.0` there.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{ensure_same_space, SampleSpace, SignedMeasure};
use crate::subsets::SubsetFamily;
use crate::tolerance;

/// Derivative values paired with the reference measure they are defined
/// against.
#[derive(Debug, Clone, PartialEq)]
pub struct RndFunction {
    values: Vec<f64>,
    reference: SignedMeasure,
}

impl RndFunction {
    pub fn space(&self) -> &Arc<SampleSpace> {
        self.reference.space()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn reference(&self) -> &SignedMeasure {
        &self.reference
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Derivative `dP/dQ`.
///
/// Fails with [`Error::NotAbsolutelyContinuous`] naming the first point `P`
/// charges while `Q` does not.
pub fn rnd(p: &SignedMeasure, q: &SignedMeasure) -> Result<RndFunction> {
    p.ensure_absolutely_continuous(q, "P", "Q")?;
    let values = p
        .weights()
        .iter()
        .zip(q.weights())
        .map(|(&pw, &qw)| if qw == 0.0 { 0.0 } else { pw / qw })
        .collect();
    Ok(RndFunction {
        values,
        reference: q.clone(),
    })
}

/// Outcome of comparing two functions off a null set of a reference measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsEqualityVerdict {
    pub equal: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub witness: Option<String>,
}

fn compare(
    f: &[f64],
    g: &[f64],
    reference: &SignedMeasure,
    tol: f64,
    deviation: impl Fn(f64, f64) -> f64,
) -> Result<AsEqualityVerdict> {
    for len in [f.len(), g.len()] {
        if len != reference.len() {
            return Err(Error::LengthMismatch {
                expected: reference.len(),
                found: len,
            });
        }
    }
    let mut max_deviation = 0.0_f64;
    let mut witness = None;
    for i in reference.support() {
        let d = deviation(f[i], g[i]);
        // NaN deviations must register as failures
        if d > max_deviation || d.is_nan() {
            max_deviation = if d.is_nan() { f64::INFINITY } else { d };
            witness = Some(i);
        }
    }
    Ok(AsEqualityVerdict {
        equal: max_deviation <= tol,
        max_deviation,
        tolerance: tol,
        witness: witness.map(|i| reference.space().label(i).to_owned()),
    })
}

/// Almost-sure equality: `max |f - g|` over points the reference charges.
pub fn as_equal(
    f: &[f64],
    g: &[f64],
    reference: &SignedMeasure,
    tol: f64,
) -> Result<AsEqualityVerdict> {
    compare(f, g, reference, tol, |a, b| (a - b).abs())
}

/// Like [`as_equal`] but with deviations scaled by `max(1, |f|, |g|)`.
pub fn as_equal_scaled(
    f: &[f64],
    g: &[f64],
    reference: &SignedMeasure,
    tol: f64,
) -> Result<AsEqualityVerdict> {
    compare(f, g, reference, tol, tolerance::scaled_deviation)
}

/// Worst subset found while checking a set identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetCheck {
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub subsets_checked: usize,
    /// Labels of the subset with the largest deviation.
    pub witness: Option<Vec<String>>,
}

impl SubsetCheck {
    pub fn witness_string(&self) -> Option<String> {
        self.witness
            .as_ref()
            .map(|w| format!("{{{}}}", w.join(",")))
    }
}

/// Runs `side(members) -> (lhs, rhs, magnitude)` over a subset family and
/// records the worst relative deviation.
pub(crate) fn check_subsets(
    space: &SampleSpace,
    family: SubsetFamily,
    tol: f64,
    mut side: impl FnMut(&[bool]) -> (f64, f64, f64),
) -> SubsetCheck {
    let mut max_deviation = 0.0_f64;
    let mut witness: Option<Vec<bool>> = None;
    let mut checked = 0;
    family.for_each(|members| {
        checked += 1;
        let (lhs, rhs, magnitude) = side(members);
        let mut d = tolerance::sum_deviation(lhs, rhs, magnitude);
        if d.is_nan() {
            d = f64::INFINITY;
        }
        if d > max_deviation || (witness.is_none() && d > tol) {
            max_deviation = d;
            witness = Some(members.to_vec());
        }
    });
    SubsetCheck {
        max_deviation,
        tolerance: tol,
        pass: max_deviation <= tol,
        subsets_checked: checked,
        witness: witness.map(|members| {
            members
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| space.label(i).to_owned())
                .collect()
        }),
    }
}

/// Checks `P(A) = sum over A of g * Q` for every subset `A` in `family`.
///
/// `g` is any candidate derivative, not necessarily the output of [`rnd`];
/// this is the test used for the uniqueness clause.
pub fn verify_rn_identity(
    p: &SignedMeasure,
    q: &SignedMeasure,
    g: &[f64],
    family: SubsetFamily,
    tol: f64,
) -> Result<SubsetCheck> {
    ensure_same_space(p.space(), q.space())?;
    if g.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: g.len(),
        });
    }
    if family.points() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: family.points(),
        });
    }
    let pw = p.weights();
    let qw = q.weights();
    Ok(check_subsets(p.space(), family, tol, |members| {
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        let mut magnitude = 0.0;
        for (i, _) in members.iter().enumerate().filter(|(_, &m)| m) {
            lhs += pw[i];
            if qw[i] != 0.0 {
                let term = g[i] * qw[i];
                rhs += term;
                magnitude += term.abs();
            }
            magnitude += pw[i].abs();
        }
        (lhs, rhs, magnitude)
    }))
}

/// First `K` terms of a convergent sequence of measures plus its declared
/// limit.
#[derive(Debug, Clone)]
pub struct MeasureSequence {
    terms: Vec<SignedMeasure>,
    limit: SignedMeasure,
}

impl MeasureSequence {
    pub fn new(terms: Vec<SignedMeasure>, limit: SignedMeasure) -> Result<Self> {
        for t in &terms {
            ensure_same_space(t.space(), limit.space())?;
        }
        Ok(Self { terms, limit })
    }

    pub fn terms(&self) -> &[SignedMeasure] {
        &self.terms
    }

    pub fn limit(&self) -> &SignedMeasure {
        &self.limit
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}
