//! Finite sample spaces and the measures that live on them.
//!
//! The sigma-algebra is always the power set, so a measure is fully described
//! by the weight it gives each singleton and the measure of a set is the sum
//! of the weights of its points.

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of points a dense weight vector may hold.
pub const MAX_POINTS: usize = 1 << 20;

/// Accepted deviation of an input probability vector's total from one before
/// renormalization.
pub const PROBABILITY_INPUT_SLACK: f64 = 1e-9;

/// An ordered finite set of uniquely labelled points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct SampleSpace {
    labels: Vec<String>,
}

impl SampleSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace(
                "a sample space needs at least one point".into(),
            ));
        }
        if labels.len() > MAX_POINTS {
            return Err(Error::Capacity {
                requested: labels.len(),
                max: MAX_POINTS,
            });
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate label {label:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// Points labelled `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Cartesian product in row-major order; labels are `"(a,b)"`.
    pub fn product(&self, other: &SampleSpace) -> Result<Self> {
        let requested = self.len().saturating_mul(other.len());
        if requested > MAX_POINTS {
            return Err(Error::Capacity {
                requested,
                max: MAX_POINTS,
            });
        }
        let mut labels = Vec::with_capacity(requested);
        for a in &self.labels {
            for b in &other.labels {
                labels.push(format!("({a},{b})"));
            }
        }
        Ok(Self { labels })
    }
}

impl TryFrom<Vec<String>> for SampleSpace {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        SampleSpace::new(labels)
    }
}

impl From<SampleSpace> for Vec<String> {
    fn from(space: SampleSpace) -> Self {
        space.labels
    }
}

pub(crate) fn same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

pub(crate) fn ensure_same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!(
            "{} points vs {} points",
            a.len(),
            b.len()
        )))
    }
}

/// A subset of a sample space, one membership flag per point.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMask {
    space: Arc<SampleSpace>,
    members: Vec<bool>,
}

impl SubsetMask {
    pub fn new(space: Arc<SampleSpace>, members: Vec<bool>) -> Result<Self> {
        if members.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: members.len(),
            });
        }
        Ok(Self { space, members })
    }

    pub fn full(space: Arc<SampleSpace>) -> Self {
        let members = vec![true; space.len()];
        Self { space, members }
    }

    pub fn empty(space: Arc<SampleSpace>) -> Self {
        let members = vec![false; space.len()];
        Self { space, members }
    }

    pub fn from_indices(space: Arc<SampleSpace>, indices: &[usize]) -> Result<Self> {
        let mut members = vec![false; space.len()];
        for &i in indices {
            if i >= members.len() {
                return Err(Error::Domain(format!(
                    "index {i} outside a space of {} points",
                    members.len()
                )));
            }
            members[i] = true;
        }
        Ok(Self { space, members })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members[index]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }
}

/// Real weight per point; negative weights are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    space: Arc<SampleSpace>,
    weights: Vec<f64>,
}

impl SignedMeasure {
    pub fn new(space: Arc<SampleSpace>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: weights.len(),
            });
        }
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("point {}", space.label(i)),
                value: w,
            });
        }
        Ok(Self { space, weights })
    }

    /// Measure on an indexed space `0..weights.len()`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let space = Arc::new(SampleSpace::indexed(weights.len())?);
        Self::new(space, weights)
    }

    /// Counting measure: weight one on every point.
    pub fn counting(space: Arc<SampleSpace>) -> Self {
        let weights = vec![1.0; space.len()];
        Self { space, weights }
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// Indices of points carrying nonzero weight.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter_map(|(i, &w)| (w != 0.0).then_some(i))
    }

    pub fn measure_of(&self, set: &SubsetMask) -> Result<f64> {
        ensure_same_space(&self.space, &set.space)?;
        Ok(set.indices().map(|i| self.weights[i]).sum())
    }

    /// `sum over x in set of f(x) * weight(x)`.
    ///
    /// Points outside the set, or carrying zero weight, never evaluate `f`,
    /// so a non-finite value there is harmless.
    pub fn integrate(&self, f: &[f64], set: &SubsetMask) -> Result<f64> {
        ensure_same_space(&self.space, &set.space)?;
        if f.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: f.len(),
            });
        }
        let mut total = 0.0;
        for i in set.indices() {
            let w = self.weights[i];
            if w == 0.0 {
                continue;
            }
            if !f[i].is_finite() {
                return Err(Error::Domain(format!(
                    "integrand is {} at charged point {}",
                    f[i],
                    self.space.label(i)
                )));
            }
            total += f[i] * w;
        }
        Ok(total)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFinite {
                location: "scale factor".into(),
                value: c,
            });
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            weights: self.weights.iter().map(|w| w * c).collect(),
        })
    }

    /// First point that `self` charges but `reference` leaves null, if any.
    pub fn absolute_continuity_witness(&self, reference: &SignedMeasure) -> Result<Option<usize>> {
        ensure_same_space(&self.space, &reference.space)?;
        Ok(self
            .weights
            .iter()
            .zip(&reference.weights)
            .position(|(&p, &q)| q == 0.0 && p != 0.0))
    }

    /// `self << reference`, tested pointwise with exact zero comparison.
    /// Measures on different spaces are never comparable and yield `false`.
    pub fn is_absolutely_continuous(&self, reference: &SignedMeasure) -> bool {
        matches!(self.absolute_continuity_witness(reference), Ok(None))
    }

    pub(crate) fn ensure_absolutely_continuous(
        &self,
        reference: &SignedMeasure,
        name: &str,
        reference_name: &str,
    ) -> Result<()> {
        match self.absolute_continuity_witness(reference)? {
            None => Ok(()),
            Some(i) => Err(Error::not_ac(name, reference_name, self.space.label(i))),
        }
    }

    pub fn product(&self, other: &SignedMeasure) -> Result<Self> {
        let space = Arc::new(self.space.product(&other.space)?);
        let mut weights = Vec::with_capacity(space.len());
        for &a in &self.weights {
            for &b in &other.weights {
                weights.push(a * b);
            }
        }
        Ok(Self { space, weights })
    }
}

/// Pointwise `sum_t coeffs[t] * measures[t]`.
pub fn mix(coeffs: &[f64], measures: &[&SignedMeasure]) -> Result<SignedMeasure> {
    if coeffs.len() != measures.len() {
        return Err(Error::LengthMismatch {
            expected: measures.len(),
            found: coeffs.len(),
        });
    }
    let first = measures
        .first()
        .ok_or_else(|| Error::Domain("a mixture needs at least one measure".into()))?;
    let mut weights = vec![0.0; first.len()];
    for (&c, m) in coeffs.iter().zip(measures) {
        ensure_same_space(&first.space, &m.space)?;
        if !c.is_finite() {
            return Err(Error::NonFinite {
                location: "mixture coefficient".into(),
                value: c,
            });
        }
        for (acc, w) in weights.iter_mut().zip(&m.weights) {
            *acc += c * w;
        }
    }
    SignedMeasure::new(Arc::clone(&first.space), weights)
}

impl fmt::Display for SignedMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

/// Nonnegative measure of unit total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMeasure(SignedMeasure);

impl ProbabilityMeasure {
    /// Accepts nonnegative weights whose total is within
    /// [`PROBABILITY_INPUT_SLACK`] of one, then renormalizes.
    pub fn new(space: Arc<SampleSpace>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_INPUT_SLACK {
            return Err(Error::InvalidProbability(format!(
                "total mass {total} is not within {PROBABILITY_INPUT_SLACK} of 1"
            )));
        }
        Self::normalized(space, weights)
    }

    /// Divides nonnegative weights by their (positive) total.
    pub fn normalized(space: Arc<SampleSpace>, weights: Vec<f64>) -> Result<Self> {
        let measure = SignedMeasure::new(space, weights)?;
        Self::normalize(measure)
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let space = Arc::new(SampleSpace::indexed(weights.len())?);
        Self::new(space, weights)
    }

    /// Normalizes an arbitrary nonnegative measure with positive mass.
    pub fn normalize(measure: SignedMeasure) -> Result<Self> {
        if let Some((i, &w)) = measure.weights.iter().enumerate().find(|(_, w)| **w < 0.0) {
            return Err(Error::InvalidProbability(format!(
                "negative weight {w} at point {}",
                measure.space.label(i)
            )));
        }
        let total = measure.total_mass();
        if total <= 0.0 {
            return Err(Error::InvalidProbability("total mass is zero".into()));
        }
        if total == 1.0 {
            return Ok(Self(measure));
        }
        let weights = measure.weights.iter().map(|w| w / total).collect();
        Ok(Self(SignedMeasure {
            space: measure.space,
            weights,
        }))
    }

    /// Uniform measure on a space.
    pub fn uniform(space: Arc<SampleSpace>) -> Self {
        let n = space.len() as f64;
        let weights = vec![1.0 / n; space.len()];
        Self(SignedMeasure { space, weights })
    }

    /// Unit mass at one point.
    pub fn point_mass(space: Arc<SampleSpace>, index: usize) -> Result<Self> {
        if index >= space.len() {
            return Err(Error::Domain(format!(
                "index {index} outside a space of {} points",
                space.len()
            )));
        }
        let mut weights = vec![0.0; space.len()];
        weights[index] = 1.0;
        Ok(Self(SignedMeasure { space, weights }))
    }

    pub fn as_signed(&self) -> &SignedMeasure {
        &self.0
    }

    pub fn into_signed(self) -> SignedMeasure {
        self.0
    }
}

impl Deref for ProbabilityMeasure {
    type Target = SignedMeasure;

    fn deref(&self) -> &SignedMeasure {
        &self.0
    }
}

impl AsRef<SignedMeasure> for ProbabilityMeasure {
    fn as_ref(&self) -> &SignedMeasure {
        &self.0
    }
}

impl TryFrom<SignedMeasure> for ProbabilityMeasure {
    type Error = Error;

    fn try_from(measure: SignedMeasure) -> Result<Self> {
        let total = measure.total_mass();
        if (total - 1.0).abs() > PROBABILITY_INPUT_SLACK {
            return Err(Error::InvalidProbability(format!(
                "total mass {total} is not within {PROBABILITY_INPUT_SLACK} of 1"
            )));
        }
        Self::normalize(measure)
    }
}
