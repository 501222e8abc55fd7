//! JSON file formats for measures, kernels, joints and densities.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::density::{DensityKind, DensityMeasure};
use crate::error::{Error, Result};
use crate::kernel::{ConditionalKernel, JointMeasure, Orientation, OrientationTag, OrientedJoint};
use crate::measure::{ProbabilityMeasure, SampleSpace, SignedMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Signed,
    Probability,
}

/// `{"space": [...], "weights": [...], "kind": "signed" | "probability"}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub space: Vec<String>,
    pub weights: Vec<f64>,
    pub kind: MeasureKind,
}

impl MeasureFile {
    pub fn signed(m: &SignedMeasure) -> Self {
        Self {
            space: m.space().labels().to_vec(),
            weights: m.weights().to_vec(),
            kind: MeasureKind::Signed,
        }
    }

    pub fn probability(m: &ProbabilityMeasure) -> Self {
        Self {
            kind: MeasureKind::Probability,
            ..Self::signed(m)
        }
    }

    /// Validates and returns the measure. Probability files must be
    /// nonnegative with total within `1e-9` of one and come back renormalized.
    pub fn to_measure(&self) -> Result<SignedMeasure> {
        let space = Arc::new(SampleSpace::new(self.space.iter().cloned())?);
        match self.kind {
            MeasureKind::Signed => SignedMeasure::new(space, self.weights.clone()),
            MeasureKind::Probability => {
                Ok(ProbabilityMeasure::new(space, self.weights.clone())?.into_signed())
            }
        }
    }

    pub fn to_probability(&self) -> Result<ProbabilityMeasure> {
        let space = Arc::new(SampleSpace::new(self.space.iter().cloned())?);
        ProbabilityMeasure::new(space, self.weights.clone())
    }
}

/// `{"x_space": [...], "y_space": [...], "rows": [[...], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    pub x_space: Vec<String>,
    pub y_space: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl KernelFile {
    pub fn from_kernel(k: &ConditionalKernel) -> Self {
        Self {
            x_space: k.input_space().labels().to_vec(),
            y_space: k.output_space().labels().to_vec(),
            rows: k.rows_matrix(),
        }
    }

    pub fn to_kernel(&self) -> Result<ConditionalKernel> {
        let x = Arc::new(SampleSpace::new(self.x_space.iter().cloned())?);
        let y = Arc::new(SampleSpace::new(self.y_space.iter().cloned())?);
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != y.len() {
                return Err(Error::Parse(format!(
                    "kernel row {i} has {} entries, y_space has {}",
                    row.len(),
                    y.len()
                )));
            }
        }
        ConditionalKernel::new(x, y, self.rows.clone())
    }
}

/// Kernel format plus `"orientation"`; `weights` is a matrix whose rows run
/// over the first coordinate of the orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointFile {
    pub x_space: Vec<String>,
    pub y_space: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub orientation: OrientationTag,
}

impl JointFile {
    pub fn from_joint<O: Orientation>(j: &JointMeasure<O>) -> Self {
        let n2 = j.second_space().len();
        Self {
            x_space: j.x_space().labels().to_vec(),
            y_space: j.y_space().labels().to_vec(),
            weights: j.weights().chunks(n2).map(<[f64]>::to_vec).collect(),
            orientation: O::TAG,
        }
    }

    pub fn to_joint(&self) -> Result<OrientedJoint> {
        let x = Arc::new(SampleSpace::new(self.x_space.iter().cloned())?);
        let y = Arc::new(SampleSpace::new(self.y_space.iter().cloned())?);
        let (n1, n2) = match self.orientation {
            OrientationTag::Xy => (x.len(), y.len()),
            OrientationTag::Yx => (y.len(), x.len()),
        };
        if self.weights.len() != n1 || self.weights.iter().any(|r| r.len() != n2) {
            return Err(Error::Parse(format!(
                "{} joint weights must be a {n1} x {n2} matrix",
                self.orientation
            )));
        }
        let flat: Vec<f64> = self.weights.iter().flatten().copied().collect();
        Ok(match self.orientation {
            OrientationTag::Xy => OrientedJoint::Xy(JointMeasure::new(x, y, flat)?),
            OrientationTag::Yx => OrientedJoint::Yx(JointMeasure::new(x, y, flat)?),
        })
    }
}

/// `{"a": f, "b": f, "n": int, "samples": [...], "kind": "probability" | "finite"}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub samples: Vec<f64>,
    pub kind: DensityKind,
}

impl DensityFile {
    pub fn from_density(d: &DensityMeasure) -> Self {
        Self {
            a: d.a(),
            b: d.b(),
            n: d.n(),
            samples: d.samples().to_vec(),
            kind: d.kind(),
        }
    }

    pub fn to_density(&self) -> Result<DensityMeasure> {
        if self.samples.len() != self.n {
            return Err(Error::Parse(format!(
                "density declares n = {} but has {} samples",
                self.n,
                self.samples.len()
            )));
        }
        DensityMeasure::new(self.a, self.b, self.samples.clone(), self.kind)
    }
}

/// `{"kind": "measure-chain", "measures": [measure, ...]}`, each measure
/// absolutely continuous with respect to the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub kind: ChainTag,
    pub measures: Vec<MeasureFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainTag {
    #[serde(rename = "measure-chain")]
    MeasureChain,
}

/// Any of the file formats, told apart by their fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fixture {
    Chain(ChainFile),
    Measure(MeasureFile),
    Kernel(KernelFile),
    Joint(JointFile),
    Density(DensityFile),
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("file formats always serialize")
}
