//! Conditional kernels, joint measures and their marginals.
//!
//! A joint measure remembers which coordinate comes first through a type
//! parameter, so a measure on `X x Y` cannot be passed where one on `Y x X`
//! is expected. [`JointMeasure::swap`] is the only way across.

use std::fmt;
use std::marker::PhantomData;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{
    ensure_same_space, ProbabilityMeasure, SampleSpace, SignedMeasure, PROBABILITY_INPUT_SLACK,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrientationTag {
    #[serde(rename = "XY")]
    Xy,
    #[serde(rename = "YX")]
    Yx,
}

impl fmt::Display for OrientationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrientationTag::Xy => "XY",
            OrientationTag::Yx => "YX",
        })
    }
}

/// Coordinate order of a joint measure.
pub trait Orientation: Copy + Default + fmt::Debug + Send + Sync + 'static {
    const TAG: OrientationTag;
    type Swapped: Orientation<Swapped = Self>;
}

/// Points are `(x, y)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Xy;

/// Points are `(y, x)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Yx;

impl Orientation for Xy {
    const TAG: OrientationTag = OrientationTag::Xy;
    type Swapped = Yx;
}

impl Orientation for Yx {
    const TAG: OrientationTag = OrientationTag::Yx;
    type Swapped = Xy;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Row-stochastic matrix: one probability measure on the output space per
/// input point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernel {
    input: Arc<SampleSpace>,
    output: Arc<SampleSpace>,
    rows: Vec<ProbabilityMeasure>,
    synthetic: Vec<bool>,
}

impl ConditionalKernel {
    pub fn new(
        input: Arc<SampleSpace>,
        output: Arc<SampleSpace>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::LengthMismatch {
                expected: input.len(),
                found: rows.len(),
            });
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                ProbabilityMeasure::new(Arc::clone(&output), row).map_err(|e| match e {
                    Error::InvalidProbability(msg) => {
                        Error::InvalidProbability(format!("row {}: {msg}", input.label(i)))
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let synthetic = vec![false; rows.len()];
        Ok(Self {
            input,
            output,
            rows,
            synthetic,
        })
    }

    /// Kernel on indexed spaces.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let ny = rows.first().map_or(0, Vec::len);
        let input = Arc::new(SampleSpace::indexed(rows.len())?);
        let output = Arc::new(SampleSpace::indexed(ny)?);
        Self::new(input, output, rows)
    }

    /// Every row equal to `row`: output independent of input.
    pub fn constant(input: Arc<SampleSpace>, row: &ProbabilityMeasure) -> Self {
        let rows = vec![row.clone(); input.len()];
        let synthetic = vec![false; input.len()];
        Self {
            input,
            output: Arc::clone(row.space()),
            rows,
            synthetic,
        }
    }

    /// Noiseless channel on `n` points.
    pub fn identity(n: usize) -> Result<Self> {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_rows(rows)
    }

    /// Binary symmetric channel with crossover probability `crossover`.
    pub fn binary_symmetric(crossover: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&crossover) {
            return Err(Error::Domain(format!(
                "crossover probability {crossover} outside [0, 1]"
            )));
        }
        Self::from_rows(vec![
            vec![1.0 - crossover, crossover],
            vec![crossover, 1.0 - crossover],
        ])
    }

    /// Conditioning space.
    pub fn input_space(&self) -> &Arc<SampleSpace> {
        &self.input
    }

    /// Space each row lives on.
    pub fn output_space(&self) -> &Arc<SampleSpace> {
        &self.output
    }

    pub fn rows(&self) -> &[ProbabilityMeasure] {
        &self.rows
    }

    pub fn row(&self, input: usize) -> &ProbabilityMeasure {
        &self.rows[input]
    }

    pub fn entry(&self, input: usize, output: usize) -> f64 {
        self.rows[input].weight(output)
    }

    /// Rows that were filled in at inputs of zero probability rather than
    /// derived from data.
    pub fn is_synthetic(&self, input: usize) -> bool {
        self.synthetic[input]
    }

    /// `P_Y = sum_x P_X(x) P_{Y|X=x}`.
    pub fn output_marginal(&self, input_law: &ProbabilityMeasure) -> Result<ProbabilityMeasure> {
        ensure_same_space(&self.input, input_law.space())?;
        let mut weights = vec![0.0; self.output.len()];
        for (row, &px) in self.rows.iter().zip(input_law.weights()) {
            for (acc, w) in weights.iter_mut().zip(row.weights()) {
                *acc += px * w;
            }
        }
        ProbabilityMeasure::normalized(Arc::clone(&self.output), weights)
    }

    pub fn rows_matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.weights().to_vec()).collect()
    }
}

/// Probability measure on a product space with a fixed coordinate order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasure<O: Orientation> {
    x_space: Arc<SampleSpace>,
    y_space: Arc<SampleSpace>,
    /// Row-major over the first coordinate of `O`.
    weights: Vec<f64>,
    _order: PhantomData<O>,
}

impl<O: Orientation> JointMeasure<O> {
    /// `weights` are row-major in this orientation's coordinate order. They
    /// must be nonnegative with total within `1e-9` of one and are
    /// renormalized.
    pub fn new(
        x_space: Arc<SampleSpace>,
        y_space: Arc<SampleSpace>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let expected = x_space.len() * y_space.len();
        if weights.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: weights.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_INPUT_SLACK {
            return Err(Error::InvalidProbability(format!(
                "joint total mass {total} is not within {PROBABILITY_INPUT_SLACK} of 1"
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidProbability(format!(
                "joint weight {w} is not a nonnegative finite number"
            )));
        }
        let weights = if total == 1.0 {
            weights
        } else {
            weights.iter().map(|w| w / total).collect()
        };
        Ok(Self {
            x_space,
            y_space,
            weights,
            _order: PhantomData,
        })
    }

    pub fn orientation(&self) -> OrientationTag {
        O::TAG
    }

    pub fn x_space(&self) -> &Arc<SampleSpace> {
        &self.x_space
    }

    pub fn y_space(&self) -> &Arc<SampleSpace> {
        &self.y_space
    }

    pub fn first_space(&self) -> &Arc<SampleSpace> {
        match O::TAG {
            OrientationTag::Xy => &self.x_space,
            OrientationTag::Yx => &self.y_space,
        }
    }

    pub fn second_space(&self) -> &Arc<SampleSpace> {
        match O::TAG {
            OrientationTag::Xy => &self.y_space,
            OrientationTag::Yx => &self.x_space,
        }
    }

    /// Weights in storage order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at `(first, second)` in this orientation's order.
    pub fn weight(&self, first: usize, second: usize) -> f64 {
        self.weights[first * self.second_space().len() + second]
    }

    /// Weight of the point `(x, y)` regardless of storage order.
    pub fn weight_xy(&self, x: usize, y: usize) -> f64 {
        match O::TAG {
            OrientationTag::Xy => self.weight(x, y),
            OrientationTag::Yx => self.weight(y, x),
        }
    }

    /// The joint as a plain probability measure on `first x second`.
    pub fn as_measure(&self) -> Result<ProbabilityMeasure> {
        let space = Arc::new(self.first_space().product(self.second_space())?);
        ProbabilityMeasure::normalized(space, self.weights.clone())
    }

    /// Transposes storage and flips orientation: `P_XY(A) = P_YX(A-hat)`.
    pub fn swap(&self) -> JointMeasure<O::Swapped> {
        let n1 = self.first_space().len();
        let n2 = self.second_space().len();
        let mut weights = vec![0.0; self.weights.len()];
        for i in 0..n1 {
            for j in 0..n2 {
                weights[j * n1 + i] = self.weights[i * n2 + j];
            }
        }
        JointMeasure {
            x_space: Arc::clone(&self.x_space),
            y_space: Arc::clone(&self.y_space),
            weights,
            _order: PhantomData,
        }
    }

    pub fn marginal_x(&self) -> Result<ProbabilityMeasure> {
        let mut weights = vec![0.0; self.x_space.len()];
        for (x, acc) in weights.iter_mut().enumerate() {
            *acc = (0..self.y_space.len()).map(|y| self.weight_xy(x, y)).sum();
        }
        ProbabilityMeasure::normalized(Arc::clone(&self.x_space), weights)
    }

    pub fn marginal_y(&self) -> Result<ProbabilityMeasure> {
        let mut weights = vec![0.0; self.y_space.len()];
        for (y, acc) in weights.iter_mut().enumerate() {
            *acc = (0..self.x_space.len()).map(|x| self.weight_xy(x, y)).sum();
        }
        ProbabilityMeasure::normalized(Arc::clone(&self.y_space), weights)
    }

    /// Product of the two marginals, in the same orientation.
    pub fn product_of_marginals(&self) -> Result<Self> {
        let px = self.marginal_x()?;
        let py = self.marginal_y()?;
        let (first, second) = match O::TAG {
            OrientationTag::Xy => (px.weights(), py.weights()),
            OrientationTag::Yx => (py.weights(), px.weights()),
        };
        let weights = first
            .iter()
            .flat_map(|a| second.iter().map(move |b| a * b))
            .collect();
        Ok(Self {
            x_space: Arc::clone(&self.x_space),
            y_space: Arc::clone(&self.y_space),
            weights,
            _order: PhantomData,
        })
    }

    /// Disintegration along `given`: `P_{X|Y}` for `Axis::Y`, `P_{Y|X}` for
    /// `Axis::X`. Rows at conditioning points of zero marginal mass are
    /// uniform and flagged synthetic.
    pub fn conditional(&self, given: Axis) -> Result<ConditionalKernel> {
        let (cond, other) = match given {
            Axis::X => (&self.x_space, &self.y_space),
            Axis::Y => (&self.y_space, &self.x_space),
        };
        let cell = |c: usize, o: usize| match given {
            Axis::X => self.weight_xy(c, o),
            Axis::Y => self.weight_xy(o, c),
        };
        let mut rows = Vec::with_capacity(cond.len());
        let mut synthetic = Vec::with_capacity(cond.len());
        for c in 0..cond.len() {
            let column: Vec<f64> = (0..other.len()).map(|o| cell(c, o)).collect();
            let mass: f64 = column.iter().sum();
            if mass > 0.0 {
                let row = column.iter().map(|w| w / mass).collect();
                rows.push(ProbabilityMeasure::normalized(Arc::clone(other), row)?);
                synthetic.push(false);
            } else {
                rows.push(ProbabilityMeasure::uniform(Arc::clone(other)));
                synthetic.push(true);
            }
        }
        Ok(ConditionalKernel {
            input: Arc::clone(cond),
            output: Arc::clone(other),
            rows,
            synthetic,
        })
    }
}

/// `P_XY(x, y) = P_X(x) P_{Y|X=x}(y)`.
pub fn joint_from(
    kernel: &ConditionalKernel,
    input_law: &ProbabilityMeasure,
) -> Result<JointMeasure<Xy>> {
    ensure_same_space(kernel.input_space(), input_law.space())?;
    let mut weights = Vec::with_capacity(kernel.input.len() * kernel.output.len());
    for (row, &px) in kernel.rows.iter().zip(input_law.weights()) {
        weights.extend(row.weights().iter().map(|w| px * w));
    }
    JointMeasure::new(
        Arc::clone(kernel.input_space()),
        Arc::clone(kernel.output_space()),
        weights,
    )
}

/// `P_YX(y, x) = P_X(x) P_{Y|X=x}(y)`, built directly in `Y x X` order.
pub fn joint_yx_from(
    kernel: &ConditionalKernel,
    input_law: &ProbabilityMeasure,
) -> Result<JointMeasure<Yx>> {
    ensure_same_space(kernel.input_space(), input_law.space())?;
    let nx = kernel.input.len();
    let ny = kernel.output.len();
    let mut weights = vec![0.0; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            weights[y * nx + x] = input_law.weight(x) * kernel.entry(x, y);
        }
    }
    JointMeasure::new(
        Arc::clone(kernel.input_space()),
        Arc::clone(kernel.output_space()),
        weights,
    )
}

/// Joint measure whose orientation is only known at run time, e.g. after
/// parsing a file.
#[derive(Debug, Clone, PartialEq)]
pub enum OrientedJoint {
    Xy(JointMeasure<Xy>),
    Yx(JointMeasure<Yx>),
}

impl OrientedJoint {
    pub fn orientation(&self) -> OrientationTag {
        match self {
            OrientedJoint::Xy(_) => OrientationTag::Xy,
            OrientedJoint::Yx(_) => OrientationTag::Yx,
        }
    }

    /// The same joint law in `X x Y` order.
    pub fn into_xy(self) -> JointMeasure<Xy> {
        match self {
            OrientedJoint::Xy(j) => j,
            OrientedJoint::Yx(j) => j.swap(),
        }
    }
}

/// Product of two probability measures as an `XY` joint.
pub fn independent_joint(
    px: &ProbabilityMeasure,
    py: &ProbabilityMeasure,
) -> Result<JointMeasure<Xy>> {
    let product: SignedMeasure = px.product(py)?;
    JointMeasure::new(
        Arc::clone(px.space()),
        Arc::clone(py.space()),
        product.weights().to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform2() -> ProbabilityMeasure {
        ProbabilityMeasure::from_weights(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn joint_from_bsc() {
        let k = ConditionalKernel::binary_symmetric(0.25).unwrap();
        let j = joint_from(&k, &uniform2()).unwrap();
        assert_eq!(j.weights(), &[0.375, 0.125, 0.125, 0.375]);
        assert_eq!(j.orientation(), OrientationTag::Xy);
    }

    #[test]
    fn joint_from_identity_is_diagonal() {
        let k = ConditionalKernel::identity(2).unwrap();
        let j = joint_from(&k, &uniform2()).unwrap();
        assert_eq!(j.weights(), &[0.5, 0.0, 0.0, 0.5]);
        let px = j.marginal_x().unwrap();
        let py = j.marginal_y().unwrap();
        assert_eq!(px.weights(), &[0.5, 0.5]);
        assert_eq!(py.weights(), &[0.5, 0.5]);
        let back = j.conditional(Axis::Y).unwrap();
        assert_eq!(back.rows_matrix(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn constant_kernel_gives_product() {
        let q = ProbabilityMeasure::from_weights(vec![0.2, 0.3, 0.5]).unwrap();
        let px = ProbabilityMeasure::from_weights(vec![0.4, 0.6]).unwrap();
        let k = ConditionalKernel::constant(Arc::clone(px.space()), &q);
        let j = joint_from(&k, &px).unwrap();
        let prod = px.product(&q).unwrap();
        assert_eq!(j.weights(), prod.weights());
        assert_eq!(j.marginal_x().unwrap().weights(), px.weights());
        let cond = j.conditional(Axis::Y).unwrap();
        for row in cond.rows() {
            for (a, b) in row.weights().iter().zip(px.weights()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn swap_transposes() {
        let x = Arc::new(SampleSpace::indexed(2).unwrap());
        let y = Arc::new(SampleSpace::indexed(2).unwrap());
        let j = JointMeasure::<Xy>::new(x, y, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let s = j.swap();
        assert_eq!(s.weights(), &[0.1, 0.3, 0.2, 0.4]);
        assert_eq!(s.orientation(), OrientationTag::Yx);
        assert_eq!(s.swap(), j);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(j.weight_xy(x, y), s.weight_xy(x, y));
            }
        }
    }

    #[test]
    fn swap_of_symmetric_joint_has_same_weights() {
        let k = ConditionalKernel::binary_symmetric(0.25).unwrap();
        let j = joint_from(&k, &uniform2()).unwrap();
        assert_eq!(j.swap().weights(), j.weights());
    }

    #[test]
    fn yx_construction_matches_swap() {
        let k =
            ConditionalKernel::from_rows(vec![vec![0.2, 0.8, 0.0], vec![0.5, 0.25, 0.25]]).unwrap();
        let px = ProbabilityMeasure::from_weights(vec![0.3, 0.7]).unwrap();
        let direct = joint_yx_from(&k, &px).unwrap();
        let swapped = joint_from(&k, &px).unwrap().swap();
        assert_eq!(direct, swapped);
    }

    #[test]
    fn bsc_marginals_and_conditional() {
        let k = ConditionalKernel::binary_symmetric(0.25).unwrap();
        let j = joint_from(&k, &uniform2()).unwrap();
        assert_eq!(j.marginal_y().unwrap().weights(), &[0.5, 0.5]);
        let back = j.conditional(Axis::Y).unwrap();
        assert_eq!(back.rows_matrix(), vec![vec![0.75, 0.25], vec![0.25, 0.75]]);
        assert!(!back.is_synthetic(0));
    }

    #[test]
    fn null_columns_get_synthetic_uniform_rows() {
        let k =
            ConditionalKernel::from_rows(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let j = joint_from(&k, &uniform2()).unwrap();
        let back = j.conditional(Axis::Y).unwrap();
        assert!(back.is_synthetic(2));
        assert_eq!(back.row(2).weights(), &[0.5, 0.5]);
        assert!(!back.is_synthetic(0));
    }

    #[test]
    fn kernel_rejects_bad_rows() {
        assert!(ConditionalKernel::from_rows(vec![vec![0.5, 0.6]]).is_err());
        assert!(ConditionalKernel::from_rows(vec![vec![1.5, -0.5]]).is_err());
        let x = Arc::new(SampleSpace::indexed(2).unwrap());
        let y = Arc::new(SampleSpace::indexed(2).unwrap());
        assert!(ConditionalKernel::new(x, y, vec![vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn joint_rejects_bad_mass() {
        let x = Arc::new(SampleSpace::indexed(2).unwrap());
        let y = Arc::new(SampleSpace::indexed(1).unwrap());
        assert!(JointMeasure::<Xy>::new(x.clone(), y.clone(), vec![0.5, 0.4]).is_err());
        assert!(JointMeasure::<Xy>::new(x, y, vec![0.5]).is_err());
    }

    #[test]
    fn oriented_joint_normalizes_to_xy() {
        let k = ConditionalKernel::binary_symmetric(0.1).unwrap();
        let px = ProbabilityMeasure::from_weights(vec![0.2, 0.8]).unwrap();
        let xy = joint_from(&k, &px).unwrap();
        let yx = OrientedJoint::Yx(xy.swap());
        assert_eq!(yx.orientation(), OrientationTag::Yx);
        assert_eq!(yx.into_xy(), xy);
        let ind = independent_joint(&px, &px).unwrap();
        assert_eq!(ind.marginal_x().unwrap().weights(), px.weights());
    }
}
