//! Checkers for the kernel-level identities: unit measure, the Bayes-like
//! rule and its inverse.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kernel::{joint_from, joint_yx_from, Axis, ConditionalKernel, JointMeasure, Xy, Yx};
use crate::measure::ProbabilityMeasure;
use crate::report::{CheckReport, TheoremId, Worst};
use crate::rnd::rnd;
use crate::tolerance;

/// Everything derived from `(P_{Y|X}, P_X)` that the checkers compare.
struct Setting<'a> {
    kernel: &'a ConditionalKernel,
    px: &'a ProbabilityMeasure,
    py: ProbabilityMeasure,
    pxy: JointMeasure<Xy>,
    pyx: JointMeasure<Yx>,
    /// `P_{X|Y}`, indexed by y.
    backward: ConditionalKernel,
}

impl<'a> Setting<'a> {
    fn new(kernel: &'a ConditionalKernel, px: &'a ProbabilityMeasure) -> Result<Self> {
        let py = kernel.output_marginal(px)?;
        let pxy = joint_from(kernel, px)?;
        let pyx = joint_yx_from(kernel, px)?;
        let backward = pxy.conditional(Axis::Y)?;
        Ok(Self {
            kernel,
            px,
            py,
            pxy,
            pyx,
            backward,
        })
    }

    fn nx(&self) -> usize {
        self.px.len()
    }

    fn ny(&self) -> usize {
        self.py.len()
    }

    fn label(&self, x: usize, y: usize) -> String {
        format!(
            "({},{})",
            self.px.space().label(x),
            self.py.space().label(y)
        )
    }

    /// Forward rows against the output marginal: `P_{Y|X=x} << P_Y` for all x.
    fn forward_ac(&self) -> Result<()> {
        for x in 0..self.nx() {
            if let Some(y) = self.kernel.row(x).absolute_continuity_witness(&self.py)? {
                return Err(Error::not_ac(
                    format!("P_{{Y|X={}}}", self.px.space().label(x)),
                    "P_Y",
                    self.label(x, y),
                ));
            }
        }
        Ok(())
    }

    /// `P_{X|Y=y} << P_X` for every non-synthetic y.
    fn backward_ac(&self) -> Result<()> {
        for y in (0..self.ny()).filter(|&y| !self.backward.is_synthetic(y)) {
            if let Some(x) = self.backward.row(y).absolute_continuity_witness(self.px)? {
                return Err(Error::not_ac(
                    format!("P_{{X|Y={}}}", self.py.space().label(y)),
                    "P_X",
                    self.label(x, y),
                ));
            }
        }
        Ok(())
    }

    /// `P_Y << P_{Y|X=x}` for all x.
    fn inverse_forward_ac(&self) -> Result<()> {
        for x in 0..self.nx() {
            if let Some(y) = self.py.absolute_continuity_witness(self.kernel.row(x))? {
                return Err(Error::not_ac(
                    "P_Y",
                    format!("P_{{Y|X={}}}", self.px.space().label(x)),
                    self.label(x, y),
                ));
            }
        }
        Ok(())
    }

    /// `P_X << P_{X|Y=y}` for every non-synthetic y.
    fn inverse_backward_ac(&self) -> Result<()> {
        for y in (0..self.ny()).filter(|&y| !self.backward.is_synthetic(y)) {
            if let Some(x) = self.px.absolute_continuity_witness(self.backward.row(y))? {
                return Err(Error::not_ac(
                    "P_X",
                    format!("P_{{X|Y={}}}", self.py.space().label(y)),
                    self.label(x, y),
                ));
            }
        }
        Ok(())
    }

    fn instance(&self) -> Value {
        json!({ "kernel": self.kernel.rows_matrix(), "P_X": self.px.weights() })
    }

    /// The four Bayes-like quantities at every `(x, y)`, `X x Y` row-major.
    fn bayes_quantities(&self) -> Result<[Vec<f64>; 4]> {
        let (nx, ny) = (self.nx(), self.ny());
        let joint = self.pxy.as_measure()?;
        let product = self.pxy.product_of_marginals()?.as_measure()?;
        let joint_yx = self.pyx.as_measure()?;
        let product_yx = self.pyx.product_of_marginals()?.as_measure()?;

        let d_joint = rnd(&joint, &product)?;
        let d_joint_yx = rnd(&joint_yx, &product_yx)?;
        let d_backward = (0..ny)
            .map(|y| rnd(self.backward.row(y), self.px))
            .collect::<Result<Vec<_>>>()?;
        let d_forward = (0..nx)
            .map(|x| rnd(self.kernel.row(x), &self.py))
            .collect::<Result<Vec<_>>>()?;

        let mut out: [Vec<f64>; 4] = Default::default();
        for x in 0..nx {
            for y in 0..ny {
                out[0].push(d_joint.value(x * ny + y));
                out[1].push(d_backward[y].value(x));
                out[2].push(d_forward[x].value(y));
                out[3].push(d_joint_yx.value(y * nx + x));
            }
        }
        Ok(out)
    }

    /// The four inverse quantities at every `(x, y)`, `X x Y` row-major.
    fn inverse_quantities(&self) -> Result<[Vec<f64>; 4]> {
        let (nx, ny) = (self.nx(), self.ny());
        let joint = self.pxy.as_measure()?;
        let product = self.pxy.product_of_marginals()?.as_measure()?;
        let joint_yx = self.pyx.as_measure()?;
        let product_yx = self.pyx.product_of_marginals()?.as_measure()?;

        let d_product = rnd(&product, &joint)?;
        let d_product_yx = rnd(&product_yx, &joint_yx)?;
        let d_px = (0..ny)
            .map(|y| {
                if self.backward.is_synthetic(y) {
                    Ok(None)
                } else {
                    rnd(self.px, self.backward.row(y)).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let d_py = (0..nx)
            .map(|x| rnd(&self.py, self.kernel.row(x)))
            .collect::<Result<Vec<_>>>()?;

        let mut out: [Vec<f64>; 4] = Default::default();
        for x in 0..nx {
            for y in 0..ny {
                out[0].push(d_product.value(x * ny + y));
                out[1].push(d_px[y].as_ref().map_or(0.0, |g| g.value(x)));
                out[2].push(d_py[x].value(y));
                out[3].push(d_product_yx.value(y * nx + x));
            }
        }
        Ok(out)
    }
}

fn four_way(
    quantities: &[Vec<f64>; 4],
    charged: impl Fn(usize) -> bool,
    setting: &Setting<'_>,
    names: [&str; 4],
) -> Worst {
    let ny = setting.ny();
    let mut worst = Worst::default();
    for i in (0..quantities[0].len()).filter(|&i| charged(i)) {
        for k in 1..4 {
            let d = tolerance::scaled_deviation(quantities[0][i], quantities[k][i]);
            worst.observe(d, || {
                Some(format!(
                    "{} vs {} at {}",
                    names[0],
                    names[k],
                    setting.label(i / ny, i % ny)
                ))
            });
        }
    }
    worst
}

/// `integral of dP_{Y|X=x}/dP_Y (y) dP_X(x) = 1` for every `y` charged by `P_Y`.
pub fn check_unit_measure(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
) -> Result<CheckReport> {
    let s = Setting::new(kernel, px)?;
    s.forward_ac()?;
    let d_forward = (0..s.nx())
        .map(|x| rnd(kernel.row(x), &s.py))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = Worst::default();
    for y in s.py.support() {
        let terms = (0..s.nx()).map(|x| d_forward[x].value(y) * px.weight(x));
        let integral: f64 = terms.clone().sum();
        let magnitude: f64 = terms.map(f64::abs).sum();
        let d = tolerance::sum_deviation(integral, 1.0, magnitude.max(1.0));
        worst.observe(d, || Some(format!("y={}", s.py.space().label(y))));
    }
    Ok(CheckReport::new(
        TheoremId::UnitMeasure,
        s.instance(),
        worst.deviation,
        tolerance::DISCRETE,
        worst.witness,
    ))
}

/// The unit-measure integral recomputed through the inverse Bayes-like rule:
/// each stage of the chain
/// `int g dP_X = int g * dP_X/dP_{X|Y=y} dP_{X|Y=y}
///            = int g * dP_Y/dP_{Y|X=x} dP_{X|Y=y} = int dP_{X|Y=y} = 1`
/// with `g = dP_{Y|X=x}/dP_Y (y)` must equal one.
pub fn check_unit_measure_via_inverse(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
) -> Result<CheckReport> {
    let s = Setting::new(kernel, px)?;
    s.forward_ac()?;
    s.inverse_forward_ac()?;
    s.inverse_backward_ac()?;
    let d_forward = (0..s.nx())
        .map(|x| rnd(kernel.row(x), &s.py))
        .collect::<Result<Vec<_>>>()?;
    let d_inverse = (0..s.nx())
        .map(|x| rnd(&s.py, kernel.row(x)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = Worst::default();
    for y in s.py.support() {
        let posterior = s.backward.row(y);
        let d_px = rnd(px, posterior)?;
        let stages = [
            (0..s.nx())
                .map(|x| d_forward[x].value(y) * px.weight(x))
                .sum::<f64>(),
            (0..s.nx())
                .map(|x| d_forward[x].value(y) * d_px.value(x) * posterior.weight(x))
                .sum::<f64>(),
            (0..s.nx())
                .map(|x| d_forward[x].value(y) * d_inverse[x].value(y) * posterior.weight(x))
                .sum::<f64>(),
            posterior.total_mass(),
        ];
        for (k, stage) in stages.iter().enumerate() {
            let d = tolerance::scaled_deviation(*stage, 1.0);
            worst.observe(d, || {
                Some(format!("stage {} at y={}", k, s.py.space().label(y)))
            });
        }
    }
    let mut instance = s.instance();
    instance["route"] = json!("inverse_bayes");
    Ok(CheckReport::new(
        TheoremId::UnitMeasure,
        instance,
        worst.deviation,
        tolerance::DISCRETE,
        worst.witness,
    ))
}

/// `dP_XY/dP_XP_Y (x,y) = dP_{X|Y=y}/dP_X (x) = dP_{Y|X=x}/dP_Y (y)
///  = dP_YX/dP_YP_X (y,x)` at every point charged by `P_X P_Y`.
pub fn check_bayes_like(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
) -> Result<CheckReport> {
    let s = Setting::new(kernel, px)?;
    s.forward_ac()?;
    s.backward_ac()?;
    let q = s.bayes_quantities()?;
    let ny = s.ny();
    let worst = four_way(
        &q,
        |i| px.weight(i / ny) * s.py.weight(i % ny) != 0.0,
        &s,
        [
            "dP_XY/dP_XP_Y",
            "dP_X|Y/dP_X",
            "dP_Y|X/dP_Y",
            "dP_YX/dP_YP_X",
        ],
    );
    Ok(CheckReport::new(
        TheoremId::BayesLike,
        s.instance(),
        worst.deviation,
        tolerance::DISCRETE,
        worst.witness,
    ))
}

/// Inverse Bayes-like rule, a.s. `P_XY`, together with the reciprocity
/// `dP_XP_Y/dP_XY * dP_XY/dP_XP_Y = 1` at jointly charged points.
pub fn check_inverse_bayes(
    kernel: &ConditionalKernel,
    px: &ProbabilityMeasure,
) -> Result<CheckReport> {
    let s = Setting::new(kernel, px)?;
    s.inverse_forward_ac()?;
    s.inverse_backward_ac()?;
    let inverse = s.inverse_quantities()?;
    let ny = s.ny();
    let charged = |i: usize| s.pxy.weights()[i] != 0.0;
    let mut worst = four_way(
        &inverse,
        charged,
        &s,
        [
            "dP_XP_Y/dP_XY",
            "dP_X/dP_X|Y",
            "dP_Y/dP_Y|X",
            "dP_YP_X/dP_YX",
        ],
    );

    let joint = s.pxy.as_measure()?;
    let product = s.pxy.product_of_marginals()?.as_measure()?;
    let forward = rnd(&joint, &product)?;
    let mut reciprocity = 0.0_f64;
    for i in (0..inverse[0].len()).filter(|&i| charged(i)) {
        let d = tolerance::scaled_deviation(inverse[0][i] * forward.value(i), 1.0);
        reciprocity = reciprocity.max(d);
        worst.observe(d, || {
            Some(format!("reciprocity at {}", s.label(i / ny, i % ny)))
        });
    }
    let mut instance = s.instance();
    instance["reciprocity_deviation"] = json!(reciprocity);
    Ok(CheckReport::new(
        TheoremId::InverseBayes,
        instance,
        worst.deviation,
        tolerance::DISCRETE,
        worst.witness,
    ))
}
