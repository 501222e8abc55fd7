//! Densities sampled on a uniform grid over `[a, b]`, with Lebesgue measure
//! as the implicit reference and composite Simpson quadrature as the integral.
//!
//! Sets are restricted to grid-aligned intervals. A sample below
//! [`DENSITY_NULL`](crate::tolerance::DENSITY_NULL) counts as null.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::report::{CheckReport, TheoremId};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    Probability,
    Finite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMeasure {
    a: f64,
    b: f64,
    samples: Vec<f64>,
    kind: DensityKind,
}

/// Composite Simpson over samples `lo..=hi` with spacing `h`.
///
/// An odd number of subintervals closes with Simpson's 3/8 rule on the last
/// three; a single subinterval falls back to the trapezoid.
pub fn simpson(values: &[f64], h: f64, lo: usize, hi: usize) -> f64 {
    let m = hi - lo;
    match m {
        0 => 0.0,
        1 => 0.5 * h * (values[lo] + values[hi]),
        _ => {
            let (even_end, tail) = if m.is_multiple_of(2) {
                (hi, false)
            } else {
                (hi - 3, true)
            };
            let mut total = 0.0;
            if even_end > lo {
                let mut acc = values[lo] + values[even_end];
                for i in (lo + 1)..even_end {
                    acc += if (i - lo) % 2 == 1 { 4.0 } else { 2.0 } * values[i];
                }
                total += acc * h / 3.0;
            }
            if tail {
                let s = even_end;
                total += 3.0 * h / 8.0
                    * (values[s] + 3.0 * values[s + 1] + 3.0 * values[s + 2] + values[s + 3]);
            }
            total
        }
    }
}

impl DensityMeasure {
    /// Validates the grid and samples. A probability density must integrate
    /// to within [`tolerance::DENSITY`] of one and is then renormalized.
    pub fn new(a: f64, b: f64, samples: Vec<f64>, kind: DensityKind) -> Result<Self> {
        let finite = Self::finite(a, b, samples)?;
        match kind {
            DensityKind::Finite => Ok(finite),
            DensityKind::Probability => {
                let mass = finite.total_mass();
                if (mass - 1.0).abs() > tolerance::DENSITY {
                    return Err(Error::InvalidProbability(format!(
                        "density integrates to {mass}, not within {} of 1",
                        tolerance::DENSITY
                    )));
                }
                finite.normalized()
            }
        }
    }

    fn finite(a: f64, b: f64, samples: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain(format!("invalid interval [{a}, {b}]")));
        }
        let n = samples.len();
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "grid needs an odd number of at least 3 points, got {n}"
            )));
        }
        if let Some((i, &v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::Domain(format!(
                "density sample {v} at grid point {i} is not a nonnegative finite number"
            )));
        }
        Ok(Self {
            a,
            b,
            samples,
            kind: DensityKind::Finite,
        })
    }

    /// Samples `f` at `n` grid points as a finite measure.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("grid of {n} points")));
        }
        let h = (b - a) / (n - 1) as f64;
        let samples = (0..n).map(|i| f(a + i as f64 * h)).collect();
        Self::finite(a, b, samples)
    }

    /// Rescales to unit Simpson mass and marks the measure as a probability.
    pub fn normalized(self) -> Result<Self> {
        let mass = self.total_mass();
        if !(mass > 0.0) {
            return Err(Error::InvalidProbability("density has zero mass".into()));
        }
        Ok(Self {
            samples: self.samples.iter().map(|v| v / mass).collect(),
            kind: DensityKind::Probability,
            ..self
        })
    }

    /// `c` times this measure (a finite measure).
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Domain(format!("scale factor {c}")));
        }
        Ok(Self {
            a: self.a,
            b: self.b,
            samples: self.samples.iter().map(|v| v * c).collect(),
            kind: DensityKind::Finite,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.n() - 1) as f64
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        self.a + i as f64 * self.step()
    }

    pub fn total_mass(&self) -> f64 {
        simpson(&self.samples, self.step(), 0, self.n() - 1)
    }

    /// Nearest grid index to `x`, or an error outside `[a, b]`.
    pub fn snap(&self, x: f64) -> Result<usize> {
        let slack = 1e-12 * (self.b - self.a);
        if !(x >= self.a - slack && x <= self.b + slack) {
            return Err(Error::Domain(format!(
                "{x} lies outside [{}, {}]",
                self.a, self.b
            )));
        }
        let i = ((x - self.a) / self.step()).round() as usize;
        Ok(i.min(self.n() - 1))
    }

    fn same_grid(&self, other: &DensityMeasure) -> Result<()> {
        if self.a == other.a && self.b == other.b && self.n() == other.n() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "grid [{}, {}] x {} vs [{}, {}] x {}",
                self.a,
                self.b,
                self.n(),
                other.a,
                other.b,
                other.n()
            )))
        }
    }

    /// First grid index where `self` is non-null and `reference` is null.
    fn ac_witness(&self, reference: &DensityMeasure) -> Option<usize> {
        self.samples
            .iter()
            .zip(&reference.samples)
            .position(|(&p, &q)| q < tolerance::DENSITY_NULL && p >= tolerance::DENSITY_NULL)
    }

    fn ensure_ac(&self, reference: &DensityMeasure, name: &str, ref_name: &str) -> Result<()> {
        self.same_grid(reference)?;
        match self.ac_witness(reference) {
            None => Ok(()),
            Some(i) => Err(Error::not_ac(
                name,
                ref_name,
                format!("grid point {i} (x = {})", self.grid_point(i)),
            )),
        }
    }
}

/// Simpson integral of the samples over `[lo, hi]`, endpoints snapped to the
/// grid.
pub fn quad_mass(m: &DensityMeasure, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
    }
    let i = m.snap(lo)?;
    let j = m.snap(hi)?;
    Ok(simpson(&m.samples, m.step(), i, j))
}

/// Sampled `dP/dQ` on the common grid of `P` and `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRatio {
    values: Vec<f64>,
    reference: DensityMeasure,
}

impl DensityRatio {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reference(&self) -> &DensityMeasure {
        &self.reference
    }

    /// Simpson integral of `ratio * q` between grid indices.
    pub fn integral_between(&self, lo: usize, hi: usize) -> f64 {
        let product: Vec<f64> = self
            .values
            .iter()
            .zip(self.reference.samples())
            .map(|(g, q)| g * q)
            .collect();
        simpson(&product, self.reference.step(), lo, hi)
    }

    /// `integral over [lo, hi] of ratio dQ`.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
        }
        let i = self.reference.snap(lo)?;
        let j = self.reference.snap(hi)?;
        Ok(self.integral_between(i, j))
    }
}

/// Pointwise `P(x) / Q(x)` where `Q(x)` is not null, `0` elsewhere.
pub fn rnd_density(p: &DensityMeasure, q: &DensityMeasure) -> Result<DensityRatio> {
    p.ensure_ac(q, "P", "Q")?;
    let values = p
        .samples
        .iter()
        .zip(&q.samples)
        .map(|(&pv, &qv)| {
            if qv < tolerance::DENSITY_NULL {
                0.0
            } else {
                pv / qv
            }
        })
        .collect();
    Ok(DensityRatio {
        values,
        reference: q.clone(),
    })
}

/// Grid indices used as interval endpoints for set identities.
///
/// Grids of at most 101 points use every point; larger grids use 65 evenly
/// spaced points, always including both ends.
pub fn interval_breakpoints(n: usize) -> Vec<usize> {
    const FULL_GRID_MAX: usize = 101;
    const COARSE_POINTS: usize = 65;
    if n <= FULL_GRID_MAX {
        return (0..n).collect();
    }
    let mut points: Vec<usize> = (0..COARSE_POINTS)
        .map(|k| ((k as f64) * (n - 1) as f64 / (COARSE_POINTS - 1) as f64).round() as usize)
        .collect();
    points.dedup();
    points
}

/// Largest `|int ratio dQ - quad_mass(P)|` over intervals between
/// [`interval_breakpoints`].
pub fn rn_residual(p: &DensityMeasure, ratio: &DensityRatio) -> Result<f64> {
    p.same_grid(&ratio.reference)?;
    let points = interval_breakpoints(p.n());
    let h = p.step();
    let product: Vec<f64> = ratio
        .values
        .iter()
        .zip(ratio.reference.samples())
        .map(|(g, q)| g * q)
        .collect();
    let mut worst = 0.0_f64;
    for (k, &lo) in points.iter().enumerate() {
        for &hi in &points[k + 1..] {
            let lhs = simpson(&product, h, lo, hi);
            let rhs = simpson(&p.samples, h, lo, hi);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// `max |dP/dR - dP/dQ * dQ/dR|` over grid points where `R` is not null.
pub fn check_chain_rule_density(
    p: &DensityMeasure,
    q: &DensityMeasure,
    r: &DensityMeasure,
) -> Result<CheckReport> {
    p.ensure_ac(q, "P", "Q (link P << Q)")?;
    q.ensure_ac(r, "Q", "R (link Q << R)")?;
    let direct = rnd_density(p, r)?;
    let first = rnd_density(p, q)?;
    let second = rnd_density(q, r)?;
    let mut worst = 0.0_f64;
    let mut witness = None;
    for i in (0..p.n()).filter(|&i| r.samples[i] >= tolerance::DENSITY_NULL) {
        let d = (direct.values[i] - first.values[i] * second.values[i]).abs();
        if d > worst {
            worst = d;
            witness = Some(format!("x = {}", p.grid_point(i)));
        }
    }
    Ok(CheckReport::new(
        TheoremId::ChainRuleDensity,
        json!({ "a": p.a, "b": p.b, "n": p.n() }),
        worst,
        tolerance::DENSITY_CHAIN,
        witness,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlDensity {
    pub value: f64,
    /// Grid points where `Q` was null but `P` was not, and `Q` was raised to
    /// the null threshold. Zero for [`kl_density`].
    pub floored_points: usize,
}

impl KlDensity {
    pub fn flagged(&self) -> bool {
        self.floored_points > 0
    }
}

fn kl_integrand(p: &[f64], q: &[f64]) -> Vec<f64> {
    p.iter()
        .zip(q)
        .map(|(&pv, &qv)| {
            if pv < tolerance::DENSITY_NULL {
                0.0
            } else {
                pv * (pv / qv).ln()
            }
        })
        .collect()
}

/// `int P ln(P/Q)` by Simpson's rule, requiring approximate `P << Q`.
pub fn kl_density(p: &DensityMeasure, q: &DensityMeasure) -> Result<KlDensity> {
    p.ensure_ac(q, "P", "Q")?;
    let integrand = kl_integrand(&p.samples, &q.samples);
    Ok(KlDensity {
        value: simpson(&integrand, p.step(), 0, p.n() - 1),
        floored_points: 0,
    })
}

/// Like [`kl_density`] but raises null `Q` samples under charged `P` samples
/// to the null threshold instead of failing. The value is finite but grid
/// dependent whenever `floored_points > 0`.
pub fn kl_density_floored(p: &DensityMeasure, q: &DensityMeasure) -> Result<KlDensity> {
    p.same_grid(q)?;
    let mut floored_points = 0;
    let q_floored: Vec<f64> = p
        .samples
        .iter()
        .zip(&q.samples)
        .map(|(&pv, &qv)| {
            if qv < tolerance::DENSITY_NULL && pv >= tolerance::DENSITY_NULL {
                floored_points += 1;
                tolerance::DENSITY_NULL
            } else {
                qv
            }
        })
        .collect();
    let integrand = kl_integrand(&p.samples, &q_floored);
    Ok(KlDensity {
        value: simpson(&integrand, p.step(), 0, p.n() - 1),
        floored_points,
    })
}
