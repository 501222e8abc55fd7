//! Seeded random fixtures whose hypotheses hold by construction.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::{DensityKind, DensityMeasure};
use crate::error::{Error, Result};
use crate::kernel::ConditionalKernel;
use crate::measure::{ProbabilityMeasure, SampleSpace, SignedMeasure};

/// Minimum weight used when strict positivity is requested.
pub const STRICT_FLOOR: f64 = 0.01;

/// Independent generator for stream `stream` under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn space(n: usize) -> Result<Arc<SampleSpace>> {
    Ok(Arc::new(SampleSpace::indexed(n)?))
}

/// Standard exponential variate, strictly positive.
fn exponential<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    (-u.ln()).max(f64::MIN_POSITIVE)
}

/// Weights summing to one: normalized exponentials, optionally lifted so
/// every entry is at least `floor`.
pub fn simplex_weights<R: Rng>(rng: &mut R, n: usize, floor: Option<f64>) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidSpace(
            "cannot draw a measure on an empty space".into(),
        ));
    }
    let floor = floor.unwrap_or(0.0);
    if !(0.0..=1.0).contains(&(floor * n as f64)) {
        return Err(Error::Domain(format!(
            "a floor of {floor} on {n} points exceeds total mass one"
        )));
    }
    let raw: Vec<f64> = (0..n).map(|_| exponential(rng)).collect();
    let total: f64 = raw.iter().sum();
    let free = 1.0 - floor * n as f64;
    Ok(raw.iter().map(|w| floor + free * w / total).collect())
}

pub fn probability<R: Rng>(rng: &mut R, n: usize, strict: bool) -> Result<ProbabilityMeasure> {
    let w = simplex_weights(rng, n, strict.then_some(STRICT_FLOOR))?;
    ProbabilityMeasure::normalized(space(n)?, w)
}

/// Random support: each point is dropped with probability `drop`, keeping at
/// least one.
fn support_pattern<R: Rng>(rng: &mut R, n: usize, drop: f64) -> Vec<bool> {
    let mut keep: Vec<bool> = (0..n).map(|_| !rng.gen_bool(drop)).collect();
    if !keep.iter().any(|&k| k) {
        keep[rng.gen_range(0..n)] = true;
    }
    keep
}

/// Nonnegative measure with some null points and a random total mass.
pub fn sparse_measure<R: Rng>(rng: &mut R, n: usize) -> Result<SignedMeasure> {
    let keep = support_pattern(rng, n, 0.25);
    let mass = rng.gen_range(0.5..4.0);
    let w = keep
        .iter()
        .map(|&k| if k { mass * exponential(rng) } else { 0.0 })
        .collect();
    SignedMeasure::new(space(n)?, w)
}

/// Signed measure charging only points that `reference` charges, with extra
/// null points mixed in.
pub fn signed_below<R: Rng>(rng: &mut R, reference: &SignedMeasure) -> Result<SignedMeasure> {
    let w = reference
        .weights()
        .iter()
        .map(|&r| {
            if r == 0.0 || rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(-2.0..2.0)
            }
        })
        .collect();
    SignedMeasure::new(Arc::clone(reference.space()), w)
}

/// Nonnegative measure charging only points that `reference` charges.
pub fn nonnegative_below<R: Rng>(rng: &mut R, reference: &SignedMeasure) -> Result<SignedMeasure> {
    let w = reference
        .weights()
        .iter()
        .map(|&r| {
            if r == 0.0 || rng.gen_bool(0.2) {
                0.0
            } else {
                exponential(rng)
            }
        })
        .collect();
    SignedMeasure::new(Arc::clone(reference.space()), w)
}

/// `(P, Q)` with `P << Q`, `Q` nonnegative and `P` signed.
pub fn ac_pair<R: Rng>(rng: &mut R, n: usize) -> Result<(SignedMeasure, SignedMeasure)> {
    let q = sparse_measure(rng, n)?;
    let p = signed_below(rng, &q)?;
    Ok((p, q))
}

/// `len` probability measures, each absolutely continuous with respect to the
/// next; the last has random null points.
pub fn probability_chain<R: Rng>(
    rng: &mut R,
    n: usize,
    len: usize,
) -> Result<Vec<ProbabilityMeasure>> {
    if len == 0 {
        return Err(Error::Domain(
            "a measure chain needs at least one measure".into(),
        ));
    }
    let mut chain = vec![ProbabilityMeasure::normalize(sparse_measure(rng, n)?)?];
    while chain.len() < len {
        let below = nonnegative_below(rng, chain.last().expect("nonempty"))?;
        let below = if below.support().next().is_none() {
            chain.last().expect("nonempty").as_signed().clone()
        } else {
            below
        };
        chain.push(ProbabilityMeasure::normalize(below)?);
    }
    chain.reverse();
    Ok(chain)
}

/// Two nonnegative measures with the same random support, so each is
/// absolutely continuous with respect to the other.
pub fn equivalent_pair<R: Rng>(rng: &mut R, n: usize) -> Result<(SignedMeasure, SignedMeasure)> {
    let keep = support_pattern(rng, n, 0.25);
    let draw = |rng: &mut R| -> Result<SignedMeasure> {
        let w = keep
            .iter()
            .map(|&k| if k { exponential(rng) } else { 0.0 })
            .collect();
        SignedMeasure::new(space(n)?, w)
    };
    let p = draw(rng)?;
    let q = draw(rng)?;
    Ok((p, q))
}

/// Row-stochastic kernel; strict kernels have every entry at least
/// [`STRICT_FLOOR`], others get random zeros in each row.
pub fn kernel<R: Rng>(
    rng: &mut R,
    nx: usize,
    ny: usize,
    strict: bool,
) -> Result<ConditionalKernel> {
    let rows = (0..nx)
        .map(|_| {
            if strict {
                simplex_weights(rng, ny, Some(STRICT_FLOOR))
            } else {
                let keep = support_pattern(rng, ny, 0.3);
                let mut w: Vec<f64> = keep
                    .iter()
                    .map(|&k| if k { exponential(rng) } else { 0.0 })
                    .collect();
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|v| *v /= total);
                Ok(w)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ConditionalKernel::new(space(nx)?, space(ny)?, rows)
}

/// Density of a random polynomial with positive coefficients on `[0, 1]`.
pub fn polynomial_density<R: Rng>(
    rng: &mut R,
    n: usize,
    kind: DensityKind,
) -> Result<DensityMeasure> {
    let degree = rng.gen_range(0..=4);
    let coeffs: Vec<f64> = (0..=degree)
        .map(|k| {
            if k == 0 {
                rng.gen_range(0.1..1.0)
            } else {
                rng.gen_range(0.0..2.0)
            }
        })
        .collect();
    let d = DensityMeasure::from_fn(0.0, 1.0, n, |x| {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    })?;
    match kind {
        DensityKind::Finite => Ok(d),
        DensityKind::Probability => d.normalized(),
    }
}
