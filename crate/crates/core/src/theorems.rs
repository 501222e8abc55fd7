//! One checker per basic identity of the derivative calculus.
//!
//! Each checker validates the identity's hypotheses (returning a domain error
//! when they fail), evaluates both sides independently and reports the worst
//! deviation found.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::measure::{ensure_same_space, mix, ProbabilityMeasure, SignedMeasure, SubsetMask};
use crate::report::{CheckReport, TheoremId, Worst};
use crate::rnd::{as_equal_scaled, check_subsets, rnd, verify_rn_identity, MeasureSequence};
use crate::subsets::SubsetFamily;
use crate::tolerance;

fn weights(m: &SignedMeasure) -> Value {
    json!(m.weights())
}

/// `P(A) = integral over A of dP/dQ dQ` for every subset `A`.
pub fn check_rn_construction(p: &SignedMeasure, q: &SignedMeasure) -> Result<CheckReport> {
    let g = rnd(p, q)?;
    let check = verify_rn_identity(
        p,
        q,
        g.values(),
        SubsetFamily::for_points(p.len()),
        tolerance::DISCRETE,
    )?;
    Ok(CheckReport::new(
        TheoremId::RnConstruction,
        json!({ "P": weights(p), "Q": weights(q), "subsets": check.subsets_checked }),
        check.max_deviation,
        tolerance::DISCRETE,
        check.witness_string(),
    ))
}

/// `integral over A of f dP = integral over A of f dP/dQ dQ` for every subset.
pub fn check_change_of_measure(
    f: &[f64],
    p: &SignedMeasure,
    q: &SignedMeasure,
) -> Result<CheckReport> {
    let g = rnd(p, q)?;
    if f.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: f.len(),
        });
    }
    if let Some(i) = p.support().chain(q.support()).find(|&i| !f[i].is_finite()) {
        return Err(Error::Domain(format!(
            "f is not finite at charged point {}",
            p.space().label(i)
        )));
    }
    let (pw, qw, gv) = (p.weights(), q.weights(), g.values());
    let check = check_subsets(
        p.space(),
        SubsetFamily::for_points(p.len()),
        tolerance::DISCRETE,
        |members| {
            let (mut lhs, mut rhs, mut magnitude) = (0.0, 0.0, 0.0);
            for (i, _) in members.iter().enumerate().filter(|(_, &m)| m) {
                if pw[i] != 0.0 {
                    let term = f[i] * pw[i];
                    lhs += term;
                    magnitude += term.abs();
                }
                if qw[i] != 0.0 {
                    let term = f[i] * gv[i] * qw[i];
                    rhs += term;
                    magnitude += term.abs();
                }
            }
            (lhs, rhs, magnitude)
        },
    );
    Ok(CheckReport::new(
        TheoremId::ChangeOfMeasure,
        json!({ "f": f, "P": weights(p), "Q": weights(q), "subsets": check.subsets_checked }),
        check.max_deviation,
        tolerance::DISCRETE,
        check.witness_string(),
    ))
}

/// For `Q = c P` with `c > 0`: `dP/dQ = 1/c` a.s. `Q` and `dQ/dP = c` a.s. `P`.
pub fn check_proportional(p: &SignedMeasure, c: f64) -> Result<CheckReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!(
            "proportionality constant must be positive and finite, got {c}"
        )));
    }
    if p.support().next().is_none() {
        return Err(Error::Domain("P must charge at least one point".into()));
    }
    let q = p.scale(c)?;
    if let Some(i) = p.support().find(|&i| q.weight(i) == 0.0) {
        return Err(Error::Domain(format!(
            "c * P underflows to zero at point {}",
            p.space().label(i)
        )));
    }
    let dp_dq = rnd(p, &q)?;
    let dq_dp = rnd(&q, p)?;
    let inv_c = vec![1.0 / c; p.len()];
    let c_vec = vec![c; p.len()];
    let forward = as_equal_scaled(dp_dq.values(), &inv_c, &q, tolerance::DISCRETE)?;
    let backward = as_equal_scaled(dq_dp.values(), &c_vec, p, tolerance::DISCRETE)?;
    let (max_deviation, witness) = if backward.max_deviation > forward.max_deviation {
        (
            backward.max_deviation,
            backward.witness.map(|w| format!("dQ/dP at {w}")),
        )
    } else {
        (
            forward.max_deviation,
            forward.witness.map(|w| format!("dP/dQ at {w}")),
        )
    };
    Ok(CheckReport::new(
        TheoremId::Proportional,
        json!({ "P": weights(p), "c": c }),
        max_deviation,
        tolerance::DISCRETE,
        witness,
    ))
}

/// `dP/dR = dP/dQ * dQ/dR` a.s. `R`, given `P << Q << R`.
pub fn check_chain_rule(
    p: &SignedMeasure,
    q: &SignedMeasure,
    r: &SignedMeasure,
) -> Result<CheckReport> {
    p.ensure_absolutely_continuous(q, "P", "Q (link P << Q)")?;
    q.ensure_absolutely_continuous(r, "Q", "R (link Q << R)")?;
    let direct = rnd(p, r)?;
    let first = rnd(p, q)?;
    let second = rnd(q, r)?;
    let composed: Vec<f64> = first
        .values()
        .iter()
        .zip(second.values())
        .map(|(a, b)| a * b)
        .collect();
    let verdict = as_equal_scaled(direct.values(), &composed, r, tolerance::DISCRETE)?;
    Ok(CheckReport::new(
        TheoremId::ChainRule,
        json!({ "P": weights(p), "Q": weights(q), "R": weights(r) }),
        verdict.max_deviation,
        tolerance::DISCRETE,
        verdict.witness,
    ))
}

/// `dP/dQ = (dQ/dP)^-1` a.s. `Q` for mutually absolutely continuous `P`, `Q`.
pub fn check_multiplicative_inverse(p: &SignedMeasure, q: &SignedMeasure) -> Result<CheckReport> {
    p.ensure_absolutely_continuous(q, "P", "Q")?;
    q.ensure_absolutely_continuous(p, "Q", "P")?;
    let dp_dq = rnd(p, q)?;
    let dq_dp = rnd(q, p)?;
    if let Some(i) = p.support().find(|&i| dq_dp.value(i) <= 0.0) {
        return Err(Error::Domain(format!(
            "dQ/dP = {} is not strictly positive at charged point {}",
            dq_dp.value(i),
            p.space().label(i)
        )));
    }
    let reciprocal: Vec<f64> = dq_dp
        .values()
        .iter()
        .map(|&v| if v == 0.0 { 0.0 } else { 1.0 / v })
        .collect();
    let verdict = as_equal_scaled(dp_dq.values(), &reciprocal, q, tolerance::DISCRETE)?;
    Ok(CheckReport::new(
        TheoremId::MultiplicativeInverse,
        json!({ "P": weights(p), "Q": weights(q) }),
        verdict.max_deviation,
        tolerance::DISCRETE,
        verdict.witness,
    ))
}

/// `dS/dP = sum_t c_t dQ_t/dP` a.s. `P` for `S = sum_t c_t Q_t`, `c_t > 0`.
pub fn check_linearity(
    coeffs: &[f64],
    measures: &[&SignedMeasure],
    p: &SignedMeasure,
) -> Result<CheckReport> {
    if coeffs.len() != measures.len() {
        return Err(Error::LengthMismatch {
            expected: measures.len(),
            found: coeffs.len(),
        });
    }
    if let Some((t, c)) = coeffs
        .iter()
        .enumerate()
        .find(|(_, &c)| !(c > 0.0 && c.is_finite()))
    {
        return Err(Error::Domain(format!(
            "coefficient {} must be a positive real, got {c}",
            t + 1
        )));
    }
    let mut termwise = vec![0.0; p.len()];
    for (t, (&c, q)) in coeffs.iter().zip(measures).enumerate() {
        q.ensure_absolutely_continuous(p, &format!("Q_{}", t + 1), "P")?;
        let g = rnd(q, p)?;
        for (acc, v) in termwise.iter_mut().zip(g.values()) {
            *acc += c * v;
        }
    }
    let s = mix(coeffs, measures)?;
    let ds_dp = rnd(&s, p)?;
    let verdict = as_equal_scaled(ds_dp.values(), &termwise, p, tolerance::DISCRETE)?;
    Ok(CheckReport::new(
        TheoremId::Linearity,
        json!({
            "coeffs": coeffs,
            "Q": measures.iter().map(|m| weights(m)).collect::<Vec<_>>(),
            "P": weights(p),
        }),
        verdict.max_deviation,
        tolerance::DISCRETE,
        verdict.witness,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityOptions {
    /// Deviations must be non-increasing from this term index on.
    pub monotone_from: usize,
    /// Bound on the last term's deviation.
    pub terminal_tolerance: f64,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        Self {
            monotone_from: 0,
            terminal_tolerance: tolerance::CONTINUITY_TERMINAL,
        }
    }
}

/// `max |dQ_k/dP - dQ/dP|` over `P`-charged points, one entry per term.
pub fn continuity_deviations(seq: &MeasureSequence, p: &SignedMeasure) -> Result<Vec<f64>> {
    ensure_same_space(seq.limit().space(), p.space())?;
    for (k, term) in seq.terms().iter().enumerate() {
        term.ensure_absolutely_continuous(p, &format!("Q_{}", k + 1), "P")?;
    }
    seq.limit()
        .ensure_absolutely_continuous(p, "limit Q", "P")?;
    let limit = rnd(seq.limit(), p)?;
    seq.terms()
        .iter()
        .map(|term| {
            let g = rnd(term, p)?;
            Ok(p.support()
                .map(|i| (g.value(i) - limit.value(i)).abs())
                .fold(0.0, f64::max))
        })
        .collect()
}

/// Finite surrogate for `lim dQ_n/dP = dQ/dP` a.s. `P`: the deviation from the
/// limit derivative must be non-increasing past `monotone_from` and the last
/// term must sit within the terminal tolerance.
pub fn check_continuity(
    seq: &MeasureSequence,
    p: &SignedMeasure,
    options: ContinuityOptions,
) -> Result<CheckReport> {
    if seq.len() < 3 {
        return Err(Error::Domain(format!(
            "a sequence needs at least 3 explicit terms, got {}",
            seq.len()
        )));
    }
    let deviations = continuity_deviations(seq, p)?;
    let limit = rnd(seq.limit(), p)?;
    let scale = p
        .support()
        .map(|i| limit.value(i).abs())
        .fold(1.0, f64::max);
    let slack = tolerance::DISCRETE * scale;

    let start = options.monotone_from.max(1);
    let increase_at =
        (start..deviations.len()).find(|&k| deviations[k] > deviations[k - 1] + slack);
    let monotone = increase_at.is_none();
    let terminal = *deviations.last().expect("at least 3 terms");
    let terminal_ok = terminal <= options.terminal_tolerance + slack;
    let witness = match increase_at {
        Some(k) => Some(format!("deviation increases at term {}", k + 1)),
        None if !terminal_ok => Some(format!("last term {}", deviations.len())),
        None => None,
    };
    let mut report = CheckReport::new(
        TheoremId::Continuity,
        json!({
            "P": weights(p),
            "limit": weights(seq.limit()),
            "terms": seq.len(),
            "deviations": deviations,
            "monotone": monotone,
        }),
        terminal,
        options.terminal_tolerance,
        witness,
    );
    report.pass = monotone && terminal_ok;
    Ok(report)
}

/// `d(P1 P2)/d(Q1 Q2)(x1, x2) = dP1/dQ1(x1) * dP2/dQ2(x2)` a.s. `Q1 Q2`.
pub fn check_product_measures(
    p1: &SignedMeasure,
    p2: &SignedMeasure,
    q1: &SignedMeasure,
    q2: &SignedMeasure,
) -> Result<CheckReport> {
    p1.ensure_absolutely_continuous(q1, "P1", "Q1")?;
    p2.ensure_absolutely_continuous(q2, "P2", "Q2")?;
    let joint_p = p1.product(p2)?;
    let joint_q = q1.product(q2)?;
    let direct = rnd(&joint_p, &joint_q)?;
    let g1 = rnd(p1, q1)?;
    let g2 = rnd(p2, q2)?;
    let outer: Vec<f64> = g1
        .values()
        .iter()
        .flat_map(|a| g2.values().iter().map(move |b| a * b))
        .collect();
    let verdict = as_equal_scaled(direct.values(), &outer, &joint_q, tolerance::DISCRETE)?;
    Ok(CheckReport::new(
        TheoremId::ProductMeasures,
        json!({ "P1": weights(p1), "P2": weights(p2), "Q1": weights(q1), "Q2": weights(q2) }),
        verdict.max_deviation,
        tolerance::DISCRETE,
        verdict.witness,
    ))
}

/// `P({x : 0 <= dP/dQ(x) < inf}) = 1` for a probability `P << Q`.
pub fn check_nonneg_finite(p: &ProbabilityMeasure, q: &SignedMeasure) -> Result<CheckReport> {
    if let Some(i) = q.weights().iter().position(|&w| w < 0.0) {
        return Err(Error::Domain(format!(
            "reference measure has negative weight at point {}",
            q.space().label(i)
        )));
    }
    let g = rnd(p, q)?;
    let members = g
        .values()
        .iter()
        .map(|&v| (0.0..f64::INFINITY).contains(&v))
        .collect();
    let good = SubsetMask::new(p.space().clone(), members)?;
    let mass = p.measure_of(&good)?;
    let deviation = tolerance::sum_deviation(mass, 1.0, 1.0);
    let mut worst = Worst::default();
    worst.observe(deviation, || {
        g.values()
            .iter()
            .position(|&v| !(0.0..f64::INFINITY).contains(&v))
            .map(|i| p.space().label(i).to_owned())
    });
    Ok(CheckReport::new(
        TheoremId::NonnegFinite,
        json!({ "P": weights(p), "Q": weights(q), "mass": mass }),
        worst.deviation,
        tolerance::DISCRETE,
        worst.witness,
    ))
}
