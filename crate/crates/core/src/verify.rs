//! Runs checkers over seeded random instances or user-supplied fixtures and
//! assembles the report.

use std::collections::BTreeMap;
use std::sync::Arc;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::bayes::{
    check_bayes_like, check_inverse_bayes, check_unit_measure, check_unit_measure_via_inverse,
};
use crate::density::{check_chain_rule_density, DensityKind, DensityMeasure};
use crate::error::{Error, Result};
use crate::generate::{self, rng_for};
use crate::info::check_il_identity;
use crate::kernel::ConditionalKernel;
use crate::measure::{ProbabilityMeasure, SignedMeasure};
use crate::report::{CheckReport, TheoremId};
use crate::rnd::MeasureSequence;
use crate::theorems::{
    check_chain_rule, check_change_of_measure, check_continuity, check_linearity,
    check_multiplicative_inverse, check_nonneg_finite, check_product_measures, check_proportional,
    check_rn_construction, ContinuityOptions,
};
use crate::tolerance;

/// Constants exercised when a proportional fixture is supplied.
pub const PROPORTIONAL_CONSTANTS: [f64; 4] = [0.5, 1.0, 2.0, 10.0];

/// Grid size for generated density instances.
const DENSITY_GRID: usize = 201;

/// Fixtures read from files. Theorems whose inputs are present run once per
/// supplied instance instead of on generated ones.
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub measures: Vec<SignedMeasure>,
    pub kernel: Option<(ConditionalKernel, ProbabilityMeasure)>,
    pub references: Vec<(String, SignedMeasure)>,
    pub densities: Vec<DensityMeasure>,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub theorems: Vec<TheoremId>,
    pub seed: u64,
    pub trials: usize,
    pub tolerances: BTreeMap<TheoremId, f64>,
    pub inputs: Inputs,
}

impl VerifyOptions {
    pub fn new(theorems: Vec<TheoremId>, seed: u64, trials: usize) -> Self {
        Self {
            theorems,
            seed,
            trials,
            tolerances: BTreeMap::new(),
            inputs: Inputs::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Generated,
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub max_deviation: f64,
    pub witness: Option<String>,
    pub instance: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremSection {
    pub theorem: TheoremId,
    pub source: Source,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub inapplicable: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub first_failure: Option<Failure>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inapplicable_reasons: Vec<String>,
}

impl TheoremSection {
    pub fn pass(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub pass: bool,
    pub theorems: Vec<TheoremSection>,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn section(&self, theorem: TheoremId) -> Option<&TheoremSection> {
        self.theorems.iter().find(|s| s.theorem == theorem)
    }
}

enum Outcome {
    Checked(CheckReport),
    Inapplicable(String),
    /// A generated instance the checker rejected; counted as a failure.
    Rejected(String),
}

fn default_tolerance(theorem: TheoremId) -> f64 {
    match theorem {
        TheoremId::Continuity => tolerance::CONTINUITY_TERMINAL,
        TheoremId::IlIdentity => tolerance::INFO_IDENTITY,
        TheoremId::ChainRuleDensity => tolerance::DENSITY_CHAIN,
        _ => tolerance::DISCRETE,
    }
}

fn with_tolerance(mut report: CheckReport, tol: f64) -> CheckReport {
    if report.theorem != TheoremId::Continuity {
        report.tolerance = tol;
        report.pass = report.max_deviation <= tol;
    }
    report
}

fn worse(a: CheckReport, b: CheckReport) -> CheckReport {
    let dev = |r: &CheckReport| {
        if r.max_deviation.is_nan() {
            f64::INFINITY
        } else {
            r.max_deviation
        }
    };
    if dev(&b) > dev(&a) {
        b
    } else {
        a
    }
}

fn unit_measure_both_routes(k: &ConditionalKernel, px: &ProbabilityMeasure) -> Result<CheckReport> {
    Ok(worse(
        check_unit_measure(k, px)?,
        check_unit_measure_via_inverse(k, px)?,
    ))
}

fn continuity_sequence(q: &SignedMeasure, direction: &SignedMeasure) -> Result<MeasureSequence> {
    let terms = (0..=6)
        .map(|k| {
            let eps = 10f64.powi(-k);
            let w = q
                .weights()
                .iter()
                .zip(direction.weights())
                .map(|(a, d)| a + eps * d)
                .collect();
            SignedMeasure::new(Arc::clone(q.space()), w)
        })
        .collect::<Result<Vec<_>>>()?;
    MeasureSequence::new(terms, q.clone())
}

fn generated_trial(theorem: TheoremId, rng: &mut ChaCha8Rng, tol: f64) -> Result<CheckReport> {
    match theorem {
        TheoremId::RnConstruction => {
            let n = rng.gen_range(2..=12);
            let (p, q) = generate::ac_pair(rng, n)?;
            check_rn_construction(&p, &q)
        }
        TheoremId::ChangeOfMeasure => {
            let n = rng.gen_range(2..=12);
            let (p, q) = generate::ac_pair(rng, n)?;
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            check_change_of_measure(&f, &p, &q)
        }
        TheoremId::Proportional => {
            let n = rng.gen_range(1..=12);
            let p =
                SignedMeasure::from_weights((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())?;
            let c = if rng.gen_bool(0.5) {
                *PROPORTIONAL_CONSTANTS.choose(rng).expect("nonempty")
            } else {
                10f64.powf(rng.gen_range(-2.0..2.0))
            };
            check_proportional(&p, c)
        }
        TheoremId::ChainRule => {
            let n = rng.gen_range(2..=12);
            let chain = generate::probability_chain(rng, n, 2)?;
            let (q, r) = (chain[0].as_signed(), chain[1].as_signed());
            let r = r.scale(rng.gen_range(0.5..4.0))?;
            let p = generate::signed_below(rng, q)?;
            check_chain_rule(&p, q, &r)
        }
        TheoremId::MultiplicativeInverse => {
            let n = rng.gen_range(1..=12);
            let (p, q) = generate::equivalent_pair(rng, n)?;
            check_multiplicative_inverse(&p, &q)
        }
        TheoremId::Linearity => {
            let n = rng.gen_range(2..=12);
            let p = generate::sparse_measure(rng, n)?;
            let t = rng.gen_range(1..=5);
            let measures = (0..t)
                .map(|_| generate::signed_below(rng, &p))
                .collect::<Result<Vec<_>>>()?;
            let coeffs: Vec<f64> = (0..t).map(|_| rng.gen_range(0.1..3.0)).collect();
            let refs: Vec<&SignedMeasure> = measures.iter().collect();
            check_linearity(&coeffs, &refs, &p)
        }
        TheoremId::Continuity => {
            let n = rng.gen_range(2..=12);
            let p = generate::sparse_measure(rng, n)?;
            let q = generate::signed_below(rng, &p)?;
            let direction: Vec<f64> = p
                .weights()
                .iter()
                .map(|&w| w * rng.gen_range(-1.0..=1.0))
                .collect();
            let direction = SignedMeasure::new(Arc::clone(p.space()), direction)?;
            let seq = continuity_sequence(&q, &direction)?;
            check_continuity(
                &seq,
                &p,
                ContinuityOptions {
                    terminal_tolerance: tol,
                    ..ContinuityOptions::default()
                },
            )
        }
        TheoremId::ProductMeasures => {
            let n = rng.gen_range(1..=6);
            let (p1, q1) = generate::ac_pair(rng, n)?;
            let n = rng.gen_range(1..=6);
            let (p2, q2) = generate::ac_pair(rng, n)?;
            check_product_measures(&p1, &p2, &q1, &q2)
        }
        TheoremId::NonnegFinite => {
            let n = rng.gen_range(1..=12);
            let q = generate::sparse_measure(rng, n)?;
            let below = generate::nonnegative_below(rng, &q)?;
            let p = if below.support().next().is_none() {
                q.clone()
            } else {
                below
            };
            check_nonneg_finite(&ProbabilityMeasure::normalize(p)?, &q)
        }
        TheoremId::UnitMeasure
        | TheoremId::BayesLike
        | TheoremId::InverseBayes
        | TheoremId::IlIdentity => {
            let (nx, ny) = (rng.gen_range(2..=6), rng.gen_range(2..=6));
            let k = generate::kernel(rng, nx, ny, true)?;
            let px = generate::probability(rng, nx, true)?;
            match theorem {
                TheoremId::UnitMeasure => unit_measure_both_routes(&k, &px),
                TheoremId::BayesLike => check_bayes_like(&k, &px),
                TheoremId::InverseBayes => check_inverse_bayes(&k, &px),
                _ => {
                    let py = k.output_marginal(&px)?;
                    let scale = rng.gen_range(0.5..4.0);
                    let q = generate::probability(rng, ny, true)?.scale(scale)?;
                    let references = vec![
                        ("P_Y".to_string(), py.into_signed()),
                        (
                            "counting".to_string(),
                            SignedMeasure::counting(Arc::clone(k.output_space())),
                        ),
                        ("random".to_string(), q),
                    ];
                    Ok(check_il_identity(&k, &px, &references)?.to_check_report(&k, &px))
                }
            }
        }
        TheoremId::ChainRuleDensity => {
            let mut draw = || generate::polynomial_density(rng, DENSITY_GRID, DensityKind::Finite);
            let (p, q, r) = (draw()?, draw()?, draw()?);
            check_chain_rule_density(&p, &q, &r)
        }
    }
}

fn needs(theorem: TheoremId, what: &str, have: usize, want: usize) -> Result<()> {
    if have < want {
        return Err(Error::Parse(format!(
            "{theorem} needs at least {want} supplied {what}, got {have}"
        )));
    }
    Ok(())
}

/// Instances built from files; `None` when the theorem's inputs were not given.
fn supplied_trials(
    theorem: TheoremId,
    inputs: &Inputs,
    tol: f64,
) -> Result<Option<Vec<Result<CheckReport>>>> {
    let m = &inputs.measures;
    let kernel_theorem = matches!(
        theorem,
        TheoremId::UnitMeasure
            | TheoremId::BayesLike
            | TheoremId::InverseBayes
            | TheoremId::IlIdentity
    );
    if kernel_theorem {
        let Some((k, px)) = &inputs.kernel else {
            return Ok(None);
        };
        let report = match theorem {
            TheoremId::UnitMeasure => unit_measure_both_routes(k, px),
            TheoremId::BayesLike => check_bayes_like(k, px),
            TheoremId::InverseBayes => check_inverse_bayes(k, px),
            _ => (|| {
                let mut references = vec![
                    ("P_Y".to_string(), k.output_marginal(px)?.into_signed()),
                    (
                        "counting".to_string(),
                        SignedMeasure::counting(Arc::clone(k.output_space())),
                    ),
                ];
                references.extend(inputs.references.iter().cloned());
                Ok(check_il_identity(k, px, &references)?.to_check_report(k, px))
            })(),
        };
        return Ok(Some(vec![report]));
    }
    if theorem == TheoremId::ChainRuleDensity {
        if inputs.densities.is_empty() {
            return Ok(None);
        }
        needs(theorem, "densities", inputs.densities.len(), 3)?;
        let d = &inputs.densities;
        return Ok(Some(vec![check_chain_rule_density(&d[0], &d[1], &d[2])]));
    }
    if m.is_empty() {
        return Ok(None);
    }
    let trials = match theorem {
        TheoremId::RnConstruction => {
            needs(theorem, "measures", m.len(), 2)?;
            vec![check_rn_construction(&m[0], &m[1])]
        }
        TheoremId::ChangeOfMeasure => {
            needs(theorem, "measures", m.len(), 2)?;
            let f = match m.get(2) {
                Some(f) => f.weights().to_vec(),
                None => vec![1.0; m[0].len()],
            };
            vec![check_change_of_measure(&f, &m[0], &m[1])]
        }
        TheoremId::Proportional => PROPORTIONAL_CONSTANTS
            .iter()
            .map(|&c| check_proportional(&m[0], c))
            .collect(),
        TheoremId::ChainRule => {
            needs(theorem, "measures", m.len(), 3)?;
            vec![check_chain_rule(&m[0], &m[1], &m[2])]
        }
        TheoremId::MultiplicativeInverse => {
            needs(theorem, "measures", m.len(), 2)?;
            vec![check_multiplicative_inverse(&m[0], &m[1])]
        }
        TheoremId::Linearity => {
            needs(theorem, "measures", m.len(), 2)?;
            let (p, terms) = m.split_last().expect("at least two");
            let refs: Vec<&SignedMeasure> = terms.iter().collect();
            vec![check_linearity(&vec![1.0; refs.len()], &refs, p)]
        }
        TheoremId::Continuity => {
            needs(theorem, "measures", m.len(), 5)?;
            let (p, rest) = m.split_last().expect("nonempty");
            let (limit, terms) = rest.split_last().expect("nonempty");
            let options = ContinuityOptions {
                terminal_tolerance: tol,
                ..ContinuityOptions::default()
            };
            vec![MeasureSequence::new(terms.to_vec(), limit.clone())
                .and_then(|seq| check_continuity(&seq, p, options))]
        }
        TheoremId::ProductMeasures => {
            needs(theorem, "measures", m.len(), 4)?;
            vec![check_product_measures(&m[0], &m[1], &m[2], &m[3])]
        }
        TheoremId::NonnegFinite => {
            needs(theorem, "measures", m.len(), 2)?;
            vec![ProbabilityMeasure::try_from(m[0].clone())
                .map_err(|e| Error::Domain(format!("P must be a probability measure: {e}")))
                .and_then(|p| check_nonneg_finite(&p, &m[1]))]
        }
        _ => unreachable!("kernel and density theorems handled above"),
    };
    Ok(Some(trials))
}

fn summarize(
    theorem: TheoremId,
    source: Source,
    tol: f64,
    outcomes: Vec<Outcome>,
) -> TheoremSection {
    let mut section = TheoremSection {
        theorem,
        source,
        trials: outcomes.len(),
        passed: 0,
        failed: 0,
        inapplicable: 0,
        max_deviation: 0.0,
        tolerance: tol,
        first_failure: None,
        inapplicable_reasons: Vec::new(),
    };
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Outcome::Checked(report) => {
                let dev = if report.max_deviation.is_nan() {
                    f64::INFINITY
                } else {
                    report.max_deviation
                };
                section.max_deviation = section.max_deviation.max(dev);
                if report.pass {
                    section.passed += 1;
                } else {
                    section.failed += 1;
                    section.first_failure.get_or_insert(Failure {
                        trial,
                        max_deviation: report.max_deviation,
                        witness: report.witness,
                        instance: report.instance,
                    });
                }
            }
            Outcome::Inapplicable(reason) => {
                section.inapplicable += 1;
                section.inapplicable_reasons.push(reason);
            }
            Outcome::Rejected(reason) => {
                section.failed += 1;
                section.first_failure.get_or_insert(Failure {
                    trial,
                    max_deviation: f64::INFINITY,
                    witness: Some(reason),
                    instance: Value::Null,
                });
            }
        }
    }
    section
}

/// Stream index for trial `trial` of `theorem`.
fn stream(theorem: TheoremId, trial: usize) -> u64 {
    ((theorem as u64) << 32) | trial as u64
}

/// Runs every selected theorem. Errors only for unusable input (wrong space,
/// too few fixtures); precondition failures on supplied fixtures are reported
/// as inapplicable.
pub fn run_verify(options: &VerifyOptions) -> Result<VerifyReport> {
    let mut theorems = options.theorems.clone();
    theorems.sort();
    theorems.dedup();
    let tol_for = |t: TheoremId| {
        options
            .tolerances
            .get(&t)
            .copied()
            .unwrap_or_else(|| default_tolerance(t))
    };

    let mut sections = Vec::with_capacity(theorems.len());
    for &theorem in &theorems {
        let tol = tol_for(theorem);
        let section = match supplied_trials(theorem, &options.inputs, tol)? {
            Some(results) => {
                let outcomes = results
                    .into_iter()
                    .map(|r| match r {
                        Ok(report) => Ok(Outcome::Checked(with_tolerance(report, tol))),
                        Err(e) if e.is_precondition() => Ok(Outcome::Inapplicable(e.to_string())),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<Vec<_>>>()?;
                summarize(theorem, Source::Supplied, tol, outcomes)
            }
            None => {
                let outcomes: Vec<Outcome> = (0..options.trials)
                    .into_par_iter()
                    .map(|trial| {
                        let mut rng = rng_for(options.seed, stream(theorem, trial));
                        match generated_trial(theorem, &mut rng, tol) {
                            Ok(report) => Outcome::Checked(with_tolerance(report, tol)),
                            Err(e) => Outcome::Rejected(e.to_string()),
                        }
                    })
                    .collect();
                summarize(theorem, Source::Generated, tol, outcomes)
            }
        };
        debug!(
            "{}: {} passed, {} failed, {} inapplicable",
            theorem, section.passed, section.failed, section.inapplicable
        );
        sections.push(section);
    }
    let pass = sections.iter().all(TheoremSection::pass);
    info!("verify finished, pass = {pass}");
    Ok(VerifyReport {
        seed: options.seed,
        trials: options.trials,
        pass,
        theorems: sections,
    })
}
