use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;

/// Identities the checkers verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    RnConstruction,
    ChangeOfMeasure,
    Proportional,
    ChainRule,
    MultiplicativeInverse,
    Linearity,
    Continuity,
    ProductMeasures,
    NonnegFinite,
    UnitMeasure,
    BayesLike,
    InverseBayes,
    IlIdentity,
    ChainRuleDensity,
}

impl TheoremId {
    /// The discrete suite run by `verify --all`.
    pub const ALL: [TheoremId; 13] = [
        TheoremId::RnConstruction,
        TheoremId::ChangeOfMeasure,
        TheoremId::Proportional,
        TheoremId::ChainRule,
        TheoremId::MultiplicativeInverse,
        TheoremId::Linearity,
        TheoremId::Continuity,
        TheoremId::ProductMeasures,
        TheoremId::NonnegFinite,
        TheoremId::UnitMeasure,
        TheoremId::BayesLike,
        TheoremId::InverseBayes,
        TheoremId::IlIdentity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::RnConstruction => "rn_construction",
            TheoremId::ChangeOfMeasure => "change_of_measure",
            TheoremId::Proportional => "proportional",
            TheoremId::ChainRule => "chain_rule",
            TheoremId::MultiplicativeInverse => "multiplicative_inverse",
            TheoremId::Linearity => "linearity",
            TheoremId::Continuity => "continuity",
            TheoremId::ProductMeasures => "product_measures",
            TheoremId::NonnegFinite => "nonneg_finite",
            TheoremId::UnitMeasure => "unit_measure",
            TheoremId::BayesLike => "bayes_like",
            TheoremId::InverseBayes => "inverse_bayes",
            TheoremId::IlIdentity => "il_identity",
            TheoremId::ChainRuleDensity => "chain_rule_density",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        TheoremId::ALL
            .iter()
            .chain(std::iter::once(&TheoremId::ChainRuleDensity))
            .find(|t| t.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown theorem id {s:?}")))
    }
}

/// Result of one checker on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub theorem: TheoremId,
    pub instance: Value,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<String>,
}

impl CheckReport {
    pub fn new(
        theorem: TheoremId,
        instance: Value,
        max_deviation: f64,
        tolerance: f64,
        witness: Option<String>,
    ) -> Self {
        Self {
            theorem,
            instance,
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
            witness,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("reports always serialize")
    }
}

/// Tracks the largest deviation seen across several comparisons, keeping the
/// first witness that attains it.
#[derive(Debug, Default, Clone)]
pub(crate) struct Worst {
    pub deviation: f64,
    pub witness: Option<String>,
}

impl Worst {
    pub fn observe(&mut self, deviation: f64, witness: impl FnOnce() -> Option<String>) {
        let deviation = if deviation.is_nan() {
            f64::INFINITY
        } else {
            deviation
        };
        if deviation > self.deviation {
            self.deviation = deviation;
            self.witness = witness();
        }
    }
}
