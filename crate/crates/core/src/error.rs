use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sample space: {0}")]
    InvalidSpace(String),

    #[error("sample spaces differ: {0}")]
    SpaceMismatch(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value {value} at {location}")]
    NonFinite { location: String, value: f64 },

    #[error("capacity exceeded: {requested} points requested, at most {max} supported")]
    Capacity { requested: usize, max: usize },

    #[error("invalid probability measure: {0}")]
    InvalidProbability(String),

    /// `measure` charges a point that `reference` leaves null.
    #[error(
        "{measure} is not absolutely continuous with respect to {reference}: witness {witness}"
    )]
    NotAbsolutelyContinuous {
        measure: String,
        reference: String,
        witness: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a theorem's hypotheses, as opposed to malformed
    /// inputs. The CLI reports these as "inapplicable" on user data.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotAbsolutelyContinuous { .. } | Error::Domain(_)
        )
    }

    pub(crate) fn not_ac(
        measure: impl Into<String>,
        reference: impl Into<String>,
        witness: impl Into<String>,
    ) -> Self {
        Error::NotAbsolutelyContinuous {
            measure: measure.into(),
            reference: reference.into(),
            witness: witness.into(),
        }
    }
}
