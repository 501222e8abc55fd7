//! Radon-Nikodym calculus on finite sample spaces and grid-sampled densities.

pub mod bayes;
pub mod cli;
pub mod density;
pub mod error;
pub mod generate;
pub mod info;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod report;
pub mod rnd;
pub mod subsets;
pub mod theorems;
pub mod tolerance;
pub mod verify;

pub use density::{DensityKind, DensityMeasure, DensityRatio};
pub use error::{Error, Result};
pub use info::{kl_divergence, lautum_information, mutual_information, InfoResult};
pub use kernel::{joint_from, ConditionalKernel, JointMeasure, Xy, Yx};
pub use measure::{mix, ProbabilityMeasure, SampleSpace, SignedMeasure, SubsetMask};
pub use report::{CheckReport, TheoremId};
pub use rnd::{as_equal, as_equal_scaled, rnd, AsEqualityVerdict, MeasureSequence, RndFunction};
