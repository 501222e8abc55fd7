//! Families of subsets over which set identities are checked.
//!
//! Small spaces are enumerated exhaustively. Larger spaces get a seeded
//! uniform sample together with every singleton and the full space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Spaces with at most this many points are enumerated exhaustively.
pub const EXHAUSTIVE_MAX_POINTS: usize = 16;

/// Number of random subsets drawn for larger spaces.
pub const SAMPLED_SUBSETS: usize = 1_000;

const DEFAULT_SUBSET_SEED: u64 = 0x5e_ed0f_5e75;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsetFamily {
    Exhaustive {
        points: usize,
    },
    Sampled {
        points: usize,
        samples: usize,
        seed: u64,
    },
}

impl SubsetFamily {
    pub fn for_points(points: usize) -> Self {
        Self::for_points_seeded(points, DEFAULT_SUBSET_SEED)
    }

    pub fn for_points_seeded(points: usize, seed: u64) -> Self {
        if points <= EXHAUSTIVE_MAX_POINTS {
            SubsetFamily::Exhaustive { points }
        } else {
            SubsetFamily::Sampled {
                points,
                samples: SAMPLED_SUBSETS,
                seed,
            }
        }
    }

    pub fn points(&self) -> usize {
        match *self {
            SubsetFamily::Exhaustive { points } | SubsetFamily::Sampled { points, .. } => points,
        }
    }

    /// Number of subsets [`for_each`](Self::for_each) visits.
    pub fn count(&self) -> usize {
        match *self {
            SubsetFamily::Exhaustive { points } => 1 << points,
            SubsetFamily::Sampled {
                points, samples, ..
            } => samples + points + 1,
        }
    }

    /// Calls `visit` with the membership vector of every subset in the family.
    /// Iteration order is fixed for a given family.
    pub fn for_each(&self, mut visit: impl FnMut(&[bool])) {
        match *self {
            SubsetFamily::Exhaustive { points } => {
                let mut members = vec![false; points];
                for bits in 0u32..(1u32 << points) {
                    for (i, m) in members.iter_mut().enumerate() {
                        *m = bits & (1 << i) != 0;
                    }
                    visit(&members);
                }
            }
            SubsetFamily::Sampled {
                points,
                samples,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut members = vec![false; points];
                for _ in 0..samples {
                    for m in members.iter_mut() {
                        *m = rng.gen::<bool>();
                    }
                    visit(&members);
                }
                for i in 0..points {
                    members.iter_mut().for_each(|m| *m = false);
                    members[i] = true;
                    visit(&members);
                }
                members.iter_mut().for_each(|m| *m = true);
                visit(&members);
            }
        }
    }
}
