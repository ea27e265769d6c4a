//! Comparison tests: the classical C2ST, SBC and TARP.

mod c2st;
mod sbc;
mod tarp;

pub use c2st::{c2st_from_scores, c2st_test, c2st_test_sampled};
pub use sbc::{sbc_rank, sbc_ranks, sbc_test, SbcConfig};
pub use tarp::{
    tarp_coverage, tarp_coverages, tarp_test, TarpConfig, TarpReference, TARP_PILOT_DRAWS,
};
