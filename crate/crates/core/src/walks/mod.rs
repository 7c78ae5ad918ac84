//! Non-backtracking walks: enumeration, loop erasure, the walk series and
//! open-walk sums.

pub mod enumerate;
pub mod erasure;
pub mod open;
pub mod operator;
pub mod series;
pub mod walk;

pub use enumerate::{enumerate_closed_nb, enumerate_loops, WalkEnumerator, MAX_LEN_CAP};
pub use erasure::{
    classify_tnb, erase, from_pyramid, glue, loop_index, to_pyramid, EdgeSharing, EraseOutcome, ErasureState, TnbClass,
    WalkPyramid,
};
pub use open::{open_walk_sum_enumerate, open_walk_sum_operator, Closure, OpenSum};
pub use operator::{spectral_radius, tail_bound, transfer_operator, walk_series_operator};
pub use series::{not_tnb_sums, signed_counts, walk_series, CancellationReport, TailBound, WalkSeries};
pub use walk::DirectedWalk;

/// Default truncation length.
pub const DEFAULT_MAX_LEN: usize = 24;
