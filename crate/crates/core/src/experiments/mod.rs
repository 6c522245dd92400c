//! Scripted experiment protocols.
//!
//! Every experiment is split into independent cells keyed by
//! `(setting, repetition)`. Each cell draws from its own [`RngStream`] and
//! fills a private tally, and cells are merged with integer sums in index
//! order. Results are therefore identical for any rayon thread count.
//!
//! [`RngStream`]: crate::source::RngStream

mod bipartite;
mod ghz;
mod pbwz;

pub use bipartite::{
    run_bipartite_scan, run_chsh, ChshConfig, ChshReport, ChshSetting, ScanConfig, ScanPoint,
    ScanReport,
};
pub use ghz::{
    partner_view, pbs_route, polarizer_passes, run_ghz, run_ghz_suite, GhzConfig, GhzReport,
    GhzResult, PbsChannel, Polarizer, Wiring, FLIPPED_PIECES,
};
pub use pbwz::{run_pbwz, BsmAcceptance, PbwzConfig, PbwzPoint, PbwzReport};

use serde::Serialize;

/// Stream-key namespace per experiment.
pub mod ids {
    pub const BIPARTITE: u64 = 1;
    pub const CHSH: u64 = 2;
    pub const PBWZ: u64 = 3;
    pub const GHZ: u64 = 4;
}

/// Trials per cell when an experiment splits a long run into blocks.
pub const BLOCK_TRIALS: u64 = 1 << 16;

/// `ceil(total / BLOCK_TRIALS)` blocks with sizes summing to `total`.
pub(crate) fn blocks(total: u64) -> impl Iterator<Item = (u64, u64)> {
    let count = total.div_ceil(BLOCK_TRIALS);
    (0..count).map(move |j| {
        let start = j * BLOCK_TRIALS;
        (j, BLOCK_TRIALS.min(total - start))
    })
}

/// Any experiment's output.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentReport {
    Bipartite(ScanReport),
    Chsh(ChshReport),
    Pbwz(PbwzReport),
    Ghz(GhzReport),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_split() {
        let b: Vec<_> = blocks(2 * BLOCK_TRIALS + 5).collect();
        assert_eq!(b, vec![(0, BLOCK_TRIALS), (1, BLOCK_TRIALS), (2, 5)]);
        assert_eq!(blocks(0).count(), 0);
        assert_eq!(blocks(1).collect::<Vec<_>>(), vec![(0, 1)]);
    }
}
