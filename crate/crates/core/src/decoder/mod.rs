pub mod dem;
pub mod graph;
pub mod mwpm;
pub mod oracle;

pub use dem::{build_dem, build_dem_with, DemMechanism, DetectorErrorModel, Signature};
pub use graph::{MatchingGraph, BOUNDARY};
pub use mwpm::{Correction, Matcher};
pub use oracle::{min_distance, ml_decode_bruteforce};
