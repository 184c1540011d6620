//! Diversity-aware nearest neighbor search through welfare objectives.

pub mod attributes;
pub mod baselines;
pub mod bench;
pub mod data;
pub mod error;
pub mod metrics;
pub mod multi;
pub mod oracle;
pub mod reference;
pub mod selection;
pub mod similarity;
pub mod single;
pub mod vectors;
pub mod verify;
pub mod welfare;

pub use attributes::AttributeTable;
pub use error::{Error, Result};
pub use oracle::{AlphaDegraded, AlphaOracleConfig, ExactScan, Neighbor, NeighborOracle, RankedList};
pub use selection::{Corpus, Selection};
pub use similarity::{similarity, QueryScorer, Similarity};
pub use vectors::VectorSet;
pub use welfare::{log_nsw, utilities, welfare, WelfareParams};
