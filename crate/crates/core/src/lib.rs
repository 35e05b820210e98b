//! Community detection in multiplex networks with locally adaptive random
//! transitions.
//!
//! The pipeline is: build the supra-adjacency of a [`Multiplex`] with
//! inter-layer weights given by shared neighborhoods, run a short random walk
//! on it, turn the `t`-step transition rows into a node-layer dissimilarity,
//! and cluster node-layers by connectivity-constrained average linkage. The
//! dendrogram level with the highest multiplex modularity is returned.
//!
//! ```
//! use lart::{detect, LartConfig, Multiplex};
//!
//! let m = Multiplex::from_edges(4, 2, [(0, 0, 1), (0, 2, 3), (1, 0, 1), (1, 2, 3)]).unwrap();
//! let result = detect(&m, &LartConfig::default()).unwrap();
//! assert_eq!(result.partition.num_communities(), 2);
//! ```

pub mod bench;
pub mod cluster;
pub mod dissim;
pub mod error;
pub mod matrix;
pub mod metrics;
pub mod multiplex;
pub mod supra;
pub mod synthgen;
pub mod walk;

pub use cluster::{detect, Dendrogram, Detection, LartConfig, Merge, Partition};
pub use dissim::DissimilarityMatrix;
pub use error::{LartError, Result};
pub use matrix::DenseMatrix;
pub use metrics::{fowlkes_mallows, nmi};
pub use multiplex::{Multiplex, MultiplexBuilder, NodeLayer};
pub use supra::{Coupling, SupraAdjacency};
pub use synthgen::{GroundTruth, Scenario, ScenarioConfig};
pub use walk::{StationaryDistribution, TransitionMatrix, TransitionPowers};
