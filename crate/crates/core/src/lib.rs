//! Reinforced random walks and the exact, numerical and statistical tools
//! used to study them.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] and [`reinforcement`]: graphs and the weight state shared by all walks.
//! * [`dynamics`]: step engines for edge- and vertex-reinforced walks, biased
//!   variants, multiple walkers and trajectory recording.
//! * [`urns`]: Pólya-type urns and the exact two-player urn computations.
//! * [`env`]: random walks in random environment, Beta environments,
//!   effective resistance and recurrence criteria.
//! * [`ode`]: the stochastic-approximation flow of the biased walk on the triangle.
//! * [`stats`]: ensemble estimators built on top of the above.
//!
//! All randomness flows through [`rng::SimRng`]; ensembles derive one stream
//! per replicate from a master seed (see [`rng::stream_rng`]) and are executed
//! by [`ensemble::map_replicates`].

pub mod dense;
pub mod dynamics;
pub mod ensemble;
pub mod env;
pub mod error;
pub mod graph;
pub mod ode;
pub mod quad;
pub mod reinforcement;
pub mod rng;
pub mod special;
pub mod stats;
pub mod urns;

pub use error::{Error, Result};
pub use graph::{DirectedEdge, EdgeKey, Graph, GraphKind, GraphSpec, NodeId};
