//! Staggered quantum walks on tessellated graphs.
//!
//! A walk is defined by a graph, an ordered cover of tessellations (partitions of the
//! vertex set into cliques called polygons) and a unit state per polygon. Each
//! tessellation contributes a reflection `2 Σ |P⟩⟨P| − I`; one step of the walk is the
//! product of the reflections in cover order.
//!
//! The crate implements the two intersection rewrites on such walks:
//!
//! - **expansion** replaces a vertex `u` by a `k`-clique carrying a clique state
//!   `|ũ⟩`; the expanded walk acts on lifted states exactly as the original walk
//!   and gains `k − 1` eigenvectors with eigenvalue `(−1)^l`;
//! - **reduction** collapses a multi-vertex polygon intersection back to one vertex
//!   when every tessellation's amplitudes on it are proportional.
//!
//! Around them sit a dense spectral oracle ([`spectral`]) that checks the eigen-relations
//! between the two walks, and a spatial-search driver on the clique-grid torus
//! ([`search`]).
//!
//! ```
//! use sqw::{evolution::star_s3_walk, transform::{expand_walk, ExpansionSpec}};
//! use sqw::spectral::verify_theorem2;
//!
//! let walk = star_s3_walk();
//! let expanded = expand_walk(&walk, &ExpansionSpec::uniform(3, 3).unwrap()).unwrap();
//! let report = verify_theorem2(&walk, &expanded.walk, &expanded.link).unwrap();
//! assert!(report.pass);
//! ```

pub mod cli;
pub mod error;
pub mod evolution;
pub mod graph;
pub mod io;
pub mod random;
pub mod search;
pub mod spectral;
pub mod state;
pub mod transform;

pub use error::{Error, ErrorKind, Result};
pub use evolution::{EvolutionOperator, LocalOperator, Walk};
pub use graph::{Graph, Polygon, Tessellation, TessellationCover, VertexId, VertexMap};
pub use state::{CliqueState, PolygonState, StateVector, C64};
