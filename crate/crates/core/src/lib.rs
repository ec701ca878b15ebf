//! Solvers for the diameter-two green bridges placement problem with edge costs.
//!
//! Given a graph with edge costs, a list of habitats (vertex sets) and a set
//! of forced edges, find a cheapest edge set containing the forced edges such
//! that every habitat has diameter at most two in the subgraph it induces
//! under the chosen edges.

pub mod generate;
pub mod geometry;
pub mod hardness;
pub mod intersect4;
pub mod dispatch;
pub mod drawing;
pub mod error;
pub mod exact;
pub mod model;
pub mod planar3;
pub mod preprocess;
pub mod zones3;

pub use model::{Cost, Edge, EdgeId, Instance, InstanceStats, ModelError, Solution, SolutionStatus, VertexId};
