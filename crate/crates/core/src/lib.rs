//! Discrete-event simulator for mobility-aware routing in swarms of
//! autonomous agents.
//!
//! Swarm mobility feeds each node's location service, whose trajectory
//! predictions drive two mobility-aware protocols: predictive link-state
//! routing and stigmergic path scores. The [`harness`] module builds the
//! reference scenario and runs packet-delivery-ratio campaigns.

pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod location;
pub mod mobility;
pub mod routing;

pub use geometry::Vec3;
pub use routing::NodeId;
