//! Broadcast simulation for geometric radio networks in which transmissions
//! are received only inside an annulus `(s, r]` and any transmitter within
//! distance `s` of a listener blocks its reception.
//!
//! The crate covers the designed-topology lattice algorithms, neighbourhood
//! discovery, spokesman election and the unknown-topology broadcast
//! algorithms, together with brute-force oracles used to audit them.

pub mod discovery;
pub mod engine;
pub mod geometry;
pub mod lattice;
pub mod oracle;
pub mod partition;
pub mod scenario;
pub mod spokesmen;
pub mod unknown;
