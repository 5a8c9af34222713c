//! High-precision semidefinite programming and exact sum-of-squares
//! certification of lower bounds for rational functions.

pub mod ipm;
pub mod linalg;
pub mod polytope;
pub mod rump;
pub mod sdp;
pub mod sos;
pub mod text;
