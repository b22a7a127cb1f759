//! Faithful representations `H(t,x,p) = sup_a { p f(t,x,a) - l(t,x,a) }` of
//! convex Hamiltonians, built from epigraphs of the conjugate Lagrangian via
//! the projection map and Steiner selections, with the numeric checks that
//! go with them.

pub mod builder;
pub mod cli;
pub mod compactness;
pub mod convex_geom;
pub mod error;
pub mod expr;
pub mod fenchel;
pub mod report;
pub mod stability;
pub mod zoo;
