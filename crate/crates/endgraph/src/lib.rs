//! End spaces and edge-end spaces of finitely presented infinite graphs.
//!
//! An infinite graph is described by a finite [`presentation::GraphPresentation`]:
//! a finite core, ray/clique generators, ω-fans, ladders and combs.  On top of
//! that class the crate computes end and edge-end spaces as canonical
//! [`descriptor::SpaceDescriptor`]s, runs the two transformations that relate
//! them (clique expansion and dominator duplication), provides order-tree
//! schemes with their ray spaces, plays the end game with Player II's
//! canonical strategy, and checks special clopen subbases.

#![forbid(unsafe_code)]

pub mod corpus;
pub mod descriptor;
pub mod endspace;
pub mod game;
pub mod ordertree;
pub mod par;
pub mod presentation;
pub mod subbase;
pub mod transform;
