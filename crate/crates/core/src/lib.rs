//! Simulation core for heavy-tailed homothetic distributions and their
//! light-tailed meta counterparts.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure: models
//! are immutable after construction and all randomness comes from a caller
//! supplied [`rand::RngCore`]. File formats, the experiment runner and
//! parallel cloud generation live in the `metacloud` crate.
//!
//! Module map:
//!
//! * [`marginal`] univariate heavy (regularly varying) and light (von Mises)
//!   laws, exact tail evaluation in log space, scaling constants and the
//!   lighter-marginal construction.
//! * [`star`] gauge functions of star-shaped sets, the limit set
//!   `E(lambda, theta)` and the diagonal cross.
//! * [`density`] homothetic densities `f(z) = f_*(n_D(z))` with exact
//!   radial/angular samplers and the limit intensity `h`.
//! * [`meta`] the componentwise meta transformation `K` and friends.
//! * [`partition`] block partitions, regularity diagnostics, biregular
//!   refinement and the C/D/O region labels.
//! * [`perturb`] the perturbed models (axis-block deletion, diagonal
//!   splicing, light mixtures) behind a single [`perturb::Model`] sampler.
//! * [`cloud`] sample clouds and their diagnostics.

#![no_std]
// When std is anywhere in the build graph its inherent float methods make
// the `Float` imports redundant.
#![allow(unused_imports)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cloud;
pub mod density;
pub mod error;
pub mod marginal;
pub mod math;
pub mod meta;
pub mod partition;
pub mod perturb;
pub mod star;

pub use error::{Error, Result};
