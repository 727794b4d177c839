//! Lieb-Robinson-type propagation bounds and exact long-range lattice
//! dynamics on finite lattices.
//!
//! The crate is organised along the quantities it computes:
//!
//! - [`numerics`]: matrix exponentials, circulant spectra, the polylogarithm
//!   on the unit circle, scalar minimisation, power-law fits and histograms.
//! - [`lattice`]: lattice geometry, the normalisation factor, the
//!   reproducibility constant and power-law interaction matrices.
//! - [`bounds`]: four commutator bounds evaluated on a (distance, time) mesh.
//! - [`hopping`]: the free-fermion long-range hopping chain quenched from the
//!   staggered state.
//! - [`channel`]: the binary Ising signalling channel.
//!
//! Every sweep produces a [`SpacetimeGrid`], the common output format.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
mod error;
pub mod grid;
pub mod hopping;
pub mod lattice;
pub mod numerics;

pub use error::{Error, Result};
pub use grid::SpacetimeGrid;
