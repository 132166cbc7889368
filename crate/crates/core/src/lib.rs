//! Executable order theory for classical and quantum observables.
//!
//! The crate works entirely with finite, desk-scale structures:
//!
//! * [`lattice`]: finite bounded (ortho)lattices and their order-theoretic predicates.
//! * [`stone`]: dual ideals, quasipoints and the basis of the Stone spectrum.
//! * [`spectral`]: bounded spectral families with values in a finite lattice.
//! * [`observable`]: observable functions, completely increasing functions and
//!   reconstruction of a spectral family from its observable function.
//! * [`linalg`] and [`vn`]: small Hermitian matrices, operator spectral families,
//!   spectral order, commutants, cores/supports and the restriction maps.
//! * [`classical`]: spectral families in the open-set lattice of a finite space.
//! * [`presheaf`] and [`context`]: presheaves on lattices, sheaf checks, stalks,
//!   context diagrams and contextual observables.
//! * [`suite`]: the property suite run by the CLI and the acceptance tests.

pub mod classical;
pub mod context;
pub mod corpus;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod observable;
pub mod presheaf;
pub mod spectral;
pub mod stone;
pub mod suite;
pub mod vn;

pub use error::{Error, Result};
pub use lattice::{Elem, ElemSet, Lattice};

/// Outcome of a property check: either it holds, or the first witness found.
#[derive(Debug, Clone, PartialEq)]
pub enum Check<W> {
    Holds,
    Fails(W),
}

impl<W> Check<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Check::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Check::Holds => None,
            Check::Fails(w) => Some(w),
        }
    }

    pub fn map<V, F: FnOnce(W) -> V>(self, f: F) -> Check<V> {
        match self {
            Check::Holds => Check::Holds,
            Check::Fails(w) => Check::Fails(f(w)),
        }
    }
}
