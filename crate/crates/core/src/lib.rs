//! Discrete harmonic-analysis toolkit for maximal operators and their commutators.
//!
//! Functions live on finite 1D or 2D lattices. Every supremum "over all cubes"
//! becomes a maximum over the axis-aligned lattice cubes that fit inside the
//! domain, so each computed functional is a lower bound of its continuum
//! counterpart.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] and [`prefix`]: lattices, grid functions, cubes, cube families
//!   and O(1) cube aggregation through compensated summed-area tables.
//! * [`maximal`]: the Hardy–Littlewood maximal function, its restricted and
//!   sharp variants, the maximal commutator, the two nonlinear commutators and
//!   the weighted fractional maximal function. Every operator has a
//!   brute-force reference path next to the accelerated one.
//! * [`weights`]: Muckenhoupt constants and test-weight generators.
//! * [`lipschitz`]: weighted Lipschitz norms and the characterizing
//!   functionals built from `M_Q(b)` and `M#(b χ_Q)`.
//! * [`verification`]: corpora, operator-norm estimation and the identity,
//!   inequality and refinement suites.
//! * [`io`]: CSV / JSON formats shared with the command-line front end.

mod dd;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod io;
pub mod lipschitz;
pub mod maximal;
pub mod par;
pub mod prefix;
pub mod verification;
pub mod weights;

pub use error::{Error, Result};
pub use exponents::Exponents;
pub use grid::{Cube, CubeFamily, FamilyMode, Grid, GridFunction, Rect};
pub use prefix::PrefixTable;
pub use weights::Weight;
