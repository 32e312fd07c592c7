//! Finite-scale models of twisted group algebras, proper actions and their
//! generalized fixed-point algebras.
//!
//! * [`group`] and [`cocycle`]: finite abelian groups, lattice windows and exact 2-cocycles.
//! * [`twisted`]: the twisted convolution algebra `C[G,ω]` and its regular representations.
//! * [`proper`]: brackets, fixed-point integrals, crossed products and module checks.
//! * [`deformation`]: the deformed product `×_J` on sampled functions.
//! * [`torus`]: Laurent operators, sequence modules over `Z^k` and the torus examples.

pub mod cocycle;
pub mod deformation;
pub mod error;
pub mod group;
pub mod linalg;
pub mod phase;
pub mod proper;
pub mod torus;
pub mod twisted;

pub use cocycle::{coboundary, find_similarity, similar, Bicharacter, Cocycle, CocycleForm};
pub use error::{Error, Result};
pub use group::{dual_pair, lattice_window, make_group, GroupDescriptor, GroupElement, WindowSum};
pub use phase::Phase;
