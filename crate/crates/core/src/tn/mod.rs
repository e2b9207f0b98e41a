//! Matrix product states and operators, and a two-site DMRG solver.

pub mod dmrg;
pub mod lanczos;
pub(crate) mod linalg;
pub mod mpo;
pub mod mps;

pub use dmrg::{dmrg_solve, expectation, z_expectations, DmrgConfig, DmrgResult};
pub use lanczos::{lowest_eigenpair, Eigenpair};
pub use mpo::{build_mpo, reduce_by_symmetry, Channel, Mpo, MpoSite, ReducedHamiltonian};
pub use mps::{bond_profile, random_mps, Mps, SiteTensor, PHYS};
