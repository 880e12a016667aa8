//! Shape functions, quadrature and DOF maps.

pub mod dofmap;
pub mod hermite;
pub mod lagrange;
pub mod quadrature;

pub use dofmap::{build_dofmap, Dirichlet, DofMap, FsiSpaces, SpaceKind};
pub use hermite::{bfs_eval, bfs_interpolate, bfs_interpolate_deriv, hermite_eval, BfsElement};
pub use lagrange::{q_basis, LagrangeBasis};
pub use quadrature::{gauss_1d, gauss_rule, QuadratureRule};
