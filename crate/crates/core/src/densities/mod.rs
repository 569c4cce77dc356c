//! Densities on `m x N` matrices and the shared kernels built on them.

mod catalogue;
mod kernels;
mod matrix;

pub use catalogue::{eval_density, fd_grad, parse_density, Builtin, Density, FnDensity};
pub(crate) use kernels::g_unchecked;
pub use kernels::{
    default_probe_grid, g_function, homogeneity_error, perspective_quadratic, radial_convexity_probe, section, wbar,
    ConvexityReport, Extended, EPS_REG,
};
pub use matrix::{cofactor, det, GramMatrix, MatRef, MatrixF, MatrixX};
