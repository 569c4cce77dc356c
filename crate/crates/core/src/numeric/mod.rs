//! Small self-contained numerical kernels shared by the engines.

pub mod lbfgs;
pub mod nelder_mead;
pub mod quadrature;
pub mod roots;
pub mod sparse;
