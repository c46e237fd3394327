//! Dense linear algebra for shape operators: symmetric matrices, commutators,
//! Frobenius products, the Gram matrix of a shape operator set and its
//! spectrum, and frame rotations.

mod jacobi;
mod mat;
pub mod random;
mod shape;

pub use jacobi::{inv_sqrt_spd, jacobi_eigen, jacobi_eigen_with, Eigen, EIG_TOL, MAX_SWEEPS};
pub use mat::{commutator, frob_inner, frob_norm2, sym_commutator, GenMat, SymMat};
pub use shape::{
    gram, gram_norm2, lambda_spectrum, rho_perp, rho_perp0, rotate_normal, rotate_tangent, total_s,
    ShapeOperatorSet, Spectrum, ORTHO_TOL, PSD_TOL,
};
