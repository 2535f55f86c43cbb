//! Exact integer linear algebra: matrices, lattices in canonical Hermite
//! normal form, characteristic polynomials and finite-order tests.

mod finite_order;
mod lattice;
mod matrix;
mod polynomial;

pub use finite_order::{
    cyclotomic_exponent, exterior_power, is_unipotent, matrix_order, order_of, plucker,
    unipotent_exponent, MatrixOrder,
};
pub use lattice::{hnf, integer_kernel, matrix_kernel, saturate, Lattice};
pub use matrix::{content, dot, norm_sq, IntMatrix, UnimodularMatrix};
pub use polynomial::{
    char_poly, cyclotomic, cyclotomic_orders_dividing, euler_phi, is_product_of_cyclotomics,
    orders_with_phi_at_most, rational_factors, CyclotomicVerdict, IntPolynomial,
};
