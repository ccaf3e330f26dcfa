//! Mermin-Klyshko and Svetlichny Bell polynomials for `n` parties with two
//! dichotomic measurements each, together with their maximal values under
//! local, hybrid-separable, algebraic and quantum models.

pub mod classify;
pub mod dyadic;
pub mod error;
pub mod models;
pub mod polynomial;
pub mod quantum;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
pub use polynomial::{
    combine, mk, mk_prime, svetlichny, svetlichny_minus, tensor_product, CorrelationVector,
    Polynomial, PolynomialKind, Term,
};
