//! Numerical toolkit for Müntz spaces and their embeddings into `L¹(μ)`.
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod composition;
pub mod cli;
pub mod constructions;
pub mod embedding;
pub mod error;
pub mod measure;
pub mod nsq;
pub mod poly;
pub mod quadrature;
pub mod search;
pub mod sequence;
pub mod special;

pub use error::{MuntzError, Result};
pub use measure::{Atom, DensityExpr, DensityPiece, Measure, TailProfile};
pub use poly::{MuntzPolynomial, PowerSum};
pub use sequence::ExponentSequence;
