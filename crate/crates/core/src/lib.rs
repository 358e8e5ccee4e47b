pub mod cartan;
pub mod catalog;
pub mod coxeter;
pub mod deform;
pub mod error;
pub mod integral;
pub mod io;
pub mod linalg;
pub mod polytope;
pub mod realize;
pub mod scalar;

pub use cartan::{cosine_matrix, CartanMatrix, Circuit, PerronReport, PerronType};
pub use coxeter::{CoxeterMatrix, GroupClass, Label, Refinement};
pub use error::{Error, Result};
pub use scalar::{make_cos_entry, AlgScalar, Rational, Scalar, Sign};
