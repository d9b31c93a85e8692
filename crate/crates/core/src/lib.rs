pub mod catalog;
pub mod conjecture;
pub mod error;
pub mod fields;
pub mod graded;
pub mod jets;
pub mod liealg;
pub mod poly;
pub mod prolong;
pub mod reductions;
pub mod suite;

pub use error::{Error, Result};
pub use fields::OperatorId;
pub use jets::{combine, fd_validate, FnField, Jet3, JetField, JetOp};
pub use poly::Poly;
