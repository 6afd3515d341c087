//! Exact multisymplectic linear algebra and symbolic jet calculus for
//! first-order classical field theories.

pub mod exterior;
pub mod field;
pub mod forms;
pub mod linalg;
pub mod multisymplectic;
pub mod scalar;
pub mod symbolic;

pub use exterior::{Form, Vector};
pub use linalg::{LinearMap, Matrix};
pub use scalar::Scalar;
