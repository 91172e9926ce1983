//! Certification, bounds and probes for the border rank of small dense tensors.

pub mod certify;
pub mod completion;
pub mod cpals;
pub mod error;
pub mod flattening;
pub mod io;
pub mod linalg;
pub mod phylo;
pub mod poly;
pub mod probe;
pub mod rng;
pub mod scalar;
pub mod tensor;
pub mod words;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use scalar::{Field, Rational, Scalar};
pub use tensor::{PureFactorization, Tensor};
pub use words::{IncMap, SubsElement, Word};
