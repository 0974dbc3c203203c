pub mod binary;
pub mod error;
pub mod gauss;
pub mod harness;
pub mod lasso;
mod linalg;
pub mod optimize;
pub mod svm;
