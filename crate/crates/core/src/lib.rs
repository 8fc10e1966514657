pub mod algebra;
pub mod catalog;
pub mod exact;
pub mod poly;
pub mod curvature;
pub mod deformation;
pub mod sign_sets;
pub mod classification;
pub mod tables;
pub mod maxmin;

pub use algebra::NilpotentAlgebra;
pub use curvature::Metric;
pub use deformation::DeformationSpec;
pub use exact::{Subspace, Q, QVec};
