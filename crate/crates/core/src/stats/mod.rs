//! Primitive distributions and samplers used by every other module, all
//! driven by the seedable, stream-splittable [`RngStream`].

pub mod gof;
pub mod inverse_gaussian;
pub mod laplace;
pub mod normal;
pub mod rng;
pub mod slice;
pub mod tridiag;

pub use inverse_gaussian::sample_inverse_gaussian;
pub use laplace::{laplace_cdf, laplace_quantile, laplace_quantile_from_normal_score};
pub use normal::{std_normal_cdf, std_normal_quantile, std_normal_sf};
pub use rng::RngStream;
pub use slice::slice_sample_bounded;
pub use tridiag::{sample_normal_tridiag_precision, TridiagonalMatrix};
