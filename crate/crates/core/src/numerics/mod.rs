//! Dense matrices, the normal CDF, truncated sampling, roots of unity and
//! Vandermonde conditioning.

mod linalg;
mod matrix;
mod normal;
mod roots;

pub use linalg::{singular_values, solve};
pub use matrix::{ComplexMatrix, RealMatrix};
pub use normal::{
    ln_std_normal_sf, sample_normal, sample_truncated_gaussian, std_normal_cdf, std_normal_sf,
    truncated_cdf, SAMPLING_RETRY_CAP,
};
pub use roots::{root_power, roots_of_unity, vandermonde_info, EvalPoint, VandermondeInfo};

pub use num_complex::Complex64;
