//! Fredholm determinants det(1 - T U) of truncated compact operators, the
//! lambda bound, Newton polygons, slope factorization and Riesz kernels.

mod det;
mod factor;
mod lambda;
mod newton;
mod poly;
mod riesz;

pub use det::{charpoly_truncated, fredholm_det, EntireSeriesTrunc, Tail};
pub use factor::{slope_factorize, SlopeFactorization};
pub use lambda::{lambda_sequence, LambdaSequence};
pub use newton::{lower_hull, newton_polygon, newton_polygon_points, slopes_at_point, NewtonPolygon, PointValue, Segment};
pub use poly::{poly_mul_trunc, series_div, series_inverse};
pub use riesz::{riesz_kernel, RieszKernel};
