//! Regional epidemic forecasting and socio-economic clustering.
//!
//! The crate forecasts a week of daily new cases per region with a
//! quantile neural net, appends the forecast to each region's static
//! profile, reduces dimensionality and picks the clustering with the
//! highest silhouette.

pub mod cluster;
pub mod embed;
pub mod eval;
pub mod forecast;
pub mod nn;
pub mod pipeline;
pub mod series;
pub mod synth;
