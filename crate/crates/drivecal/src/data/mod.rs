//! Time-series containers, CSV serialization, noise injection and
//! model/data alignment.

pub mod align;
pub mod csv;
pub mod noise;
pub mod series;

pub use align::{align, ResidualMatrix};
pub use csv::{read_csv, write_csv};
pub use noise::{add_gaussian_noise, NoiseSpec};
pub use series::TimeSeries;
