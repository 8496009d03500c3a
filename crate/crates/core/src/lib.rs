pub mod bands;
pub mod connectivity;
pub mod demo;
pub mod error;
pub mod filters;
pub mod frame;
pub mod ingest;
pub mod lassle;
pub mod mapping;
pub mod oracle;
pub mod pipeline;
pub mod resampling;
pub mod spectrum;
pub mod varfit;

pub use error::{Result, ScauError};
pub use frame::TimeSeriesFrame;
