pub mod error;
pub mod estimator;
pub mod experiment;
pub mod fourier;
pub mod graph;
pub mod oracle;
pub mod spectral;
pub mod verify;
pub mod walks;

pub use error::{Error, Result};
