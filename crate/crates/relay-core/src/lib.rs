pub mod analytic;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod queueing;
pub mod serde_inf;
pub mod sim;
pub mod specfun;

pub use error::{Error, ErrorKind, Result};
