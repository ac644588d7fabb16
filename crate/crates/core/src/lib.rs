pub mod cli;
pub mod error;
pub mod oracle;
pub mod phase;
pub mod specfun;
pub mod state;
pub mod wigner;

pub use error::{Error, Result};
