pub mod circuits;
pub mod cli;
pub mod driving;
pub mod eigengate;
pub mod error;
pub mod experiments;
pub mod hamiltonians;
pub mod krawtchouk;
pub mod linalg;

pub use error::{Error, Result};
