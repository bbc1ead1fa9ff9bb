pub mod bounds;
pub mod constants;
pub mod device;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod lindblad;
pub mod protocol;
pub mod stats;

pub use error::{Error, Result};
