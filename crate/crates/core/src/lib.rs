pub mod certify;
pub mod cli;
pub mod error;
pub mod field;
pub mod gabor;
pub mod json;
pub mod oracle;
pub mod transform;

pub use error::{Error, Result};
