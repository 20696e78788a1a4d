pub mod acceptance;
pub mod ast;
pub mod combine;
pub mod error;
pub mod gadgets;
pub mod interpret;
pub mod oracle;
pub mod padic;
pub mod parser;
pub mod presburger;
pub mod rational;
pub mod real;

pub use error::{Error, Result};
