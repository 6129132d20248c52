pub mod bits;
pub mod certify;
pub mod circuit;
pub mod code;
pub mod decode;
pub mod dem;
pub mod error;
pub mod experiment;
pub mod layout;
pub mod matching;
pub mod rng;
pub mod schedule;
pub mod sim;

pub use error::{Error, Result};
