pub mod error;
pub mod geometry;
pub mod group;
pub mod fredholm;
pub mod operator;
pub mod scenario;
pub mod symbol;
pub mod topology;

pub use error::{Error, Result};
