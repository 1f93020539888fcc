pub mod cartan;
pub mod error;
pub mod linalg;
pub mod perm;
pub mod poly;
pub mod qha;
pub mod gmod;
pub mod rmat;
pub mod locext;
pub mod reflect;
pub mod cli;
pub mod report;

pub use error::{KlrError, Result};
pub use linalg::Q;
