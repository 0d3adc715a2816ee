pub mod bma;
pub mod channel;
pub mod error;
pub mod eval;
pub mod graph;
pub mod multi;
pub mod oracle;
pub mod relaxed;
pub mod seq;
pub mod single;
pub mod verify;

pub use error::{Error, Result};
pub use relaxed::PriorVec;
pub use seq::{Alphabet, BigCount, BitSeq, Symbol};
pub use single::{GradAscentConfig, PosteriorVec};
