//! Text normalization for noisy social-media posts: a word-level
//! encoder-decoder with attention, backed by a character-level model for
//! words it is unsure about.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod neural;
pub mod models;
pub mod noise;

pub use error::{Error, Result};
