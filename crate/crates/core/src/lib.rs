//! Opportunistic user selection and interference alignment diversity in
//! multi-cell interfering broadcast channels.
//!
//! The crate simulates `K` transmitters, each serving a group of `N`
//! multi-antenna users, and measures how user selection converts multi-user
//! diversity into degrees of freedom.

pub mod alignment;
pub mod channel;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod mimo;
pub mod numerics;
pub mod selection;

pub use error::{Error, Result};
