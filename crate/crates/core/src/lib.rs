//! Exact, asymptotic and simulated performance of dual-hop fixed-gain amplify-and-forward
//! underwater optical links over mixture Exponential-Generalized-Gamma fading.

pub mod cli;
pub mod egg_channel;
pub mod error;
pub mod fixtures;
pub mod mellin_barnes;
pub mod metrics;
pub mod monte_carlo;
pub mod relay_chain;

pub use error::{Error, Result};
