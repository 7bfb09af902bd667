//! Color-image cipher built from two stages:
//!
//! 1. a 3D Arnold transform that permutes pixel positions across the R, G
//!    and B planes, with its control parameters derived from the sum of all
//!    gray values of the plain image, and
//! 2. a CBC-chained XOR with two byte keystreams taken from a 2D
//!    hyper-chaotic map.
//!
//! The [`analysis`] module holds the statistical checks used to judge the
//! ciphertext (chi-square, adjacent-pixel correlation, entropy, NPCR and key
//! sensitivity).
//!
//! Nothing here is authenticated or proven secure; treat it as a research
//! artifact.

pub mod analysis;
pub mod arnold;
pub mod cipher;
mod error;
pub mod hyperchaos;
pub mod image;

pub use analysis::{Direction, MetricsReport};
pub use arnold::{derive_params, ArnoldParams, Position};
pub use cipher::{decrypt, encrypt, CipherKey, CipherText, KeyComponent};
pub use error::{Error, Result};
pub use hyperchaos::{ChaosParams, KeystreamPair, MapForm};
pub use image::{AlphaPolicy, Channel, ChannelLabel, ColorImage};
