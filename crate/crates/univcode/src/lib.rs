//! Universal classical-quantum coding for compound broadcast and multiple access
//! channels: information measures, error exponents, capacity regions, type-class
//! packings and Schur-Weyl decoders at small block lengths.

pub mod channels;
pub mod error;
pub mod infomeasure;
pub mod exponents;
pub mod optim;
pub mod qmat;
pub mod regions;
pub mod schur;
pub mod types;

pub use error::{Error, Result};
