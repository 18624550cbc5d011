//! Gain-scheduled controller synthesis from frozen frequency-response data.
//!
//! The pipeline is: frozen FRF samples of the plant's coprime factors
//! ([`frfdata`], generated for the unbalanced-disk plant by [`benchmark`]),
//! a linearly parameterized controller ([`ctrlparam`]), a sequence of
//! second-order cone programs bisected over the performance level
//! ([`synthesis`] on top of [`conic`]), data-only certification of
//! stability and performance ([`analysis`]), and closed-loop validation of
//! the realized scheduled filter ([`realize`], [`simulate`]).

pub mod analysis;
pub mod benchmark;
pub mod cli;
pub mod conic;
pub mod ctrlparam;
pub mod error;
pub mod frfdata;
pub mod ltikit;
pub mod poly;
pub mod realize;
pub mod simulate;
pub mod synthesis;

pub use error::{Error, Result};
