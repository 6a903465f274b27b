//! File formats and the command line for `dataval-core`.
//!
//! [`io`] loads CSV batches and reads/writes the JSON artifacts; [`cli`]
//! implements the `dataval` binary.

pub mod cli;
pub mod io;
