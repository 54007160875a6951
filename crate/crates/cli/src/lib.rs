//! Command line and HTTP front ends for the sentence recognizer in `esr-core`.

pub mod cli;
pub mod service;
