//! Behavioral simulator for simultaneous many-row activation in commodity
//! DRAM and the processing-using-memory operations built on it.

pub mod analog;
pub mod bank;
pub mod bits;
pub mod bitserial;
pub mod cli;
pub mod decoder;
pub mod destruct;
pub mod engine;
pub mod experiments;
pub mod primitives;
