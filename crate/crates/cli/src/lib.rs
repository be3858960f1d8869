//! Library surface of the command-line driver: instance-file parsing,
//! element expressions and the report runners. The `okounkov` binary is a
//! thin wrapper over these modules.

pub mod commands;
pub mod expr;
pub mod instance;
