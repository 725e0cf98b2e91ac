//! Library backing the `kinetrack` binary. The executable is a thin shell
//! around [`run::dispatch`]; keeping the logic here lets integration tests
//! drive commands in-process as well as through the binary.

pub mod args;
pub mod run;

pub use run::CliError;
