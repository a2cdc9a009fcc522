//! File formats, persistent state, reports and the command-line driver for
//! [`ecilmu_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod report;
pub mod shared;
pub mod state;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use io::{read_embeddings, write_embeddings};
pub use report::Report;
pub use shared::SharedDatabases;
