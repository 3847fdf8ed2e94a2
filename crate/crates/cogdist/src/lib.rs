//! File formats, model persistence and the `cogdist` command line on top of
//! [`cogdist_core`].

pub mod bundle;
pub mod cli;
pub mod error;
pub mod io;
pub mod manifest;
pub mod report;

pub use bundle::{load_model, save_model, BundleError, ModelBundle};
pub use error::{CliError, LoadError};
pub use io::{load_corpus, CorpusFormat};
