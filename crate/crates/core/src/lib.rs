//! Text pipeline for detecting and classifying cognitive distortions.
//!
//! The crate covers every algorithmic stage and nothing that touches a file
//! system:
//!
//! * [`corpus`]: annotated passages, strict-majority adjudication and
//!   stratified fold assignment.
//! * [`textprep`]: normalization, whitespace tokenization and n-grams.
//! * [`vectorize`]: document-frequency filtered vocabularies and L2-normalized
//!   tf-idf vectors.
//! * [`classifier`]: L2-regularized logistic regression and its one-vs-rest
//!   composition.
//! * [`evaluation`]: precision/recall/F1, grid search and nested
//!   cross-validation.
//! * [`exploration`]: class profiles, Ward clustering over cosine distance,
//!   collapsed-Gibbs LDA and similarity matrices.
//! * [`synth`]: a seeded generator of annotated corpora with planted
//!   class-signature terms.
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature pulls in
//! `std` and rayon to fit one-vs-rest members and grid points concurrently;
//! results are identical with or without it.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod classifier;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod exploration;
pub mod label;
mod par;
pub mod synth;
pub mod textprep;
pub mod vectorize;

pub use error::{Error, Result};
pub use label::{DetectionLabel, DistortionLabel, Task, TaskLabel};
