//! Screens a patient gene sequence against a reference at DNA and protein
//! level, calls the differences as variants, and classifies candidate
//! malignant mutations with a from-scratch feed-forward backpropagation
//! network trained on a catalog of known pathogenic mutations.
//!
//! The flow: ingest FASTA ([`seqio`]), seed-scan and globally align
//! ([`align`]), translate through the standard genetic code ([`translate`]),
//! call variants and apply the candidate rule — a DNA difference counts only
//! if it changes the protein ([`variants`]) — then encode candidates as
//! feature vectors ([`catalog`]) and score them with a trained network
//! ([`neuralnet`]). [`pipeline`] orchestrates the whole run and the CLI.

pub mod align;
pub mod catalog;
pub mod neuralnet;
pub mod seqio;
pub mod translate;
pub mod variants;

pub use align::{Alignment, ScoringScheme, SeedHit};
pub use seqio::{Alphabet, Sequence};
pub use variants::{CandidateVerdict, Variant, VariantKind, VariantLevel};
