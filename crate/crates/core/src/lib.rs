//! Relative time-line construction from temporally annotated text.
//!
//! A relative time-line assigns every temporal entity of a document (events,
//! temporal expressions and the document-creation time) a real-valued start
//! and duration. Time-lines are obtained either indirectly, by optimizing
//! start/duration variables against a set of temporal links ([`tl2rtl`]), or
//! directly, with models that predict them from text ([`models`]). The
//! [`eval`] module scores time-lines with the closure-aware temporal
//! awareness metric.
//!
//! Module map:
//!
//! - [`corpus`]: documents, JSON-lines / TimeML readers, embeddings, synthetic corpora
//! - [`pointalg`]: TLink types, their point-algebra reading, closure and consistency
//! - [`timeline`]: time-lines, end points, all losses, TLink derivation, rendering
//! - [`autograd`]: reverse-mode tape, parameter store, Adam, gradient checking
//! - [`tl2rtl`]: fitting a time-line to a TLink set
//! - [`models`]: S-TLM / C-TLM predictors, training and grid search
//! - [`eval`]: temporal awareness, confusion matrices, analysis reports

pub mod autograd;
pub mod corpus;
pub mod eval;
pub mod exec;
pub mod models;
pub mod pointalg;
pub mod timeline;
pub mod tl2rtl;

pub use corpus::{Document, Entity, EntityKind, TLink, Token};
pub use exec::Exec;
pub use pointalg::TLinkType;
pub use timeline::{LossConfig, LossKind, RelativeTimeline};
