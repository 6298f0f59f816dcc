//! Topic annotation and segmentation of digital-library search sessions.
//!
//! Each action of a session is described by thesaurus keywords drawn from the
//! documents it touches, those keywords by classification categories, and the
//! action by one session topic chosen against a session-wide category profile.
//! Actions are then grouped into topic-numbered segments, by shared topic or by
//! shared query terms.
//!
//! The numeric core is generic over the weight type ([`Weight`]: `f32` or `f64`);
//! the aliases below fix it to `f64`, which is what the file formats carry.

pub mod annotate;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod io;
pub mod kos;
pub mod log;
pub mod pipeline;
pub mod render;
pub mod scalar;
pub mod segment;
pub mod text;
pub mod topics;

pub use error::{Error, Result};
pub use scalar::Weight;

pub type WeightedLabelList = annotate::LabelList<f64>;
pub type AnnotatedAction = annotate::AnnotatedAction<f64>;
pub type AnnotatedSession = annotate::AnnotatedSession<f64>;
pub type SessionProfile = topics::SessionProfile<f64>;

pub type WeightedLabelList32 = annotate::LabelList<f32>;
pub type AnnotatedAction32 = annotate::AnnotatedAction<f32>;
pub type AnnotatedSession32 = annotate::AnnotatedSession<f32>;
pub type SessionProfile32 = topics::SessionProfile<f32>;
