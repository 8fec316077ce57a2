//! # panelscope
//!
//! Batch analytics for televised panel debates. The engine consumes the
//! artifacts produced by upstream perception models (diarized transcripts,
//! overlap and speaker RTTM, face detections, OCR text, name candidates and
//! raw audio) and turns them into incivility and representation metrics:
//!
//! - overlap-speech and foul-language fractions per video ([`audio`], [`toxicity`])
//! - MFCC-based shouting detection with a small trainable CNN ([`audio`])
//! - gender screen-time and face-area statistics ([`visual`])
//! - panelist name resolution with fuzzy and phonetic matching ([`entity`])
//! - masked-keyword bias corpora, a differentiable classifier and
//!   integrated-gradients attribution ([`bias`])
//! - co-appearance networks, Louvain communities and affiliation triads ([`network`])
//! - Welch t-tests and Fleiss' kappa ([`stats`])
//!
//! [`pipeline`] ties everything together into a resumable per-video job
//! store plus a report generator.

pub mod audio;
pub mod bias;
pub mod categorize;
pub mod entity;
pub mod ingest;
pub mod model;
pub mod network;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod tensorfile;
pub mod toxicity;
pub mod visual;

mod optim;

pub use model::{
    AdmissionBounds, CategoryId, ClusterId, FaceObservation, Gender, Occupation, PanelistCluster,
    TranscriptSegment, ValidationError, VideoAnalysis, VideoRecord,
};
pub use pipeline::{PipelineConfig, PipelineError};
