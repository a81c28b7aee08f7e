//! Desk-scale laboratory for regularized cycle-consistent adversarial anomaly
//! detection.
//!
//! Two halves share one codebase:
//!
//! * an exact, discrete-grid account of the theory: the closed-form optimal
//!   discriminator, the generator objective it induces, and a water-filling
//!   solver for the optimal generator distribution (`theory`);
//! * a trainable toy stack: a tiny dense-network engine (`nn`), synthetic 2-D
//!   and tabular data (`dist`, `data`), the adversarial + cycle-consistency
//!   training loop with a penalty distribution (`gan`), and anomaly scoring
//!   with threshold/AUROC evaluation (`score`).
//!
//! Each major capability has a runnable example under `examples/`; the `rcgan`
//! binary exposes the same flows as subcommands (theory, train, eval, heatmap,
//! synth).

pub mod cli;
pub mod data;
pub mod dist;
pub mod error;
pub mod gan;
pub mod gridio;
pub mod nn;
pub mod score;
pub mod seeds;
pub mod tensor;
pub mod theory;

pub use error::{Error, Result};
pub use tensor::Tensor;
