//! casetwin: a twin-system explainability toolkit.
//!
//! An opaque feed-forward network is paired with a transparent case-base
//! engine over the same dataset. The network supplies predictions; the case
//! base supplies factual, counterfactual, and semi-factual explanations of
//! those predictions, plus counterfactual data augmentation for imbalanced
//! classes. The two sides run as separate modules and communicate only
//! through functional abstractions of the network (feature contributions,
//! input gradients, penultimate activations, predicted outcomes).

pub mod augment;
pub mod cf_series;
pub mod cf_tabular;
pub mod data;
pub mod error;
pub mod factual;
pub mod metrics;
pub mod mlp;
pub mod report;
pub mod retrieval;
pub mod semifactual;

pub use error::{Error, Result};
