//! Shared dataset machinery: schemas, cases, distances, ingestion, and
//! synthetic generators.

pub mod casebase;
pub mod io;
pub mod metric;
pub mod schema;
pub mod synth;

pub use casebase::{Case, CaseBase, CaseId, Scaler, SeriesDataset, TimeSeriesInstance};
pub use metric::{diff_features, distance, euclidean, DEFAULT_MATCH_TAU};
pub use schema::{FeatureKind, FeatureSchema, FeatureSpec, Value};
