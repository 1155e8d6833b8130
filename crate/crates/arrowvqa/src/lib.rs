//! Dataset building, verification and scoring on top of `arrowvqa-core`:
//! asset loading, JSON and PNG output, manifests and reports.

pub mod assets;
pub mod build;
pub mod config;
pub mod dataset;
pub mod evaluate;
pub mod io;
pub mod report;
pub mod verify;

pub use arrowvqa_core as core;
pub use assets::{default_assets, load_assets, LoadError, LoadedAssets};
pub use build::{build_dataset, generate_corpus, BuildError, Corpus, DatasetManifest};
pub use config::BuildConfig;
pub use report::{stats_report, StatsReport};
pub use verify::{verify_dataset, VerifyReport, Violation};
