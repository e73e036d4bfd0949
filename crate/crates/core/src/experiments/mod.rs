//! Experiment drivers: configuration, seeded data, runners and output files.

pub mod config;
pub mod output;
pub mod random;
pub mod runners;

pub use config::{parse_config_text, read_config_file, ExperimentConfig, ExperimentKind};
pub use output::{is_numerical, read_metadata, write_diagnostic, write_report, Metadata, CODE_VERSION};
pub use random::{gen_random_state, RandomDataSpec, RandomKind, RNG_NAME};
pub use runners::{run, Report};
