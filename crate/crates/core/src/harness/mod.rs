//! Instance generators and batch sweeps.

pub mod generate;
pub mod sweep;

pub use generate::{
    fr_counterexample, generate, generate_indexed, nonuniform_counterexample, EtaMode,
    GeneratorConfig, GeneratorKind, NamedExample,
};
pub use sweep::{run_sweep, SweepOptions, SweepResult, SweepRow};
