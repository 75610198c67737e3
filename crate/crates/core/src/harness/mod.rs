//! Run configuration, target and annotation files, the end-to-end pipeline,
//! and evaluation.

pub mod config;
pub mod eval;
pub mod io;
pub mod pipeline;

pub use config::{RunConfig, ServiceConfig, ServiceKind, Weights};
pub use eval::{evaluate, EvalReport, Task};
pub use io::{AnnotationSet, Annotations, TableTargets, TargetSet};
pub use pipeline::{run_pipeline, Annotator, RunOutput, RunReport, Trace};
