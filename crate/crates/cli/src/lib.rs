//! Library surface of the `probsym` tool: the analysis pipeline, report
//! rendering, and constraint feasibility checking. The binary is a thin
//! argument parser over [`pipeline::run`].

pub mod pipeline;
pub mod report;
pub mod solver;
