//! Artifact plumbing: pattern files, instance generators, verification
//! suites and experiments.

pub mod experiments;
pub mod instances;
pub mod pattern;
pub mod suites;
