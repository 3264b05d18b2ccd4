//! File formats, reports and verification suites for the `hbc` command.

pub mod cube_json;
pub mod output;
pub mod report;
pub mod suites;
