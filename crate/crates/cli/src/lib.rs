//! File formats, corpus runs and reports behind the `mms` command.

pub mod experiment;
pub mod io;
pub mod report;
