//! Batch interface over the workbench: JSON problem documents in, JSON
//! reports and CSV power tables out.

pub mod commands;
pub mod doc;
pub mod report;
