pub mod config;
pub mod emit;
pub mod report;
pub mod validate;
