pub mod budget;
pub mod catalog;
pub mod config;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod oracle;
pub mod plot;
pub mod problem;
pub mod solver;
