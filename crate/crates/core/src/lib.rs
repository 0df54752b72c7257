//! A test suite database for natural language processing systems.
//!
//! Annotated test items live in a small relational store; an SQL-style
//! query language instantiates concrete test suites from it; ill-formed
//! variants are derived systematically; and an evaluation harness drives
//! external applications through retrieve, process and compare cycles.

pub mod model;
pub mod storage;
pub mod query;
pub mod genvar;
pub mod harness;
pub mod server;
pub mod shell;
