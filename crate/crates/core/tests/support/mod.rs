//! Test support shared by integration tests: a naive re-evaluation of the
//! IPF construction and helpers to build synthetic inventories and tables.

#![allow(dead_code)]

pub mod oracle;
pub mod synthetic;
