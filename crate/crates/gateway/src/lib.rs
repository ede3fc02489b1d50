//! Command-line and HTTP front end for `dcm-core`.

pub mod config;
pub mod error;
pub mod http;
pub mod ops;
pub mod reproduce;
pub mod views;
