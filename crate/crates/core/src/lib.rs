#![allow(clippy::needless_range_loop, clippy::should_implement_trait)]

pub mod certify;
pub mod connections;
pub mod expr;
pub mod extension;
pub mod fields;
pub mod linalg;
pub mod report;
pub mod topology;
