//! Library side of the driver: report building, ILP emission, and the
//! oracle cross-check. The binary in `main.rs` is a thin argument shell.

pub mod check;
pub mod ipet;
pub mod report;
