pub mod cmt;
pub mod coupling;
pub mod dbr;
pub mod design;
mod eigen;
pub mod error;
pub mod geometry;
pub mod modesolver;
pub mod runner;
mod sparse;
pub mod units;
