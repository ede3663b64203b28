//! Tiling-based design of FPGA multipliers from irregular, LUT-efficient
//! sub-multiplier tiles.

pub mod bitheap;
pub mod error;
pub mod library;
pub mod logic;
pub mod netlist;
pub mod report;
pub mod search;
pub mod shape;
pub mod solver;

pub use error::{Error, Result};
pub use library::TileLibrary;
pub use logic::{describe_tile, Cost, Efficiency, TileDescriptor};
pub use shape::{Board, Cell, GridPattern, Signedness};
