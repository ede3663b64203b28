//! From patterns to truth tables, minimised equations, LUT packings and
//! tile costs.

pub mod lutmap;
pub mod qm;
pub mod tile;
pub mod truth;

pub use lutmap::{map_to_luts, LutPlan, LutSlot};
pub use qm::{qm_minimize, Cube, Sop};
pub use tile::{
    best_logic_variant, describe_tile, describe_two_by_k, efficiency, BooleanFunction, Cost, Efficiency, LogicTile,
    LutSite, Realization, TileDescriptor,
};
pub use truth::{build_truth_table, functional_support, BitTable, InputBit, TruthTable};
