//! Coalitional-game machinery: coalitions and partitions, TU games and their
//! core, NTU point games, and equal-split stability.

mod coalition;
mod core;
mod equal_split;
mod ntu;
pub mod simplex;
mod tu;

pub use self::coalition::{
    bell, enumerate_partitions, partitions_of, Coalition, CoalitionStructure, Partitions,
    MAX_LINKS, MAX_PARTITION_K,
};
pub use self::core::{core_feasible, core_violation, BalancedFamily, CoreResult, CoreStatus, CORE_TOL};
pub use self::equal_split::{equal_split_deviation, equal_split_stable_structures, MAX_EQUAL_SPLIT_K};
pub use self::ntu::NtuPointGame;
pub use self::tu::{parse_mask, TuGame, COHESIVE_TOL, STRICT_TOL};

/// Outcome of a property check: holds, or the first counterexample found.
#[derive(Clone, Debug, PartialEq)]
pub enum Check<W> {
    Holds,
    Violated(W),
}

impl<W> Check<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Check::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Check::Holds => None,
            Check::Violated(w) => Some(w),
        }
    }
}
