//! Evolutionary machinery shared by all strategies. Minimization throughout.

mod archive;
mod dominance;
mod engine;
mod individual;
mod variation;

use thiserror::Error;

pub use archive::ParetoArchive;
pub use dominance::{
    crowding_distance, dominates, nondominated_filter, nondominated_sort, nondominated_sort_naive,
    rank_and_crowding, select_survivors, sort_population,
};
pub use engine::{
    binary_tournament, scalar_survivors, scalar_tournament, survive, tournament_parents,
    uniform_selection, EngineKind,
};
pub use individual::{Individual, Slot};
pub use variation::Variation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("objective vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("individual {id} has no usable value on objective {objective}")]
    IncompleteVector { id: u64, objective: usize },
    #[error("slot {objective} of individual {id}: illegal transition {from} -> {to}")]
    SlotTransition {
        id: u64,
        objective: usize,
        from: &'static str,
        to: &'static str,
    },
    #[error("empty parent set")]
    EmptyParentSet,
    #[error("genome kind does not match the domain")]
    DomainMismatch,
}
