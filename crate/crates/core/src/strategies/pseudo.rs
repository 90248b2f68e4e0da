use serde::{Deserialize, Serialize};

use super::StrategyError;
use crate::moea_core::{CoreError, Individual};

/// Source of provisional slow-objective values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PseudoScheme {
    /// Mean of the parents' slow values, true or provisional.
    #[default]
    FitnessInheritance,
    /// Mean of every true slow value in the population.
    PopulationMean,
}

/// Provisional value of `objective` for an individual with the given
/// parents. Parents without any value on `objective` are skipped.
pub fn assign_pseudovalue(
    parents: &[&Individual],
    population: &[Individual],
    scheme: PseudoScheme,
    objective: usize,
) -> Result<f64, StrategyError> {
    let values: Vec<f64> = match scheme {
        PseudoScheme::FitnessInheritance => parents
            .iter()
            .filter_map(|p| p.slot(objective).value())
            .collect(),
        PseudoScheme::PopulationMean => population
            .iter()
            .filter_map(|p| p.slot(objective).true_value())
            .collect(),
    };
    if values.is_empty() {
        return Err(StrategyError::NoInformation);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Whether the offspring is strictly better than at least one parent on
/// the `fast` objective.
pub fn candidate_filter(
    offspring: &Individual,
    parents: &[&Individual],
    fast: usize,
) -> Result<bool, CoreError> {
    let own = offspring
        .slot(fast)
        .true_value()
        .ok_or(CoreError::IncompleteVector {
            id: offspring.id,
            objective: fast,
        })?;
    let mut better = false;
    for p in parents {
        let v = p.slot(fast).true_value().ok_or(CoreError::IncompleteVector {
            id: p.id,
            objective: fast,
        })?;
        better |= own < v;
    }
    Ok(better)
}
