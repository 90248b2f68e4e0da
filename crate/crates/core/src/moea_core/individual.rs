use serde::{Deserialize, Serialize};

use super::CoreError;
use crate::problems::Genome;
use crate::sim_clock::Time;

/// State of one objective value of an individual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Pending,
    /// Provisional estimate, replaced once the true value is revealed.
    Pseudo(f64),
    True(f64),
}

impl Slot {
    fn name(&self) -> &'static str {
        match self {
            Slot::Pending => "pending",
            Slot::Pseudo(_) => "pseudo",
            Slot::True(_) => "true",
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Slot::Pending => None,
            Slot::Pseudo(v) | Slot::True(v) => Some(v),
        }
    }

    pub fn true_value(&self) -> Option<f64> {
        match *self {
            Slot::True(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Slot::True(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: u64,
    pub genome: Genome,
    slots: Vec<Slot>,
    pub birth_time: Time,
    /// Ids of the individuals this one was bred from.
    #[serde(default)]
    pub parents: Vec<u64>,
}

impl Individual {
    pub fn new(id: u64, genome: Genome, objectives: usize, birth_time: Time) -> Self {
        Self {
            id,
            genome,
            slots: vec![Slot::Pending; objectives],
            birth_time,
            parents: Vec::new(),
        }
    }

    pub fn with_parents(mut self, parents: Vec<u64>) -> Self {
        self.parents = parents;
        self
    }

    /// Convenience for tests and offline data: every slot `True`.
    pub fn evaluated(id: u64, genome: Genome, values: &[f64]) -> Self {
        Self {
            id,
            genome,
            slots: values.iter().map(|&v| Slot::True(v)).collect(),
            birth_time: 0,
            parents: Vec::new(),
        }
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot(&self, objective: usize) -> Slot {
        self.slots[objective]
    }

    /// Pending or Pseudo -> Pseudo. A revealed value is never overwritten.
    pub fn set_pseudo(&mut self, objective: usize, value: f64) -> Result<(), CoreError> {
        match self.slots[objective] {
            Slot::True(_) => Err(self.bad_transition(objective, "pseudo")),
            _ => {
                self.slots[objective] = Slot::Pseudo(value);
                Ok(())
            }
        }
    }

    /// Pending or Pseudo -> True, exactly once.
    pub fn set_true(&mut self, objective: usize, value: f64) -> Result<(), CoreError> {
        match self.slots[objective] {
            Slot::True(_) => Err(self.bad_transition(objective, "true")),
            _ => {
                self.slots[objective] = Slot::True(value);
                Ok(())
            }
        }
    }

    fn bad_transition(&self, objective: usize, to: &'static str) -> CoreError {
        CoreError::SlotTransition {
            id: self.id,
            objective,
            from: self.slots[objective].name(),
            to,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(Slot::is_true)
    }

    pub fn has_pseudo(&self) -> bool {
        self.slots.iter().any(|s| matches!(s, Slot::Pseudo(_)))
    }

    /// Objective vector; Pseudo values are admitted only when `allow_pseudo`.
    pub fn objectives(&self, allow_pseudo: bool) -> Result<Vec<f64>, CoreError> {
        self.slots
            .iter()
            .enumerate()
            .map(|(i, s)| match *s {
                Slot::True(v) => Ok(v),
                Slot::Pseudo(v) if allow_pseudo => Ok(v),
                _ => Err(CoreError::IncompleteVector {
                    id: self.id,
                    objective: i,
                }),
            })
            .collect()
    }

    pub fn true_objectives(&self) -> Result<Vec<f64>, CoreError> {
        self.objectives(false)
    }
}
