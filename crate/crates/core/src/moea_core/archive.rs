use super::dominance::{crowding_distance, dominates_unchecked};
use super::{CoreError, Individual};

/// Mutually nondominated set of fully evaluated individuals.
///
/// Insertion order is preserved. A candidate whose objective vector equals a
/// member's is rejected, which makes re-insertion a no-op.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    members: Vec<Individual>,
    vectors: Vec<Vec<f64>>,
    capacity: Option<usize>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bounded(capacity: usize) -> Self {
        Self {
            capacity: Some(capacity.max(1)),
            ..Self::default()
        }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Returns whether the individual was accepted.
    pub fn insert(&mut self, individual: Individual) -> Result<bool, CoreError> {
        let v = individual.true_objectives()?;
        if self
            .vectors
            .iter()
            .any(|m| m == &v || dominates_unchecked(m, &v))
        {
            return Ok(false);
        }
        let mut i = 0;
        while i < self.vectors.len() {
            if dominates_unchecked(&v, &self.vectors[i]) {
                self.vectors.remove(i);
                self.members.remove(i);
            } else {
                i += 1;
            }
        }
        self.vectors.push(v);
        self.members.push(individual);
        if let Some(cap) = self.capacity {
            while self.members.len() > cap {
                let crowd = crowding_distance(&self.vectors);
                // least crowded member goes; later members lose ties
                let worst = (0..crowd.len())
                    .rev()
                    .min_by(|&a, &b| crowd[a].total_cmp(&crowd[b]))
                    .unwrap();
                self.vectors.remove(worst);
                self.members.remove(worst);
            }
        }
        Ok(true)
    }

    pub fn into_members(self) -> Vec<Individual> {
        self.members
    }
}
