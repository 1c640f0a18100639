use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable identifier of a group. Initial groups are numbered from 0 in
/// position order; every merge mints the next unused id.
pub type GroupId = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("group {index}: weight must be ≥ 1")]
    ZeroWeight { index: usize },
    #[error("group {index}: position {position} is not finite")]
    NonFinitePosition { index: usize, position: f64 },
    #[error("herd is empty")]
    Empty,
    #[error("positions are not sorted at index {index}")]
    Unsorted { index: usize },
}

/// A group that reached the burrow and left the equations of motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub id: GroupId,
    pub weight: u32,
    pub time: f64,
}

/// Live configuration of the herd at one instant.
///
/// `ids`, `positions` and `weights` are parallel arrays over the active
/// groups, ordered by position.
#[derive(Debug, Clone, PartialEq)]
pub struct HerdState {
    pub time: f64,
    pub ids: Vec<GroupId>,
    pub positions: Vec<f64>,
    pub weights: Vec<u32>,
    pub arrived: Vec<Arrival>,
    pub(crate) next_id: GroupId,
}

impl HerdState {
    /// Builds the herd at time 0 from `(position, weight)` pairs in any order.
    /// Coincident positions are allowed here; the engine merges them before
    /// integrating.
    pub fn new(groups: &[(f64, u32)]) -> Result<Self, StateError> {
        Self::at_time(0.0, groups)
    }

    pub fn at_time(time: f64, groups: &[(f64, u32)]) -> Result<Self, StateError> {
        if groups.is_empty() {
            return Err(StateError::Empty);
        }
        for (index, &(position, weight)) in groups.iter().enumerate() {
            if weight == 0 {
                return Err(StateError::ZeroWeight { index });
            }
            if !position.is_finite() {
                return Err(StateError::NonFinitePosition { index, position });
            }
        }
        let mut sorted = groups.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (positions, weights): (Vec<f64>, Vec<u32>) = sorted.into_iter().unzip();
        let n = positions.len() as GroupId;
        Ok(Self {
            time,
            ids: (0..n).collect(),
            positions,
            weights,
            arrived: Vec::new(),
            next_id: n,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn active_weight(&self) -> u64 {
        self.weights.iter().map(|&w| u64::from(w)).sum()
    }

    pub fn arrived_weight(&self) -> u64 {
        self.arrived.iter().map(|a| u64::from(a.weight)).sum()
    }

    /// Total population ℳ, active plus arrived.
    pub fn total_weight(&self) -> u64 {
        self.active_weight() + self.arrived_weight()
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.positions.windows(2).all(|w| w[0] < w[1])
    }

    pub(crate) fn check_sorted(&self) -> Result<(), StateError> {
        match self
            .positions
            .windows(2)
            .position(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt()))
        {
            Some(index) => Err(StateError::Unsorted { index }),
            None => Ok(()),
        }
    }

    pub fn index_of(&self, id: GroupId) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_sorts_and_numbers() {
        let s = HerdState::new(&[(2.0, 1), (-1.0, 3), (0.5, 2)]).unwrap();
        assert_eq!(s.positions, vec![-1.0, 0.5, 2.0]);
        assert_eq!(s.weights, vec![3, 2, 1]);
        assert_eq!(s.ids, vec![0, 1, 2]);
        assert_eq!(s.total_weight(), 6);
        assert!(s.is_strictly_ordered());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(HerdState::new(&[]), Err(StateError::Empty));
        assert_eq!(
            HerdState::new(&[(0.0, 1), (1.0, 0)]),
            Err(StateError::ZeroWeight { index: 1 })
        );
        assert!(HerdState::new(&[(f64::NAN, 1)]).is_err());
    }
}
