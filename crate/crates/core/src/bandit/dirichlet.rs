//! Dirichlet pseudo-counts over successor states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{StateId, TransitionMatrix, NUM_STATES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCounts {
    counts: [[f64; NUM_STATES]; NUM_STATES],
}

impl Default for DirichletCounts {
    fn default() -> Self {
        Self::new()
    }
}

impl DirichletCounts {
    /// Uniform prior: one pseudo-count on every successor 1..=7, none on the
    /// initial state.
    pub fn new() -> Self {
        let mut counts = [[1.0; NUM_STATES]; NUM_STATES];
        for row in &mut counts {
            row[0] = 0.0;
        }
        DirichletCounts { counts }
    }

    pub fn get(&self, from: StateId, to: StateId) -> f64 {
        self.counts[from.index()][to.index()]
    }

    pub fn row(&self, from: StateId) -> &[f64; NUM_STATES] {
        &self.counts[from.index()]
    }

    pub fn update(&mut self, from: StateId, to: StateId) -> Result<()> {
        if to == StateId::INITIAL {
            return Err(Error::validation("the initial state is never a successor"));
        }
        self.counts[from.index()][to.index()] += 1.0;
        Ok(())
    }

    /// Posterior mean `n[i][j] / sum_j n[i][j]`.
    pub fn posterior(&self) -> TransitionMatrix {
        let mut p = [[0.0; NUM_STATES]; NUM_STATES];
        for (row, counts) in p.iter_mut().zip(&self.counts) {
            let total: f64 = counts[1..].iter().sum();
            for j in 1..NUM_STATES {
                row[j] = counts[j] / total;
            }
        }
        p
    }
}
