//! Probability tables over an integer support grid.

use serde::{Deserialize, Serialize};

/// `mass[j] = Pr(X = offset + j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfTable {
    pub offset: i64,
    pub mass: Vec<f64>,
}

impl PmfTable {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Mass at support value `x`; zero off the grid.
    pub fn at(&self, x: i64) -> f64 {
        x.checked_sub(self.offset)
            .and_then(|j| usize::try_from(j).ok())
            .and_then(|j| self.mass.get(j).copied())
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Plain running sums, without any pinning of the last entry.
    pub fn cumulative(&self) -> CdfTable {
        let mut acc = 0.0;
        let cum = self
            .mass
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        CdfTable {
            offset: self.offset,
            cum,
        }
    }
}

/// `cum[j] = Pr(X ≤ offset + j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    pub offset: i64,
    pub cum: Vec<f64>,
}

impl CdfTable {
    pub fn len(&self) -> usize {
        self.cum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cum.is_empty()
    }

    /// Step-function evaluation at an integer point.
    pub fn at(&self, x: i64) -> f64 {
        if x < self.offset {
            return 0.0;
        }
        match usize::try_from(x - self.offset) {
            Ok(j) if j < self.cum.len() => self.cum[j],
            _ => self.cum.last().copied().unwrap_or(1.0),
        }
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.cum.windows(2).all(|w| w[0] <= w[1])
    }
}
