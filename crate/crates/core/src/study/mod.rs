//! Goodness-of-fit statistics for best/worst vote tallies over the five designs.

mod gamma;

pub use gamma::{chi_square_sf, gamma_p, gamma_q, ln_gamma};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StudyError {
    #[error("no respondents")]
    NoRespondents,
    #[error("need at least two categories, got {0}")]
    TooFewCategories(usize),
    #[error("counts sum to {sum} but n = {n}")]
    CountMismatch { sum: u64, n: u64 },
}

/// Vote counts per category against a uniform expectation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceCounts {
    counts: Vec<u64>,
    n: u64,
}

impl PreferenceCounts {
    pub fn new(counts: Vec<u64>, n: u64) -> Result<Self, StudyError> {
        if counts.len() < 2 {
            return Err(StudyError::TooFewCategories(counts.len()));
        }
        let sum: u64 = counts.iter().sum();
        if sum != n {
            return Err(StudyError::CountMismatch { sum, n });
        }
        if n == 0 {
            return Err(StudyError::NoRespondents);
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn expected(&self) -> f64 {
        self.n as f64 / self.counts.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

pub fn chi_square_gof(c: &PreferenceCounts) -> ChiSquare {
    let e = c.expected();
    let statistic: f64 = c
        .counts
        .iter()
        .map(|&o| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let df = c.counts.len() as u32 - 1;
    ChiSquare {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    }
}

/// `(o - e) / sqrt(e)` per category.
pub fn standardized_residuals(c: &PreferenceCounts) -> Vec<f64> {
    let e = c.expected();
    let root = e.sqrt();
    c.counts.iter().map(|&o| (o as f64 - e) / root).collect()
}
