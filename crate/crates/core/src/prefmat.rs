//! Preference matrices and tournament scores.
//!
//! `p(i, j)` is the probability that arm `i` beats arm `j`. A valid matrix has
//! `p(i, j) + p(j, i) = 1` and a diagonal of exactly one half. Arms are
//! 0-based everywhere in this crate.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::io::{format_real, read_real_table, TableError};

/// Symmetry and diagonal tolerance applied to loaded matrices.
pub const VALIDATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum PrefMatError {
    #[error("matrix is not square: row {row} has {len} entries, expected {k}")]
    NotSquare { row: usize, len: usize, k: usize },
    #[error("need at least 2 arms, got {0}")]
    TooFewArms(usize),
    #[error("diagonal entry ({0}, {0}) is {1}, expected 0.5")]
    BadDiagonal(usize, f64),
    #[error("entries ({0}, {1}) and ({1}, {0}) do not sum to 1")]
    AsymmetricPair(usize, usize),
    #[error("entry ({0}, {1}) = {2} is outside [0, 1]")]
    EntryOutOfRange(usize, usize, f64),
    #[error("mean of arm {0} = {1} is outside [0, 1]")]
    MeanOutOfRange(usize, f64),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    k: usize,
    p: Vec<f64>,
}

/// Borda, Copeland and Condorcet view of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TournamentSummary {
    pub borda: Vec<f64>,
    pub copeland: Vec<usize>,
    pub condorcet_winner: Option<usize>,
}

impl PreferenceMatrix {
    /// Validates a raw square matrix.
    pub fn validate(rows: &[Vec<f64>]) -> Result<Self, PrefMatError> {
        let k = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(PrefMatError::NotSquare {
                    row,
                    len: r.len(),
                    k,
                });
            }
        }
        if k < 2 {
            return Err(PrefMatError::TooFewArms(k));
        }
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(PrefMatError::EntryOutOfRange(i, j, v));
                }
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if (r[i] - 0.5).abs() > VALIDATION_TOLERANCE {
                return Err(PrefMatError::BadDiagonal(i, r[i]));
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if (rows[i][j] + rows[j][i] - 1.0).abs() > VALIDATION_TOLERANCE {
                    return Err(PrefMatError::AsymmetricPair(i, j));
                }
            }
        }
        Ok(Self {
            k,
            p: rows.iter().flatten().copied().collect(),
        })
    }

    /// Builds a matrix from its strict upper triangle, `upper(i, j)` for `i < j`.
    fn from_upper(k: usize, upper: impl Fn(usize, usize) -> f64) -> Self {
        let mut p = vec![0.5; k * k];
        for i in 0..k {
            for j in (i + 1)..k {
                let v = upper(i, j);
                p[i * k + j] = v;
                p[j * k + i] = 1.0 - v;
            }
        }
        Self { k, p }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|i| self.row(i).to_vec()).collect()
    }

    /// Sum of each arm's win probabilities against the *other* arms.
    ///
    /// Including the diagonal would add 0.5 to every score and leave the
    /// ranking unchanged.
    pub fn borda_scores(&self) -> Vec<f64> {
        (0..self.k)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| v)
                    .sum()
            })
            .collect()
    }

    /// Number of arms each arm beats with probability strictly above one half.
    pub fn copeland_scores(&self) -> Vec<usize> {
        (0..self.k)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, &v)| j != i && v > 0.5)
                    .count()
            })
            .collect()
    }

    pub fn condorcet_winner(&self) -> Option<usize> {
        self.copeland_scores().iter().position(|&c| c == self.k - 1)
    }

    /// Lowest-index arm with the maximal Copeland score.
    pub fn copeland_winner(&self) -> usize {
        let scores = self.copeland_scores();
        let best = *scores.iter().max().expect("k >= 2");
        scores.iter().position(|&c| c == best).expect("max exists")
    }

    pub fn summary(&self) -> TournamentSummary {
        TournamentSummary {
            borda: self.borda_scores(),
            copeland: self.copeland_scores(),
            condorcet_winner: self.condorcet_winner(),
        }
    }

    /// SAVAGE matrix: `P(i, j) = 1/2 + j/(2K)` for `i < j` with 1-based `j`.
    pub fn savage(k: usize) -> Result<Self, PrefMatError> {
        if k < 2 {
            return Err(PrefMatError::TooFewArms(k));
        }
        let kf = k as f64;
        Ok(Self::from_upper(k, |_, j| {
            0.5 + (j + 1) as f64 / (2.0 * kf)
        }))
    }

    /// The 20-arm BVS matrix. Arm 0 is the Condorcet winner with 0.51 against
    /// everybody; arm 1 beats every arm after it with certainty and wins the
    /// Borda count.
    pub fn bvs() -> Self {
        Self::from_upper(20, |i, _| if i == 0 { 0.51 } else { 1.0 })
    }

    /// Preference matrix induced by Bernoulli utilities:
    /// `P(i, j) = (mu_i - mu_j + 1) / 2`.
    pub fn from_utilities(mu: &[f64]) -> Result<Self, PrefMatError> {
        if let Some((i, &m)) = mu
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(PrefMatError::MeanOutOfRange(i, m));
        }
        if mu.len() < 2 {
            return Err(PrefMatError::TooFewArms(mu.len()));
        }
        Ok(Self::from_upper(mu.len(), |i, j| {
            (mu[i] - mu[j] + 1.0) / 2.0
        }))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, PrefMatError> {
        Self::validate(&read_real_table(reader)?)
    }

    pub fn load(path: &Path) -> Result<Self, PrefMatError> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for i in 0..self.k {
            let line: Vec<String> = self.row(i).iter().map(|&v| format_real(v)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<(), PrefMatError> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}
