//! Rank buckets used for color assignment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const BUCKET_COUNT: usize = 16;

/// Index of one of the 16 color buckets. 0 is the most predictable,
/// 15 the least predictable (and the bucket of unscored positions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BucketIndex(u8);

impl BucketIndex {
    pub const MOST_PREDICTABLE: BucketIndex = BucketIndex(0);
    pub const UNSCORED: BucketIndex = BucketIndex(15);

    pub fn new(value: u8) -> Option<Self> {
        ((value as usize) < BUCKET_COUNT).then_some(BucketIndex(value))
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }
}

/// The rank of the observed token at a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Rank {
    /// 1-based position in the descending-probability ordering.
    Exact(u64),
    /// The backend only returned a truncated candidate list that did not
    /// contain the observed token.
    Unknown,
    /// No preceding context was available.
    Unscored,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BucketError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("bucket table needs {expected} strictly increasing upper bounds starting at 1, got {got:?}")]
    InvalidTable { expected: usize, got: Vec<u64> },
}

/// Inclusive upper rank bound of buckets 0..=14; bucket 15 takes the rest.
pub const DEFAULT_UPPER_BOUNDS: [u64; BUCKET_COUNT - 1] =
    [1, 2, 3, 4, 6, 8, 12, 16, 32, 64, 128, 256, 512, 1024, 4096];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct BucketTable {
    upper: [u64; BUCKET_COUNT - 1],
}

impl Default for BucketTable {
    fn default() -> Self {
        BucketTable { upper: DEFAULT_UPPER_BOUNDS }
    }
}

impl BucketTable {
    pub fn new(upper: &[u64]) -> Result<Self, BucketError> {
        let invalid = || BucketError::InvalidTable { expected: BUCKET_COUNT - 1, got: upper.to_vec() };
        let arr: [u64; BUCKET_COUNT - 1] = upper.try_into().map_err(|_| invalid())?;
        if arr[0] < 1 || arr.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid());
        }
        Ok(BucketTable { upper: arr })
    }

    pub fn upper_bounds(&self) -> &[u64] {
        &self.upper
    }

    pub fn bucket_of_rank(&self, rank: u64) -> Result<BucketIndex, BucketError> {
        if rank == 0 {
            return Err(BucketError::ZeroRank);
        }
        let idx = self.upper.partition_point(|&ub| ub < rank);
        Ok(BucketIndex(idx as u8))
    }

    /// Bucket for a position, falling back to [`bucket_of_probability`]
    /// when the rank is unknown.
    pub fn bucket(&self, rank: Rank, probability: Option<f64>) -> BucketIndex {
        match rank {
            Rank::Exact(r) => self.bucket_of_rank(r).unwrap_or(BucketIndex::UNSCORED),
            Rank::Unknown => probability.map_or(BucketIndex::UNSCORED, bucket_of_probability),
            Rank::Unscored => BucketIndex::UNSCORED,
        }
    }
}

impl TryFrom<Vec<u64>> for BucketTable {
    type Error = BucketError;
    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        BucketTable::new(&v)
    }
}

impl From<BucketTable> for Vec<u64> {
    fn from(t: BucketTable) -> Vec<u64> {
        t.upper.to_vec()
    }
}

/// Bucket by probability alone: bucket `b < 15` holds `(2^-(b+1), 2^-b]`.
pub fn bucket_of_probability(p: f64) -> BucketIndex {
    if !(p > 0.0) {
        return BucketIndex::UNSCORED;
    }
    let b = (-p.log2()).floor();
    if b >= 15.0 {
        BucketIndex::UNSCORED
    } else {
        BucketIndex(b.max(0.0) as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let t = BucketTable::default();
        assert_eq!(t.bucket_of_rank(1).unwrap().get(), 0);
        assert_eq!(t.bucket_of_rank(5).unwrap().get(), 4);
        assert_eq!(t.bucket_of_rank(6).unwrap().get(), 4);
        assert_eq!(t.bucket_of_rank(4096).unwrap().get(), 14);
        assert_eq!(t.bucket_of_rank(4097).unwrap().get(), 15);
        assert_eq!(t.bucket_of_rank(5000).unwrap().get(), 15);
        assert_eq!(t.bucket_of_rank(0), Err(BucketError::ZeroRank));
        assert_eq!(t.bucket(Rank::Unscored, None), BucketIndex::UNSCORED);
    }

    #[test]
    fn rank_table_matches_interval_listing() {
        let t = BucketTable::default();
        let intervals: [(u64, u64); 15] = [
            (1, 1), (2, 2), (3, 3), (4, 4), (5, 6), (7, 8), (9, 12), (13, 16),
            (17, 32), (33, 64), (65, 128), (129, 256), (257, 512), (513, 1024), (1025, 4096),
        ];
        for (b, (lo, hi)) in intervals.iter().enumerate() {
            for r in *lo..=*hi {
                assert_eq!(t.bucket_of_rank(r).unwrap().get(), b, "rank {r}");
            }
        }
    }

    #[test]
    fn probability_thresholds() {
        assert_eq!(bucket_of_probability(1.0).get(), 0);
        assert_eq!(bucket_of_probability(0.75).get(), 0);
        assert_eq!(bucket_of_probability(0.5).get(), 1);
        assert_eq!(bucket_of_probability(0.3).get(), 1);
        assert_eq!(bucket_of_probability(0.25).get(), 2);
        assert_eq!(bucket_of_probability(2f64.powi(-15)).get(), 15);
        assert_eq!(bucket_of_probability(2f64.powi(-14)).get(), 14);
        assert_eq!(bucket_of_probability(0.0).get(), 15);
    }

    #[test]
    fn table_validation() {
        assert!(BucketTable::new(&[1, 2, 3]).is_err());
        let mut bad = DEFAULT_UPPER_BOUNDS;
        bad[3] = bad[2];
        assert!(BucketTable::new(&bad).is_err());
        assert!(BucketTable::new(&DEFAULT_UPPER_BOUNDS).is_ok());
    }
}
