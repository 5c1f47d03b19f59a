//! Exhaustive and sampled search for the smallest rectangle-pair rank sum
//! of `F_n` or `G_n`.
//!
//! Every pair `(m(r, c), m(r̄, c̄))` is scored by
//! `rank(m(r, c)) + rank(m(r̄, c̄))`. The balanced family restricts the
//! column set to `|c| = N/2`; the unrestricted family admits every column
//! set and is kept as a diagnostic (it contains degenerate pairs, e.g.
//! `r = ∅, c = [N]`, whose rank sum is zero).
//!
//! The reported witness is deterministic: among all pairs attaining the
//! minimum, the lexicographically smallest `(r, c)` (as sorted 1-based index
//! lists) wins, regardless of how the search is split across threads.

use std::cmp::Ordering;

use rand::{seq::index::sample, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{f_matrix, g_matrix, BitMatrix, IndexSet};
use crate::error::{invalid, Result};

/// Largest level whose rows fit in one machine word.
const MAX_LEVEL: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Target {
    F,
    G,
}

impl Target {
    pub fn matrix(self, n: u32) -> Result<BitMatrix> {
        match self {
            Target::F => f_matrix(n),
            Target::G => g_matrix(n),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::F => "F",
            Target::G => "G",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ColumnFamily {
    /// `|c| = N/2`.
    BalancedColumns,
    Unrestricted,
}

impl ColumnFamily {
    pub fn name(self) -> &'static str {
        match self {
            ColumnFamily::BalancedColumns => "balanced",
            ColumnFamily::Unrestricted => "unrestricted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

impl SearchMode {
    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RankSumQuery {
    pub n: u32,
    pub target: Target,
    pub family: ColumnFamily,
    pub mode: SearchMode,
    /// Largest level accepted in exhaustive mode.
    pub exhaustive_limit: u32,
}

impl RankSumQuery {
    pub fn new(n: u32, target: Target, family: ColumnFamily, mode: SearchMode) -> Self {
        RankSumQuery {
            n,
            target,
            family,
            mode,
            exhaustive_limit: 3,
        }
    }

    /// Raises the exhaustive limit to 4 (about 8.4e8 pairs in the balanced family).
    pub fn long_run(mut self) -> Self {
        self.exhaustive_limit = 4;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankSumReport {
    pub n: u32,
    pub target: Target,
    pub family: ColumnFamily,
    pub mode: SearchMode,
    pub pairs_checked: u64,
    pub min_rank_sum: usize,
    #[serde(skip)]
    pub witness: (IndexSet, IndexSet),
    /// `N / 2`.
    pub bound: usize,
    pub bound_holds: bool,
    /// Pairs checked whose rank sum is below `bound`.
    pub violations: u64,
}

/// Word-packed copy of the target matrix: `rows[i]` bit `j` is entry `(i, j)`.
fn packed_rows(m: &BitMatrix) -> Vec<u64> {
    (0..m.rows()).map(|r| m.row_words(r)[0]).collect()
}

/// Gathers the bits of `row` at the set positions of `cols` into the low bits.
#[inline]
fn compress(row: u64, mut cols: u64) -> u64 {
    let mut out = 0;
    let mut k = 0;
    while cols != 0 {
        let c = cols.trailing_zeros();
        out |= (row >> c & 1) << k;
        k += 1;
        cols &= cols - 1;
    }
    out
}

/// Rank over GF(2) of the rows of `rows` selected by `mask`.
#[inline]
fn rank_of(rows: &[u64], mut mask: u64) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        let mut v = rows[i];
        while v != 0 {
            let p = 63 - v.leading_zeros() as usize;
            if basis[p] == 0 {
                basis[p] = v;
                rank += 1;
                break;
            }
            v ^= basis[p];
        }
    }
    rank
}

fn mask_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

/// Candidate minimum: (rank sum, row mask, column mask).
#[derive(Clone, Copy)]
struct Candidate {
    sum: usize,
    r: u64,
    c: u64,
}

impl Candidate {
    fn cmp_key(&self, other: &Candidate) -> Ordering {
        self.sum
            .cmp(&other.sum)
            .then_with(|| mask_indices(self.r).cmp(&mask_indices(other.r)))
            .then_with(|| mask_indices(self.c).cmp(&mask_indices(other.c)))
    }

    fn better(a: Option<Candidate>, b: Candidate) -> Option<Candidate> {
        match a {
            None => Some(b),
            Some(a) if b.sum > a.sum => Some(a),
            Some(a) => Some(if b.cmp_key(&a) == Ordering::Less { b } else { a }),
        }
    }
}

struct Scorer {
    full: u64,
    rows: Vec<u64>,
}

impl Scorer {
    fn new(m: &BitMatrix) -> Self {
        let size = m.rows();
        Scorer {
            full: if size == 64 { u64::MAX } else { (1u64 << size) - 1 },
            rows: packed_rows(m),
        }
    }

    fn column_views(&self, c: u64) -> (Vec<u64>, Vec<u64>) {
        let cbar = !c & self.full;
        (
            self.rows.iter().map(|&row| compress(row, c)).collect(),
            self.rows.iter().map(|&row| compress(row, cbar)).collect(),
        )
    }

    fn score(&self, r: u64, c: u64) -> usize {
        let (a, b) = self.column_views(c);
        rank_of(&a, r) + rank_of(&b, !r & self.full)
    }
}

fn column_masks(size: usize, family: ColumnFamily) -> Vec<u64> {
    let full = 1u64 << size;
    (0..full)
        .filter(|c| family == ColumnFamily::Unrestricted || c.count_ones() as usize == size / 2)
        .collect()
}

fn random_columns(rng: &mut ChaCha8Rng, size: usize, family: ColumnFamily, full: u64) -> u64 {
    match family {
        ColumnFamily::Unrestricted => rng.gen::<u64>() & full,
        ColumnFamily::BalancedColumns => sample(rng, size, size / 2)
            .into_iter()
            .fold(0, |acc, j| acc | 1u64 << j),
    }
}

/// Minimum rectangle-pair rank sum over the requested family.
pub fn min_rank_sum(q: &RankSumQuery) -> Result<RankSumReport> {
    if q.n < 1 || q.n > MAX_LEVEL {
        return invalid(format!("level {} outside [1, {MAX_LEVEL}]", q.n));
    }
    let m = q.target.matrix(q.n)?;
    let size = m.rows();
    let scorer = Scorer::new(&m);

    let bound = size / 2;
    let merge = |x: (Option<Candidate>, u64), y: (Option<Candidate>, u64)| {
        let best = match y.0 {
            Some(b) => Candidate::better(x.0, b),
            None => x.0,
        };
        (best, x.1 + y.1)
    };
    let ((best, violations), pairs_checked) = match q.mode {
        SearchMode::Exhaustive => {
            if q.n > q.exhaustive_limit {
                return invalid(format!(
                    "exhaustive search limited to n <= {} (requested {})",
                    q.exhaustive_limit, q.n
                ));
            }
            let cols = column_masks(size, q.family);
            let rows_total = 1u64 << size;
            let best = cols
                .par_iter()
                .map(|&c| {
                    let (a, b) = scorer.column_views(c);
                    let mut best: Option<Candidate> = None;
                    let mut bad = 0u64;
                    for r in 0..rows_total {
                        let sum = rank_of(&a, r) + rank_of(&b, !r & scorer.full);
                        bad += (sum < bound) as u64;
                        best = Candidate::better(best, Candidate { sum, r, c });
                    }
                    (best, bad)
                })
                .reduce(|| (None, 0), merge);
            (best, cols.len() as u64 * rows_total)
        }
        SearchMode::Sampled { samples, seed } => {
            if samples == 0 {
                return invalid("sampled mode needs at least one sample");
            }
            let best = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i);
                    let r = rng.gen::<u64>() & scorer.full;
                    let c = random_columns(&mut rng, size, q.family, scorer.full);
                    let sum = scorer.score(r, c);
                    (Some(Candidate { sum, r, c }), (sum < bound) as u64)
                })
                .reduce(|| (None, 0), merge);
            (best, samples)
        }
    };

    let best = best.expect("search space is never empty");
    Ok(RankSumReport {
        n: q.n,
        target: q.target,
        family: q.family,
        mode: q.mode,
        pairs_checked,
        min_rank_sum: best.sum,
        witness: (IndexSet::from_mask(size, best.r), IndexSet::from_mask(size, best.c)),
        bound,
        bound_holds: best.sum >= bound,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowReducedReport {
    pub n: u32,
    pub target: Target,
    pub pairs_checked: u64,
    pub reductions_checked: u64,
    pub violations: u64,
    /// Smallest `rank sum - (N/2 - k)` seen over every reduction.
    pub min_margin: i64,
}

/// Checks every `k`-row-reduced balanced-column rectangle pair against
/// `rank sum >= N/2 - k`. Each of the `N` matrix rows belongs to exactly one
/// member of a pair, so a reduction is any subset of `[N]` to delete.
pub fn verify_row_reduced(n: u32, target: Target) -> Result<RowReducedReport> {
    if !(1..=3).contains(&n) {
        return invalid(format!("row-reduced verification limited to n in [1, 3], got {n}"));
    }
    let m = target.matrix(n)?;
    let size = m.rows();
    let scorer = Scorer::new(&m);
    let full = scorer.full;
    let half = (size / 2) as i64;
    let cols = column_masks(size, ColumnFamily::BalancedColumns);
    let (reductions, violations, min_margin) = cols
        .par_iter()
        .map(|&c| {
            let (a, b) = scorer.column_views(c);
            let mut checked = 0u64;
            let mut bad = 0u64;
            let mut margin = i64::MAX;
            for r in 0..=full {
                let rbar = !r & full;
                for d in 0..=full {
                    let k = d.count_ones() as i64;
                    let sum = (rank_of(&a, r & !d) + rank_of(&b, rbar & !d)) as i64;
                    let slack = sum - (half - k);
                    checked += 1;
                    if slack < 0 {
                        bad += 1;
                    }
                    margin = margin.min(slack);
                }
            }
            (checked, bad, margin)
        })
        .reduce(
            || (0, 0, i64::MAX),
            |x, y| (x.0 + y.0, x.1 + y.1, x.2.min(y.2)),
        );
    Ok(RowReducedReport {
        n,
        target,
        pairs_checked: cols.len() as u64 * (full + 1),
        reductions_checked: reductions,
        violations,
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compress_and_rank_helpers() {
        assert_eq!(compress(0b1011, 0b1010), 0b11);
        assert_eq!(compress(0b0100, 0b0110), 0b10);
        assert_eq!(rank_of(&[0b01, 0b10, 0b11], 0b111), 2);
        assert_eq!(rank_of(&[0b01, 0b10, 0b11], 0), 0);
    }

    #[test]
    fn samples_zero_rejected() {
        let q = RankSumQuery::new(
            2,
            Target::F,
            ColumnFamily::BalancedColumns,
            SearchMode::Sampled { samples: 0, seed: 1 },
        );
        assert!(min_rank_sum(&q).is_err());
    }

    #[test]
    fn exhaustive_limit_enforced() {
        let q = RankSumQuery::new(4, Target::F, ColumnFamily::BalancedColumns, SearchMode::Exhaustive);
        assert!(min_rank_sum(&q).is_err());
    }

    #[test]
    fn n1_balanced_minimum_is_one() {
        let q = RankSumQuery::new(1, Target::F, ColumnFamily::BalancedColumns, SearchMode::Exhaustive);
        let rep = min_rank_sum(&q).unwrap();
        assert_eq!(rep.min_rank_sum, 1);
        assert!(rep.bound_holds);
        assert_eq!(rep.pairs_checked, 4 * 2);
    }

    #[test]
    fn sampled_is_seed_deterministic() {
        let q = RankSumQuery::new(
            4,
            Target::G,
            ColumnFamily::BalancedColumns,
            SearchMode::Sampled { samples: 2000, seed: 7 },
        );
        assert_eq!(min_rank_sum(&q).unwrap(), min_rank_sum(&q).unwrap());
    }
}
