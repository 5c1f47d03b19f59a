use polar_vlsi::gf2::{
    bit_reversal_perm, f_matrix, g_matrix, min_rank_sum, rank_f2, rectangle, rectangle_pair, row_reduce_pair, BitMatrix,
    ColumnFamily, IndexSet, RankSumQuery, SearchMode, Target,
};
use proptest::prelude::*;

/// Rank by textbook elimination on byte rows.
fn rank_oracle(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] == 1) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[c] == 1 {
                row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
            }
        }
        rank += 1;
    }
    rank
}

fn to_rows(m: &BitMatrix) -> Vec<Vec<u8>> {
    (0..m.rows()).map(|r| m.row_bits(r)).collect()
}

fn reverse_by_string(i: usize, n: u32) -> usize {
    let s: String = format!("{:0width$b}", i - 1, width = n as usize).chars().rev().collect();
    usize::from_str_radix(&s, 2).unwrap() + 1
}

#[test]
fn bit_reversal_matches_string_oracle() {
    assert_eq!(bit_reversal_perm(3).unwrap(), [1, 5, 3, 7, 2, 6, 4, 8]);
    for n in 1..=8 {
        let p = bit_reversal_perm(n).unwrap();
        for (k, &s) in p.iter().enumerate() {
            assert_eq!(s, reverse_by_string(k + 1, n));
            assert_eq!(p[s - 1], k + 1);
        }
    }
}

#[test]
fn g_equals_permutation_times_f() {
    for n in 1..=6u32 {
        let size = 1usize << n;
        let sigma = bit_reversal_perm(n).unwrap();
        let f = to_rows(&f_matrix(n).unwrap());
        let b: Vec<Vec<u8>> = (0..size)
            .map(|i| (0..size).map(|j| (sigma[i] == j + 1) as u8).collect())
            .collect();
        let product: Vec<Vec<u8>> = (0..size)
            .map(|i| {
                (0..size)
                    .map(|j| (0..size).fold(0u8, |acc, k| acc ^ (b[i][k] & f[k][j])))
                    .collect()
            })
            .collect();
        assert_eq!(to_rows(&g_matrix(n).unwrap()), product, "n={n}");
    }
    assert_eq!(
        to_rows(&g_matrix(2).unwrap()),
        [[1, 0, 0, 0], [1, 0, 1, 0], [1, 1, 0, 0], [1, 1, 1, 1]]
    );
}

#[test]
fn full_rank_kernels() {
    for n in 1..=8 {
        assert_eq!(rank_f2(&f_matrix(n).unwrap()), 1 << n);
        assert_eq!(rank_f2(&g_matrix(n).unwrap()), 1 << n);
    }
}

#[test]
fn small_rectangles() {
    let f2 = f_matrix(2).unwrap();
    let r = rectangle(&f2, &IndexSet::new(4, [3, 4]).unwrap(), &IndexSet::new(4, [1, 2]).unwrap()).unwrap();
    assert_eq!(to_rows(&r), [[1, 0], [1, 1]]);
    assert_eq!(rank_f2(&r), 2);
    let z = rectangle(&f2, &IndexSet::new(4, [1]).unwrap(), &IndexSet::new(4, [2, 3, 4]).unwrap()).unwrap();
    assert_eq!(rank_f2(&z), 0);
    assert_eq!(rank_f2(&BitMatrix::zeros(3, 3)), 0);
    assert_eq!(rank_f2(&BitMatrix::zeros(0, 5)), 0);
}

#[test]
fn balanced_minima_are_frozen() {
    // Exhaustive minima recomputed independently: 1, 2, 4 for n = 1, 2, 3.
    for (n, expected) in [(1, 1), (2, 2), (3, 4)] {
        for target in [Target::F, Target::G] {
            let q = RankSumQuery::new(n, target, ColumnFamily::BalancedColumns, SearchMode::Exhaustive);
            let r = min_rank_sum(&q).unwrap();
            assert_eq!(r.min_rank_sum, expected, "n={n} {target:?}");
            assert!(r.bound_holds);
            assert_eq!(r.violations, 0);
            let m = target.matrix(n).unwrap();
            let (a, b) = rectangle_pair(&m, &r.witness.0, &r.witness.1).unwrap();
            assert_eq!(rank_f2(&a) + rank_f2(&b), r.min_rank_sum);
            assert_eq!(r.witness.1.len(), 1 << (n - 1));
        }
    }
}

#[test]
fn unrestricted_degenerate_minimum() {
    let q = RankSumQuery::new(2, Target::F, ColumnFamily::Unrestricted, SearchMode::Exhaustive);
    let r = min_rank_sum(&q).unwrap();
    assert_eq!(r.min_rank_sum, 0);
    assert!(!r.bound_holds);
    assert!(r.witness.0.is_empty());
    assert_eq!(r.witness.1, IndexSet::full(4));
}

#[test]
fn exhaustive_agrees_with_brute_force_oracle() {
    for n in 1..=2u32 {
        let size = 1usize << n;
        let m = to_rows(&f_matrix(n).unwrap());
        let mut best = usize::MAX;
        for rmask in 0u64..1 << size {
            for cmask in 0u64..1 << size {
                if cmask.count_ones() as usize != size / 2 {
                    continue;
                }
                let pick = |rows: u64, cols: u64| -> Vec<Vec<u8>> {
                    (0..size)
                        .filter(|i| rows >> i & 1 == 1)
                        .map(|i| (0..size).filter(|j| cols >> j & 1 == 1).map(|j| m[i][j]).collect())
                        .collect()
                };
                let full = (1u64 << size) - 1;
                let s = rank_oracle(&pick(rmask, cmask)) + rank_oracle(&pick(!rmask & full, !cmask & full));
                best = best.min(s);
            }
        }
        let q = RankSumQuery::new(n, Target::F, ColumnFamily::BalancedColumns, SearchMode::Exhaustive);
        assert_eq!(min_rank_sum(&q).unwrap().min_rank_sum, best);
    }
}

#[test]
fn sampled_mode_is_reproducible() {
    let mode = SearchMode::Sampled { samples: 5_000, seed: 11 };
    let q = RankSumQuery::new(4, Target::G, ColumnFamily::BalancedColumns, mode);
    let a = min_rank_sum(&q).unwrap();
    assert_eq!(a, min_rank_sum(&q).unwrap());
    assert_eq!(a.pairs_checked, 5_000);
    assert!(min_rank_sum(&RankSumQuery::new(
        4,
        Target::G,
        ColumnFamily::BalancedColumns,
        SearchMode::Sampled { samples: 0, seed: 1 }
    ))
    .is_err());
}

#[test]
fn balanced_bound_fails_at_level_four() {
    let size = 16;
    let r = IndexSet::new(size, [3, 5, 6, 7, 8, 15, 16]).unwrap();
    let c = IndexSet::new(size, [2, 6, 9, 10, 11, 12, 14, 16]).unwrap();
    let f = to_rows(&f_matrix(4).unwrap());
    let pick = |rows: &IndexSet, cols: &IndexSet| -> Vec<Vec<u8>> {
        rows.iter().map(|i| cols.iter().map(|j| f[i - 1][j - 1]).collect()).collect()
    };
    let (rbar, cbar) = (r.complement(), c.complement());
    assert_eq!(rank_oracle(&pick(&r, &c)), 3);
    assert_eq!(rank_oracle(&pick(&rbar, &cbar)), 4);

    let mode = SearchMode::Sampled { samples: 5_000, seed: 11 };
    let q = RankSumQuery::new(4, Target::G, ColumnFamily::BalancedColumns, mode);
    let rep = min_rank_sum(&q).unwrap();
    assert_eq!(rep.min_rank_sum, 7);
    assert_eq!(rep.violations, 2);
    assert!(!rep.bound_holds);
    let (a, b) = rectangle_pair(&g_matrix(4).unwrap(), &rep.witness.0, &rep.witness.1).unwrap();
    let sum = rank_oracle(&to_rows(&a)) + rank_oracle(&to_rows(&b));
    assert_eq!(sum, 7);
}

fn subset(size: usize, mask: u64) -> IndexSet {
    IndexSet::from_mask(size, if size >= 64 { mask } else { mask & ((1u64 << size) - 1) })
}

proptest! {
    #[test]
    fn rank_matches_elimination_oracle(rows in 0usize..70, cols in 0usize..70, seed in any::<u64>()) {
        let mut s = seed;
        let data: Vec<Vec<u8>> = (0..rows)
            .map(|_| (0..cols).map(|_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 62) as u8 & 1 }).collect())
            .collect();
        let m = if rows == 0 { BitMatrix::zeros(0, cols) } else { BitMatrix::from_rows(&data).unwrap() };
        prop_assert_eq!(rank_f2(&m), rank_oracle(&data));
    }

    #[test]
    fn rectangle_rank_floor(n in 1u32..=6, r in any::<u64>(), c in any::<u64>()) {
        let size = 1usize << n;
        let (r, c) = (subset(size, r), subset(size, c));
        for target in [Target::F, Target::G] {
            let m = target.matrix(n).unwrap();
            let rank = rank_f2(&rectangle(&m, &r, &c).unwrap()) as i64;
            prop_assert!(rank >= r.len() as i64 + c.len() as i64 - size as i64);
        }
    }

    #[test]
    fn rank_invariant_under_bit_reversed_rows(n in 1u32..=6, r in any::<u64>(), c in any::<u64>()) {
        let size = 1usize << n;
        let (r, c) = (subset(size, r), subset(size, c));
        let sigma = bit_reversal_perm(n).unwrap();
        let rs = IndexSet::new(size, r.iter().map(|i| sigma[i - 1])).unwrap();
        let f = rank_f2(&rectangle(&f_matrix(n).unwrap(), &r, &c).unwrap());
        let g = rank_f2(&rectangle(&g_matrix(n).unwrap(), &rs, &c).unwrap());
        prop_assert_eq!(f, g);
    }

    #[test]
    fn row_deletion_costs_at_most_one_rank_each(n in 1u32..=5, r in any::<u64>(), c in any::<u64>(), da in any::<u64>(), db in any::<u64>()) {
        let size = 1usize << n;
        let (r, c) = (subset(size, r), subset(size, c));
        let m = f_matrix(n).unwrap();
        let (a, b) = rectangle_pair(&m, &r, &c).unwrap();
        let drop_a: Vec<usize> = (1..=a.rows()).filter(|k| da >> (k - 1) & 1 == 1).collect();
        let drop_b: Vec<usize> = (1..=b.rows()).filter(|k| db >> (k - 1) & 1 == 1).collect();
        let (ra, rb) = row_reduce_pair((a.clone(), b.clone()), &drop_a, &drop_b).unwrap();
        prop_assert_eq!(ra.rows(), a.rows() - drop_a.len());
        prop_assert!(rank_f2(&ra) + drop_a.len() >= rank_f2(&a));
        prop_assert!(rank_f2(&rb) + drop_b.len() >= rank_f2(&b));
    }
}
