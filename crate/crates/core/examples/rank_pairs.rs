//! Smallest rectangle-pair rank sums of F_n and G_n over balanced column sets.

use polar_vlsi::gf2::{min_rank_sum, rank_f2, rectangle_pair, ColumnFamily, RankSumQuery, SearchMode, Target};

fn main() -> polar_vlsi::Result<()> {
    for n in 1..=4u32 {
        for target in [Target::F, Target::G] {
            let mode = if n <= 3 {
                SearchMode::Exhaustive
            } else {
                SearchMode::Sampled { samples: 100_000, seed: 7 }
            };
            let r = min_rank_sum(&RankSumQuery::new(n, target, ColumnFamily::BalancedColumns, mode))?;
            println!(
                "n={n} {} {:<10} pairs={:<9} min={} bound={} below={}",
                target.name(),
                mode.name(),
                r.pairs_checked,
                r.min_rank_sum,
                r.bound,
                r.violations
            );
            if !r.bound_holds {
                let (a, b) = rectangle_pair(&target.matrix(n)?, &r.witness.0, &r.witness.1)?;
                println!("  r = {{{}}}  c = {{{}}}  ranks {} + {}", r.witness.0, r.witness.1, rank_f2(&a), rank_f2(&b));
            }
        }
    }
    Ok(())
}
