//! Block-error rate of SC decoding on the erasure channel at rate 1/4.

use polar_vlsi::polarcode::{construct_zero_frozen, simulate_block_error};

fn main() -> polar_vlsi::Result<()> {
    println!("{:>5} {:>5} {:>9} {:>9} {:>12}", "N", "eps", "p_hat", "ci95", "union bound");
    for n in [6u32, 8, 10] {
        for eps in [0.4, 0.5, 0.6] {
            let code = construct_zero_frozen(n, eps, (1 << n) / 4)?;
            let est = simulate_block_error(&code, eps, 5_000, 1)?;
            println!(
                "{:>5} {eps:>5} {:>9.4} {:>9.4} {:>12.3e}",
                1 << n,
                est.p_hat,
                est.ci95_halfwidth,
                code.union_bound()
            );
        }
    }
    Ok(())
}
