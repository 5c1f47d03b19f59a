//! Encoder and decoder cost on the mesh for N = 2^4 .. 2^10, with log-log fits.

use polar_vlsi::bounds::fit_scaling_exponent;
use polar_vlsi::mesh::{simulate_decode, simulate_encode, MeshConfig};
use polar_vlsi::polarcode::{construct_zero_frozen, encode, ErasureWord};

fn main() -> polar_vlsi::Result<()> {
    let mut enc = Vec::new();
    let mut dec = Vec::new();
    println!("{:>5} {:>10} {:>12} {:>9} {:>10} {:>12} {:>9}", "N", "T_enc", "E_enc", "q_enc", "T_dec", "E_dec", "q_dec");
    for n in 4..=10u32 {
        let size = 1usize << n;
        let code = construct_zero_frozen(n, 0.5, size * 3 / 4)?;
        let cfg = MeshConfig::new(n)?;
        let info: Vec<u8> = (0..code.info_len()).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let (_, e) = simulate_encode(&code, &info, &cfg)?;
        let y = ErasureWord::from_bits(&encode(&code, &info)?);
        let (_, d) = simulate_decode(&code, &y, &cfg)?;
        println!(
            "{:>5} {:>10} {:>12} {:>9.5} {:>10} {:>12} {:>9.6}",
            size, e.cycles, e.energy, e.q, d.cycles, d.energy, d.q
        );
        enc.push((size as f64, e.energy as f64));
        dec.push((size as f64, d.energy as f64));
    }
    println!("encoder E slope {:.4}", fit_scaling_exponent(&enc)?.slope);
    println!("decoder E slope {:.4}", fit_scaling_exponent(&dec)?.slope);
    Ok(())
}
