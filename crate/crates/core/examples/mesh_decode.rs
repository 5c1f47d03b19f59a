//! Serial SC decoding on the mesh: activity falls as 1/N.

use polar_vlsi::mesh::{simulate_decode, MeshConfig};
use polar_vlsi::polarcode::{construct_zero_frozen, encode, ErasureWord};

fn main() -> polar_vlsi::Result<()> {
    for n in [4u32, 6, 8] {
        let size = 1usize << n;
        let code = construct_zero_frozen(n, 0.3, size / 2)?;
        let info: Vec<u8> = (0..code.info_len()).map(|i| (i % 3 == 1) as u8).collect();
        let x = encode(&code, &info)?;
        let y = ErasureWord::erase(&x, |i| i % 7 == 0);
        let (out, r) = simulate_decode(&code, &y, &MeshConfig::new(n)?)?;
        println!(
            "N={size:<4} decoded={} T={} messages={} q={:.5} E={}",
            out.info() == Some(info.as_slice()),
            r.cycles,
            r.messages_sent,
            r.q,
            r.energy
        );
    }
    Ok(())
}
