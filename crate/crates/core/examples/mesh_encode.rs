//! Encode on the mesh and print the send-back schedule and cost report.

use polar_vlsi::mesh::{encode_schedule, simulate_encode, MeshConfig};
use polar_vlsi::polarcode::{construct_zero_frozen, encode};

fn main() -> polar_vlsi::Result<()> {
    let n = 4;
    let cfg = MeshConfig::new(n)?;
    println!("grid {}x{}, t_route={}, t_parity={}", cfg.rows, cfg.cols, cfg.t_route, cfg.t_parity);
    for p in encode_schedule(n, &cfg)? {
        println!("stage {} rows%{}={} offset {:>2}: {:?}", p.stage, p.modulus, p.residue, p.offset, p.senders);
    }
    let code = construct_zero_frozen(n, 0.5, 12)?;
    let info = [1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0];
    let (x, report) = simulate_encode(&code, &info, &cfg)?;
    assert_eq!(x, encode(&code, &info)?);
    println!("codeword {x:?}");
    println!("T={} A={} q={:.4} E={} messages={} conflicts={}", report.cycles, report.area, report.q, report.energy, report.messages_sent, report.conflicts);
    Ok(())
}
