//! Closed-form lower bounds at a few block lengths and rates.

use polar_vlsi::bounds::{chi, chi_energy_window, decoder_energy_scale, decoder_mbw_bound, encoder_at2, encoder_energy, thompson_area};

fn main() -> polar_vlsi::Result<()> {
    for n in [64.0, 256.0, 1024.0] {
        let r = 0.75;
        let w = decoder_mbw_bound(n, r)?.value;
        println!(
            "N={n:<5} AT^2 >= {:<8} E >= {:<8} (q=1)  MBW >= {w:<4} area >= {:<8} E_dec ~ {}",
            encoder_at2(n, r)?.value,
            encoder_energy(n, r, 1.0)?.value,
            thompson_area(w)?.value,
            decoder_energy_scale(n, r)?.value
        );
    }
    let c = chi(0.45, 0.5)?;
    let win = chi_energy_window(c)?;
    println!("chi={c:.3}: lower {:.3e}, upper {:.3e}, general {:.3e}", win.lower.value, win.upper.value, win.general_floor.value);
    if let Err(e) = encoder_at2(256.0, 0.5) {
        println!("R = 1/2: {e}");
    }
    Ok(())
}
