//! Build a rate-1/2 code, encode, erase a few symbols and decode.

use polar_vlsi::polarcode::{construct_zero_frozen, encode, sc_decode, ErasureWord, ScOutcome};

fn main() -> polar_vlsi::Result<()> {
    let code = construct_zero_frozen(4, 0.3, 8)?;
    println!("frozen indices: {}", code.frozen());
    let info = [1, 0, 1, 1, 0, 0, 1, 0];
    let x = encode(&code, &info)?;
    println!("codeword: {x:?}");
    for erased in [vec![], vec![3, 9], vec![0, 1, 2, 3, 4, 5]] {
        let y = ErasureWord::erase(&x, |i| erased.contains(&i));
        match sc_decode(&code, &y)? {
            ScOutcome::Decoded(bits) => println!("erased {erased:?}: decoded {bits:?} ok={}", bits == info),
            ScOutcome::Failure { index } => println!("erased {erased:?}: failed at u_{index}"),
        }
    }
    Ok(())
}
