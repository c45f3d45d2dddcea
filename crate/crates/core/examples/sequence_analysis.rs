//! Müntz sums, lacunarity and quasilacunary blocks for a few sequences.

use muntz_embed::sequence::{check_lacunary, find_quasilacunary_blocks, muntz_sum_bound};
use muntz_embed::ExponentSequence;

fn main() -> muntz_embed::Result<()> {
    let seqs = [
        ("n^2", ExponentSequence::power(2.0)),
        ("2^n", ExponentSequence::geometric(1.0, 2.0)),
        ("blocks k^7..k^7+k^5", ExponentSequence::grouped_powers(7, 5)),
    ];
    for (name, seq) in &seqs {
        let n = 2000;
        let sum = muntz_sum_bound(seq, n)?;
        let q = check_lacunary(seq, 200)?;
        let blocks = find_quasilacunary_blocks(seq, 200, 2.0, 16)?;
        println!("{name}");
        println!("  Σ 1/λ over {n} terms ∈ [{:.6}, {:.6}]", sum.lower, sum.upper);
        println!("  lacunary ratio: {q:?}");
        match blocks {
            Some(c) => println!("  quasilacunary: q = {:.3}, block length ≤ {}", c.q, c.n_block),
            None => println!("  quasilacunary: no blocks of length ≤ 16 with ratio 2"),
        }
    }
    Ok(())
}
