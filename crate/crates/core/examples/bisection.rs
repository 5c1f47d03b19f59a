//! Section widths of the decoding graph P_n, with and without frozen outputs.

use polar_vlsi::gf2::IndexSet;
use polar_vlsi::graphs::{build_polar_graph, classify_bowties, freeze_graph, m_section_width, mbw, write_edge_list, Solver};

fn main() -> polar_vlsi::Result<()> {
    let p1 = build_polar_graph(1)?;
    print!("P_1 edge list:\n{}", write_edge_list(&p1));

    let g = build_polar_graph(2)?;
    for m in 0..=2 {
        let r = m_section_width(&g, g.symbol_nodes(), m, Solver::Exhaustive)?;
        let census = classify_bowties(&g, &r.partition)?;
        println!("P_2 m={m}: width {} split={} crossing={}", r.width, census.split, census.crossing());
    }

    let p3 = build_polar_graph(3)?;
    println!("P_3: {} vertices, {} edges", p3.vertex_count(), p3.edge_count());
    let r = mbw(&p3, p3.symbol_nodes(), Solver::branch_and_bound())?;
    println!("P_3 bisection width {} (certified: {})", r.width, r.certified);
    let frozen = IndexSet::new(8, [1, 2])?;
    let f = freeze_graph(&p3, &frozen)?;
    let r = mbw(&f, f.symbol_nodes(), Solver::branch_and_bound())?;
    println!("P_3 frozen {{{frozen}}}: bisection width {} at R = {}", r.width, f.rate());
    Ok(())
}
