//! Exact m-section width and minimum bisection width.
//!
//! Two solvers:
//! * `Exhaustive` walks all `2^|V|` side assignments in Gray-code order with
//!   an incremental cut count. Limited to [`EXHAUSTIVE_VERTEX_LIMIT`] vertices.
//!   Among optimal partitions it returns the lexicographically smallest side
//!   vector (`Lower < Upper`, vertex 0 first).
//! * `BranchAndBound` branches only on the designated vertices (highest
//!   degree first, ties by index). Undesignated vertices are never branched
//!   on: once some designated vertices are pinned, the cheapest completion is
//!   a minimum s–t cut, which serves as the bound at inner nodes and is exact
//!   at the leaves. Certified when the search finishes within its node budget.

use super::flow::FlowNetwork;
use super::{CutResult, DecodingGraph, Partition, Side};
use crate::error::{invalid, Error, Result};

pub const EXHAUSTIVE_VERTEX_LIMIT: usize = 24;

const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Exhaustive,
    BranchAndBound { node_budget: u64 },
}

impl Solver {
    pub fn branch_and_bound() -> Self {
        Solver::BranchAndBound {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

fn check_subset(g: &DecodingGraph, x: &[usize], m: usize) -> Result<()> {
    if m > x.len() {
        return invalid(format!("m = {m} exceeds |X| = {}", x.len()));
    }
    let mut seen = vec![false; g.vertex_count()];
    for &v in x {
        if v >= g.vertex_count() || seen[v] {
            return invalid(format!("bad or repeated vertex {v} in X"));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Visits every assignment with exactly `m` designated vertices upper, as
/// `(upper mask, cut width)`.
fn exhaustive_scan(g: &DecodingGraph, x: &[usize], m: usize, mut visit: impl FnMut(u64, usize)) -> Result<()> {
    let nv = g.vertex_count();
    if nv > EXHAUSTIVE_VERTEX_LIMIT {
        return Err(Error::SolverLimit(format!(
            "exhaustive solver is limited to {EXHAUSTIVE_VERTEX_LIMIT} vertices, graph has {nv}"
        )));
    }
    let adj = g.adjacency();
    let mut in_x = vec![false; nv];
    for &v in x {
        in_x[v] = true;
    }
    let mut mask = 0u64;
    let mut width: isize = 0;
    let mut upper_x = 0usize;
    if m == 0 {
        visit(0, 0);
    }
    for step in 1u64..(1u64 << nv) {
        let v = step.trailing_zeros() as usize;
        let was_upper = mask >> v & 1 == 1;
        for &w in &adj[v] {
            let w_upper = mask >> w & 1 == 1;
            width += if w_upper == was_upper { 1 } else { -1 };
        }
        mask ^= 1 << v;
        if in_x[v] {
            if was_upper {
                upper_x -= 1;
            } else {
                upper_x += 1;
            }
        }
        if upper_x == m {
            visit(mask, width as usize);
        }
    }
    Ok(())
}

/// Sort key realising lexicographic order on side vectors.
fn lex_key(mask: u64, nv: usize) -> u64 {
    if nv == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - nv)
    }
}

fn solve_exhaustive(g: &DecodingGraph, x: &[usize], m: usize) -> Result<CutResult> {
    let nv = g.vertex_count();
    let mut best: Option<(usize, u64)> = None;
    exhaustive_scan(g, x, m, |mask, width| {
        let better = match best {
            None => true,
            Some((w, k)) => width < w || (width == w && lex_key(mask, nv) < k),
        };
        if better {
            best = Some((width, lex_key(mask, nv)));
        }
    })?;
    let (width, key) = best.expect("m <= |X| admits a partition");
    let mask = lex_key(key, nv);
    Ok(CutResult {
        width,
        partition: Partition::from_mask(nv, mask),
        certified: true,
    })
}

/// Every partition attaining the m-section minimum (exhaustive solver only).
pub fn all_min_partitions(g: &DecodingGraph, x: &[usize], m: usize) -> Result<(usize, Vec<Partition>)> {
    check_subset(g, x, m)?;
    let mut best = usize::MAX;
    let mut masks = Vec::new();
    exhaustive_scan(g, x, m, |mask, width| {
        if width < best {
            best = width;
            masks.clear();
        }
        if width == best {
            masks.push(mask);
        }
    })?;
    let nv = g.vertex_count();
    Ok((best, masks.into_iter().map(|k| Partition::from_mask(nv, k)).collect()))
}

struct Search<'a> {
    vertices: usize,
    edges: &'a [(usize, usize)],
    order: Vec<usize>,
    m: usize,
    best: usize,
    best_side: Option<Vec<bool>>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl Search<'_> {
    fn visit(&mut self, depth: usize, upper: &mut Vec<usize>, lower: &mut Vec<usize>) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        let limit = self.best as u32;
        let (bound, side) = FlowNetwork::new(self.vertices, self.edges).min_cut(upper, lower, limit);
        if bound as usize >= self.best {
            return;
        }
        if depth == self.order.len() {
            self.best = bound as usize;
            self.best_side = Some(side);
            return;
        }
        let v = self.order[depth];
        let remaining = self.order.len() - depth;
        let need_upper = self.m - upper.len();
        if need_upper > 0 {
            upper.push(v);
            self.visit(depth + 1, upper, lower);
            upper.pop();
        }
        if remaining > need_upper && !self.exhausted {
            lower.push(v);
            self.visit(depth + 1, upper, lower);
            lower.pop();
        }
    }
}

fn solve_bnb(g: &DecodingGraph, x: &[usize], m: usize, budget: u64) -> CutResult {
    let adj = g.adjacency();
    let mut order = x.to_vec();
    order.sort_by(|&a, &b| adj[b].len().cmp(&adj[a].len()).then(a.cmp(&b)));
    let mut search = Search {
        vertices: g.vertex_count(),
        edges: g.edges(),
        order,
        m,
        best: g.edge_count() + 1,
        best_side: None,
        nodes: 0,
        budget,
        exhausted: false,
    };
    search.visit(0, &mut Vec::new(), &mut Vec::new());
    let side = search.best_side.unwrap_or_else(|| {
        // Budget ran out before any leaf: fall back to the first designated vertices.
        let mut s = vec![false; g.vertex_count()];
        x.iter().take(m).for_each(|&v| s[v] = true);
        s
    });
    let partition = Partition::new(
        side.into_iter()
            .map(|up| if up { Side::Upper } else { Side::Lower })
            .collect(),
    );
    CutResult {
        width: g.cut_width(&partition),
        partition,
        certified: !search.exhausted,
    }
}

/// Minimum cut width over partitions with exactly `m` vertices of `x` upper.
pub fn m_section_width(g: &DecodingGraph, x: &[usize], m: usize, solver: Solver) -> Result<CutResult> {
    check_subset(g, x, m)?;
    match solver {
        Solver::Exhaustive => solve_exhaustive(g, x, m),
        Solver::BranchAndBound { node_budget } => Ok(solve_bnb(g, x, m, node_budget)),
    }
}

/// Minimum bisection width of `x`: best of the `⌊|x|/2⌋`- and `⌈|x|/2⌉`-sections.
pub fn mbw(g: &DecodingGraph, x: &[usize], solver: Solver) -> Result<CutResult> {
    if x.is_empty() {
        return invalid("bisection needs at least one designated vertex");
    }
    let lo = m_section_width(g, x, x.len() / 2, solver)?;
    if x.len().is_multiple_of(2) {
        return Ok(lo);
    }
    let hi = m_section_width(g, x, x.len() / 2 + 1, solver)?;
    let certified = lo.certified && hi.certified;
    let mut best = if hi.width < lo.width { hi } else { lo };
    best.certified = certified;
    Ok(best)
}
