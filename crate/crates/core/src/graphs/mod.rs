//! The recursive polar decoding graph `P_n` and exact partition analysis.
//!
//! `P_1` is the 4-vertex bowtie `K_{2,2}`; `P_n` joins `2^n` symbol nodes to
//! two copies of `P_{n-1}`: symbol nodes `2k−1, 2k` are both adjacent to the
//! `k`-th symbol node of each copy. Only the top-level symbol nodes carry the
//! symbol role; the symbol nodes of the copies are internal.
//!
//! Graphs are multigraphs: contraction can create parallel edges, and every
//! parallel copy counts toward a cut.

mod edgelist;
mod flow;
mod section;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gf2::IndexSet;

pub use edgelist::{parse_edge_list, write_edge_list};
pub use section::{all_min_partitions, m_section_width, mbw, Solver, EXHAUSTIVE_VERTEX_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    /// Output node carrying the given 1-based symbol index.
    Symbol(usize),
    Internal,
}

/// One top-level bowtie: symbol nodes `a` and the matching symbol nodes of
/// the two sub-copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bowtie {
    pub a: [usize; 2],
    pub b: usize,
    pub c: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodingGraph {
    level: u32,
    roles: Vec<Role>,
    edges: Vec<(usize, usize)>,
    symbol_nodes: Vec<usize>,
    /// Top-level bowties; emptied once the graph is modified.
    bowties: Vec<Bowtie>,
    frozen: Option<IndexSet>,
    modified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    Lower,
    Upper,
}

/// Two-sided vertex assignment; `Upper` is the side holding the `m` designated vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    side: Vec<Side>,
}

impl Partition {
    pub fn new(side: Vec<Side>) -> Self {
        Partition { side }
    }

    pub fn from_upper(vertices: usize, upper: &[usize]) -> Self {
        let mut side = vec![Side::Lower; vertices];
        for &v in upper {
            side[v] = Side::Upper;
        }
        Partition { side }
    }

    pub(crate) fn from_mask(vertices: usize, mask: u64) -> Self {
        Partition {
            side: (0..vertices)
                .map(|v| if mask >> v & 1 == 1 { Side::Upper } else { Side::Lower })
                .collect(),
        }
    }

    pub fn side(&self, v: usize) -> Side {
        self.side[v]
    }

    pub fn len(&self) -> usize {
        self.side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.side.is_empty()
    }

    pub fn upper(&self) -> Vec<usize> {
        (0..self.side.len()).filter(|&v| self.side[v] == Side::Upper).collect()
    }

    pub fn count_upper(&self, vertices: &[usize]) -> usize {
        vertices.iter().filter(|&&v| self.side[v] == Side::Upper).count()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BowtieCensus {
    pub split: usize,
    pub contained_upper: usize,
    pub contained_lower: usize,
    /// Crossing bowties whose two symbol nodes are on the upper side.
    pub crossing_upper: usize,
    pub crossing_lower: usize,
    /// Bowtie edges cut, by category (contained bowties never contribute).
    pub split_edges_cut: usize,
    pub crossing_edges_cut: usize,
}

impl BowtieCensus {
    pub fn crossing(&self) -> usize {
        self.crossing_upper + self.crossing_lower
    }

    pub fn total(&self) -> usize {
        self.split + self.contained_upper + self.contained_lower + self.crossing()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutResult {
    pub width: usize,
    pub partition: Partition,
    /// True iff the width is a proven minimum.
    pub certified: bool,
}

pub fn vertex_count(level: u32) -> usize {
    if level == 0 {
        1
    } else {
        (1 << level) + 2 * vertex_count(level - 1)
    }
}

pub fn edge_count(level: u32) -> usize {
    if level == 0 {
        0
    } else {
        (1 << (level + 1)) + 2 * edge_count(level - 1)
    }
}

fn build_into(level: u32, base: usize, edges: &mut Vec<(usize, usize)>, bowties: Option<&mut Vec<Bowtie>>) -> usize {
    // Vertices [base, base + 2^level) are this graph's symbol nodes.
    let size = 1usize << level;
    if level == 0 {
        return 1;
    }
    let b_base = base + size;
    let b_len = build_into(level - 1, b_base, edges, None);
    let c_base = b_base + b_len;
    let c_len = build_into(level - 1, c_base, edges, None);
    let mut tops = Vec::with_capacity(size / 2);
    for k in 0..size / 2 {
        let (a1, a2) = (base + 2 * k, base + 2 * k + 1);
        let (b, c) = (b_base + k, c_base + k);
        edges.extend([(a1, b), (a1, c), (a2, b), (a2, c)]);
        tops.push(Bowtie { a: [a1, a2], b, c });
    }
    if let Some(out) = bowties {
        *out = tops;
    }
    size + b_len + c_len
}

/// Builds `P_n`.
pub fn build_polar_graph(n: u32) -> Result<DecodingGraph> {
    if n < 1 {
        return invalid("level n must be at least 1");
    }
    if n > 16 {
        return invalid(format!("level {n} too large"));
    }
    let size = 1usize << n;
    let mut edges = Vec::with_capacity(edge_count(n));
    let mut bowties = Vec::new();
    let total = build_into(n, 0, &mut edges, Some(&mut bowties));
    let mut roles = vec![Role::Internal; total];
    for (i, r) in roles.iter_mut().take(size).enumerate() {
        *r = Role::Symbol(i + 1);
    }
    Ok(DecodingGraph {
        level: n,
        roles,
        edges,
        symbol_nodes: (0..size).collect(),
        bowties,
        frozen: None,
        modified: false,
    })
}

impl DecodingGraph {
    /// General graph with the listed symbol vertices (in symbol order).
    pub fn from_parts(vertices: usize, edges: Vec<(usize, usize)>, symbols: &[usize]) -> Result<Self> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= vertices || v >= vertices || u == v) {
            return invalid(format!("bad edge ({u}, {v}) for {vertices} vertices"));
        }
        let mut roles = vec![Role::Internal; vertices];
        for (k, &s) in symbols.iter().enumerate() {
            if s >= vertices || roles[s] != Role::Internal {
                return invalid(format!("bad symbol vertex {s}"));
            }
            roles[s] = Role::Symbol(k + 1);
        }
        Ok(DecodingGraph {
            level: 0,
            roles,
            edges,
            symbol_nodes: symbols.to_vec(),
            bowties: Vec::new(),
            frozen: None,
            modified: true,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.roles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn role(&self, v: usize) -> Role {
        self.roles[v]
    }

    /// Symbol (output) vertices, ordered by symbol index.
    pub fn symbol_nodes(&self) -> &[usize] {
        &self.symbol_nodes
    }

    pub fn bowties(&self) -> &[Bowtie] {
        &self.bowties
    }

    pub fn frozen(&self) -> Option<&IndexSet> {
        self.frozen.as_ref()
    }

    /// `1 − |frozen| / N` for a frozen graph, 1 otherwise.
    pub fn rate(&self) -> f64 {
        match &self.frozen {
            Some(f) => 1.0 - f.len() as f64 / f.universe() as f64,
            None => 1.0,
        }
    }

    /// True for an unfrozen, unmodified `P_n`.
    pub fn is_full_polar_graph(&self) -> bool {
        !self.modified && self.frozen.is_none() && self.level > 0
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0; self.vertex_count()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn cut_width(&self, p: &Partition) -> usize {
        self.edges.iter().filter(|&&(u, v)| p.side(u) != p.side(v)).count()
    }

    /// Removes the listed vertices and their edges, renumbering the rest.
    fn remove_vertices(&self, doomed: &[usize]) -> (Vec<Role>, Vec<(usize, usize)>, Vec<usize>) {
        let mut remap = vec![usize::MAX; self.vertex_count()];
        let mut roles = Vec::with_capacity(self.vertex_count() - doomed.len());
        for (v, slot) in remap.iter_mut().enumerate() {
            if !doomed.contains(&v) {
                *slot = roles.len();
                roles.push(self.roles[v]);
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| remap[u] != usize::MAX && remap[v] != usize::MAX)
            .map(|&(u, v)| (remap[u], remap[v]))
            .collect();
        let symbols = self
            .symbol_nodes
            .iter()
            .filter(|&&s| remap[s] != usize::MAX)
            .map(|&s| remap[s])
            .collect();
        (roles, edges, symbols)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.vertex_count() {
            return invalid(format!("vertex {v} out of range ({} vertices)", self.vertex_count()));
        }
        Ok(())
    }

    /// Adds an isolated internal vertex and returns its id.
    pub fn add_vertex(&self) -> (DecodingGraph, usize) {
        let mut g = self.clone();
        g.roles.push(Role::Internal);
        g.bowties.clear();
        g.modified = true;
        let id = g.roles.len() - 1;
        (g, id)
    }

    pub fn add_edge(&self, u: usize, v: usize) -> Result<DecodingGraph> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return invalid("self-loops are not allowed");
        }
        let mut g = self.clone();
        g.edges.push((u, v));
        g.bowties.clear();
        g.modified = true;
        Ok(g)
    }
}

/// Deletes the symbol nodes with the given 1-based symbol indices.
pub fn freeze_graph(g: &DecodingGraph, frozen: &IndexSet) -> Result<DecodingGraph> {
    if frozen.is_empty() {
        return Ok(g.clone());
    }
    if g.frozen.is_some() || g.modified {
        return Err(Error::Unsupported("freezing applies to an unmodified P_n".into()));
    }
    if frozen.universe() != g.symbol_nodes.len() {
        return invalid(format!(
            "frozen set universe {} does not match {} symbol nodes",
            frozen.universe(),
            g.symbol_nodes.len()
        ));
    }
    let doomed: Vec<usize> = frozen.iter().map(|i| g.symbol_nodes[i - 1]).collect();
    let (roles, edges, symbol_nodes) = g.remove_vertices(&doomed);
    Ok(DecodingGraph {
        level: g.level,
        roles,
        edges,
        symbol_nodes,
        bowties: Vec::new(),
        frozen: Some(frozen.clone()),
        modified: false,
    })
}

/// Splits the bowties of a full `P_n` into split / contained / crossing.
pub fn classify_bowties(g: &DecodingGraph, p: &Partition) -> Result<BowtieCensus> {
    if !g.is_full_polar_graph() {
        return Err(Error::Unsupported(
            "bowtie classification is defined on an unfrozen, unmodified P_n".into(),
        ));
    }
    if p.len() != g.vertex_count() {
        return invalid("partition size does not match graph");
    }
    let mut census = BowtieCensus::default();
    for t in &g.bowties {
        let (s1, s2) = (p.side(t.a[0]), p.side(t.a[1]));
        if s1 != s2 {
            census.split += 1;
            census.split_edges_cut += 2;
            continue;
        }
        let away = [t.b, t.c].iter().filter(|&&v| p.side(v) != s1).count();
        match (away, s1) {
            (0, Side::Upper) => census.contained_upper += 1,
            (0, Side::Lower) => census.contained_lower += 1,
            (_, Side::Upper) => census.crossing_upper += 1,
            (_, Side::Lower) => census.crossing_lower += 1,
        }
        census.crossing_edges_cut += 2 * away;
    }
    Ok(census)
}

/// Merges `v` into `u`; edges between them are deleted. At most one of the
/// two may be a symbol node, and the merged vertex keeps that role.
pub fn contract(g: &DecodingGraph, u: usize, v: usize) -> Result<DecodingGraph> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v {
        return invalid("cannot contract a vertex with itself");
    }
    if matches!(g.roles[u], Role::Symbol(_)) && matches!(g.roles[v], Role::Symbol(_)) {
        return Err(Error::ContractForbidden(u, v));
    }
    let mut h = g.clone();
    if matches!(g.roles[v], Role::Symbol(_)) {
        h.roles[u] = g.roles[v];
        for s in h.symbol_nodes.iter_mut() {
            if *s == v {
                *s = u;
            }
        }
    }
    h.edges = g
        .edges
        .iter()
        .filter(|&&(a, b)| !((a == u && b == v) || (a == v && b == u)))
        .map(|&(a, b)| (if a == v { u } else { a }, if b == v { u } else { b }))
        .collect();
    let (roles, edges, symbols) = h.remove_vertices(&[v]);
    h.roles = roles;
    h.edges = edges;
    h.symbol_nodes = symbols;
    h.bowties.clear();
    h.modified = true;
    Ok(h)
}

/// Replaces one copy of edge `{u, v}` by a path through a new internal vertex.
pub fn subdivide(g: &DecodingGraph, u: usize, v: usize) -> Result<DecodingGraph> {
    let Some(pos) = g
        .edges
        .iter()
        .position(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
    else {
        return invalid(format!("edge ({u}, {v}) not present"));
    };
    let mut h = g.clone();
    let w = h.roles.len();
    h.roles.push(Role::Internal);
    h.edges[pos] = (u, w);
    h.edges.push((w, v));
    h.bowties.clear();
    h.modified = true;
    Ok(h)
}

/// Hard-coded 8-vertex example: two 4-cycles `1-2-3-4` and `5-6-7-8`
/// joined by edges `2-5` and `3-8`. Returns `(graph, shaded, white)` with
/// shaded = {2, 3, 5, 8} and white = {1, 4, 6, 7} (0-based ids in the graph).
/// The 2-section width of the shaded nodes and the 1-section width of the
/// white nodes are both 2.
pub fn section_example() -> (DecodingGraph, Vec<usize>, Vec<usize>) {
    let one_based = [(1, 2), (2, 3), (3, 4), (4, 1), (5, 6), (6, 7), (7, 8), (8, 5), (2, 5), (3, 8)];
    let edges = one_based.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    let g = DecodingGraph::from_parts(8, edges, &[]).expect("fixture is well formed");
    (g, vec![1, 2, 4, 7], vec![0, 3, 5, 6])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_follow_recursion() {
        let expect = [(1, 4, 4), (2, 12, 16), (3, 32, 48), (4, 80, 128)];
        for (n, v, e) in expect {
            let g = build_polar_graph(n).unwrap();
            assert_eq!((g.vertex_count(), g.edge_count()), (v, e), "n = {n}");
            assert_eq!((vertex_count(n), edge_count(n)), (v, e));
            assert_eq!(g.symbol_nodes().len(), 1 << n);
            assert_eq!(g.bowties().len(), 1 << (n - 1));
            assert!(g.max_degree() <= 4);
        }
        assert!(build_polar_graph(0).is_err());
    }

    #[test]
    fn p1_is_k22() {
        let g = build_polar_graph(1).unwrap();
        assert_eq!(g.edges(), [(0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_eq!(g.role(0), Role::Symbol(1));
        assert_eq!(g.role(2), Role::Internal);
    }

    #[test]
    fn freeze_examples() {
        let g = build_polar_graph(1).unwrap();
        assert_eq!(freeze_graph(&g, &IndexSet::empty(2)).unwrap(), g);
        let f = freeze_graph(&g, &IndexSet::new(2, [1]).unwrap()).unwrap();
        assert_eq!((f.vertex_count(), f.edge_count()), (3, 2));
        assert_eq!(f.symbol_nodes().len(), 1);
        assert_eq!(f.rate(), 0.5);
        assert!(freeze_graph(&g, &IndexSet::new(4, [3]).unwrap()).is_err());
        assert!(freeze_graph(&f, &IndexSet::new(1, [1]).unwrap()).is_err());
    }

    #[test]
    fn freeze_removes_degree_sum() {
        let g = build_polar_graph(3).unwrap();
        let frozen = IndexSet::new(8, [2, 7]).unwrap();
        let deg: usize = frozen.iter().map(|i| g.degree(g.symbol_nodes()[i - 1])).sum();
        let f = freeze_graph(&g, &frozen).unwrap();
        assert_eq!(f.vertex_count(), 30);
        assert_eq!(f.edge_count(), g.edge_count() - deg);
    }

    #[test]
    fn classify_p1_examples() {
        let g = build_polar_graph(1).unwrap();
        let all_upper = Partition::from_upper(4, &[0, 1, 2, 3]);
        let c = classify_bowties(&g, &all_upper).unwrap();
        assert_eq!(c.contained_upper, 1);
        assert_eq!(g.cut_width(&all_upper), 0);

        let split = Partition::from_upper(4, &[0]);
        let c = classify_bowties(&g, &split).unwrap();
        assert_eq!((c.split, c.split_edges_cut), (1, 2));
        assert_eq!(g.cut_width(&split), 2);

        let crossing = Partition::from_upper(4, &[0, 1]);
        let c = classify_bowties(&g, &crossing).unwrap();
        assert_eq!((c.crossing(), c.crossing_edges_cut), (1, 4));
        assert_eq!(g.cut_width(&crossing), 4);
    }

    #[test]
    fn classify_rejects_frozen() {
        let g = build_polar_graph(2).unwrap();
        let f = freeze_graph(&g, &IndexSet::new(4, [1]).unwrap()).unwrap();
        let p = Partition::from_upper(f.vertex_count(), &[]);
        assert!(matches!(classify_bowties(&f, &p), Err(Error::Unsupported(_))));
    }

    #[test]
    fn contract_rules() {
        let g = build_polar_graph(1).unwrap();
        assert!(matches!(contract(&g, 0, 1), Err(Error::ContractForbidden(0, 1))));
        assert!(contract(&g, 2, 2).is_err());
        let h = contract(&g, 0, 2).unwrap();
        assert_eq!(h.vertex_count(), 3);
        // Edge 0-2 deleted; 2-1 becomes 0-1; 0-3 stays.
        assert_eq!(h.edge_count(), 3);
        assert!(!h.edges().contains(&(0, 0)));
        assert_eq!(h.role(0), Role::Symbol(1));
        // Merging an internal vertex into the symbol keeps the symbol role.
        let h = contract(&g, 2, 0).unwrap();
        assert_eq!(h.symbol_nodes().len(), 2);
        assert!(h.symbol_nodes().iter().all(|&s| matches!(h.role(s), Role::Symbol(_))));
    }

    #[test]
    fn subdivide_rules() {
        let g = build_polar_graph(1).unwrap();
        let h = subdivide(&g, 0, 2).unwrap();
        assert_eq!((h.vertex_count(), h.edge_count()), (5, 5));
        assert_eq!(h.degree(4), 2);
        assert_eq!(h.role(4), Role::Internal);
        assert!(subdivide(&g, 0, 1).is_err());
    }
}
