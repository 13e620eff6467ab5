//! Immutable compressed-adjacency graph, edge-list ingestion, BFS
//! primitives, connected components and the vertex-diameter upper bound.
//!
//! External node identifiers are renumbered densely to `0..n-1` at load
//! time (ascending by original id); all computation runs on dense ids and
//! output layers translate back through [`Graph::label`]. Neighbor lists
//! are sorted ascending so every traversal order is deterministic.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Sentinel hop distance for unreachable nodes.
pub const UNREACHABLE: u32 = u32::MAX;

/// Traversal direction: `Forward` follows out-edges, `Backward` in-edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Connectivity notion used by [`connected_components`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentMode {
    Weak,
    Strong,
}

/// Unweighted graph with forward and backward adjacency.
///
/// Invariants established at construction: no self-loops, duplicate edges
/// collapsed, `(u -> v)` in the forward lists iff `(v -> u)` in the
/// backward lists, undirected edges stored in both orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    m: usize,
    directed: bool,
    fwd_off: Vec<usize>,
    fwd_adj: Vec<u32>,
    bwd_off: Vec<usize>,
    bwd_adj: Vec<u32>,
    labels: Vec<u64>,
    label_index: HashMap<u64, u32>,
}

fn build_csr(n: usize, arcs: &[(u32, u32)]) -> (Vec<usize>, Vec<u32>) {
    let mut off = vec![0usize; n + 1];
    for &(u, _) in arcs {
        off[u as usize + 1] += 1;
    }
    for i in 0..n {
        off[i + 1] += off[i];
    }
    let mut adj = vec![0u32; arcs.len()];
    let mut cursor = off.clone();
    for &(u, v) in arcs {
        adj[cursor[u as usize]] = v;
        cursor[u as usize] += 1;
    }
    (off, adj)
}

impl Graph {
    /// Builds a graph from pairs of original node identifiers.
    ///
    /// Self-loops are dropped, duplicates collapsed; for undirected graphs
    /// `(u, v)` and `(v, u)` are the same edge. A node mentioned only in a
    /// self-loop still becomes part of the graph.
    pub fn from_edge_pairs(pairs: &[(u64, u64)], directed: bool) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut labels: Vec<u64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
        labels.sort_unstable();
        labels.dedup();
        let n = labels.len();
        if n > (u32::MAX as usize) - 1 {
            return Err(Error::InvalidParameter(format!(
                "graph has {n} nodes, more than the supported maximum"
            )));
        }
        let label_index: HashMap<u64, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u32))
            .collect();

        let mut arcs: Vec<(u32, u32)> = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            if u == v {
                continue;
            }
            let a = label_index[&u];
            let b = label_index[&v];
            if directed {
                arcs.push((a, b));
            } else {
                arcs.push((a.min(b), a.max(b)));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        let m = arcs.len();

        let (fwd_off, fwd_adj, bwd_off, bwd_adj) = if directed {
            let (fo, fa) = build_csr(n, &arcs);
            let mut rev: Vec<(u32, u32)> = arcs.iter().map(|&(u, v)| (v, u)).collect();
            rev.sort_unstable();
            let (bo, ba) = build_csr(n, &rev);
            (fo, fa, bo, ba)
        } else {
            let mut sym: Vec<(u32, u32)> = Vec::with_capacity(2 * arcs.len());
            for &(u, v) in &arcs {
                sym.push((u, v));
                sym.push((v, u));
            }
            sym.sort_unstable();
            let (fo, fa) = build_csr(n, &sym);
            (fo.clone(), fa.clone(), fo, fa)
        };

        Ok(Graph {
            n,
            m,
            directed,
            fwd_off,
            fwd_adj,
            bwd_off,
            bwd_adj,
            labels,
            label_index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of distinct edges: arcs when directed, unordered pairs when
    /// undirected.
    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.fwd_adj[self.fwd_off[v as usize]..self.fwd_off[v as usize + 1]]
    }

    pub fn in_neighbors(&self, v: u32) -> &[u32] {
        &self.bwd_adj[self.bwd_off[v as usize]..self.bwd_off[v as usize + 1]]
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.fwd_off[v as usize + 1] - self.fwd_off[v as usize]
    }

    pub fn in_degree(&self, v: u32) -> usize {
        self.bwd_off[v as usize + 1] - self.bwd_off[v as usize]
    }

    pub fn neighbors(&self, v: u32, dir: Direction) -> &[u32] {
        match dir {
            Direction::Forward => self.out_neighbors(v),
            Direction::Backward => self.in_neighbors(v),
        }
    }

    /// Original external identifier of a dense node id.
    pub fn label(&self, v: u32) -> u64 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Dense id of an original identifier, if present.
    pub fn node_by_label(&self, label: u64) -> Option<u32> {
        self.label_index.get(&label).copied()
    }

    /// Edges in dense-id space: each arc once when directed, each
    /// unordered pair once (as `(min, max)`) when undirected.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n as u32).flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .filter(move |&&v| self.directed || v > u)
                .map(move |&v| (u, v))
        })
    }
}

/// Parses a SNAP-style edge list: one `u v` pair per line, lines starting
/// with `#` ignored.
pub fn load_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<Graph> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let line_no = idx + 1;
        let parse = |tok: Option<&str>, line_no: usize| -> Result<u64> {
            let tok = tok.ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected two node ids".into(),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid node id {tok:?}"),
            })
        };
        let u = parse(tokens.next(), line_no)?;
        let v = parse(tokens.next(), line_no)?;
        if tokens.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "trailing tokens after edge".into(),
            });
        }
        pairs.push((u, v));
    }
    Graph::from_edge_pairs(&pairs, directed)
}

/// Writes the canonical edge list: original identifiers, one pair per
/// line, ascending order. `load -> export -> load` is the identity.
pub fn export_edge_list<W: Write>(g: &Graph, mut out: W) -> std::io::Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", g.label(u), g.label(v))?;
    }
    Ok(())
}

/// Hop distances from (forward) or to (backward) `source`; unreachable
/// nodes get [`UNREACHABLE`].
pub fn bfs_distances(g: &Graph, source: u32, dir: Direction) -> Vec<u32> {
    assert!((source as usize) < g.node_count(), "source out of range");
    let mut dist = vec![UNREACHABLE; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &w in g.neighbors(u, dir) {
            if dist[w as usize] == UNREACHABLE {
                dist[w as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

fn max_finite(dist: &[u32]) -> usize {
    dist.iter()
        .filter(|&&d| d != UNREACHABLE)
        .map(|&d| d as usize)
        .max()
        .unwrap_or(0)
}

/// Upper bound on the vertex diameter: the maximum number of internal
/// nodes over all shortest paths.
///
/// Undirected graphs use one pivot eccentricity per component
/// (`2*ecc - 1`); strongly connected digraphs use forward plus backward
/// eccentricity of a pivot minus one; other digraphs fall back to the
/// guaranteed bound `n - 2`. The result is floored at 1.
pub fn vertex_diameter_ub(g: &Graph) -> usize {
    let n = g.node_count();
    if g.is_directed() {
        let comps = connected_components(g, ComponentMode::Strong);
        if comps.sizes.len() == 1 {
            let ef = max_finite(&bfs_distances(g, 0, Direction::Forward));
            let eb = max_finite(&bfs_distances(g, 0, Direction::Backward));
            (ef + eb).saturating_sub(1).max(1)
        } else {
            n.saturating_sub(2).max(1)
        }
    } else {
        let comps = connected_components(g, ComponentMode::Weak);
        let mut pivot_seen = vec![false; comps.sizes.len()];
        let mut best = 1usize;
        for v in 0..n as u32 {
            let c = comps.labels[v as usize] as usize;
            if pivot_seen[c] {
                continue;
            }
            pivot_seen[c] = true;
            let ecc = max_finite(&bfs_distances(g, v, Direction::Forward));
            best = best.max((2 * ecc).saturating_sub(1).max(1));
        }
        best
    }
}

/// Component labeling; id 0 is the largest component, ties broken by
/// smallest member.
#[derive(Debug, Clone)]
pub struct Components {
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Members of one component, in ascending dense-id order.
    pub fn members(&self, comp: u32) -> Vec<u32> {
        (0..self.labels.len() as u32)
            .filter(|&v| self.labels[v as usize] == comp)
            .collect()
    }
}

pub fn connected_components(g: &Graph, mode: ComponentMode) -> Components {
    let raw = match mode {
        ComponentMode::Weak => weak_components(g),
        ComponentMode::Strong => strong_components(g),
    };
    relabel_by_size(&raw)
}

fn weak_components(g: &Graph) -> Vec<u32> {
    let n = g.node_count();
    let mut comp = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n as u32 {
        if comp[start as usize] != u32::MAX {
            continue;
        }
        comp[start as usize] = next;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &w in g.out_neighbors(u).iter().chain(g.in_neighbors(u)) {
                if comp[w as usize] == u32::MAX {
                    comp[w as usize] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Kosaraju with explicit stacks; recursion would overflow on long paths.
fn strong_components(g: &Graph) -> Vec<u32> {
    let n = g.node_count();
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut stack: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if visited[root as usize] {
            continue;
        }
        visited[root as usize] = true;
        stack.push((root, 0));
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            let nbrs = g.out_neighbors(v);
            if *i < nbrs.len() {
                let w = nbrs[*i];
                *i += 1;
                if !visited[w as usize] {
                    visited[w as usize] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut comp = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut dfs: Vec<u32> = Vec::new();
    for &root in order.iter().rev() {
        if comp[root as usize] != u32::MAX {
            continue;
        }
        comp[root as usize] = next;
        dfs.push(root);
        while let Some(v) = dfs.pop() {
            for &w in g.in_neighbors(v) {
                if comp[w as usize] == u32::MAX {
                    comp[w as usize] = next;
                    dfs.push(w);
                }
            }
        }
        next += 1;
    }
    comp
}

fn relabel_by_size(raw: &[u32]) -> Components {
    let count = raw.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut sizes = vec![0usize; count];
    let mut min_member = vec![u32::MAX; count];
    for (v, &c) in raw.iter().enumerate() {
        sizes[c as usize] += 1;
        min_member[c as usize] = min_member[c as usize].min(v as u32);
    }
    let mut ids: Vec<u32> = (0..count as u32).collect();
    ids.sort_by_key(|&c| (std::cmp::Reverse(sizes[c as usize]), min_member[c as usize]));
    let mut remap = vec![0u32; count];
    for (new, &old) in ids.iter().enumerate() {
        remap[old as usize] = new as u32;
    }
    let labels: Vec<u32> = raw.iter().map(|&c| remap[c as usize]).collect();
    let sorted_sizes: Vec<usize> = ids.iter().map(|&c| sizes[c as usize]).collect();
    Components {
        labels,
        sizes: sorted_sizes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn load(text: &str, directed: bool) -> Graph {
        load_edge_list(Cursor::new(text), directed).unwrap()
    }

    #[test]
    fn two_edge_path_directed() {
        let g = load("0 1\n1 2", true);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.out_neighbors(0), &[1]);
        assert_eq!(g.in_neighbors(0), &[] as &[u32]);
        assert_eq!(g.in_neighbors(1), &[0]);
    }

    #[test]
    fn duplicate_undirected_edge_collapses() {
        let g = load("# c\n5 7\n7 5", false);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.out_neighbors(0), &[1]);
        assert_eq!(g.out_neighbors(1), &[0]);
        assert_eq!(g.label(0), 5);
        assert_eq!(g.label(1), 7);
    }

    #[test]
    fn self_loop_dropped_but_node_kept() {
        let g = load("3 3", true);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.label(0), 3);
    }

    #[test]
    fn malformed_line_names_line_number() {
        let err = load_edge_list(Cursor::new("0 1\nx 2"), true).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn extra_token_is_rejected() {
        let err = load_edge_list(Cursor::new("0 1 9"), true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_input_is_an_error() {
        let err = load_edge_list(Cursor::new("# only comments\n"), false).unwrap_err();
        assert!(matches!(err, Error::EmptyGraph));
    }

    #[test]
    fn bfs_on_directed_path() {
        let g = load("0 1\n1 2", true);
        assert_eq!(bfs_distances(&g, 0, Direction::Forward), vec![0, 1, 2]);
        assert_eq!(
            bfs_distances(&g, 0, Direction::Backward),
            vec![0, UNREACHABLE, UNREACHABLE]
        );
    }

    #[test]
    fn bfs_on_star_center() {
        // center 0 with three leaves
        let g = load("0 1\n0 2\n0 3", false);
        assert_eq!(bfs_distances(&g, 0, Direction::Forward), vec![0, 1, 1, 1]);
    }

    /// Exhaustive max internal-node count over all reachable pairs.
    fn brute_max_internal(g: &Graph) -> usize {
        let mut best = 0usize;
        for s in 0..g.node_count() as u32 {
            let dist = bfs_distances(g, s, Direction::Forward);
            for (t, &d) in dist.iter().enumerate() {
                if t as u32 != s && d != UNREACHABLE && d >= 1 {
                    best = best.max(d as usize - 1);
                }
            }
        }
        best
    }

    #[test]
    fn diameter_bound_on_five_node_path() {
        let g = load("0 1\n1 2\n2 3\n3 4", false);
        // pivot is node 0, an endpoint: eccentricity 4
        assert_eq!(vertex_diameter_ub(&g), 7);
        assert_eq!(brute_max_internal(&g), 3);
    }

    #[test]
    fn diameter_bound_on_star_with_center_pivot() {
        let g = load("0 1\n0 2\n0 3\n0 4", false);
        assert_eq!(vertex_diameter_ub(&g), 1);
        assert_eq!(brute_max_internal(&g), 1);
    }

    #[test]
    fn diameter_bound_falls_back_for_weakly_connected_digraph() {
        let g = load("0 1\n1 2\n2 3", true);
        assert_eq!(vertex_diameter_ub(&g), 2); // n - 2
    }

    #[test]
    fn diameter_bound_for_strongly_connected_digraph() {
        // directed 4-cycle: ecc_fwd(0) = 3, ecc_bwd(0) = 3
        let g = load("0 1\n1 2\n2 3\n3 0", true);
        assert_eq!(vertex_diameter_ub(&g), 5);
        assert!(vertex_diameter_ub(&g) >= brute_max_internal(&g));
    }

    #[test]
    fn diameter_bound_dominates_brute_force_on_random_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for case in 0..200 {
            let n = rng.gen_range(2..=12u64);
            let directed = case % 2 == 0;
            let p = rng.gen_range(0.1..0.6);
            let mut pairs = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(p) {
                        pairs.push((u, v));
                    }
                }
            }
            // keep every node present even when no edge was drawn
            pairs.extend((0..n).map(|u| (u, u)));
            let g = Graph::from_edge_pairs(&pairs, directed).unwrap();
            assert!(
                vertex_diameter_ub(&g) >= brute_max_internal(&g),
                "bound below truth on case {case}"
            );
        }
    }

    #[test]
    fn components_of_two_disjoint_edges() {
        let g = load("0 1\n2 3", false);
        let c = connected_components(&g, ComponentMode::Weak);
        assert_eq!(c.count(), 2);
        assert_eq!(c.sizes, vec![2, 2]);
    }

    #[test]
    fn strong_components_of_two_cycle() {
        let g = load("0 1\n1 0", true);
        assert_eq!(connected_components(&g, ComponentMode::Strong).count(), 1);
    }

    #[test]
    fn strong_components_of_single_arc() {
        let g = load("0 1", true);
        let c = connected_components(&g, ComponentMode::Strong);
        assert_eq!(c.count(), 2);
        assert_eq!(c.sizes, vec![1, 1]);
    }

    #[test]
    fn largest_component_gets_id_zero() {
        let g = load("0 1\n1 2\n5 6", false);
        let c = connected_components(&g, ComponentMode::Weak);
        assert_eq!(c.sizes, vec![3, 2]);
        assert_eq!(c.labels[0], 0);
        assert_eq!(c.members(1), vec![3, 4]);
    }

    #[test]
    fn export_round_trips_canonical_form() {
        let g = load("9 2\n2 9\n4 4\n2 4\n# note\n9 4", false);
        let mut buf = Vec::new();
        export_edge_list(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "2 4\n2 9\n4 9\n");
        let again = load(&text, false);
        assert_eq!(again, g);
    }

    proptest::proptest! {
        #[test]
        fn load_export_round_trip(
            edges in proptest::collection::vec((0u64..30, 0u64..30), 1..80),
            directed in proptest::bool::ANY,
        ) {
            let g = match Graph::from_edge_pairs(&edges, directed) {
                Ok(g) => g,
                Err(Error::EmptyGraph) => return Ok(()),
                Err(e) => panic!("unexpected error {e:?}"),
            };
            let mut buf = Vec::new();
            export_edge_list(&g, &mut buf).unwrap();
            let again = load_edge_list(Cursor::new(buf), directed).unwrap();
            proptest::prop_assert_eq!(again, g);
        }

        #[test]
        fn bfs_satisfies_edge_triangle_property(
            edges in proptest::collection::vec((0u64..25, 0u64..25), 1..120),
            directed in proptest::bool::ANY,
            source in 0u32..25,
        ) {
            let g = match Graph::from_edge_pairs(&edges, directed) {
                Ok(g) => g,
                Err(_) => return Ok(()),
            };
            let source = source % g.node_count() as u32;
            let dist = bfs_distances(&g, source, Direction::Forward);
            for u in 0..g.node_count() as u32 {
                if dist[u as usize] == UNREACHABLE {
                    continue;
                }
                for &v in g.out_neighbors(u) {
                    proptest::prop_assert!(
                        dist[v as usize] as u64 <= dist[u as usize] as u64 + 1
                    );
                }
            }
        }
    }
}
