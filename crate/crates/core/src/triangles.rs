//! Triangle enumeration and the set-intersection-to-graph constructions.
//!
//! An offline SetIntersection instance becomes a tripartite graph: one
//! vertex per set in each family, one per universe element, membership
//! edges set-element, and one A-B edge per query pair. Triangles then
//! correspond one-to-one to reported intersection elements.
//!
//! `split_and_orient` rewrites the graph triangle-preservingly so that an
//! orientation with small max out-degree exists: A-side vertices with many
//! B-neighbors are split into copies owning contiguous chunks, every copy
//! keeps all C-neighbors, and edges are oriented copies -> B,C and B -> C.
//!
//! Enumeration is done two ways: an O(n^3) brute-force oracle and a listing
//! over a degeneracy ordering whose counted work stays within
//! O(m * (degeneracy + 1) + n).

use std::collections::{BTreeSet, HashSet};

use rand::Rng;

use crate::error::{param, Error, Result};
use crate::setsystem::{brute_intersection, Family, QueryBatch, SetSystem};

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds from an edge list; duplicate edges collapse, self-loops error.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(param(format!("self-loop at vertex {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(param(format!("edge ({u},{v}) outside vertex range")));
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key) {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// All edges as (min, max) pairs in sorted order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.adj.len() as u32 {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// O(n^3) reference enumeration: every triangle as a sorted triple.
pub fn enum_triangles_brute(g: &Graph) -> BTreeSet<[u32; 3]> {
    let n = g.vertex_count() as u32;
    let mut out = BTreeSet::new();
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) {
                continue;
            }
            for w in v + 1..n {
                if g.has_edge(u, w) && g.has_edge(v, w) {
                    out.insert([u, v, w]);
                }
            }
        }
    }
    out
}

/// Min-degree peeling order. Returns the removal order and the degeneracy
/// (the maximum degree seen at removal time). Ties break to the smallest id.
pub fn degeneracy_order(g: &Graph) -> (Vec<u32>, usize) {
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v as u32)).collect();
    let mut live: BTreeSet<(usize, u32)> = (0..n as u32).map(|v| (degree[v as usize], v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut degeneracy = 0;
    while let Some(&(d, v)) = live.iter().next() {
        live.remove(&(d, v));
        removed[v as usize] = true;
        degeneracy = degeneracy.max(d);
        order.push(v);
        for &w in g.neighbors(v) {
            if !removed[w as usize] {
                let dw = degree[w as usize];
                live.remove(&(dw, w));
                degree[w as usize] = dw - 1;
                live.insert((dw - 1, w));
            }
        }
    }
    (order, degeneracy)
}

/// Result of the ordered listing: triangles plus the counted work.
#[derive(Debug, Clone)]
pub struct TriangleListing {
    pub triangles: BTreeSet<[u32; 3]>,
    pub ops: u64,
    pub degeneracy: usize,
}

/// Lists all triangles by scanning, for each vertex in a degeneracy
/// ordering, the pairs among its later-ordered neighbors. Counted ops stay
/// within `O(m * (degeneracy + 1) + n)` because every later-neighborhood
/// has at most `degeneracy` vertices.
pub fn enum_triangles_cn(g: &Graph) -> TriangleListing {
    let n = g.vertex_count();
    let (order, degeneracy) = degeneracy_order(g);
    let mut pos = vec![0usize; n];
    for (idx, &v) in order.iter().enumerate() {
        pos[v as usize] = idx;
    }
    let later: Vec<Vec<u32>> = (0..n as u32)
        .map(|v| {
            g.neighbors(v)
                .iter()
                .copied()
                .filter(|&w| pos[w as usize] > pos[v as usize])
                .collect()
        })
        .collect();

    let mut ops: u64 = 0;
    let mut marked = vec![false; n];
    let mut triangles = BTreeSet::new();
    for &v in &order {
        ops += 1;
        let lv = &later[v as usize];
        for &w in lv {
            ops += 1;
            marked[w as usize] = true;
        }
        for &u in lv {
            for &w in &later[u as usize] {
                ops += 1;
                if marked[w as usize] {
                    let mut tri = [v, u, w];
                    tri.sort_unstable();
                    triangles.insert(tri);
                }
            }
        }
        for &w in lv {
            ops += 1;
            marked[w as usize] = false;
        }
    }
    TriangleListing {
        triangles,
        ops,
        degeneracy,
    }
}

/// Vertex role in the tripartite construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    SetA,
    SetB,
    Element,
}

/// Part labels plus the copy-to-original map maintained across splitting.
#[derive(Debug, Clone)]
pub struct TripartiteMeta {
    pub parts: Vec<Part>,
    /// For every vertex of the current graph, the vertex of the *source*
    /// graph it descends from (identity when nothing was split).
    pub origin: Vec<u32>,
}

impl TripartiteMeta {
    pub fn part(&self, v: u32) -> Part {
        self.parts[v as usize]
    }
}

/// Expresses a SetIntersection instance as a tripartite graph whose
/// triangles are exactly `{(a, b, c) : (a,b) queried, c in a intersect b}`.
/// Duplicate query pairs are deduplicated.
pub fn si_to_graph(sys: &SetSystem, batch: &QueryBatch) -> Result<(Graph, TripartiteMeta)> {
    let na = sys.family(Family::A).len();
    let nb = sys.family(Family::B).len();
    let uc = sys.universe_size();
    let n = na + nb + uc;
    let a_id = |i: usize| i as u32;
    let b_id = |i: usize| (na + i) as u32;
    let c_id = |e: usize| (na + nb + e) as u32;

    let mut edges = Vec::new();
    for (i, set) in sys.family(Family::A).iter().enumerate() {
        for &e in set {
            edges.push((a_id(i), c_id(e)));
        }
    }
    for (i, set) in sys.family(Family::B).iter().enumerate() {
        for &e in set {
            edges.push((b_id(i), c_id(e)));
        }
    }
    for &(a, b) in batch.pairs() {
        edges.push((a_id(a), b_id(b)));
    }
    let graph = Graph::from_edges(n, &edges)?;
    let mut parts = Vec::with_capacity(n);
    parts.extend(std::iter::repeat_n(Part::SetA, na));
    parts.extend(std::iter::repeat_n(Part::SetB, nb));
    parts.extend(std::iter::repeat_n(Part::Element, uc));
    let origin = (0..n as u32).collect();
    Ok((graph, TripartiteMeta { parts, origin }))
}

/// An orientation of a graph: every edge directed exactly once.
#[derive(Debug, Clone)]
pub struct Orientation {
    pub directed: Vec<(u32, u32)>,
    pub max_outdegree: usize,
}

impl Orientation {
    fn from_directed(n: usize, directed: Vec<(u32, u32)>) -> Self {
        let mut outdeg = vec![0usize; n];
        for &(u, _) in &directed {
            outdeg[u as usize] += 1;
        }
        let max_outdegree = outdeg.into_iter().max().unwrap_or(0);
        Self {
            directed,
            max_outdegree,
        }
    }
}

/// Splits every A-side vertex with more than `cap` B-neighbors into
/// `ceil(|E(a,B)| / cap)` copies owning contiguous chunks of its sorted
/// B-neighbors; every copy keeps all of the original's C-neighbors. Edges
/// are oriented copies -> (B and C) and B -> C, so the max out-degree is at
/// most `cap + max_a |E(a,C)|`. Triangle counts are preserved exactly: the
/// triangle `(a, b, c)` survives in the unique copy owning `b`.
pub fn split_and_orient(
    g: &Graph,
    meta: &TripartiteMeta,
    cap: usize,
) -> Result<(Graph, TripartiteMeta, Orientation)> {
    if cap == 0 {
        return Err(param("split cap must be at least 1"));
    }
    let n = g.vertex_count();
    let a_vertices: Vec<u32> = (0..n as u32).filter(|&v| meta.part(v) == Part::SetA).collect();
    let b_vertices: Vec<u32> = (0..n as u32).filter(|&v| meta.part(v) == Part::SetB).collect();
    let c_vertices: Vec<u32> = (0..n as u32)
        .filter(|&v| meta.part(v) == Part::Element)
        .collect();

    // New ids: all copies of A vertices first, then B, then C.
    let mut new_parts = Vec::new();
    let mut new_origin = Vec::new();
    let mut copies_of: Vec<(Vec<Vec<u32>>, Vec<u32>)> = Vec::new(); // (B-chunks, C-nbrs)
    let mut next_id: u32 = 0;
    let mut copy_base = Vec::with_capacity(a_vertices.len());
    for &a in &a_vertices {
        let mut b_nbrs: Vec<u32> = g
            .neighbors(a)
            .iter()
            .copied()
            .filter(|&w| meta.part(w) == Part::SetB)
            .collect();
        b_nbrs.sort_unstable();
        let c_nbrs: Vec<u32> = g
            .neighbors(a)
            .iter()
            .copied()
            .filter(|&w| meta.part(w) == Part::Element)
            .collect();
        let chunks: Vec<Vec<u32>> = if b_nbrs.len() > cap {
            b_nbrs.chunks(cap).map(<[u32]>::to_vec).collect()
        } else {
            vec![b_nbrs]
        };
        copy_base.push(next_id);
        for _ in 0..chunks.len() {
            new_parts.push(Part::SetA);
            new_origin.push(meta.origin[a as usize]);
            next_id += 1;
        }
        copies_of.push((chunks, c_nbrs));
    }
    let mut b_new = vec![u32::MAX; n];
    for &b in &b_vertices {
        b_new[b as usize] = next_id;
        new_parts.push(Part::SetB);
        new_origin.push(meta.origin[b as usize]);
        next_id += 1;
    }
    let mut c_new = vec![u32::MAX; n];
    for &c in &c_vertices {
        c_new[c as usize] = next_id;
        new_parts.push(Part::Element);
        new_origin.push(meta.origin[c as usize]);
        next_id += 1;
    }

    let mut directed = Vec::new();
    for (slot, (chunks, c_nbrs)) in copies_of.iter().enumerate() {
        for (ci, chunk) in chunks.iter().enumerate() {
            let copy = copy_base[slot] + ci as u32;
            for &b in chunk {
                directed.push((copy, b_new[b as usize]));
            }
            for &c in c_nbrs {
                directed.push((copy, c_new[c as usize]));
            }
        }
    }
    for &b in &b_vertices {
        for &w in g.neighbors(b) {
            if meta.part(w) == Part::Element {
                directed.push((b_new[b as usize], c_new[w as usize]));
            }
        }
    }

    let graph = Graph::from_edges(next_id as usize, &directed)?;
    let orientation = Orientation::from_directed(next_id as usize, directed);
    Ok((
        graph,
        TripartiteMeta {
            parts: new_parts,
            origin: new_origin,
        },
        orientation,
    ))
}

/// Structural statistics of a hardness instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardStats {
    pub vertices: usize,
    pub edges: usize,
    pub ab_edges: usize,
    pub max_outdegree: usize,
    pub triangles: usize,
    pub sum_intersections: usize,
    pub split_cap: usize,
}

impl HardStats {
    pub fn csv_header() -> &'static str {
        "vertices,edges,ab_edges,max_outdegree,triangles,sum_intersections,split_cap"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.vertices,
            self.edges,
            self.ab_edges,
            self.max_outdegree,
            self.triangles,
            self.sum_intersections,
            self.split_cap
        )
    }
}

/// A generated hardness instance: the split-and-oriented graph plus its
/// bookkeeping.
#[derive(Debug, Clone)]
pub struct HardInstance {
    pub graph: Graph,
    pub meta: TripartiteMeta,
    pub orientation: Orientation,
    pub stats: HardStats,
}

/// Generates a random zero-free 3SUM instance, builds the intersection-shaped
/// set system, converts it to a tripartite graph (query pairs deduplicated),
/// and splits with cap `ceil(3n/R)`.
pub fn hard_instance(
    n: usize,
    universe: u64,
    gamma: f64,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<HardInstance> {
    let inst = crate::threesum::gen_instance(n, universe, crate::threesum::Plant::None, rng)?
        .without_zero();
    let (sys, batch, plan) = crate::sd::build_si_instance(&inst, gamma, delta, rng)?;
    let mut pairs: Vec<(usize, usize)> = batch.pairs().to_vec();
    pairs.sort_unstable();
    pairs.dedup();
    let batch = QueryBatch::new(pairs, &sys)?;

    let (g, meta) = si_to_graph(&sys, &batch)?;
    let cap = (3 * plan.n()).div_ceil(plan.bucket_range() as usize).max(1);
    let (graph, meta, orientation) = split_and_orient(&g, &meta, cap)?;

    let sum_intersections: usize = brute_intersection(&sys, &batch).iter().map(Vec::len).sum();
    let listing = enum_triangles_cn(&graph);
    let stats = HardStats {
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        ab_edges: batch.len(),
        max_outdegree: orientation.max_outdegree,
        triangles: listing.triangles.len(),
        sum_intersections,
        split_cap: cap,
    };
    Ok(HardInstance {
        graph,
        meta,
        orientation,
        stats,
    })
}

/// Random graph on `n` vertices with edge probability `density`.
pub fn gen_graph(n: usize, density: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.random::<f64>() < density {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("generated edges are valid")
}

// ---------------------------------------------------------------------------
// Text format: "graph 1\n<n> <m>\n" then m lines "u v".
// ---------------------------------------------------------------------------

pub fn write_graph(g: &Graph) -> String {
    let edges = g.edges();
    let mut out = format!("graph 1\n{} {}\n", g.vertex_count(), edges.len());
    for (u, v) in edges {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn read_graph(text: &str) -> Result<Graph> {
    let mut tokens = text.split_whitespace();
    let magic = (tokens.next(), tokens.next());
    if magic != (Some("graph"), Some("1")) {
        return Err(Error::Parse("expected header `graph 1`".into()));
    }
    let mut num = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
    };
    let n = num("n")?;
    let m = num("m")?;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        edges.push((num("u")? as u32, num("v")? as u32));
    }
    if tokens.next().is_some() {
        return Err(Error::Parse("trailing tokens".into()));
    }
    Graph::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn brute_force_on_small_graphs() {
        let k3 = complete(3);
        assert_eq!(
            enum_triangles_brute(&k3).into_iter().collect::<Vec<_>>(),
            vec![[0, 1, 2]]
        );
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(enum_triangles_brute(&path).is_empty());
        assert_eq!(enum_triangles_brute(&complete(4)).len(), 4);
    }

    #[test]
    fn degeneracy_examples() {
        assert_eq!(degeneracy_order(&complete(4)).1, 3);
        let tree = Graph::from_edges(5, &[(0, 1), (0, 2), (1, 3), (1, 4)]).unwrap();
        assert_eq!(degeneracy_order(&tree).1, 1);
        let cycle = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(degeneracy_order(&cycle).1, 2);
    }

    #[test]
    fn ordered_listing_matches_brute_on_random_graphs() {
        for seed in 0..30u64 {
            let mut r = rng::stream(seed, "tri", 0);
            let n = 20 + (seed as usize % 40);
            let density = 0.05 + 0.45 * (seed as f64 / 30.0);
            let g = gen_graph(n, density, &mut r);
            let listing = enum_triangles_cn(&g);
            assert_eq!(listing.triangles, enum_triangles_brute(&g), "seed {seed}");
            let bound = 8 * (g.edge_count() * (listing.degeneracy + 1) + g.vertex_count());
            assert!(listing.ops as usize <= bound, "ops {} > {bound}", listing.ops);
        }
    }

    #[test]
    fn bipartite_graphs_are_triangle_free() {
        let g = Graph::from_edges(6, &[(0, 3), (0, 4), (1, 3), (1, 5), (2, 4), (2, 5)]).unwrap();
        assert!(enum_triangles_cn(&g).triangles.is_empty());
    }

    fn tiny_si() -> (SetSystem, QueryBatch) {
        let sys = SetSystem::new(3, vec![vec![0], vec![0, 1, 2]], vec![vec![0], vec![1, 2]]).unwrap();
        let batch = QueryBatch::new(vec![(0, 0), (1, 1), (1, 0)], &sys).unwrap();
        (sys, batch)
    }

    #[test]
    fn si_graph_triangles_equal_intersections() {
        let (sys, batch) = tiny_si();
        let (g, meta) = si_to_graph(&sys, &batch).unwrap();
        let tris = enum_triangles_brute(&g);
        let expected: usize = brute_intersection(&sys, &batch).iter().map(Vec::len).sum();
        assert_eq!(tris.len(), expected);
        for t in &tris {
            let parts: Vec<Part> = t.iter().map(|&v| meta.part(v)).collect();
            assert!(parts.contains(&Part::SetA));
            assert!(parts.contains(&Part::SetB));
            assert!(parts.contains(&Part::Element));
        }
    }

    #[test]
    fn si_graph_single_shared_element() {
        let sys = SetSystem::new(1, vec![vec![0]], vec![vec![0]]).unwrap();
        let batch = QueryBatch::new(vec![(0, 0)], &sys).unwrap();
        let (g, _) = si_to_graph(&sys, &batch).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(enum_triangles_brute(&g).len(), 1);

        let no_queries = QueryBatch::new(vec![], &sys).unwrap();
        let (g2, _) = si_to_graph(&sys, &no_queries).unwrap();
        assert!(enum_triangles_brute(&g2).is_empty());
    }

    #[test]
    fn split_copy_counts() {
        // One A vertex with 5 B-neighbors, cap 2 -> 3 copies.
        let sys = SetSystem::new(
            1,
            vec![vec![0]],
            vec![vec![0], vec![0], vec![0], vec![0], vec![0]],
        )
        .unwrap();
        let batch = QueryBatch::new((0..5).map(|b| (0, b)).collect(), &sys).unwrap();
        let (g, meta) = si_to_graph(&sys, &batch).unwrap();
        let (g2, meta2, orient) = split_and_orient(&g, &meta, 2).unwrap();
        let copies = meta2.parts.iter().filter(|&&p| p == Part::SetA).count();
        assert_eq!(copies, 3);
        assert_eq!(enum_triangles_brute(&g2).len(), enum_triangles_brute(&g).len());
        // Every copy points back at the original A vertex.
        for v in 0..g2.vertex_count() as u32 {
            if meta2.part(v) == Part::SetA {
                assert_eq!(meta2.origin[v as usize], 0);
            }
        }
        assert!(orient.max_outdegree <= 2 + 1);
    }

    #[test]
    fn split_preserves_triangles_and_injectivity_on_random_systems() {
        for seed in 0..20u64 {
            let mut r = rng::stream(seed, "split", 0);
            let (sys, batch) = crate::setsystem::gen_system(12, 8, 8, 6, 24, &mut r).unwrap();
            let mut pairs = batch.pairs().to_vec();
            pairs.sort_unstable();
            pairs.dedup();
            let batch = QueryBatch::new(pairs, &sys).unwrap();
            let (g, meta) = si_to_graph(&sys, &batch).unwrap();
            let before = enum_triangles_brute(&g);
            let cap = 1 + (seed as usize % 4);
            let (g2, meta2, orient) = split_and_orient(&g, &meta, cap).unwrap();
            let after = enum_triangles_brute(&g2);
            assert_eq!(before.len(), after.len(), "seed {seed}");
            // Projection through the origin map is injective onto the
            // original triangle set.
            let projected: BTreeSet<[u32; 3]> = after
                .iter()
                .map(|t| {
                    let mut p = [
                        meta2.origin[t[0] as usize],
                        meta2.origin[t[1] as usize],
                        meta2.origin[t[2] as usize],
                    ];
                    p.sort_unstable();
                    p
                })
                .collect();
            assert_eq!(projected.len(), after.len());
            assert_eq!(projected, before);
            // Out-degree bound: cap plus the largest set-side C-degree
            // (copies emit chunk + C-edges, B vertices emit their C-edges).
            let max_c_degree = (0..g.vertex_count() as u32)
                .filter(|&v| meta.part(v) != Part::Element)
                .map(|v| {
                    g.neighbors(v)
                        .iter()
                        .filter(|&&w| meta.part(w) == Part::Element)
                        .count()
                })
                .max()
                .unwrap_or(0);
            assert!(orient.max_outdegree <= cap + max_c_degree);
        }
    }

    #[test]
    fn hard_instance_stats_are_consistent() {
        let mut r = rng::stream(5, "hard", 0);
        let hard = hard_instance(64, 1 << 20, 0.5, 0.5, &mut r).unwrap();
        assert_eq!(hard.stats.triangles, hard.stats.sum_intersections);
        assert!(hard.stats.max_outdegree <= 2 * hard.stats.split_cap);
        assert_eq!(hard.stats.vertices, hard.graph.vertex_count());
    }

    #[test]
    fn graph_text_round_trip() {
        let g = complete(4);
        let g2 = read_graph(&write_graph(&g)).unwrap();
        assert_eq!(g, g2);
        assert!(read_graph("graph 2\n0 0\n").is_err());
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
    }
}
