//! Incremental maximum-cardinality matching with rollback, and the gadget
//! that answers set-disjointness queries through matching-size deltas.
//!
//! The engine targets bipartite graphs (the gadget is bipartite by
//! construction and asserts it at build time). After inserting an edge, a
//! single augmenting-path search restores maximality: any new augmenting
//! path must pass through the inserted edge, so the search starts from its
//! endpoints. Every mutation is logged and can be rolled back to a mark,
//! restoring the exact earlier state.
//!
//! The gadget doubles every set and every element into copy pairs whose
//! copy edges form the initial perfect matching. A query on `(a, b)` wires
//! probe vertices to `a''` and `b''`; the matching grows iff some element
//! sits in both sets, because only then does an alternating path
//! `(a'', a', c_A, c_B, b', b'')` exist. Three query modes differ in how
//! the probe edges are undone: rollback, burying them under fresh perfect
//! matchings, or a work-threshold combination of the two.

use std::collections::HashSet;

use rand::Rng;

use crate::error::{param, Error, Result};
use crate::setsystem::{Family, QueryBatch, SetSystem};

/// A position in the operation log, used to roll back to an earlier state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mark(usize);

#[derive(Debug, Clone)]
enum LogRecord {
    VertexAdded,
    EdgeAdded(u32, u32),
    /// Partner reassignments in application order; each entry is
    /// (vertex, old partner, new partner).
    Flips(Vec<(u32, Option<u32>, Option<u32>)>),
}

/// Growable graph with a maintained maximum matching and a reversible
/// operation log. Mutation is exclusive; searches count work units.
#[derive(Debug, Clone, Default)]
pub struct MatchGraph {
    adj: Vec<Vec<u32>>,
    edges: HashSet<(u32, u32)>,
    partner: Vec<Option<u32>>,
    size: usize,
    log: Vec<LogRecord>,
    ops: u64,
}

impl MatchGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn matching_size(&self) -> usize {
        self.size
    }

    pub fn partner_of(&self, v: u32) -> Option<u32> {
        self.partner[v as usize]
    }

    /// Counted elementary work (insertions and search steps) so far.
    pub fn work_units(&self) -> u64 {
        self.ops
    }

    pub fn mark(&self) -> Mark {
        Mark(self.log.len())
    }

    /// Adds an isolated vertex and returns its id.
    pub fn insert_vertex(&mut self) -> u32 {
        let id = self.adj.len() as u32;
        self.adj.push(Vec::new());
        self.partner.push(None);
        self.log.push(LogRecord::VertexAdded);
        self.ops += 1;
        id
    }

    fn edge_key(u: u32, v: u32) -> (u32, u32) {
        (u.min(v), u.max(v))
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.contains(&Self::edge_key(u, v))
    }

    /// Raw structural insert used during gadget construction; no matching
    /// update, no augmentation.
    fn add_edge_unchecked(&mut self, u: u32, v: u32) {
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
        self.edges.insert(Self::edge_key(u, v));
        self.log.push(LogRecord::EdgeAdded(u, v));
        self.ops += 1;
    }

    fn check_endpoints(&self, u: u32, v: u32) -> Result<()> {
        let n = self.adj.len() as u32;
        if u >= n || v >= n {
            return Err(param(format!("edge ({u},{v}) references a missing vertex")));
        }
        if u == v {
            return Err(param(format!("self-loop at {u}")));
        }
        if self.has_edge(u, v) {
            return Err(param(format!("edge ({u},{v}) already present")));
        }
        Ok(())
    }

    /// Inserts an edge and restores matching maximality with one
    /// augmenting-path search. Returns the new matching size.
    pub fn insert_edge(&mut self, u: u32, v: u32) -> Result<usize> {
        self.check_endpoints(u, v)?;
        self.add_edge_unchecked(u, v);
        match (self.partner[u as usize], self.partner[v as usize]) {
            (None, None) => {
                self.apply_flips(vec![(u, None, Some(v)), (v, None, Some(u))]);
            }
            (None, Some(_)) => {
                self.try_augment_from(u);
            }
            (Some(_), None) => {
                self.try_augment_from(v);
            }
            (Some(_), Some(_)) => {
                // A new augmenting path must cross (u, v), so each endpoint
                // must reach a free vertex along an alternating path that
                // leaves on its matched edge.
                if let (Some(f1), Some(f2)) =
                    (self.reach_free_via_matched(u), self.reach_free_via_matched(v))
                {
                    if !self.try_augment_from(f1) {
                        let grew = self.try_augment_from(f2);
                        debug_assert!(grew, "walk argument guarantees an augmenting path");
                    }
                }
            }
        }
        Ok(self.size)
    }

    fn apply_flips(&mut self, flips: Vec<(u32, Option<u32>, Option<u32>)>) {
        for &(v, _, new) in &flips {
            self.partner[v as usize] = new;
        }
        self.log.push(LogRecord::Flips(flips));
        self.size += 1;
    }

    /// Kuhn-style alternating DFS from a free vertex. Correct for bipartite
    /// graphs. Applies and logs the flip on success.
    fn try_augment_from(&mut self, start: u32) -> bool {
        debug_assert!(self.partner[start as usize].is_none());
        let mut visited = vec![false; self.adj.len()];
        let mut flips = Vec::new();
        if self.dfs(start, &mut visited, &mut flips) {
            self.apply_flips(flips);
            true
        } else {
            false
        }
    }

    fn dfs(
        &mut self,
        x: u32,
        visited: &mut [bool],
        flips: &mut Vec<(u32, Option<u32>, Option<u32>)>,
    ) -> bool {
        for idx in 0..self.adj[x as usize].len() {
            let w = self.adj[x as usize][idx];
            self.ops += 1;
            if visited[w as usize] {
                continue;
            }
            visited[w as usize] = true;
            let next = self.partner[w as usize];
            let advanced = match next {
                None => true,
                Some(p) => self.dfs(p, visited, flips),
            };
            if advanced {
                flips.push((w, self.partner[w as usize], Some(x)));
                flips.push((x, self.partner[x as usize], Some(w)));
                self.partner[w as usize] = Some(x);
                self.partner[x as usize] = Some(w);
                return true;
            }
        }
        false
    }

    /// Alternating BFS from a matched vertex `s` that leaves on `s`'s
    /// matched edge; returns a free vertex reachable on such a path.
    fn reach_free_via_matched(&mut self, s: u32) -> Option<u32> {
        let Some(ms) = self.partner[s as usize] else {
            return Some(s);
        };
        let mut visited = vec![false; self.adj.len()];
        visited[s as usize] = true;
        visited[ms as usize] = true;
        let mut queue = std::collections::VecDeque::from([ms]);
        while let Some(x) = queue.pop_front() {
            for idx in 0..self.adj[x as usize].len() {
                let w = self.adj[x as usize][idx];
                self.ops += 1;
                if Some(w) == self.partner[x as usize] {
                    continue;
                }
                match self.partner[w as usize] {
                    None => return Some(w),
                    Some(p) => {
                        if !visited[p as usize] {
                            visited[p as usize] = true;
                            visited[w as usize] = true;
                            queue.push_back(p);
                        }
                    }
                }
            }
        }
        None
    }

    /// Restores the graph and matching to the state at `mark` by reverse
    /// replay of the log.
    pub fn rollback(&mut self, mark: Mark) -> Result<()> {
        if mark.0 > self.log.len() {
            return Err(param(format!(
                "mark {} is ahead of the log ({} records)",
                mark.0,
                self.log.len()
            )));
        }
        while self.log.len() > mark.0 {
            match self.log.pop().expect("length checked") {
                LogRecord::VertexAdded => {
                    debug_assert!(self.adj.last().is_some_and(Vec::is_empty));
                    debug_assert!(self.partner.last().is_some_and(Option::is_none));
                    self.adj.pop();
                    self.partner.pop();
                }
                LogRecord::EdgeAdded(u, v) => {
                    debug_assert_eq!(self.adj[u as usize].last(), Some(&v));
                    debug_assert_eq!(self.adj[v as usize].last(), Some(&u));
                    self.adj[u as usize].pop();
                    self.adj[v as usize].pop();
                    self.edges.remove(&Self::edge_key(u, v));
                }
                LogRecord::Flips(flips) => {
                    for &(v, old, _) in flips.iter().rev() {
                        self.partner[v as usize] = old;
                    }
                    self.size -= 1;
                }
            }
        }
        Ok(())
    }

    /// Checks partner symmetry and that matched edges exist in the graph.
    pub fn validate_matching(&self) -> Result<()> {
        let mut matched = 0;
        for v in 0..self.adj.len() as u32 {
            if let Some(p) = self.partner[v as usize] {
                if self.partner[p as usize] != Some(v) {
                    return Err(Error::Invariant(format!("partner asymmetry at {v}")));
                }
                if !self.has_edge(v, p) {
                    return Err(Error::Invariant(format!("matched edge ({v},{p}) missing")));
                }
                matched += 1;
            }
        }
        if matched != 2 * self.size {
            return Err(Error::Invariant(format!(
                "size {} disagrees with {} matched endpoints",
                self.size, matched
            )));
        }
        Ok(())
    }

    /// Structural snapshot for rollback-exactness checks.
    pub fn snapshot(&self) -> (usize, Vec<(u32, u32)>, Vec<Option<u32>>, usize) {
        let mut edges: Vec<(u32, u32)> = self.edges.iter().copied().collect();
        edges.sort_unstable();
        (self.adj.len(), edges, self.partner.clone(), self.size)
    }
}

/// Vertex ids of the gadget: copy pairs per set and per element, plus the
/// global probe vertices used by the rollback mode.
#[derive(Debug, Clone)]
pub struct GadgetMap {
    pub elem_a: Vec<u32>,
    pub elem_b: Vec<u32>,
    pub a_outer: Vec<u32>,
    pub a_inner: Vec<u32>,
    pub b_outer: Vec<u32>,
    pub b_inner: Vec<u32>,
    pub probe_x: u32,
    pub probe_y: u32,
}

/// Builds the gadget for a set system: vertices `2|C| + 2|A| + 2|B| + 2`,
/// copy edges plus membership edges, and the copy-pair perfect matching
/// installed as the starting MCM. Asserts bipartiteness.
pub fn build_gadget(sys: &SetSystem) -> Result<(MatchGraph, GadgetMap)> {
    let mut g = MatchGraph::new();
    let nc = sys.universe_size();
    let na = sys.family(Family::A).len();
    let nb = sys.family(Family::B).len();

    let elem_a: Vec<u32> = (0..nc).map(|_| g.insert_vertex()).collect();
    let elem_b: Vec<u32> = (0..nc).map(|_| g.insert_vertex()).collect();
    let a_inner: Vec<u32> = (0..na).map(|_| g.insert_vertex()).collect();
    let a_outer: Vec<u32> = (0..na).map(|_| g.insert_vertex()).collect();
    let b_inner: Vec<u32> = (0..nb).map(|_| g.insert_vertex()).collect();
    let b_outer: Vec<u32> = (0..nb).map(|_| g.insert_vertex()).collect();
    let probe_x = g.insert_vertex();
    let probe_y = g.insert_vertex();

    for c in 0..nc {
        g.add_edge_unchecked(elem_a[c], elem_b[c]);
    }
    for (i, set) in sys.family(Family::A).iter().enumerate() {
        g.add_edge_unchecked(a_inner[i], a_outer[i]);
        for &c in set {
            g.add_edge_unchecked(a_inner[i], elem_a[c]);
        }
    }
    for (i, set) in sys.family(Family::B).iter().enumerate() {
        g.add_edge_unchecked(b_inner[i], b_outer[i]);
        for &c in set {
            g.add_edge_unchecked(b_inner[i], elem_b[c]);
        }
    }

    // Install the unique copy-pair perfect matching directly.
    for c in 0..nc {
        g.partner[elem_a[c] as usize] = Some(elem_b[c]);
        g.partner[elem_b[c] as usize] = Some(elem_a[c]);
    }
    for i in 0..na {
        g.partner[a_inner[i] as usize] = Some(a_outer[i]);
        g.partner[a_outer[i] as usize] = Some(a_inner[i]);
    }
    for i in 0..nb {
        g.partner[b_inner[i] as usize] = Some(b_outer[i]);
        g.partner[b_outer[i] as usize] = Some(b_inner[i]);
    }
    g.size = nc + na + nb;
    g.log.clear(); // construction is the base state; marks start here
    g.validate_matching()?;
    assert_bipartite(&g)?;

    Ok((
        g,
        GadgetMap {
            elem_a,
            elem_b,
            a_outer,
            a_inner,
            b_outer,
            b_inner,
            probe_x,
            probe_y,
        },
    ))
}

fn assert_bipartite(g: &MatchGraph) -> Result<()> {
    let n = g.vertex_count();
    let mut color = vec![-1i8; n];
    for start in 0..n as u32 {
        if color[start as usize] >= 0 {
            continue;
        }
        color[start as usize] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &g.adj[v as usize] {
                if color[w as usize] < 0 {
                    color[w as usize] = 1 - color[v as usize];
                    queue.push_back(w);
                } else if color[w as usize] == color[v as usize] {
                    return Err(Error::Invariant(format!("odd cycle through edge ({v},{w})")));
                }
            }
        }
    }
    Ok(())
}

/// Disjointness by probe-insert-readout-rollback: wires the global probes
/// to `a''`/`b''`, reads the size delta, and rolls both insertions back.
pub fn sd_query_rollback(g: &mut MatchGraph, map: &GadgetMap, a: usize, b: usize) -> Result<bool> {
    let size0 = g.matching_size();
    let mark = g.mark();
    g.insert_edge(map.probe_x, map.a_outer[a])?;
    g.insert_edge(map.probe_y, map.b_outer[b])?;
    let grew = g.matching_size() > size0;
    g.rollback(mark)?;
    Ok(!grew)
}

/// Outcome of a perfect-matching-mode query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerfectOutcome {
    pub disjoint: bool,
    pub size_delta: usize,
}

/// Disjointness by burying the probe edges: four fresh vertices per query,
/// probe edges to `a''`/`b''`, then pairing edges that restore a perfect
/// matching on everything but the global probes. The matching always ends
/// exactly two larger than it started.
pub fn sd_query_perfect(
    g: &mut MatchGraph,
    map: &GadgetMap,
    a: usize,
    b: usize,
) -> Result<PerfectOutcome> {
    let size0 = g.matching_size();
    let x = g.insert_vertex();
    let x2 = g.insert_vertex();
    let y = g.insert_vertex();
    let y2 = g.insert_vertex();
    g.insert_edge(x, map.a_outer[a])?;
    g.insert_edge(y, map.b_outer[b])?;
    let grew = g.matching_size() > size0;
    g.insert_edge(x, x2)?;
    g.insert_edge(y, y2)?;
    let size_delta = g.matching_size() - size0;
    if size_delta != 2 {
        return Err(Error::Invariant(format!(
            "perfect-matching query changed the size by {size_delta}, expected 2"
        )));
    }
    Ok(PerfectOutcome {
        disjoint: !grew,
        size_delta,
    })
}

/// Outcome of a combined-policy query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedOutcome {
    pub disjoint: bool,
    pub kept: bool,
    pub work: u64,
    pub vertex_count: usize,
}

/// Performs the perfect-matching variant while counting work; if the eight
/// insertions cost less than `9 * N^alpha` work units (`N` = vertex count
/// after the insertions), they are rolled back, otherwise they stay.
pub fn sd_query_combined(
    g: &mut MatchGraph,
    map: &GadgetMap,
    a: usize,
    b: usize,
    alpha: f64,
) -> Result<CombinedOutcome> {
    let mark = g.mark();
    let ops0 = g.work_units();
    let outcome = sd_query_perfect(g, map, a, b)?;
    let work = g.work_units() - ops0;
    let n_hat = g.vertex_count();
    let threshold = 9.0 * (n_hat as f64).powf(alpha);
    let kept = work as f64 >= threshold;
    if !kept {
        g.rollback(mark)?;
    }
    Ok(CombinedOutcome {
        disjoint: outcome.disjoint,
        kept,
        work,
        vertex_count: g.vertex_count(),
    })
}

/// Query mode selector for the batch runner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QueryMode {
    Rollback,
    Perfect,
    Combined { alpha: f64 },
}

impl std::str::FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rollback" => Ok(QueryMode::Rollback),
            "perfect" => Ok(QueryMode::Perfect),
            "combined" => Ok(QueryMode::Combined { alpha: 0.5 }),
            other => Err(param(format!("unknown query mode `{other}`"))),
        }
    }
}

/// Runs a query batch through the gadget, emitting one CSV row per query:
/// `query,answer,size_delta,work,vertices`. Queries are processed grouped
/// by their A-side index (ties by B), keeping logs reproducible.
pub fn emit_query_csv(sys: &SetSystem, batch: &QueryBatch, mode: QueryMode) -> Result<String> {
    let (mut g, map) = build_gadget(sys)?;
    let mut order: Vec<(usize, (usize, usize))> =
        batch.pairs().iter().copied().enumerate().collect();
    order.sort_by_key(|&(idx, (a, b))| (a, b, idx));

    let mut out = String::from("query,answer,size_delta,work,vertices\n");
    for (idx, (a, b)) in order {
        let size0 = g.matching_size();
        let ops0 = g.work_units();
        let disjoint = match mode {
            QueryMode::Rollback => sd_query_rollback(&mut g, &map, a, b)?,
            QueryMode::Perfect => sd_query_perfect(&mut g, &map, a, b)?.disjoint,
            QueryMode::Combined { alpha } => sd_query_combined(&mut g, &map, a, b, alpha)?.disjoint,
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            idx,
            u8::from(disjoint),
            g.matching_size() as i64 - size0 as i64,
            g.work_units() - ops0,
            g.vertex_count()
        ));
    }
    Ok(out)
}

/// Independent offline maximum-matching oracle (repeated augmentation from
/// every vertex, fresh state). Correct for bipartite graphs.
pub fn offline_maximum_matching(n: usize, edges: &[(u32, u32)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    let mut partner: Vec<Option<u32>> = vec![None; n];
    fn try_kuhn(v: u32, adj: &[Vec<u32>], partner: &mut [Option<u32>], seen: &mut [bool]) -> bool {
        for &w in &adj[v as usize] {
            if seen[w as usize] {
                continue;
            }
            seen[w as usize] = true;
            let next = partner[w as usize];
            if next.is_none() || try_kuhn(next.unwrap(), adj, partner, seen) {
                partner[w as usize] = Some(v);
                partner[v as usize] = Some(w);
                return true;
            }
        }
        false
    }
    let mut size = 0;
    for v in 0..n as u32 {
        if partner[v as usize].is_none() {
            let mut seen = vec![false; n];
            seen[v as usize] = true;
            if try_kuhn(v, &adj, &mut partner, &mut seen) {
                size += 1;
            }
        }
    }
    size
}

/// Random bipartite edge sequence for incremental-vs-offline comparisons:
/// `left + right` vertices, edges in insertion order, no duplicates.
pub fn gen_bipartite_edges(
    left: usize,
    right: usize,
    edge_count: usize,
    rng: &mut impl Rng,
) -> Vec<(u32, u32)> {
    let mut seen = HashSet::new();
    let max_edges = left * right;
    let target = edge_count.min(max_edges);
    let mut edges = Vec::with_capacity(target);
    while edges.len() < target {
        let u = rng.random_range(0..left) as u32;
        let v = (left + rng.random_range(0..right)) as u32;
        if seen.insert((u, v)) {
            edges.push((u, v));
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::setsystem::{brute_disjointness, gen_system};

    fn tiny_system() -> SetSystem {
        SetSystem::new(1, vec![vec![0]], vec![vec![0]]).unwrap()
    }

    #[test]
    fn gadget_shape_for_single_shared_element() {
        let sys = tiny_system();
        let (g, map) = build_gadget(&sys).unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(g.matching_size(), 3);
        g.validate_matching().unwrap();
        assert_eq!(map.a_outer.len(), 1);
    }

    #[test]
    fn gadget_for_empty_system() {
        let sys = SetSystem::new(0, vec![], vec![]).unwrap();
        let (g, _) = build_gadget(&sys).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.matching_size(), 0);
    }

    #[test]
    fn incremental_edge_insertion_basics() {
        let mut g = MatchGraph::new();
        let u = g.insert_vertex();
        let v = g.insert_vertex();
        assert_eq!(g.insert_edge(u, v).unwrap(), 1);
        assert!(g.insert_edge(u, v).is_err());
        assert!(g.insert_edge(u, 9).is_err());

        // Two matched pairs, connecting edge creates no augmenting path.
        let mut g = MatchGraph::new();
        let ids: Vec<u32> = (0..4).map(|_| g.insert_vertex()).collect();
        g.insert_edge(ids[0], ids[1]).unwrap();
        g.insert_edge(ids[2], ids[3]).unwrap();
        assert_eq!(g.insert_edge(ids[1], ids[2]).unwrap(), 2);
    }

    #[test]
    fn both_matched_insertion_can_augment() {
        // f1 - u1 = u2, v1 = v2 - f2; adding (u2, v2) augments through the
        // whole path.
        let mut g = MatchGraph::new();
        let ids: Vec<u32> = (0..6).map(|_| g.insert_vertex()).collect();
        let (f1, u1, u2, v2, v1, f2) = (ids[0], ids[1], ids[2], ids[3], ids[4], ids[5]);
        g.insert_edge(u1, u2).unwrap();
        g.insert_edge(v1, v2).unwrap();
        g.insert_edge(f1, u1).unwrap();
        g.insert_edge(f2, v1).unwrap();
        assert_eq!(g.matching_size(), 2);
        assert_eq!(g.insert_edge(u2, v2).unwrap(), 3);
        g.validate_matching().unwrap();
    }

    #[test]
    fn incremental_matches_offline_on_random_bipartite_graphs() {
        for seed in 0..40u64 {
            let mut r = rng::stream(seed, "mm", 0);
            let left = 3 + (seed as usize % 8);
            let right = 3 + ((seed / 2) as usize % 8);
            let edges = gen_bipartite_edges(left, right, left * right / 2, &mut r);
            let mut g = MatchGraph::new();
            for _ in 0..left + right {
                g.insert_vertex();
            }
            for &(u, v) in &edges {
                g.insert_edge(u, v).unwrap();
                g.validate_matching().unwrap();
            }
            let expected = offline_maximum_matching(left + right, &edges);
            assert_eq!(g.matching_size(), expected, "seed {seed}");
        }
    }

    #[test]
    fn rollback_restores_snapshots_lifo() {
        let mut g = MatchGraph::new();
        let ids: Vec<u32> = (0..4).map(|_| g.insert_vertex()).collect();
        g.insert_edge(ids[0], ids[1]).unwrap();
        let snap1 = g.snapshot();
        let mark1 = g.mark();
        g.insert_edge(ids[2], ids[3]).unwrap();
        let snap2 = g.snapshot();
        let mark2 = g.mark();
        g.insert_edge(ids[1], ids[2]).unwrap();
        let _ = g.insert_vertex();

        g.rollback(mark2).unwrap();
        assert_eq!(g.snapshot(), snap2);
        g.rollback(mark1).unwrap();
        assert_eq!(g.snapshot(), snap1);
        // mark2 is now ahead of the log: rejected.
        assert!(g.rollback(mark2).is_err());
    }

    #[test]
    fn query_modes_answer_correctly_on_two_element_system() {
        let sys = SetSystem::new(2, vec![vec![0]], vec![vec![0], vec![1]]).unwrap();
        let (mut g, map) = build_gadget(&sys).unwrap();
        // a = {0}, b0 = {0}: intersecting; b1 = {1}: disjoint.
        assert!(!sd_query_rollback(&mut g, &map, 0, 0).unwrap());
        assert!(sd_query_rollback(&mut g, &map, 0, 1).unwrap());
        // Rollback leaves the gadget reusable: ask again.
        assert!(!sd_query_rollback(&mut g, &map, 0, 0).unwrap());

        let out = sd_query_perfect(&mut g, &map, 0, 0).unwrap();
        assert!(!out.disjoint);
        assert_eq!(out.size_delta, 2);
        let out = sd_query_perfect(&mut g, &map, 0, 1).unwrap();
        assert!(out.disjoint);
        assert_eq!(out.size_delta, 2);
        // Same pair again: same answer after the perfect matching re-formed.
        assert!(!sd_query_perfect(&mut g, &map, 0, 0).unwrap().disjoint);
        g.validate_matching().unwrap();
    }

    #[test]
    fn all_modes_agree_with_brute_disjointness() {
        for seed in 0..25u64 {
            let mut r = rng::stream(seed, "gadget", 0);
            let (sys, batch) = gen_system(10, 6, 6, 5, 30, &mut r).unwrap();
            let expected = brute_disjointness(&sys, &batch);
            for mode in [
                QueryMode::Rollback,
                QueryMode::Perfect,
                QueryMode::Combined { alpha: 0.4 },
            ] {
                let (mut g, map) = build_gadget(&sys).unwrap();
                for (q, &(a, b)) in batch.pairs().iter().enumerate() {
                    let got = match mode {
                        QueryMode::Rollback => sd_query_rollback(&mut g, &map, a, b).unwrap(),
                        QueryMode::Perfect => sd_query_perfect(&mut g, &map, a, b).unwrap().disjoint,
                        QueryMode::Combined { alpha } => {
                            sd_query_combined(&mut g, &map, a, b, alpha).unwrap().disjoint
                        }
                    };
                    assert_eq!(got, expected[q], "seed {seed} query {q} mode {mode:?}");
                }
                g.validate_matching().unwrap();
            }
        }
    }

    #[test]
    fn combined_threshold_extremes() {
        let sys = tiny_system();
        // Huge alpha: always rolls back, vertex count invariant.
        let (mut g, map) = build_gadget(&sys).unwrap();
        let n0 = g.vertex_count();
        for _ in 0..5 {
            let out = sd_query_combined(&mut g, &map, 0, 0, 50.0).unwrap();
            assert!(!out.kept);
            assert_eq!(g.vertex_count(), n0);
        }
        // alpha = 0: threshold 9 work units; the queries here always exceed
        // it, so insertions stay and the graph grows by 4 per query.
        let (mut g, map) = build_gadget(&sys).unwrap();
        let n0 = g.vertex_count();
        let out = sd_query_combined(&mut g, &map, 0, 0, 0.0).unwrap();
        assert!(out.work >= 9);
        assert!(out.kept);
        assert_eq!(g.vertex_count(), n0 + 4);
    }

    #[test]
    fn csv_emission_is_deterministic_and_grouped() {
        let mut r = rng::stream(3, "csv", 0);
        let (sys, batch) = gen_system(6, 3, 3, 4, 10, &mut r).unwrap();
        let a = emit_query_csv(&sys, &batch, QueryMode::Perfect).unwrap();
        let b = emit_query_csv(&sys, &batch, QueryMode::Perfect).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("query,answer,size_delta,work,vertices\n"));
        assert_eq!(a.lines().count(), batch.len() + 1);
    }
}
