//! Set systems, offline disjointness/intersection backends, and the
//! heavy/light online structure.
//!
//! Two set families `A` and `B` over a universe of element ids, plus a batch
//! of `(a, b)` query pairs. The brute-force backends are the oracles; the
//! heavy/light structure answers single disjointness queries with counted
//! work `O(sqrt(N))` after `O(N * sqrt(N))` counted preprocessing, where `N`
//! is the total size of all sets.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{param, Error, Result};

/// Which family a set index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    A,
    B,
}

/// Two families of element-id sets over a common universe.
/// Sets are stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    universe_size: usize,
    family_a: Vec<Vec<usize>>,
    family_b: Vec<Vec<usize>>,
}

impl SetSystem {
    pub fn new(universe_size: usize, mut family_a: Vec<Vec<usize>>, mut family_b: Vec<Vec<usize>>) -> Result<Self> {
        for fam in [&mut family_a, &mut family_b] {
            for set in fam.iter_mut() {
                set.sort_unstable();
                set.dedup();
                if set.last().is_some_and(|&e| e >= universe_size) {
                    return Err(param("element id outside universe"));
                }
            }
        }
        Ok(Self {
            universe_size,
            family_a,
            family_b,
        })
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn family(&self, f: Family) -> &[Vec<usize>] {
        match f {
            Family::A => &self.family_a,
            Family::B => &self.family_b,
        }
    }

    pub fn set(&self, f: Family, idx: usize) -> &[usize] {
        &self.family(f)[idx]
    }

    /// Total size of all sets in both families.
    pub fn total_size(&self) -> usize {
        self.family_a.iter().map(Vec::len).sum::<usize>()
            + self.family_b.iter().map(Vec::len).sum::<usize>()
    }
}

/// Query pairs `(index into A, index into B)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryBatch {
    pairs: Vec<(usize, usize)>,
}

impl QueryBatch {
    pub fn new(pairs: Vec<(usize, usize)>, sys: &SetSystem) -> Result<Self> {
        for &(a, b) in &pairs {
            if a >= sys.family_a.len() || b >= sys.family_b.len() {
                return Err(param(format!("query pair ({a},{b}) out of range")));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn sorted_disjoint(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// One bit per query, true = disjoint. Two-pointer merge over sorted lists.
pub fn brute_disjointness(sys: &SetSystem, batch: &QueryBatch) -> Vec<bool> {
    crate::par::map_indexed(batch.len(), |q| {
        let (a, b) = batch.pairs[q];
        sorted_disjoint(&sys.family_a[a], &sys.family_b[b])
    })
}

/// Exact sorted intersection per query.
pub fn brute_intersection(sys: &SetSystem, batch: &QueryBatch) -> Vec<Vec<usize>> {
    crate::par::map_indexed(batch.len(), |q| {
        let (a, b) = batch.pairs[q];
        sorted_intersection(&sys.family_a[a], &sys.family_b[b])
    })
}

/// Online disjointness with `O(N sqrt N)` preprocessing and `O(sqrt N)`
/// queries: heavy sets (size > sqrt N, at most sqrt N of them per family)
/// get their pairwise answers precomputed; any query touching a light set
/// walks that set's elements against a membership index.
#[derive(Debug)]
pub struct HeavyLightStructure {
    total: usize,
    heavy_a: Vec<usize>,
    heavy_b: Vec<usize>,
    heavy_rank_a: HashMap<usize, usize>,
    heavy_rank_b: HashMap<usize, usize>,
    /// heavy_bits[ra][rb] = disjoint?
    heavy_bits: Vec<Vec<bool>>,
    elem_to_a: HashMap<usize, Vec<usize>>,
    elem_to_b: HashMap<usize, Vec<usize>>,
    preprocess_ops: u64,
}

impl HeavyLightStructure {
    fn is_heavy(total: usize, len: usize) -> bool {
        // len > sqrt(N), compared as len^2 > N to stay in integers.
        len.saturating_mul(len) > total
    }

    pub fn build(sys: &SetSystem) -> Self {
        let total = sys.total_size();
        let mut ops = 0u64;

        let mut elem_to_a: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut elem_to_b: HashMap<usize, Vec<usize>> = HashMap::new();
        for (idx, set) in sys.family_a.iter().enumerate() {
            for &e in set {
                elem_to_a.entry(e).or_default().push(idx);
                ops += 1;
            }
        }
        for (idx, set) in sys.family_b.iter().enumerate() {
            for &e in set {
                elem_to_b.entry(e).or_default().push(idx);
                ops += 1;
            }
        }

        let heavy_a: Vec<usize> = (0..sys.family_a.len())
            .filter(|&i| Self::is_heavy(total, sys.family_a[i].len()))
            .collect();
        let heavy_b: Vec<usize> = (0..sys.family_b.len())
            .filter(|&i| Self::is_heavy(total, sys.family_b[i].len()))
            .collect();
        let heavy_rank_a: HashMap<usize, usize> =
            heavy_a.iter().enumerate().map(|(r, &i)| (i, r)).collect();
        let heavy_rank_b: HashMap<usize, usize> =
            heavy_b.iter().enumerate().map(|(r, &i)| (i, r)).collect();

        let mut heavy_bits = vec![vec![false; heavy_b.len()]; heavy_a.len()];
        for (ra, &ia) in heavy_a.iter().enumerate() {
            for (rb, &ib) in heavy_b.iter().enumerate() {
                let a = &sys.family_a[ia];
                let b = &sys.family_b[ib];
                ops += (a.len() + b.len()) as u64;
                heavy_bits[ra][rb] = sorted_disjoint(a, b);
            }
        }

        Self {
            total,
            heavy_a,
            heavy_b,
            heavy_rank_a,
            heavy_rank_b,
            heavy_bits,
            elem_to_a,
            elem_to_b,
            preprocess_ops: ops,
        }
    }

    pub fn total_size(&self) -> usize {
        self.total
    }

    pub fn heavy_count(&self) -> (usize, usize) {
        (self.heavy_a.len(), self.heavy_b.len())
    }

    /// Counted preprocessing work.
    pub fn preprocess_ops(&self) -> u64 {
        self.preprocess_ops
    }

    /// Answers one disjointness query; returns `(disjoint, counted_ops)`.
    pub fn query(&self, sys: &SetSystem, a_idx: usize, b_idx: usize) -> (bool, u64) {
        let a = &sys.family_a[a_idx];
        let b = &sys.family_b[b_idx];
        match (self.heavy_rank_a.get(&a_idx), self.heavy_rank_b.get(&b_idx)) {
            (Some(&ra), Some(&rb)) => (self.heavy_bits[ra][rb], 1),
            _ => {
                // At least one side is light (<= sqrt N elements); iterate it
                // against the opposite membership index, one probe per element.
                let a_is_light = !self.heavy_rank_a.contains_key(&a_idx);
                let b_is_light = !self.heavy_rank_b.contains_key(&b_idx);
                let iterate_a = if a_is_light && b_is_light {
                    a.len() <= b.len()
                } else {
                    a_is_light
                };
                let mut ops = 0u64;
                let disjoint = if iterate_a {
                    a.iter().all(|e| {
                        ops += 1;
                        !self
                            .elem_to_b
                            .get(e)
                            .is_some_and(|sets| sets.binary_search(&b_idx).is_ok())
                    })
                } else {
                    b.iter().all(|e| {
                        ops += 1;
                        !self
                            .elem_to_a
                            .get(e)
                            .is_some_and(|sets| sets.binary_search(&a_idx).is_ok())
                    })
                };
                (disjoint, ops.max(1))
            }
        }
    }
}

/// Pluggable disjointness/intersection backend, so the reductions stay
/// agnostic about which algorithm answers the batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Brute,
    HeavyLight,
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Brute => "brute",
            Backend::HeavyLight => "heavylight",
        }
    }

    /// One bit per query, true = disjoint.
    pub fn disjointness(&self, sys: &SetSystem, batch: &QueryBatch) -> Vec<bool> {
        match self {
            Backend::Brute => brute_disjointness(sys, batch),
            Backend::HeavyLight => {
                let hl = HeavyLightStructure::build(sys);
                crate::par::map_indexed(batch.len(), |q| {
                    let (a, b) = batch.pairs()[q];
                    hl.query(sys, a, b).0
                })
            }
        }
    }

    /// Per-query intersection contents.
    pub fn intersections(&self, sys: &SetSystem, batch: &QueryBatch) -> Vec<Vec<usize>> {
        match self {
            Backend::Brute => brute_intersection(sys, batch),
            Backend::HeavyLight => {
                let hl = HeavyLightStructure::build(sys);
                crate::par::map_indexed(batch.len(), |q| {
                    let (a, b) = batch.pairs()[q];
                    if hl.query(sys, a, b).0 {
                        Vec::new()
                    } else {
                        sorted_intersection(&sys.family_a[a], &sys.family_b[b])
                    }
                })
            }
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Backend::Brute),
            "heavylight" => Ok(Backend::HeavyLight),
            other => Err(param(format!("unknown backend `{other}`"))),
        }
    }
}

/// Random system for tests and benches: `na`/`nb` sets with sizes in
/// `[0, max_size]`, plus `q` random query pairs.
pub fn gen_system(
    universe: usize,
    na: usize,
    nb: usize,
    max_size: usize,
    q: usize,
    rng: &mut impl Rng,
) -> Result<(SetSystem, QueryBatch)> {
    if universe == 0 || na == 0 || nb == 0 {
        return Err(param("gen_system needs a nonempty universe and families"));
    }
    let fam = |rng: &mut dyn rand::RngCore, count: usize| -> Vec<Vec<usize>> {
        (0..count)
            .map(|_| {
                let size = rng.random_range(0..=max_size.min(universe));
                (0..size).map(|_| rng.random_range(0..universe)).collect()
            })
            .collect()
    };
    let family_a = fam(rng, na);
    let family_b = fam(rng, nb);
    let sys = SetSystem::new(universe, family_a, family_b)?;
    let pairs = (0..q)
        .map(|_| (rng.random_range(0..na), rng.random_range(0..nb)))
        .collect();
    let batch = QueryBatch::new(pairs, &sys)?;
    Ok((sys, batch))
}

// ---------------------------------------------------------------------------
// Text format:
//   "setsys 1\n<universe> <|A|> <|B|> <q>\n" then one line per A set, per B
//   set ("size e1 e2 ..."), then q lines "ai bi".
// ---------------------------------------------------------------------------

pub fn write_setsys(sys: &SetSystem, batch: &QueryBatch) -> String {
    let mut out = String::new();
    out.push_str("setsys 1\n");
    out.push_str(&format!(
        "{} {} {} {}\n",
        sys.universe_size,
        sys.family_a.len(),
        sys.family_b.len(),
        batch.len()
    ));
    for fam in [&sys.family_a, &sys.family_b] {
        for set in fam {
            let mut line = set.len().to_string();
            for e in set {
                line.push(' ');
                line.push_str(&e.to_string());
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    for &(a, b) in batch.pairs() {
        out.push_str(&format!("{a} {b}\n"));
    }
    out
}

pub fn read_setsys(text: &str) -> Result<(SetSystem, QueryBatch)> {
    let mut tokens = text.split_whitespace();
    let magic = (tokens.next(), tokens.next());
    if magic != (Some("setsys"), Some("1")) {
        return Err(Error::Parse("expected header `setsys 1`".into()));
    }
    let mut num = |what: &str| -> Result<usize> {
        let t = tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?;
        t.parse()
            .map_err(|e| Error::Parse(format!("bad {what} `{t}`: {e}")))
    };
    let universe = num("universe_size")?;
    let na = num("|A|")?;
    let nb = num("|B|")?;
    let q = num("q")?;
    let read_family = |count: usize, num: &mut dyn FnMut(&str) -> Result<usize>| -> Result<Vec<Vec<usize>>> {
        (0..count)
            .map(|_| {
                let size = num("set size")?;
                (0..size).map(|_| num("element")).collect()
            })
            .collect()
    };
    let family_a = read_family(na, &mut num)?;
    let family_b = read_family(nb, &mut num)?;
    let mut pairs = Vec::with_capacity(q);
    for _ in 0..q {
        pairs.push((num("query a")?, num("query b")?));
    }
    if tokens.next().is_some() {
        return Err(Error::Parse("trailing tokens".into()));
    }
    let sys = SetSystem::new(universe, family_a, family_b)?;
    let batch = QueryBatch::new(pairs, &sys)?;
    Ok((sys, batch))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn tiny() -> (SetSystem, QueryBatch) {
        let sys = SetSystem::new(
            8,
            vec![vec![1, 2], vec![1, 2, 3], vec![]],
            vec![vec![3, 4], vec![1, 2], vec![5]],
        )
        .unwrap();
        let batch = QueryBatch::new(vec![(0, 0), (1, 0), (2, 2), (0, 1)], &sys).unwrap();
        (sys, batch)
    }

    #[test]
    fn brute_disjointness_basics() {
        let (sys, batch) = tiny();
        assert_eq!(brute_disjointness(&sys, &batch), vec![true, false, true, false]);
    }

    #[test]
    fn brute_intersection_basics() {
        let (sys, batch) = tiny();
        let inter = brute_intersection(&sys, &batch);
        assert_eq!(inter[0], Vec::<usize>::new());
        assert_eq!(inter[1], vec![3]);
        assert_eq!(inter[2], Vec::<usize>::new());
        assert_eq!(inter[3], vec![1, 2]);
    }

    #[test]
    fn identical_sets_intersect_fully() {
        let sys = SetSystem::new(4, vec![vec![1, 2]], vec![vec![1, 2]]).unwrap();
        let batch = QueryBatch::new(vec![(0, 0)], &sys).unwrap();
        assert_eq!(brute_intersection(&sys, &batch)[0], vec![1, 2]);
    }

    #[test]
    fn heavylight_no_heavy_sets_when_all_singletons() {
        let n = 16;
        let sys = SetSystem::new(
            n,
            (0..n).map(|i| vec![i]).collect(),
            (0..n).map(|i| vec![(i + 1) % n]).collect(),
        )
        .unwrap();
        let hl = HeavyLightStructure::build(&sys);
        assert_eq!(hl.heavy_count(), (0, 0));
        assert!(!hl.query(&sys, 0, 15).0); // both contain element 0... check:
        // A set 0 = {0}, B set 15 = {0}: intersecting.
        assert!(hl.query(&sys, 0, 0).0); // {0} vs {1}: disjoint
    }

    #[test]
    fn heavylight_single_giant_set() {
        let sys = SetSystem::new(32, vec![(0..32).collect()], vec![vec![31], vec![]]).unwrap();
        let hl = HeavyLightStructure::build(&sys);
        assert_eq!(hl.heavy_count(), (1, 0));
        assert!(!hl.query(&sys, 0, 0).0);
        assert!(hl.query(&sys, 0, 1).0);
    }

    #[test]
    fn heavylight_matches_brute_on_random_systems() {
        for seed in 0..5u64 {
            let mut r = rng::stream(seed, "hl", 0);
            let (sys, batch) = gen_system(64, 20, 20, 24, 1000, &mut r).unwrap();
            let expected = brute_disjointness(&sys, &batch);
            let hl = HeavyLightStructure::build(&sys);
            for (q, &(a, b)) in batch.pairs().iter().enumerate() {
                assert_eq!(hl.query(&sys, a, b).0, expected[q], "seed {seed} query {q}");
            }
        }
    }

    #[test]
    fn heavylight_work_envelopes() {
        let mut r = rng::stream(42, "hl-work", 0);
        let (sys, batch) = gen_system(256, 40, 40, 64, 2000, &mut r).unwrap();
        let n = sys.total_size() as f64;
        let hl = HeavyLightStructure::build(&sys);
        assert!(hl.preprocess_ops() as f64 <= 16.0 * n.powf(1.5));
        for &(a, b) in batch.pairs() {
            let (_, ops) = hl.query(&sys, a, b);
            assert!(ops as f64 <= 16.0 * n.sqrt());
        }
    }

    #[test]
    fn backend_parity() {
        let (sys, batch) = tiny();
        assert_eq!(
            Backend::Brute.disjointness(&sys, &batch),
            Backend::HeavyLight.disjointness(&sys, &batch)
        );
        assert_eq!(
            Backend::Brute.intersections(&sys, &batch),
            Backend::HeavyLight.intersections(&sys, &batch)
        );
    }

    #[test]
    fn setsys_text_round_trip() {
        let (sys, batch) = tiny();
        let text = write_setsys(&sys, &batch);
        let (sys2, batch2) = read_setsys(&text).unwrap();
        assert_eq!(sys, sys2);
        assert_eq!(batch, batch2);
        assert!(read_setsys("setsys 2\n").is_err());
    }
}
