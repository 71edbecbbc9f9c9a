//! Reduction from 3SUM to a family of Convolution-3SUM instances.
//!
//! A plan hashes the input into bounded buckets under `L` independent
//! multiply-shift functions and assigns each element a codeword from a
//! distance-verified binary code. The reduction then makes `8*T*L` calls to
//! a Convolution-3SUM solver, one per index `(i, alpha, beta, gamma)`:
//! `i` picks the hash function, `alpha` the almost-linearity offset being
//! probed, `beta` which codeword bit value plays the first-addend role, and
//! `gamma` a cyclic shift of the in-bucket order.
//!
//! Each built vector consists of `2m` blocks of length `7T`. Within block
//! `j` of the first half, elements of bucket `j` sit at offsets `T+k` or
//! `2T+k` depending on their codeword bit, and every block `j` (both halves)
//! carries bucket `(j - alpha) mod m` cyclically shifted by `gamma` at
//! offsets `3T..5T`. All other cells are holes. The layout guarantees that
//! a convolution witness in any vector projects to a genuine 3SUM witness
//! (holes absorb the `(a, a, 2a)` degeneracy) and that every genuine witness
//! is hit by some index, so the whole pipeline is Las Vegas.

use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::codes::{BinaryCode, DEFAULT_CODE_ATTEMPTS};
use crate::error::{param, Error, Result};
use crate::hashing::{bucketize, BucketTable, LoadThreshold, MultiShiftHash};
use crate::threesum::{ConvCell, ConvInstance, ThreeSumInstance, Witness3, WitnessConv};

/// Tunables for plan construction. The defaults follow the bucket-cap rule
/// `T = ceil(12 / epsilon)` with `epsilon = 1/8` and code length
/// `8 * max(1, ceil(log2 n))`.
#[derive(Debug, Clone)]
pub struct ConvConfig {
    pub epsilon: f64,
    /// Bucket cap; defaults to `ceil(12 / epsilon)`. Must be at least that.
    pub cap: Option<u64>,
    /// Codeword length; defaults to `8 * max(1, ceil(log2 n))`.
    pub code_len: Option<usize>,
    pub max_resamples: usize,
    pub code_attempts: usize,
}

impl Default for ConvConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0 / 8.0,
            cap: None,
            code_len: None,
            max_resamples: 16,
            code_attempts: DEFAULT_CODE_ATTEMPTS,
        }
    }
}

impl ConvConfig {
    fn min_cap(&self) -> u64 {
        (12.0 / self.epsilon).ceil() as u64
    }
}

/// Call index `(i, alpha, beta, gamma)` in `[L] x {-1,0} x {0,1} x [2T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EllIndex {
    pub hash: usize,
    /// Almost-linearity offset, -1 or 0.
    pub alpha: i8,
    pub beta: bool,
    pub gamma: u64,
}

impl EllIndex {
    /// Number of indices for a plan with `hash_count` functions and cap `t`.
    pub fn total(hash_count: usize, t: u64) -> usize {
        hash_count * 2 * 2 * 2 * t as usize
    }

    /// Enumeration order: hash, then alpha in (-1, 0), then beta, then gamma.
    pub fn from_flat(flat: usize, hash_count: usize, t: u64) -> Self {
        debug_assert!(flat < Self::total(hash_count, t));
        let two_t = 2 * t as usize;
        let gamma = (flat % two_t) as u64;
        let rest = flat / two_t;
        let beta = rest % 2 == 1;
        let rest = rest / 2;
        let alpha = if rest % 2 == 0 { -1 } else { 0 };
        let hash = rest / 2;
        Self {
            hash,
            alpha,
            beta,
            gamma,
        }
    }

    pub fn flat(&self, t: u64) -> usize {
        let aidx = if self.alpha == -1 { 0 } else { 1 };
        let bidx = self.beta as usize;
        ((self.hash * 2 + aidx) * 2 + bidx) * 2 * t as usize + self.gamma as usize
    }
}

/// A fully built reduction plan: hashes, truncated buckets, codewords, and
/// the per-hash element positions. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct ConvPlan {
    n: usize,
    m: u64,
    cap: u64,
    code: BinaryCode,
    hashes: Vec<MultiShiftHash>,
    tables: Vec<BucketTable>,
    /// Element -> codeword index (rank in sorted value order).
    rank: HashMap<u64, usize>,
    /// Per hash: element -> (bucket, position in bucket). Discarded elements
    /// are absent.
    positions: Vec<HashMap<u64, (u64, usize)>>,
}

impl ConvPlan {
    /// Builds a plan for a zero-free instance. If any element ends up bad
    /// (discarded by strictly more than `4L/T` of the hash functions), all
    /// hashes are resampled, up to `config.max_resamples` times.
    pub fn build(inst: &ThreeSumInstance, config: &ConvConfig, rng: &mut impl Rng) -> Result<Self> {
        if inst.contains(0) {
            return Err(param("plan requires a zero-free instance"));
        }
        let n = inst.len();
        if n == 0 {
            return Err(param("plan requires a nonempty instance"));
        }
        let cap = config.cap.unwrap_or_else(|| config.min_cap());
        if cap < config.min_cap() {
            return Err(param(format!(
                "cap {cap} below ceil(12/epsilon) = {}",
                config.min_cap()
            )));
        }
        let m = (n as u64).next_power_of_two();
        if m >= inst.universe() {
            return Err(param(format!(
                "bucket range m={m} must stay below the universe {}",
                inst.universe()
            )));
        }
        let code_len = config
            .code_len
            .unwrap_or_else(|| 8 * ((n as u64).next_power_of_two().trailing_zeros() as usize).max(1));
        let code = BinaryCode::build(n, code_len, config.epsilon, rng, config.code_attempts)?;
        let hash_count = code.len_bits();

        let rank: HashMap<u64, usize> = inst
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();

        let attempts = config.max_resamples + 1;
        for _ in 0..attempts {
            let mut hashes = Vec::with_capacity(hash_count);
            let mut tables = Vec::with_capacity(hash_count);
            let mut positions = Vec::with_capacity(hash_count);
            for _ in 0..hash_count {
                let h = MultiShiftHash::sample(rng, inst.universe(), m)?;
                let table = bucketize(&h, inst.values(), LoadThreshold::absolute(cap))?;
                let mut pos = HashMap::with_capacity(n);
                for (j, bucket) in table.buckets().iter().enumerate() {
                    for (k, &x) in bucket.iter().enumerate() {
                        pos.insert(x, (j as u64, k));
                    }
                }
                hashes.push(h);
                tables.push(table);
                positions.push(pos);
            }
            // An element is bad when discarded by more than 4L/T hashes,
            // compared as count * T > 4L to stay in integers.
            let bad = inst.values().iter().any(|x| {
                let discards = positions.iter().filter(|p| !p.contains_key(x)).count() as u64;
                discards * cap > 4 * hash_count as u64
            });
            if !bad {
                return Ok(Self {
                    n,
                    m,
                    cap,
                    code,
                    hashes,
                    tables,
                    rank,
                    positions,
                });
            }
        }
        Err(Error::Construction {
            what: "convolution plan without bad elements".into(),
            attempts,
            best: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bucket range `m`, the least power of two >= n; vectors have `2m` blocks.
    pub fn block_count_half(&self) -> u64 {
        self.m
    }

    /// Bucket cap T.
    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn hash_count(&self) -> usize {
        self.hashes.len()
    }

    pub fn code(&self) -> &BinaryCode {
        &self.code
    }

    pub fn tables(&self) -> &[BucketTable] {
        &self.tables
    }

    /// Number of solver calls the full pipeline makes: `8 * T * L`.
    pub fn call_count(&self) -> usize {
        EllIndex::total(self.hash_count(), self.cap)
    }

    /// Length of every built vector: `14 * T * m`.
    pub fn vector_len(&self) -> usize {
        (14 * self.cap * self.m) as usize
    }

    /// Whether hash `i` kept element `x` in its (truncated) bucket.
    pub fn survives(&self, i: usize, x: u64) -> bool {
        self.positions[i].contains_key(&x)
    }

    /// Codeword bit `i` of element `x`.
    pub fn code_bit(&self, i: usize, x: u64) -> bool {
        self.code.bit(self.rank[&x], i)
    }

    /// Builds the convolution vector for one call index.
    pub fn build_vector(&self, ell: EllIndex) -> ConvInstance {
        let t = self.cap;
        let m = self.m;
        let table = &self.tables[ell.hash];
        let block = 7 * t;
        let mut cells = vec![ConvCell::Hole; self.vector_len()];
        let alpha_off: u64 = if ell.alpha == -1 { 1 } else { 0 };
        for j in 0..2 * m {
            let base = (j * block) as usize;
            if j < m {
                for (k, &x) in table.bucket(j).iter().enumerate() {
                    let bit = self.code_bit(ell.hash, x);
                    let off = if bit == ell.beta { t } else { 2 * t };
                    cells[base + (off as usize) + k] = ConvCell::Value(x);
                }
            }
            let src = (j + alpha_off) % m;
            for (k, &x) in table.bucket(src).iter().enumerate() {
                let off = 3 * t + ((k as u64 + ell.gamma) % (2 * t));
                cells[base + off as usize] = ConvCell::Value(x);
            }
        }
        ConvInstance::new(cells)
    }

    /// For a genuine witness, locates a call index that is guaranteed to
    /// surface it, together with the three predicted vector positions
    /// (addend, addend, sum). Returns `None` only if no hash index both
    /// keeps all three elements and separates the addends' codewords, which
    /// the no-bad-elements guarantee rules out.
    pub fn predict_ell(&self, w: &Witness3) -> Option<(EllIndex, [usize; 3])> {
        let (a, b, c) = (w.x, w.y, w.z);
        let i = (0..self.hash_count()).find(|&i| {
            self.survives(i, a)
                && self.survives(i, b)
                && self.survives(i, c)
                && self.code_bit(i, a) != self.code_bit(i, b)
        })?;
        let t = self.cap;
        let m = self.m;
        let (ja, ka) = self.positions[i][&a];
        let (jb, kb) = self.positions[i][&b];
        let (jc, kc) = self.positions[i][&c];
        // Almost linearity of multiply-shift: h(a)+h(b)-h(a+b) mod m is 0 or -1.
        let d = (ja + jb + m - jc) % m;
        let alpha: i8 = if d == 0 {
            0
        } else if d == m - 1 {
            -1
        } else {
            return None;
        };
        let beta = self.code_bit(i, a);
        let gamma = ((ka + kb) as u64 + 2 * t - kc as u64) % (2 * t);
        let block = (7 * t) as usize;
        let pa = ja as usize * block + t as usize + ka;
        let pb = jb as usize * block + 2 * t as usize + kb;
        let pc = (ja + jb) as usize * block
            + 3 * t as usize
            + ((kc as u64 + gamma) % (2 * t)) as usize;
        debug_assert_eq!(pa + pb, pc);
        Some((
            EllIndex {
                hash: i,
                alpha,
                beta,
                gamma,
            },
            [pa, pb, pc],
        ))
    }

    /// Projects a convolution witness on `vec = build_vector(ell)` back to a
    /// 3SUM witness and validates it against `inst`.
    pub fn map_witness(
        &self,
        inst: &ThreeSumInstance,
        wc: WitnessConv,
        vec: &ConvInstance,
    ) -> Result<Witness3> {
        let get = |p: usize| -> Result<u64> {
            vec.cell(p)
                .value()
                .ok_or_else(|| Error::Invariant(format!("witness position {p} is a hole")))
        };
        let x = get(wc.i)?;
        let y = get(wc.j)?;
        let z = get(wc.i + wc.j)?;
        Witness3::checked(x, y, z, inst)
    }
}

/// Result of the full pipeline, carrying the call count actually spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvRun {
    pub witness: Option<Witness3>,
    pub calls_made: usize,
    pub total_calls: usize,
}

/// Decides 3SUM through Convolution-3SUM calls. Zero witnesses are reported
/// up front, the zero-free remainder is planned, and the solver is invoked
/// on every call index (in parallel, first hit wins) until a witness maps
/// back or the index space is exhausted. Never returns a wrong answer.
pub fn solve_3sum_via_conv<F>(
    inst: &ThreeSumInstance,
    solver: F,
    config: &ConvConfig,
    rng: &mut impl Rng,
) -> Result<ConvRun>
where
    F: Fn(&ConvInstance) -> Option<WitnessConv> + Sync,
{
    if let Some(&w) = crate::threesum::zero_witnesses(inst).first() {
        return Ok(ConvRun {
            witness: Some(w),
            calls_made: 0,
            total_calls: 0,
        });
    }
    let stripped = inst.without_zero();
    if stripped.len() < 3 {
        return Ok(ConvRun {
            witness: None,
            calls_made: 0,
            total_calls: 0,
        });
    }
    let plan = ConvPlan::build(&stripped, config, rng)?;
    let total = plan.call_count();
    let t = plan.cap();
    let hits = std::sync::atomic::AtomicUsize::new(0);
    let found = crate::par::find_map_first(total, |flat| {
        hits.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let ell = EllIndex::from_flat(flat, plan.hash_count(), t);
        let vec = plan.build_vector(ell);
        let wc = solver(&vec)?;
        Some(plan.map_witness(&stripped, wc, &vec))
    });
    let calls_made = hits.load(std::sync::atomic::Ordering::Relaxed);
    match found {
        Some(res) => Ok(ConvRun {
            witness: Some(res?),
            calls_made,
            total_calls: total,
        }),
        None => Ok(ConvRun {
            witness: None,
            calls_made,
            total_calls: total,
        }),
    }
}

/// Samples `count` distinct call indices of a plan, for spot checks.
pub fn sample_ells(plan: &ConvPlan, count: usize, rng: &mut impl Rng) -> Vec<EllIndex> {
    let total = plan.call_count();
    let mut chosen = HashSet::new();
    let take = count.min(total);
    while chosen.len() < take {
        chosen.insert(rng.random_range(0..total));
    }
    let mut flats: Vec<usize> = chosen.into_iter().collect();
    flats.sort_unstable();
    flats
        .into_iter()
        .map(|f| EllIndex::from_flat(f, plan.hash_count(), plan.cap()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::threesum::{gen_instance, solve_3sum_bruteforce, solve_conv_bruteforce, Plant};

    fn small_plan(seed: u64, n: usize) -> (ThreeSumInstance, ConvPlan) {
        let mut r = rng::stream(seed, "conv-test", 0);
        let inst = gen_instance(n, 1 << 16, Plant::Witness, &mut r)
            .unwrap()
            .without_zero();
        let plan = ConvPlan::build(&inst, &ConvConfig::default(), &mut r).unwrap();
        (inst, plan)
    }

    #[test]
    fn flat_index_round_trip() {
        let (hash_count, t) = (5, 96);
        for flat in [0, 1, 191, 192, 5 * 8 * 96 - 1] {
            let ell = EllIndex::from_flat(flat, hash_count, t);
            assert_eq!(ell.flat(t), flat);
        }
        assert_eq!(EllIndex::total(hash_count, t), 8 * 96 * 5);
    }

    #[test]
    fn plan_succeeds_on_tiny_instances() {
        let mut r = rng::stream(1, "conv-test", 1);
        let inst = ThreeSumInstance::new(vec![5], 1 << 8).unwrap();
        let plan = ConvPlan::build(&inst, &ConvConfig::default(), &mut r).unwrap();
        assert_eq!(plan.block_count_half(), 1);
        assert!(plan.survives(0, 5));

        // n <= T: loads can never exceed the cap, so nothing is discarded.
        let inst = gen_instance(32, 1 << 12, Plant::None, &mut r).unwrap().without_zero();
        let plan = ConvPlan::build(&inst, &ConvConfig::default(), &mut r).unwrap();
        for i in 0..plan.hash_count() {
            for &x in inst.values() {
                assert!(plan.survives(i, x));
            }
        }
    }

    #[test]
    fn plan_never_fails_across_seeds() {
        for seed in 0..100u64 {
            let mut r = rng::stream(seed, "conv-plan", 0);
            let inst = gen_instance(64, 1 << 16, Plant::None, &mut r)
                .unwrap()
                .without_zero();
            assert!(
                ConvPlan::build(&inst, &ConvConfig::default(), &mut r).is_ok(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn vector_layout_holes() {
        let (_, plan) = small_plan(3, 12);
        let t = plan.cap() as usize;
        let m = plan.block_count_half() as usize;
        let ell = EllIndex {
            hash: 0,
            alpha: -1,
            beta: true,
            gamma: 7,
        };
        let vec = plan.build_vector(ell);
        assert_eq!(vec.len(), 14 * t * m);
        for j in 0..2 * m {
            let base = j * 7 * t;
            // Offsets [0,T) and [5T,7T) are always holes.
            for off in (0..t).chain(5 * t..7 * t) {
                assert_eq!(vec.cell(base + off), ConvCell::Hole, "block {j} offset {off}");
            }
            // Second-half blocks have holes at [T,3T).
            if j >= m {
                for off in t..3 * t {
                    assert_eq!(vec.cell(base + off), ConvCell::Hole);
                }
            }
        }
    }

    #[test]
    fn vector_occurrence_counts() {
        let (inst, plan) = small_plan(4, 10);
        for flat in [0usize, 33, 800] {
            let ell = EllIndex::from_flat(flat, plan.hash_count(), plan.cap());
            let vec = plan.build_vector(ell);
            let mut occurrences: HashMap<u64, usize> = HashMap::new();
            for p in vec.filled_positions() {
                *occurrences.entry(vec.cell(p).value().unwrap()).or_default() += 1;
            }
            for &x in inst.values() {
                if plan.survives(ell.hash, x) {
                    assert_eq!(occurrences.get(&x), Some(&3), "element {x}");
                } else {
                    assert!(!occurrences.contains_key(&x));
                }
            }
        }
    }

    #[test]
    fn predicted_ell_holds_witness_at_positions() {
        for seed in 0..20u64 {
            let mut r = rng::stream(seed, "conv-predict", 0);
            let inst = gen_instance(16, 1 << 14, Plant::Witness, &mut r)
                .unwrap()
                .without_zero();
            let Some(w) = solve_3sum_bruteforce(&inst) else {
                continue;
            };
            let plan = ConvPlan::build(&inst, &ConvConfig::default(), &mut r).unwrap();
            let (ell, [pa, pb, pc]) = plan.predict_ell(&w).expect("prediction must exist");
            assert_eq!(pa + pb, pc);
            let vec = plan.build_vector(ell);
            assert_eq!(vec.cell(pa), ConvCell::Value(w.x));
            assert_eq!(vec.cell(pb), ConvCell::Value(w.y));
            assert_eq!(vec.cell(pc), ConvCell::Value(w.z));
            // And the round trip through the witness mapper agrees.
            let wc = WitnessConv::checked(pa, pb, &vec).unwrap();
            let back = plan.map_witness(&inst, wc, &vec).unwrap();
            assert_eq!(back.z, w.z);
        }
    }

    #[test]
    fn sampled_vectors_never_produce_false_positives() {
        for seed in 0..10u64 {
            let mut r = rng::stream(seed, "conv-fp", 0);
            let n = 8 + (seed as usize % 24);
            let plant = if seed % 2 == 0 { Plant::Witness } else { Plant::None };
            let inst = gen_instance(n, 1 << 14, plant, &mut r).unwrap().without_zero();
            if inst.is_empty() {
                continue;
            }
            let plan = ConvPlan::build(&inst, &ConvConfig::default(), &mut r).unwrap();
            for ell in sample_ells(&plan, 40, &mut r) {
                let vec = plan.build_vector(ell);
                if let Some(wc) = solve_conv_bruteforce(&vec) {
                    let w = plan.map_witness(&inst, wc, &vec).unwrap();
                    assert_eq!(w.x + w.y, w.z);
                    assert_ne!(w.x, w.y);
                }
            }
        }
    }

    #[test]
    fn end_to_end_agrees_with_brute_force() {
        for seed in 0..6u64 {
            let mut r = rng::stream(seed, "conv-e2e", 0);
            let plant = if seed % 2 == 0 { Plant::Witness } else { Plant::None };
            let inst = gen_instance(12, 1 << 12, plant, &mut r).unwrap();
            let run = solve_3sum_via_conv(&inst, solve_conv_bruteforce, &ConvConfig::default(), &mut r)
                .unwrap();
            let expected = solve_3sum_bruteforce(&inst);
            assert_eq!(run.witness.is_some(), expected.is_some(), "seed {seed}");
            if let Some(w) = run.witness {
                assert_eq!(w.x + w.y, w.z);
            }
        }
    }

    #[test]
    fn unplanted_run_spends_exactly_8tl_calls() {
        let mut r = rng::stream(99, "conv-calls", 0);
        let inst = ThreeSumInstance::new(vec![64, 65, 67, 71, 96, 101], 1 << 10).unwrap();
        assert!(solve_3sum_bruteforce(&inst).is_none());
        let run = solve_3sum_via_conv(&inst, solve_conv_bruteforce, &ConvConfig::default(), &mut r)
            .unwrap();
        assert!(run.witness.is_none());
        assert_eq!(run.total_calls, 8 * 96 * 24); // T=96, L=8*ceil(log2 6)=24
        assert_eq!(run.calls_made, run.total_calls);
    }

    /// Lemma-style survival count: with no bad elements, every triple keeps
    /// strictly more than (1 - 12/T) L hash functions discarding none of it.
    #[test]
    fn triple_survival_bound() {
        let (inst, plan) = small_plan(12, 48);
        let l = plan.hash_count() as f64;
        let bound = (1.0 - 12.0 / plan.cap() as f64) * l;
        let vals = inst.values();
        for ia in 0..vals.len() {
            for ib in ia..vals.len() {
                for ic in ib..vals.len() {
                    let good = (0..plan.hash_count())
                        .filter(|&i| {
                            plan.survives(i, vals[ia])
                                && plan.survives(i, vals[ib])
                                && plan.survives(i, vals[ic])
                        })
                        .count() as f64;
                    assert!(good > bound);
                }
            }
        }
    }
}
