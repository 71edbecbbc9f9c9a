//! Reductions from 3SUM to offline SetDisjointness and SetIntersection.
//!
//! Working in the subtraction form `p - q = z`, the input is bucketed under
//! a range-`R` hash `h1`; a second hash `h2` with range `Q` (a power of four,
//! so `sqrt(Q)` is integral) maps each bucket to `2*sqrt(Q)` shifted sets
//! over the universe `[Q]`:
//!
//! * up-sets   `{ (h2(x) + j*sqrt(Q)) mod Q }` for `j in [sqrt(Q)]`, and
//! * down-sets `{ (h2(x) - j) mod Q }`.
//!
//! For a target difference `z` and a bucket `i` of the would-be minuend, the
//! subtrahend bucket and the shift pair are determined by `h1(z)` and
//! `h2(z)` up to the almost-linearity offsets, so each `(z, i)` costs at
//! most four set queries per `h2` round. A disjoint answer rules the pair
//! out; a non-disjoint answer across all rounds makes `(z, i)` a candidate
//! whose bucket is then scanned directly. Heavy elements under `h1` are
//! handled by direct scans before any of this. Both pipelines are Las Vegas.
//!
//! The disjointness variant uses `Q ~ (5n/R)^2` and `O(log n)` rounds; the
//! reporting variant uses `Q ~ n^(1+delta)/R` and a single round, and
//! reconstructs candidate pairs from each reported universe element.

use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::error::{param, Result};
use crate::hashing::{bucketize, BucketTable, HashEval, LoadThreshold, PairwiseAffineHash};
use crate::setsystem::{Backend, QueryBatch, SetSystem};
use crate::threesum::{zero_witnesses, ThreeSumInstance, Witness3};

/// Which theorem shape a plan was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SdShape {
    /// Disjointness: `Q = pow4(ceil((5n/R)^2))`, `ceil(2 log2 n)` rounds.
    Disjointness,
    /// Intersection reporting: `Q = pow4(ceil(n^(1+delta)/R))`, one round.
    Intersection { delta: f64 },
}

/// Everything needed to interpret the set system and its query batch:
/// hashes, buckets, heavy elements, and the query indexing scheme.
#[derive(Debug, Clone)]
pub struct SdPlan {
    shape: SdShape,
    gamma: f64,
    /// Count of zero-free input elements (heavy ones included).
    n: usize,
    r_buckets: u64,
    q_universe: u64,
    sqrt_q: u64,
    h1: PairwiseAffineHash,
    rounds: Vec<PairwiseAffineHash>,
    table: BucketTable,
    /// Survivors (non-heavy, zero-free), sorted; the `z` enumeration order.
    survivors: Vec<u64>,
}

/// Decoded coordinates of one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryKey {
    /// Index into the survivor list (the difference element `z`).
    pub z_idx: usize,
    /// Minuend bucket.
    pub i: u64,
    /// h1 almost-linearity offset bit.
    pub e1: u8,
    /// Round (h2 choice).
    pub round: usize,
    /// h2 almost-linearity offset bit.
    pub e2: u8,
}

fn next_pow4(x: u64) -> u64 {
    let mut q = 1u64;
    while q < x {
        q *= 4;
    }
    q
}

fn pow2_at_least(x: f64) -> u64 {
    let e = x.ceil().max(0.0) as u32;
    1u64 << e
}

impl SdPlan {
    fn build(
        inst: &ThreeSumInstance,
        gamma: f64,
        shape: SdShape,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if inst.contains(0) {
            return Err(param("reduction requires a zero-free instance"));
        }
        match shape {
            SdShape::Disjointness => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(param(format!("gamma={gamma} must be in (0,1)")));
                }
            }
            SdShape::Intersection { delta } => {
                if !(0.0..1.0).contains(&gamma) {
                    return Err(param(format!("gamma={gamma} must be in [0,1)")));
                }
                if delta <= 0.0 {
                    return Err(param(format!("delta={delta} must be positive")));
                }
            }
        }
        let n = inst.len();
        if n == 0 {
            return Err(param("reduction requires a nonempty instance"));
        }
        let u = inst.universe();
        let log_n = (n as f64).log2();
        let r_buckets = pow2_at_least(gamma * log_n);
        let q_universe = match shape {
            SdShape::Disjointness => {
                let raw = (25 * (n as u128) * (n as u128))
                    .div_ceil((r_buckets as u128) * (r_buckets as u128));
                next_pow4(raw as u64)
            }
            SdShape::Intersection { delta } => {
                let raw = ((n as f64).powf(1.0 + delta) / r_buckets as f64).ceil() as u64;
                next_pow4(raw.max(1))
            }
        };
        let sqrt_q = 1u64 << (q_universe.trailing_zeros() / 2);
        debug_assert_eq!(sqrt_q * sqrt_q, q_universe);

        let h1 =
            PairwiseAffineHash::sample(rng, u, r_buckets, PairwiseAffineHash::min_modulus(u, r_buckets))?;
        let table = bucketize(&h1, inst.values(), LoadThreshold::three_n_over_m(n, r_buckets))?;
        let mut survivors: Vec<u64> = table.surviving().collect();
        survivors.sort_unstable();

        let round_count = match shape {
            SdShape::Disjointness => ((2.0 * log_n).ceil() as usize).max(1),
            SdShape::Intersection { .. } => 1,
        };
        let rounds = (0..round_count)
            .map(|_| {
                PairwiseAffineHash::sample(
                    rng,
                    u,
                    q_universe,
                    PairwiseAffineHash::min_modulus(u, q_universe),
                )
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            shape,
            gamma,
            n,
            r_buckets,
            q_universe,
            sqrt_q,
            h1,
            rounds,
            table,
            survivors,
        })
    }

    pub fn shape(&self) -> SdShape {
        self.shape
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bucket_range(&self) -> u64 {
        self.r_buckets
    }

    pub fn query_universe(&self) -> u64 {
        self.q_universe
    }

    pub fn sqrt_q(&self) -> u64 {
        self.sqrt_q
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn heavy_elements(&self) -> &[u64] {
        self.table.heavy_elements()
    }

    pub fn survivors(&self) -> &[u64] {
        &self.survivors
    }

    pub fn bucket(&self, i: u64) -> &[u64] {
        self.table.bucket(i)
    }

    /// Family index of the up-set (and down-set) for (round, bucket, shift).
    pub fn set_id(&self, round: usize, bucket: u64, shift: u64) -> usize {
        ((round as u64 * self.r_buckets + bucket) * self.sqrt_q + shift) as usize
    }

    /// Exact size of each family: `R * sqrt(Q) * rounds`.
    pub fn family_size(&self) -> usize {
        (self.r_buckets * self.sqrt_q) as usize * self.rounds.len()
    }

    fn h1_of(&self, x: u64) -> u64 {
        self.h1.eval(x).expect("plan values are in the hash domain")
    }

    fn h2_of(&self, round: usize, x: u64) -> u64 {
        self.rounds[round]
            .eval(x)
            .expect("plan values are in the hash domain")
    }

    /// Subtrahend bucket probed by `(z, i, e1)`: with `p - q = z`, the
    /// difference form gives `h1(q) = h1(p) - D1(z) - e1 (mod R)`, so
    /// `j = (i - D1(z) - e1) mod R`.
    pub fn partner_bucket(&self, z: u64, i: u64, e1: u8) -> u64 {
        let r = self.r_buckets;
        (i + 2 * r - self.h1.difference_offset(z) - e1 as u64) % r
    }

    /// Up/down shift pair probed by `(z, round, e2)`. The up-set of the
    /// minuend bucket shifted by `js*sqrt(Q)` meets the down-set of the
    /// subtrahend bucket shifted by `ks` exactly on pairs whose h2 values
    /// differ by `D2(z) + e2 (mod Q)`.
    pub fn shift_pair(&self, z: u64, round: usize, e2: u8) -> (u64, u64) {
        let q = self.q_universe;
        let d = (self.rounds[round].difference_offset(z) + e2 as u64) % q;
        let s = (q - d) % q;
        (s / self.sqrt_q, s % self.sqrt_q)
    }

    /// Number of query-batch entries: `#survivors * R * 4 * rounds`.
    pub fn query_count(&self) -> usize {
        self.survivors.len() * self.r_buckets as usize * 4 * self.rounds.len()
    }

    pub fn key_to_flat(&self, key: QueryKey) -> usize {
        let rounds = self.rounds.len();
        (((key.z_idx * self.r_buckets as usize + key.i as usize) * 2 + key.e1 as usize) * rounds
            + key.round)
            * 2
            + key.e2 as usize
    }

    pub fn flat_to_key(&self, flat: usize) -> QueryKey {
        let rounds = self.rounds.len();
        let e2 = (flat % 2) as u8;
        let rest = flat / 2;
        let round = rest % rounds;
        let rest = rest / rounds;
        let e1 = (rest % 2) as u8;
        let rest = rest / 2;
        let i = (rest % self.r_buckets as usize) as u64;
        let z_idx = rest / self.r_buckets as usize;
        QueryKey {
            z_idx,
            i,
            e1,
            round,
            e2,
        }
    }

    /// Builds the set system (all up-sets as family A, all down-sets as
    /// family B over universe `[Q]`) and the full query batch.
    pub fn build_system(&self) -> Result<(SetSystem, QueryBatch)> {
        let q = self.q_universe;
        let sq = self.sqrt_q;
        let mut family_a = Vec::with_capacity(self.family_size());
        let mut family_b = Vec::with_capacity(self.family_size());
        for round in 0..self.rounds.len() {
            for bucket in 0..self.r_buckets {
                let hashes: Vec<u64> = self
                    .table
                    .bucket(bucket)
                    .iter()
                    .map(|&x| self.h2_of(round, x))
                    .collect();
                for j in 0..sq {
                    family_a.push(
                        hashes
                            .iter()
                            .map(|&h| ((h + j * sq) % q) as usize)
                            .collect::<Vec<_>>(),
                    );
                    family_b.push(
                        hashes
                            .iter()
                            .map(|&h| ((h + q - j) % q) as usize)
                            .collect::<Vec<_>>(),
                    );
                }
            }
        }
        let sys = SetSystem::new(q as usize, family_a, family_b)?;

        let mut pairs = Vec::with_capacity(self.query_count());
        for (z_idx, &z) in self.survivors.iter().enumerate() {
            for i in 0..self.r_buckets {
                for e1 in 0..2u8 {
                    let j = self.partner_bucket(z, i, e1);
                    for round in 0..self.rounds.len() {
                        for e2 in 0..2u8 {
                            let (js, ks) = self.shift_pair(z, round, e2);
                            let a = self.set_id(round, i, js);
                            let b = self.set_id(round, j, ks);
                            debug_assert_eq!(
                                pairs.len(),
                                self.key_to_flat(QueryKey {
                                    z_idx,
                                    i,
                                    e1,
                                    round,
                                    e2
                                })
                            );
                            pairs.push((a, b));
                        }
                    }
                }
            }
        }
        let batch = QueryBatch::new(pairs, &sys)?;
        Ok((sys, batch))
    }

    /// Whether the candidate `(z, i, e1)` is backed by a genuine subtraction
    /// pair `p - q = z` with `p` in bucket `i` and `q` in the partner bucket.
    /// Used by the false-positive accounting; the pipeline itself never needs
    /// ground truth.
    pub fn candidate_ground_truth(&self, z: u64, i: u64, e1: u8) -> bool {
        let j = self.partner_bucket(z, i, e1);
        let partner: HashSet<u64> = self.table.bucket(j).iter().copied().collect();
        self.table
            .bucket(i)
            .iter()
            .any(|&p| p >= z && partner.contains(&(p - z)))
    }

    /// One-line structural summary for debugging and logs.
    pub fn summary(&self) -> String {
        format!(
            "n={} survivors={} heavy={} R={} Q={} sqrtQ={} rounds={} families={}x2 queries={}",
            self.n,
            self.survivors.len(),
            self.heavy_elements().len(),
            self.r_buckets,
            self.q_universe,
            self.sqrt_q,
            self.rounds.len(),
            self.family_size(),
            self.query_count(),
        )
    }
}

/// Builds the disjointness-shaped offline instance.
pub fn build_sd_instance(
    inst: &ThreeSumInstance,
    gamma: f64,
    rng: &mut impl Rng,
) -> Result<(SetSystem, QueryBatch, SdPlan)> {
    let plan = SdPlan::build(inst, gamma, SdShape::Disjointness, rng)?;
    let (sys, batch) = plan.build_system()?;
    Ok((sys, batch, plan))
}

/// Builds the intersection-reporting-shaped offline instance.
pub fn build_si_instance(
    inst: &ThreeSumInstance,
    gamma: f64,
    delta: f64,
    rng: &mut impl Rng,
) -> Result<(SetSystem, QueryBatch, SdPlan)> {
    let plan = SdPlan::build(inst, gamma, SdShape::Intersection { delta }, rng)?;
    let (sys, batch) = plan.build_system()?;
    Ok((sys, batch, plan))
}

/// Scans bucket `i` for a witness with difference `z`: for each element `p`
/// of the bucket, probes `p - z` and `p + z` against the membership set
/// (both subtraction-form orders), validating in constant time per probe.
pub fn verify_candidate(inst: &ThreeSumInstance, plan: &SdPlan, z: u64, i: u64) -> Option<Witness3> {
    let set = inst.value_set();
    verify_candidate_with(&set, plan, z, i)
}

fn verify_candidate_with(
    members: &HashSet<u64>,
    plan: &SdPlan,
    z: u64,
    i: u64,
) -> Option<Witness3> {
    for &p in plan.bucket(i) {
        // p - q = z with q = p - z: sum form z + q = p, distinct unless q = z.
        if p > z {
            let q = p - z;
            if q != z && members.contains(&q) {
                return Some(Witness3 { x: z, y: q, z: p });
            }
        }
        // q - p = z with q = p + z: sum form p + z = q, distinct unless p = z.
        if p != z {
            let q = p + z;
            if members.contains(&q) {
                return Some(Witness3 { x: p, y: z, z: q });
            }
        }
    }
    None
}

/// Direct O(n)-per-element handling of the heavy values: probes every
/// witness role of each heavy `h` against the full membership set.
fn scan_heavy(values: &[u64], members: &HashSet<u64>, heavy: &[u64]) -> Option<Witness3> {
    for &h in heavy {
        for &a in values {
            if h > a {
                let d = h - a;
                if d != a && members.contains(&d) {
                    return Some(Witness3 {
                        x: a.min(d),
                        y: a.max(d),
                        z: h,
                    });
                }
            }
            if h != a {
                let s = h + a;
                if members.contains(&s) {
                    return Some(Witness3 {
                        x: h.min(a),
                        y: h.max(a),
                        z: s,
                    });
                }
            }
        }
    }
    None
}

/// Outcome of a set-query pipeline, with the batch statistics the
/// structural checks assert on.
#[derive(Debug, Clone)]
pub struct SdRun {
    pub witness: Option<Witness3>,
    pub plan_summary: String,
    pub queries: usize,
    pub candidates_verified: usize,
}

enum Preamble {
    Proceed(ThreeSumInstance),
    Done(Option<Witness3>),
}

fn common_preamble(inst: &ThreeSumInstance) -> Preamble {
    if let Some(&w) = zero_witnesses(inst).first() {
        return Preamble::Done(Some(w));
    }
    let stripped = inst.without_zero();
    if stripped.len() < 3 {
        return Preamble::Done(None);
    }
    Preamble::Proceed(stripped)
}

fn degenerate_run(w: Option<Witness3>) -> SdRun {
    SdRun {
        witness: w,
        plan_summary: "degenerate".into(),
        queries: 0,
        candidates_verified: 0,
    }
}

/// Decides 3SUM through an offline SetDisjointness backend.
pub fn solve_3sum_via_sd(
    inst: &ThreeSumInstance,
    gamma: f64,
    backend: Backend,
    rng: &mut impl Rng,
) -> Result<SdRun> {
    let stripped = match common_preamble(inst) {
        Preamble::Proceed(s) => s,
        Preamble::Done(w) => return Ok(degenerate_run(w)),
    };
    let members = stripped.value_set();
    let plan = SdPlan::build(&stripped, gamma, SdShape::Disjointness, rng)?;
    if let Some(w) = scan_heavy(stripped.values(), &members, plan.heavy_elements()) {
        return Ok(SdRun {
            witness: Some(w),
            plan_summary: plan.summary(),
            queries: 0,
            candidates_verified: 0,
        });
    }
    let (sys, batch) = plan.build_system()?;
    let bits = backend.disjointness(&sys, &batch);

    // A candidate (z, i, e1) survives when every round reports an
    // intersection under at least one h2 offset.
    let rounds = plan.round_count();
    let candidate_count = plan.survivors().len() * plan.bucket_range() as usize * 2;
    let verified = std::sync::atomic::AtomicUsize::new(0);
    let witness = crate::par::find_map_first(candidate_count, |c| {
        let base = c * rounds * 2;
        let all_rounds_hit = (0..rounds).all(|r| !bits[base + 2 * r] || !bits[base + 2 * r + 1]);
        if !all_rounds_hit {
            return None;
        }
        verified.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let key = plan.flat_to_key(base);
        let z = plan.survivors()[key.z_idx];
        verify_candidate_with(&members, &plan, z, key.i)
    });
    Ok(SdRun {
        witness,
        plan_summary: plan.summary(),
        queries: batch.len(),
        candidates_verified: verified.load(std::sync::atomic::Ordering::Relaxed),
    })
}

/// Decides 3SUM through an offline SetIntersection backend: every reported
/// universe element is mapped back to the candidate pairs hashing to it,
/// each validated in constant time.
pub fn solve_3sum_via_si(
    inst: &ThreeSumInstance,
    gamma: f64,
    delta: f64,
    backend: Backend,
    rng: &mut impl Rng,
) -> Result<SdRun> {
    let stripped = match common_preamble(inst) {
        Preamble::Proceed(s) => s,
        Preamble::Done(w) => return Ok(degenerate_run(w)),
    };
    let members = stripped.value_set();
    let plan = SdPlan::build(&stripped, gamma, SdShape::Intersection { delta }, rng)?;
    if let Some(w) = scan_heavy(stripped.values(), &members, plan.heavy_elements()) {
        return Ok(SdRun {
            witness: Some(w),
            plan_summary: plan.summary(),
            queries: 0,
            candidates_verified: 0,
        });
    }
    let (sys, batch) = plan.build_system()?;
    let intersections = backend.intersections(&sys, &batch);

    // Per bucket: h2 value -> elements, to reconstruct candidate pairs.
    let buckets_by_hash: Vec<HashMap<u64, Vec<u64>>> = (0..plan.bucket_range())
        .map(|i| {
            let mut map: HashMap<u64, Vec<u64>> = HashMap::new();
            for &x in plan.bucket(i) {
                map.entry(plan.h2_of(0, x)).or_default().push(x);
            }
            map
        })
        .collect();

    let q = plan.query_universe();
    let sq = plan.sqrt_q();
    let total_reported: usize = intersections.iter().map(Vec::len).sum();
    let witness = crate::par::find_map_first(batch.len(), |flat| {
        let reported = &intersections[flat];
        if reported.is_empty() {
            return None;
        }
        let key = plan.flat_to_key(flat);
        let z = plan.survivors()[key.z_idx];
        let j = plan.partner_bucket(z, key.i, key.e1);
        let (js, ks) = plan.shift_pair(z, key.round, key.e2);
        for &v in reported {
            let v = v as u64;
            let raw_p = (v + q - (js * sq) % q) % q;
            let raw_q = (v + ks) % q;
            let (Some(ps), Some(qs)) = (
                buckets_by_hash[key.i as usize].get(&raw_p),
                buckets_by_hash[j as usize].get(&raw_q),
            ) else {
                continue;
            };
            for &p in ps {
                for &s in qs {
                    if p > s && p - s == z && s != z {
                        return Some(Witness3 { x: z, y: s, z: p });
                    }
                }
            }
        }
        None
    });
    Ok(SdRun {
        witness,
        plan_summary: plan.summary(),
        queries: batch.len(),
        candidates_verified: total_reported,
    })
}
