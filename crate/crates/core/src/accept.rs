//! The acceptance suite: every release-gating property as a runnable check.
//!
//! Each criterion returns a report with a pass flag and a counting detail
//! string. The integration test target runs them all and asserts; the CLI
//! `selftest` subcommand runs the same code and maps failures to a nonzero
//! exit. `quick` mode shrinks trial counts for a fast smoke run; the full
//! suite uses the counts the criteria are specified with.

use crate::conv::{sample_ells, solve_3sum_via_conv, ConvConfig, ConvPlan};
use crate::hashing::{HashEval, PairwiseAffineHash};
use crate::matching::{
    build_gadget, gen_bipartite_edges, offline_maximum_matching, sd_query_combined,
    sd_query_perfect, sd_query_rollback, MatchGraph,
};
use crate::rng;
use crate::sd::{build_sd_instance, build_si_instance, solve_3sum_via_sd, solve_3sum_via_si};
use crate::setsystem::{
    brute_disjointness, gen_system, Backend, Family, HeavyLightStructure,
};
use crate::threesum::{
    gen_instance, solve_3sum_bruteforce, solve_conv_bruteforce, Plant, ThreeSumInstance, Witness3,
};
use crate::triangles::{enum_triangles_brute, enum_triangles_cn, gen_graph, hard_instance};
use rand::Rng;

/// Suite configuration. The fault hook corrupts one built convolution
/// vector before the structural check, demonstrating that the suite
/// catches layout regressions.
#[derive(Debug, Clone, Copy, Default)]
pub struct AcceptConfig {
    pub quick: bool,
    pub inject_conv_layout_fault: bool,
}

/// One criterion's outcome.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} {:<26} {}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

const ROOT_SEED: u64 = 0x5eed_3507;

fn grid_instance(k: usize, quick: bool) -> (ThreeSumInstance, f64, f64, u64) {
    let ns = [64usize, 128, 256, 512];
    let gammas = [0.25f64, 0.5, 0.75];
    let deltas = [0.25f64, 0.5];
    let n = ns[k % 4];
    let gamma = gammas[(k / 4) % 3];
    let delta = deltas[(k / 12) % 2];
    let plant = if k % 2 == 0 { Plant::Witness } else { Plant::None };
    let quick_tag = u64::from(quick);
    let inst = gen_instance(
        n,
        1 << 20,
        plant,
        &mut rng::stream(ROOT_SEED, "accept-grid", (quick_tag << 32) | k as u64),
    )
    .expect("grid parameters are valid");
    (inst, gamma, delta, k as u64)
}

/// Criterion 1: SD pipeline decision equals brute force on the whole grid.
pub fn sd_oracle_equivalence(cfg: &AcceptConfig) -> CriterionReport {
    let total = if cfg.quick { 48 } else { 500 };
    let results = crate::par::map_indexed(total, |k| {
        let (inst, gamma, _, seed) = grid_instance(k, cfg.quick);
        let mut r = rng::stream(ROOT_SEED, "accept-sd", seed);
        let run = solve_3sum_via_sd(&inst, gamma, Backend::Brute, &mut r).expect("pipeline runs");
        let expected = solve_3sum_bruteforce(&inst).is_some();
        let witness_ok = run
            .witness
            .is_none_or(|w| Witness3::checked(w.x, w.y, w.z, &inst).is_ok());
        (run.witness.is_some() == expected) && witness_ok
    });
    let agree = results.iter().filter(|&&ok| ok).count();
    CriterionReport {
        id: 1,
        name: "sd-oracle-equivalence",
        passed: agree == total,
        detail: format!("{agree}/{total} decisions agree"),
    }
}

/// Criterion 2: SI pipeline oracle equivalence plus the reported-size
/// envelope `mean total <= 40 * n^(2-delta)` per parameter combination.
pub fn si_oracle_equivalence(cfg: &AcceptConfig) -> CriterionReport {
    let total = if cfg.quick { 48 } else { 500 };
    let results = crate::par::map_indexed(total, |k| {
        let (inst, gamma, delta, seed) = grid_instance(k, cfg.quick);
        let mut r = rng::stream(ROOT_SEED, "accept-si", seed);
        let run =
            solve_3sum_via_si(&inst, gamma, delta, Backend::Brute, &mut r).expect("pipeline runs");
        let expected = solve_3sum_bruteforce(&inst).is_some();
        let witness_ok = run
            .witness
            .is_none_or(|w| Witness3::checked(w.x, w.y, w.z, &inst).is_ok());
        let agree = (run.witness.is_some() == expected) && witness_ok;
        (agree, inst.len(), delta, run.candidates_verified, run.queries > 0)
    });
    let agree = results.iter().filter(|r| r.0).count();
    let mut combos: std::collections::BTreeMap<(usize, u64), (f64, usize)> =
        std::collections::BTreeMap::new();
    for &(_, n, delta, reported, materialized) in &results {
        if materialized {
            let key = (n, (delta * 100.0) as u64);
            let e = combos.entry(key).or_insert((0.0, 0));
            e.0 += reported as f64;
            e.1 += 1;
        }
    }
    let envelope_ok = combos.iter().all(|(&(n, d100), &(sum, count))| {
        let delta = d100 as f64 / 100.0;
        sum / count as f64 <= 40.0 * (n as f64).powf(2.0 - delta)
    });
    CriterionReport {
        id: 2,
        name: "si-oracle-equivalence",
        passed: agree == total && envelope_ok,
        detail: format!(
            "{agree}/{total} decisions agree, envelope {} over {} combos",
            if envelope_ok { "holds" } else { "violated" },
            combos.len()
        ),
    }
}

/// Criterion 3: exact structural counts of both reduction shapes.
pub fn structural_shapes(cfg: &AcceptConfig) -> CriterionReport {
    let mut failures = Vec::new();
    let reps = if cfg.quick { 1 } else { 3 };
    let mut checked = 0;
    for rep in 0..reps {
        for (ni, &n) in [64usize, 128, 256, 512].iter().enumerate() {
            for (gi, &gamma) in [0.25f64, 0.5, 0.75].iter().enumerate() {
                let idx = (rep * 12 + ni * 3 + gi) as u64;
                let inst = gen_instance(
                    n,
                    1 << 20,
                    Plant::None,
                    &mut rng::stream(ROOT_SEED, "accept-shape", idx),
                )
                .expect("valid")
                .without_zero();
                let mut r = rng::stream(ROOT_SEED, "accept-shape-rng", idx);
                let (sys, batch, plan) = build_sd_instance(&inst, gamma, &mut r).expect("builds");
                let nf = plan.n() as f64;
                checked += 1;
                if sys.family(Family::A).len() != plan.family_size()
                    || sys.family(Family::B).len() != plan.family_size()
                {
                    failures.push(format!("sd family count n={n} gamma={gamma}"));
                }
                if plan.query_universe() as f64 > 100.0 * nf.powf(2.0 - 2.0 * gamma) {
                    failures.push(format!("sd universe n={n} gamma={gamma}"));
                }
                let cap = 3.0 * nf / plan.bucket_range() as f64;
                let oversized = [Family::A, Family::B]
                    .iter()
                    .any(|&f| sys.family(f).iter().any(|s| s.len() as f64 > cap));
                if oversized {
                    failures.push(format!("sd set cap n={n} gamma={gamma}"));
                }
                if batch.len() as f64
                    > 4.0 * nf * plan.bucket_range() as f64 * plan.round_count() as f64
                {
                    failures.push(format!("sd query count n={n} gamma={gamma}"));
                }

                for (di, &delta) in [0.25f64, 0.5].iter().enumerate() {
                    let mut r = rng::stream(ROOT_SEED, "accept-shape-si", idx * 2 + di as u64);
                    let (sys, batch, plan) =
                        build_si_instance(&inst, gamma, delta, &mut r).expect("builds");
                    let nf = plan.n() as f64;
                    checked += 1;
                    if sys.family(Family::A).len() != plan.family_size() {
                        failures.push(format!("si family count n={n} gamma={gamma} delta={delta}"));
                    }
                    if plan.query_universe() as f64 > 4.0 * nf.powf(1.0 + delta - gamma) {
                        failures.push(format!("si universe n={n} gamma={gamma} delta={delta}"));
                    }
                    let cap = 3.0 * nf / plan.bucket_range() as f64;
                    if sys
                        .family(Family::A)
                        .iter()
                        .chain(sys.family(Family::B))
                        .any(|s| s.len() as f64 > cap)
                    {
                        failures.push(format!("si set cap n={n} gamma={gamma} delta={delta}"));
                    }
                    if batch.len() as f64 > 4.0 * nf * plan.bucket_range() as f64 {
                        failures.push(format!("si query count n={n} gamma={gamma} delta={delta}"));
                    }
                }
            }
        }
    }
    CriterionReport {
        id: 3,
        name: "structural-shapes",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checked} instances, all exact")
        } else {
            failures.join("; ")
        },
    }
}

/// Criterion 4: over ground-truth-witness-free candidate queries, the
/// non-disjoint (false positive) rate stays at most 0.5 per query.
pub fn per_round_false_positives(cfg: &AcceptConfig) -> CriterionReport {
    let mut trials = 0u64;
    let mut false_positives = 0u64;
    let need = if cfg.quick { 1000 } else { 4000 };
    let mut idx = 0u64;
    while trials < need && idx < 64 {
        let inst = gen_instance(
            64,
            1 << 20,
            Plant::None,
            &mut rng::stream(ROOT_SEED, "accept-fp", idx),
        )
        .expect("valid")
        .without_zero();
        let mut r = rng::stream(ROOT_SEED, "accept-fp-rng", idx);
        let (sys, batch, plan) = build_sd_instance(&inst, 0.5, &mut r).expect("builds");
        let bits = brute_disjointness(&sys, &batch);
        let rounds = plan.round_count();
        let candidates = plan.survivors().len() * plan.bucket_range() as usize * 2;
        for c in 0..candidates {
            let base = c * rounds * 2;
            let key = plan.flat_to_key(base);
            let z = plan.survivors()[key.z_idx];
            if plan.candidate_ground_truth(z, key.i, key.e1) {
                continue;
            }
            for q in base..base + rounds * 2 {
                trials += 1;
                if !bits[q] {
                    false_positives += 1;
                }
            }
        }
        let _ = batch;
        idx += 1;
    }
    let rate = false_positives as f64 / trials.max(1) as f64;
    CriterionReport {
        id: 4,
        name: "per-round-false-positives",
        passed: trials >= need && rate <= 0.5,
        detail: format!("{false_positives}/{trials} non-disjoint, rate {rate:.4}"),
    }
}

/// Criterion 5: exhaustive pairwise-independence counts, the sum-form
/// almost-linearity offsets at m = 2, and the exact difference-form
/// offsets at larger ranges.
pub fn hashing_properties(cfg: &AcceptConfig) -> CriterionReport {
    // Exhaustive pairwise independence at u=8, m=2, r=16.
    let mut exact = true;
    for x in 0..8u64 {
        for y in 0..8u64 {
            if x == y {
                continue;
            }
            let mut counts = [[0u32; 2]; 2];
            for a in (1..16u64).step_by(2) {
                for b in 0..16u64 {
                    let h = PairwiseAffineHash::new(a, b, 8, 2, 16).expect("valid");
                    counts[h.eval(x).expect("in range") as usize]
                        [h.eval(y).expect("in range") as usize] += 1;
                }
            }
            if counts.iter().flatten().any(|&c| c != 32) {
                exact = false;
            }
        }
    }

    // Sum-form offsets at u=2^16, m=2: 100 functions x 100 pairs.
    let u = 1u64 << 16;
    let m = 2u64;
    let rmod = PairwiseAffineHash::min_modulus(u, m);
    let funcs = if cfg.quick { 20 } else { 100 };
    let pairs_per = if cfg.quick { 50 } else { 100 };
    let mut sum_violations = 0u64;
    for f in 0..funcs {
        let mut s = rng::stream(ROOT_SEED, "accept-linear", f);
        let h = PairwiseAffineHash::sample(&mut s, u, m, rmod).expect("valid");
        let c = h.linear_offset();
        for _ in 0..pairs_per {
            let x = s.random_range(0..u / 2);
            let y = s.random_range(0..u / 2);
            let d = (h.eval(x).expect("in range") + h.eval(y).expect("in range") + 2 * m
                - h.eval(x + y).expect("in range")
                - c)
                % m;
            if d > 1 {
                sum_violations += 1;
            }
        }
    }

    // Difference-form offsets at larger ranges: exactly two values.
    let mut diff_violations = 0u64;
    for (mi, m) in [64u64, 4096].into_iter().enumerate() {
        let rmod = PairwiseAffineHash::min_modulus(u, m);
        for f in 0..funcs {
            let mut s = rng::stream(ROOT_SEED, "accept-diff", ((mi as u64) << 32) | f);
            let h = PairwiseAffineHash::sample(&mut s, u, m, rmod).expect("valid");
            for _ in 0..pairs_per {
                let q = s.random_range(0..u / 2);
                let z = s.random_range(0..u / 2);
                let d = (h.eval(q + z).expect("in range") + 2 * m
                    - h.eval(q).expect("in range")
                    - h.difference_offset(z))
                    % m;
                if d > 1 {
                    diff_violations += 1;
                }
            }
        }
    }

    CriterionReport {
        id: 5,
        name: "hashing-properties",
        passed: exact && sum_violations == 0 && diff_violations == 0,
        detail: format!(
            "independence {}, sum-form violations {sum_violations}, difference-form violations {diff_violations}",
            if exact { "exact" } else { "skewed" }
        ),
    }
}

/// Criterion 6: convolution reduction structure, soundness, completeness,
/// and end-to-end agreement.
pub fn conv_reduction(cfg: &AcceptConfig) -> CriterionReport {
    let config = ConvConfig::default();
    let mut problems: Vec<String> = Vec::new();

    // (a) Call count 8*T*L and vector length 14*T*m, checked on built plans.
    for (i, n) in [9usize, 33, 64].into_iter().enumerate() {
        let inst = gen_instance(
            n,
            1 << 16,
            Plant::None,
            &mut rng::stream(ROOT_SEED, "accept-conv-a", i as u64),
        )
        .expect("valid")
        .without_zero();
        let mut r = rng::stream(ROOT_SEED, "accept-conv-a-rng", i as u64);
        let plan = ConvPlan::build(&inst, &config, &mut r).expect("plan builds");
        let l = plan.hash_count();
        let t = plan.cap();
        let m = plan.block_count_half();
        if plan.call_count() != 8 * t as usize * l {
            problems.push(format!("call count at n={n}"));
        }
        for ell in sample_ells(&plan, 4, &mut r) {
            let mut vec = plan.build_vector(ell);
            if cfg.inject_conv_layout_fault {
                // Test hook: simulate a layout bug by dropping one cell.
                let mut cells = vec.cells().to_vec();
                cells.pop();
                vec = crate::threesum::ConvInstance::new(cells);
            }
            if vec.len() != (14 * t * m) as usize {
                problems.push(format!("vector length at n={n}"));
            }
        }
    }

    // (b) No false positives over sampled call indices.
    let instances = if cfg.quick { 10 } else { 50 };
    let ells_per = if cfg.quick { 40 } else { 200 };
    let fp: usize = crate::par::map_indexed(instances, |k| {
        let n = 8 + (k % 57);
        let plant = if k % 2 == 0 { Plant::Witness } else { Plant::None };
        let inst = gen_instance(
            n,
            1 << 16,
            plant,
            &mut rng::stream(ROOT_SEED, "accept-conv-b", k as u64),
        )
        .expect("valid")
        .without_zero();
        if inst.len() < 2 {
            return 0;
        }
        let mut r = rng::stream(ROOT_SEED, "accept-conv-b-rng", k as u64);
        let plan = ConvPlan::build(&inst, &config, &mut r).expect("plan builds");
        let mut bad = 0;
        for ell in sample_ells(&plan, ells_per, &mut r) {
            let vec = plan.build_vector(ell);
            if let Some(wc) = solve_conv_bruteforce(&vec) {
                if plan.map_witness(&inst, wc, &vec).is_err() {
                    bad += 1;
                }
            }
        }
        bad
    })
    .into_iter()
    .sum();
    if fp > 0 {
        problems.push(format!("{fp} false positives"));
    }

    // (c) No false negatives: predicted index holds the witness.
    let planted_runs = if cfg.quick { 20 } else { 100 };
    let misses: usize = crate::par::map_indexed(planted_runs, |k| {
        let n = 8 + (k % 57);
        let inst = gen_instance(
            n,
            1 << 16,
            Plant::Witness,
            &mut rng::stream(ROOT_SEED, "accept-conv-c", k as u64),
        )
        .expect("valid")
        .without_zero();
        let Some(w) = solve_3sum_bruteforce(&inst) else {
            return 1;
        };
        let mut r = rng::stream(ROOT_SEED, "accept-conv-c-rng", k as u64);
        let plan = ConvPlan::build(&inst, &config, &mut r).expect("plan builds");
        let Some((ell, [pa, pb, pc])) = plan.predict_ell(&w) else {
            return 1;
        };
        let vec = plan.build_vector(ell);
        let ok = pa + pb == pc
            && vec.cell(pa).value() == Some(w.x)
            && vec.cell(pb).value() == Some(w.y)
            && vec.cell(pc).value() == Some(w.z);
        usize::from(!ok)
    })
    .into_iter()
    .sum();
    if misses > 0 {
        problems.push(format!("{misses} predicted-index misses"));
    }

    // (d) Full pipeline agreement at n <= 16.
    let e2e_runs = if cfg.quick { 10 } else { 50 };
    let disagreements: usize = crate::par::map_indexed(e2e_runs, |k| {
        let n = 6 + (k % 11);
        let plant = if k % 2 == 0 { Plant::Witness } else { Plant::None };
        let inst = gen_instance(
            n,
            1 << 12,
            plant,
            &mut rng::stream(ROOT_SEED, "accept-conv-d", k as u64),
        )
        .expect("valid");
        let mut r = rng::stream(ROOT_SEED, "accept-conv-d-rng", k as u64);
        let run = solve_3sum_via_conv(&inst, solve_conv_bruteforce, &config, &mut r)
            .expect("pipeline runs");
        let expected = solve_3sum_bruteforce(&inst).is_some();
        usize::from(run.witness.is_some() != expected)
    })
    .into_iter()
    .sum();
    if disagreements > 0 {
        problems.push(format!("{disagreements} end-to-end disagreements"));
    }

    CriterionReport {
        id: 6,
        name: "conv-reduction",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!(
                "structure exact, {instances}x{ells_per} sampled indices sound, {planted_runs} predictions hit, {e2e_runs} end-to-end agree"
            )
        } else {
            problems.join("; ")
        },
    }
}

/// Criterion 7: triangle listing equivalence with counted-work envelope,
/// and hardness-instance structure.
pub fn triangles_criteria(cfg: &AcceptConfig) -> CriterionReport {
    let graphs = if cfg.quick { 60 } else { 300 };
    let mismatches: usize = crate::par::map_indexed(graphs, |k| {
        let mut r = rng::stream(ROOT_SEED, "accept-tri", k as u64);
        let n = 10 + (k % 71);
        let density = 0.05 + 0.45 * (k as f64 / graphs as f64);
        let g = gen_graph(n, density, &mut r);
        let listing = enum_triangles_cn(&g);
        let brute = enum_triangles_brute(&g);
        let bound = 8 * (g.edge_count() * (listing.degeneracy + 1) + g.vertex_count());
        usize::from(listing.triangles != brute || listing.ops as usize > bound)
    })
    .into_iter()
    .sum();

    let mut hard_ok = true;
    let mut hard_detail = String::new();
    for (i, (n, gamma, delta)) in [(64usize, 0.5f64, 0.5f64), (128, 0.25, 0.25), (96, 0.75, 0.5)]
        .into_iter()
        .enumerate()
    {
        let mut r = rng::stream(ROOT_SEED, "accept-hard", i as u64);
        let hard = hard_instance(n, 1 << 20, gamma, delta, &mut r).expect("builds");
        if hard.stats.triangles != hard.stats.sum_intersections
            || hard.stats.max_outdegree > 2 * hard.stats.split_cap
        {
            hard_ok = false;
            hard_detail = format!(
                "n={n}: triangles {} vs intersections {}, outdeg {} cap {}",
                hard.stats.triangles,
                hard.stats.sum_intersections,
                hard.stats.max_outdegree,
                hard.stats.split_cap
            );
        }
    }

    CriterionReport {
        id: 7,
        name: "triangles",
        passed: mismatches == 0 && hard_ok,
        detail: if mismatches == 0 && hard_ok {
            format!("{graphs} graphs set-equal within work bound, hard instances exact")
        } else {
            format!("{mismatches} graph mismatches; {hard_detail}")
        },
    }
}

/// Criterion 8: gadget query modes bit-for-bit versus brute disjointness,
/// +2 size delta in perfect mode, exact rollback, and incremental-vs-offline
/// matching equality.
pub fn matching_criteria(cfg: &AcceptConfig) -> CriterionReport {
    let systems = if cfg.quick { 40 } else { 200 };
    let mut problems = 0usize;
    for k in 0..systems {
        let mut r = rng::stream(ROOT_SEED, "accept-match", k as u64);
        let universe = 4 + r.random_range(0..29usize);
        let na = 2 + r.random_range(0..15usize);
        let nb = 2 + r.random_range(0..15usize);
        let (sys, batch) = gen_system(universe, na, nb, universe, 24, &mut r).expect("builds");
        let expected = brute_disjointness(&sys, &batch);

        let (mut g, map) = build_gadget(&sys).expect("gadget builds");
        let base_snapshot = g.snapshot();
        for (q, &(a, b)) in batch.pairs().iter().enumerate() {
            match sd_query_rollback(&mut g, &map, a, b) {
                Ok(ans) if ans == expected[q] => {}
                _ => problems += 1,
            }
        }
        if g.snapshot() != base_snapshot {
            problems += 1;
        }

        let (mut g, map) = build_gadget(&sys).expect("gadget builds");
        for (q, &(a, b)) in batch.pairs().iter().enumerate() {
            match sd_query_perfect(&mut g, &map, a, b) {
                Ok(out) if out.disjoint == expected[q] && out.size_delta == 2 => {}
                _ => problems += 1,
            }
        }

        let (mut g, map) = build_gadget(&sys).expect("gadget builds");
        let alpha = 0.3 + 0.4 * (k as f64 / systems as f64);
        for (q, &(a, b)) in batch.pairs().iter().enumerate() {
            match sd_query_combined(&mut g, &map, a, b, alpha) {
                Ok(out) if out.disjoint == expected[q] => {}
                _ => problems += 1,
            }
        }
        if g.validate_matching().is_err() {
            problems += 1;
        }
    }

    let seqs = if cfg.quick { 40 } else { 200 };
    let mut incr_mismatches = 0usize;
    for k in 0..seqs {
        let mut r = rng::stream(ROOT_SEED, "accept-incr", k as u64);
        let left = 3 + r.random_range(0..10usize);
        let right = 3 + r.random_range(0..10usize);
        let edges = gen_bipartite_edges(left, right, (left * right) / 2, &mut r);
        let mut g = MatchGraph::new();
        for _ in 0..left + right {
            g.insert_vertex();
        }
        for &(u, v) in &edges {
            g.insert_edge(u, v).expect("valid insertion");
        }
        if g.matching_size() != offline_maximum_matching(left + right, &edges) {
            incr_mismatches += 1;
        }
    }

    CriterionReport {
        id: 8,
        name: "matching",
        passed: problems == 0 && incr_mismatches == 0,
        detail: format!(
            "{systems} systems x 3 modes, {problems} problems; {seqs} insertion sequences, {incr_mismatches} mismatches"
        ),
    }
}

/// Criterion 9: heavy/light answers equal brute force on 10^4 queries and
/// counted work stays inside the stated envelopes.
pub fn heavylight_criteria(cfg: &AcceptConfig) -> CriterionReport {
    let target_queries = if cfg.quick { 2000 } else { 10_000 };
    let mut asked = 0usize;
    let mut wrong = 0usize;
    let mut over_budget = 0usize;
    let mut sys_idx = 0u64;
    while asked < target_queries {
        let mut r = rng::stream(ROOT_SEED, "accept-hl", sys_idx);
        let universe = 32 + r.random_range(0..224usize);
        let (sys, batch) = gen_system(universe, 30, 30, universe / 2, 500, &mut r).expect("builds");
        let n = sys.total_size() as f64;
        let hl = HeavyLightStructure::build(&sys);
        if hl.preprocess_ops() as f64 > 16.0 * n.powf(1.5) {
            over_budget += 1;
        }
        let expected = brute_disjointness(&sys, &batch);
        for (q, &(a, b)) in batch.pairs().iter().enumerate() {
            let (ans, ops) = hl.query(&sys, a, b);
            if ans != expected[q] {
                wrong += 1;
            }
            if ops as f64 > 16.0 * n.sqrt() {
                over_budget += 1;
            }
            asked += 1;
        }
        sys_idx += 1;
    }
    CriterionReport {
        id: 9,
        name: "heavylight-backend",
        passed: wrong == 0 && over_budget == 0,
        detail: format!("{asked} queries, {wrong} wrong, {over_budget} over budget"),
    }
}

/// Runs criteria 1 through 9 (criterion 10, CLI byte-determinism, lives
/// with the binary; see the `selftest` subcommand and the CLI tests).
pub fn run_core_criteria(cfg: &AcceptConfig) -> Vec<CriterionReport> {
    vec![
        sd_oracle_equivalence(cfg),
        si_oracle_equivalence(cfg),
        structural_shapes(cfg),
        per_round_false_positives(cfg),
        hashing_properties(cfg),
        conv_reduction(cfg),
        triangles_criteria(cfg),
        matching_criteria(cfg),
        heavylight_criteria(cfg),
    ]
}
