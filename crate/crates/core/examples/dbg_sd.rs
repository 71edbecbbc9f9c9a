// Debug: find the failing seed and inspect why the witness is missed.
use sumlab::rng;
use sumlab::sd::*;
use sumlab::setsystem::Backend;
use sumlab::threesum::{gen_instance, solve_3sum_bruteforce, Plant};

fn main() {
    for seed in 0..12u64 {
        let n = 32 + 16 * (seed as usize % 3);
        let plant = if seed % 2 == 0 { Plant::Witness } else { Plant::None };
        let inst = gen_instance(n, 1 << 20, plant, &mut rng::stream(seed, "sd-e2e-gen", 0)).unwrap();
        let gamma = [0.25, 0.5, 0.75][seed as usize % 3];
        let mut r = rng::stream(seed, "sd-e2e", 0);
        let run = solve_3sum_via_sd(&inst, gamma, Backend::Brute, &mut r).unwrap();
        let expected = solve_3sum_bruteforce(&inst);
        if run.witness.is_some() != expected.is_some() {
            println!("MISMATCH seed={seed} gamma={gamma} pipeline={:?} brute={:?}", run.witness, expected);
            println!("  summary: {}", run.plan_summary);
            // Rebuild the plan with the same stream to inspect.
            let stripped = inst.without_zero();
            let mut r2 = rng::stream(seed, "sd-e2e", 0);
            let (_sys, _batch, plan) = build_sd_instance(&stripped, gamma, &mut r2).unwrap();
            if let Some(w) = expected {
                println!("  witness {w:?}");
                println!("  survivors contains x={} y={} z={}",
                    plan.survivors().contains(&w.x),
                    plan.survivors().contains(&w.y),
                    plan.survivors().contains(&w.z));
            }
        }
    }
    println!("done");
}
