// Verify the offset chain step by step on a failing witness.
use sumlab::hashing::{HashEval, PairwiseAffineHash};
use sumlab::rng;
use rand::Rng;

fn main() {
    // Step 1: almost-linearity offsets for larger m: sample functions, check
    // (h(x)+h(x') - h(x+x') - c) mod m is in {0,1}.
    let mut r = rng::stream(1, "chk", 0);
    let u = 1u64 << 20;
    for m in [4u64, 64, 256, 4096] {
        let rmod = PairwiseAffineHash::min_modulus(u, m);
        let mut histo = std::collections::BTreeMap::new();
        for _ in 0..50 {
            let h = PairwiseAffineHash::sample(&mut r, u, m, rmod).unwrap();
            let c = h.linear_offset();
            for _ in 0..2000 {
                let x = r.random_range(0..u / 2);
                let y = r.random_range(0..u / 2);
                let d = (h.eval(x).unwrap() + h.eval(y).unwrap() + 2 * m
                    - h.eval(x + y).unwrap()
                    - c)
                    % m;
                *histo.entry(d).or_insert(0u64) += 1;
            }
        }
        println!("m={m}: offset histogram {histo:?}");
    }
}
