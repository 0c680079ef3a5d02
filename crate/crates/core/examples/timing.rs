use cohesim::pcf::{pair2, Enumeration, Evaluator, Resolved};
use cohesim::progs;
use std::collections::BTreeMap;
use std::time::Instant;

fn main() {
    let prog = progs::residue_set_slice(4, &[3]);
    let mut lib = BTreeMap::new();
    lib.insert(0u64, prog.clone());
    let ev = Evaluator::over(Enumeration::with_library(lib), 1 << 22);
    for n in [3u64, 7, 11] {
        for t in [0u64, 5] {
            let t0 = Instant::now();
            let r = ev.resolved(0, pair2(n, t));
            println!("phi(pair({n},{t})) -> {r:?} in {:?}", t0.elapsed());
        }
    }
}
