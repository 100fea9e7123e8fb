//! The drink-serving trajectory set: feature names, a sample, and the best
//! trajectory for a hand-written preference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::env::{fetch_env, fetch_lattice, FETCH_FEATURES};
use scalefb::{best_trajectory, WeightVector};

fn main() -> scalefb::Result<()> {
    println!("{} valid combinations over {FETCH_FEATURES:?}", fetch_lattice().len());
    let set = fetch_env(120, &mut ChaCha8Rng::seed_from_u64(8))?;
    for t in set.items().iter().take(5) {
        println!("{:<6} {:?}", t.id, t.features);
    }

    // likes water, dislikes spilling
    let mut w = vec![0.0; FETCH_FEATURES.len()];
    let at = |name: &str| FETCH_FEATURES.iter().position(|f| f.contains(name)).expect("feature");
    w[at("water")] = 1.0;
    w[at("hit")] = -1.0;
    let w = WeightVector::unit(w)?;
    let best = best_trajectory(&w, &set)?;
    println!("best for {:?}: {} {:?}", w.as_slice(), best.id, best.features);

    let out = std::env::temp_dir().join("fetch_120.jsonl");
    set.save(&out)?;
    println!("saved to {}", out.display());
    Ok(())
}
