//! Scores of the queries picked by each policy on one belief.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::env::synthetic_env;
use scalefb::experiment::validation_records;
use scalefb::queries::{info_gain_score, random_query, select_info_gain, select_max_regret};
use scalefb::{sample_posterior, SimulatedUser};

fn main() -> scalefb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let set = Arc::new(synthetic_env(6, 150, &mut rng)?);
    let user = SimulatedUser::random(6, 0.5, 0.1, 0.1, &mut rng)?;
    let data = validation_records(&user, &set, 6, &mut rng)?;
    let belief = sample_posterior(&data, 0.1, Arc::clone(&set), 100, &mut rng)?;

    let picks = [
        ("info gain", select_info_gain(&belief, 2000, 0.1, &mut rng)?),
        ("max regret", select_max_regret(&belief, 2000, &mut rng)?),
        ("random", random_query(&set, &mut rng)?),
    ];
    for (name, q) in &picks {
        println!(
            "{name:<10} {} vs {}: {:.3} bits on the scale, {:.3} bits as a soft choice",
            q.p_id,
            q.q_id,
            info_gain_score(q, &belief, 0.1)?,
            info_gain_score(q, &belief, 1.0)?,
        );
    }
    Ok(())
}
