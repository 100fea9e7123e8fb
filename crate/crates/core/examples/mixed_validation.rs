//! Held-out log-likelihood on a validation set mixing slider answers and
//! soft choices; each record is scored on its own grid.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::env::fetch_env;
use scalefb::experiment::validation_records;
use scalefb::{sample_posterior, SimulatedUser};

fn main() -> scalefb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let set = Arc::new(fetch_env(120, &mut rng)?);
    let user = SimulatedUser::random(set.dimension(), 0.6, 0.35, 0.1, &mut rng)?;
    let chooser = SimulatedUser { epsilon: 1.0, ..user.clone() };

    let scale_val = validation_records(&user, &set, 10, &mut rng)?;
    let choice_val = validation_records(&chooser, &set, 10, &mut rng)?;
    let mixed: Vec<_> = scale_val.iter().chain(&choice_val).cloned().collect();

    for (name, train_user) in [("scale", &user), ("soft choice", &chooser)] {
        let train = validation_records(train_user, &set, 15, &mut rng)?;
        let belief = sample_posterior(&train, 0.35, Arc::clone(&set), 200, &mut rng)?;
        println!(
            "trained on {name:<11}: scale {:>7.2}  soft choice {:>7.2}  mixed {:>7.2}",
            belief.validation_log_likelihood(&scale_val)?,
            belief.validation_log_likelihood(&choice_val)?,
            belief.validation_log_likelihood(&mixed)?,
        );
    }
    Ok(())
}
