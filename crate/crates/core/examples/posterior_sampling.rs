//! Fit the posterior to a handful of answers and read estimates off it.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::belief::Measure;
use scalefb::env::synthetic_env;
use scalefb::experiment::validation_records;
use scalefb::{alignment, relative_reward, sample_posterior, SimulatedUser};

fn main() -> scalefb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let set = Arc::new(synthetic_env(5, 100, &mut rng)?);
    let user = SimulatedUser::random(5, 0.75, 0.1, 0.1, &mut rng)?;
    let held_out = validation_records(&user, &set, 20, &mut rng)?;

    for n in [0, 5, 10, 20, 40] {
        let data = validation_records(&user, &set, n, &mut rng)?;
        let belief = sample_posterior(&data, 0.1, Arc::clone(&set), 200, &mut rng)?;
        let est = belief.mean_weight()?;
        println!(
            "{n:>2} answers: alignment {:.3}  relative reward {:.3}  alpha_hat {:.2}  worst-case error {:.4}  held-out log-lik {:.2}",
            alignment(&est.w_hat, &user.w_star)?,
            relative_reward(&est.w_hat, &user.w_star, &set)?,
            est.alpha_hat,
            belief.worst_case_error(&user.w_star, Measure::Alignment)?,
            belief.validation_log_likelihood(&held_out)?,
        );
    }
    Ok(())
}
