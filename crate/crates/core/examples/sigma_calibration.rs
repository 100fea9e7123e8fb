//! Recovers the noise level of simulated pilot users from held-out answers.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::experiment::{calibrate_sigma, default_sigma_grid, simulate_pilot};
use scalefb::service::SetRegistry;
use scalefb::SamplerConfig;

fn main() -> scalefb::Result<()> {
    let set = Arc::clone(SetRegistry::with_builtin().get("fetch").expect("builtin set"));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pilot = simulate_pilot(&set, 3, 0.35, 0.1, 10, 10, 10, &mut rng)?;
    let training: Vec<_> = pilot.iter().map(|p| p.training.clone()).collect();
    let validation: Vec<_> = pilot.iter().map(|p| p.validation.clone()).collect();

    let sampler = SamplerConfig::default().with_samples(100);
    let result = calibrate_sigma(&training, &validation, &default_sigma_grid(), set, &sampler, 0)?;
    for (sigma, ll) in &result.scores {
        let mark = if *sigma == result.sigma { " <-" } else { "" };
        println!("sigma {sigma:.2}  {ll:>8.3}{mark}");
    }
    println!("generated at 0.35, calibrated to {}", result.sigma);
    Ok(())
}
