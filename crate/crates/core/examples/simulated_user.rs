//! A simulated user answering the same query on a fine slider and as a soft
//! choice.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::env::synthetic_env;
use scalefb::queries::random_query;
use scalefb::{noiseless_response, noisy_response, reward_gap, SimulatedUser};

fn main() -> scalefb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let set = synthetic_env(4, 50, &mut rng)?;
    let user = SimulatedUser::random(4, 0.5, 0.1, 0.1, &mut rng)?;
    let chooser = SimulatedUser { epsilon: 1.0, ..user.clone() };
    println!("w* = {:?}, alpha* = {}", user.w_star.as_slice(), user.alpha_star);
    println!("reward gap under w*: {:.3}", reward_gap(&user.w_star, &set)?);

    for _ in 0..8 {
        let q = random_query(&set, &mut rng)?;
        let psi = noiseless_response(&user, &q, &set)?;
        let scale: Vec<f64> = (0..5).map(|_| noisy_response(&user, &q, &set, &mut rng)).collect::<Result<_, _>>()?;
        let soft: Vec<f64> = (0..5).map(|_| noisy_response(&chooser, &q, &set, &mut rng)).collect::<Result<_, _>>()?;
        println!("{} vs {}: psi {psi:+.3}  scale {scale:?}  soft {soft:?}", q.p_id, q.q_id);
    }
    Ok(())
}
