//! Noiseless answers: how many random hypotheses survive slider answers
//! versus the bare choices those answers imply.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::env::synthetic_env_with;
use scalefb::likelihood::{choice_feasible, noiseless_feasible};
use scalefb::queries::random_query;
use scalefb::sampler::prior_draw;
use scalefb::{noiseless_response, FeedbackRecord, SimulatedUser};

fn main() -> scalefb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let set = synthetic_env_with(2, 20, 1.0, &mut rng)?;
    let user = SimulatedUser::random(2, 0.5, 0.0, 0.1, &mut rng)?;
    let data: Vec<FeedbackRecord> = (0..5)
        .map(|_| {
            let q = random_query(&set, &mut rng)?;
            Ok(FeedbackRecord::new(q.clone(), noiseless_response(&user, &q, &set)?, 0.1))
        })
        .collect::<scalefb::Result<_>>()?;

    // slider answers pin w down to a thin set; use a loose tolerance to see it
    let (mut scale, mut choice, mut both) = (0, 0, 0);
    let n = 100_000;
    for _ in 0..n {
        let h = prior_draw(2, &mut rng);
        let s = noiseless_feasible(&h.w, h.alpha, &data, &set, 0.02)?;
        let c = choice_feasible(&h.w, &data, &set)?;
        scale += s as usize;
        choice += c as usize;
        both += (s && c) as usize;
    }
    println!("of {n} prior draws: {choice} fit the choices, {scale} fit the slider answers, {both} fit both");
    println!("truth feasible: {}", noiseless_feasible(&user.w_star, user.alpha_star, &data, &set, 1e-9)?);
    Ok(())
}
