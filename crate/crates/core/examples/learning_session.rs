//! One active-learning session per arm against the same simulated user.
//!
//! cargo run --release --example learning_session -- 20

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scalefb::env::synthetic_env;
use scalefb::experiment::{run_session, ArmSpec, FeedbackKind, Metric, SessionOptions};
use scalefb::queries::{PolicyKind, QueryPolicy};
use scalefb::SimulatedUser;

fn main() -> scalefb::Result<()> {
    let k: usize = std::env::args().nth(1).map_or(15, |a| a.parse().expect("K"));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let set = Arc::new(synthetic_env(10, 200, &mut rng)?);
    let user = SimulatedUser::random(10, 0.5, 0.1, 0.1, &mut rng)?;
    let options = SessionOptions::new(k, 0.1, 100).with_metrics(&[Metric::Alignment, Metric::RelativeReward]);

    for feedback in [FeedbackKind::Scale, FeedbackKind::SoftChoice] {
        for kind in [PolicyKind::InfoGain, PolicyKind::MaxRegret, PolicyKind::Random] {
            let arm = ArmSpec::new(feedback, QueryPolicy::new(kind));
            let history = run_session(&user, &arm, Arc::clone(&set), &options, &mut ChaCha8Rng::seed_from_u64(5))?;
            let curve = history.curve(Metric::Alignment).expect("alignment recorded");
            let shown: Vec<String> = curve.iter().step_by(5).map(|a| format!("{a:.2}")).collect();
            let rr = history.curve(Metric::RelativeReward).expect("recorded");
            println!(
                "{:<24} alignment {}  final {:.3}  relative reward {:.3}",
                arm.label(),
                shown.join(" "),
                curve[k],
                rr[k]
            );
        }
    }
    Ok(())
}
