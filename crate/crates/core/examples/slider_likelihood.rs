//! Slider grids and the probability of each answer given a noiseless one.
//!
//! cargo run --example slider_likelihood -- 0.35 0.3

use scalefb::likelihood::feedback_likelihood;
use scalefb::{round_to_grid, SliderGrid};

fn main() -> scalefb::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let psi = args.next().unwrap_or(0.35);
    let sigma = args.next().unwrap_or(0.3);

    for eps in [0.1, 0.25, 1.0] {
        let grid = SliderGrid::new(eps)?;
        println!("step {eps}: {} positions, {psi} rounds to {}", grid.len(), round_to_grid(psi, eps)?);
        for &mu in grid.points() {
            let p = feedback_likelihood(mu, psi, sigma, eps)?;
            println!("  mu {mu:>5.2}  p {p:.4}  {}", "#".repeat((p * 60.0).round() as usize));
        }
    }
    Ok(())
}
