//! Runs a campaign from a TOML config and writes the curve CSVs.
//!
//! cargo run --release --example benchmark_campaign -- crates/core/examples/configs/small.toml

use scalefb::experiment::{paired_differences, run_benchmark, ExperimentConfig, Metric};

fn main() -> scalefb::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/small.toml").to_string());
    let config = ExperimentConfig::load(&path)?;
    let result = run_benchmark(&config)?;

    for arm in &result.arms {
        let c = result.curve(arm, Metric::Alignment).expect("alignment curve");
        println!("{arm:<24} final alignment {:.3} ± {:.3} over {} runs", c.mean[config.k], c.sd[config.k], c.n);
    }
    for kind in ["info_gain", "max_regret", "random"] {
        let (s, c) = (format!("scale/{kind}"), format!("soft_choice/{kind}"));
        if result.arms.contains(&s) && result.arms.contains(&c) {
            let d = paired_differences(
                &result.final_values(&s, Metric::Alignment),
                &result.final_values(&c, Metric::Alignment),
            )?;
            println!("{kind}: scale minus soft choice {:+.3} (sd {:.3}, n {})", d.mean, d.sd, d.n);
        }
    }
    if let Some(dir) = &config.output_dir {
        println!("CSV files in {}", dir.display());
    }
    Ok(())
}
