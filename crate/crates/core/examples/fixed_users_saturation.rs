//! With a fixed number of users the interference-aware schemes saturate:
//! the rate flattens as SNR grows. Prints one rate curve per scheme.
//!
//! Run with `cargo run --release --example fixed_users_saturation`.

use ibc_diversity::experiments::{dof_slope, run_rate_curves, ExperimentConfig, ScalingSchedule, Strategy};
use ibc_diversity::selection::SchemeId;

fn main() {
    let base = ExperimentConfig {
        k: 4,
        n_r: 3,
        n_t: 1,
        strategy: Strategy::Select(SchemeId::MaxSinr),
        schedule: ScalingSchedule::fixed(10),
        snr_db: (0..=8).map(|i| 5.0 * i as f64).collect(),
        trials: 300,
        seed: 1,
    };
    let strategies: Vec<Strategy> = [SchemeId::MaxSnr, SchemeId::MinInr, SchemeId::MaxSinr, SchemeId::RandomBaseline]
        .into_iter()
        .map(Strategy::Select)
        .collect();
    let curves = run_rate_curves(&base, &strategies).expect("valid configuration");

    print!("{:>8}", "SNR dB");
    for c in &curves {
        print!("{:>12}", c.strategy.to_string());
    }
    println!();
    for (i, db) in base.snr_db.iter().enumerate() {
        print!("{db:>8}");
        for c in &curves {
            print!("{:>12.3}", c.rate_mean[i]);
        }
        println!();
    }
    for c in &curves {
        println!("{}: slope over the top 3 points = {:.3}", c.strategy, dof_slope(c, 3).unwrap());
    }
}
