//! Time-division baselines: one transmitter at a time (slope 1/K) and
//! `n_r` transmitters with zero forcing (slope `n_r/K`).
//!
//! Run with `cargo run --release --example tdma_baselines`.

use ibc_diversity::experiments::{
    db_to_power, dof_slope, run_rate_curves, tdma1_rate, ExperimentConfig, ScalingSchedule, Strategy,
};

fn main() {
    let (k, n_r) = (4, 3);
    let base = ExperimentConfig {
        k,
        n_r,
        n_t: 1,
        strategy: Strategy::Tdma1,
        schedule: ScalingSchedule::fixed(10),
        snr_db: vec![20.0, 25.0, 30.0, 35.0, 40.0],
        trials: 500,
        seed: 1,
    };
    let curves = run_rate_curves(&base, &[Strategy::Tdma1, Strategy::Tdma2]).expect("valid configuration");
    for c in &curves {
        println!(
            "{}: slope {:.3} (expected {:.3}), rates {:.2?}",
            c.strategy,
            dof_slope(c, 5).unwrap(),
            if c.strategy == Strategy::Tdma1 { 1.0 / k as f64 } else { n_r as f64 / k as f64 },
            c.rate_mean
        );
    }
    let direct = tdma1_rate(k, n_r, 10, db_to_power(30.0), 500, 1).unwrap();
    println!("tdma1 at 30 dB from the standalone estimator: {direct:.3}");
}
