//! Growing the user pool with SNR recovers degrees of freedom: with
//! `N = P` the minimum-INR and max-SINR schemes reach slope one, while
//! `N = sqrt(P)` gives about one half and max-SNR stays near zero.
//!
//! Run with `cargo run --release --example user_scaling_dof`.

use ibc_diversity::experiments::{dof_slope, run_rate_curves, ExperimentConfig, ScalingSchedule, Strategy};
use ibc_diversity::selection::SchemeId;

fn sweep(schedule: ScalingSchedule, schemes: &[SchemeId]) {
    let base = ExperimentConfig {
        k: 4,
        n_r: 3,
        n_t: 1,
        strategy: Strategy::Select(schemes[0]),
        schedule,
        snr_db: vec![20.0, 25.0, 30.0, 35.0, 40.0],
        trials: 100,
        seed: 1,
    };
    let strategies: Vec<Strategy> = schemes.iter().copied().map(Strategy::Select).collect();
    let curves = run_rate_curves(&base, &strategies).expect("valid configuration");
    println!("schedule {} users {:?}", base.schedule, curves[0].users);
    for c in &curves {
        let slope = dof_slope(c, base.snr_db.len()).unwrap();
        println!("  {:<10} slope {:.3}  rates {:.2?}", c.strategy.to_string(), slope, c.rate_mean);
    }
}

fn main() {
    sweep(
        ScalingSchedule::power_law(1.0, 1.0),
        &[SchemeId::MinInr, SchemeId::MaxSinr, SchemeId::MaxSnr],
    );
    sweep(ScalingSchedule::power_law(1.0, 0.5), &[SchemeId::MinInr, SchemeId::MaxSinr]);
}
