//! Two-stage selection over a fixed pool of 100 users: `N2` blocks of `N1`
//! users each forward their strongest user, and the least-interfered of
//! those wins. Larger blocks raise the signal gain but leave fewer
//! candidates for interference suppression; `N1 = 1` is minimum-INR
//! selection and `N2 = 1` is max-SNR selection.
//!
//! Run with `cargo run --release --example two_stage_selection`.

use ibc_diversity::experiments::{run_rate_curves, ExperimentConfig, ScalingSchedule, Strategy};
use ibc_diversity::selection::SchemeId;

fn main() {
    let n = 100;
    let mut strategies = vec![Strategy::Select(SchemeId::MinInr)];
    for n1 in [2, 5, 10, 20] {
        strategies.push(Strategy::Select(SchemeId::TwoStage { n1, n2: n / n1 }));
    }
    strategies.push(Strategy::Select(SchemeId::MaxSnr));
    for s in &strategies {
        let cfg = ExperimentConfig {
            k: 4,
            n_r: 3,
            n_t: 1,
            strategy: *s,
            schedule: ScalingSchedule::fixed(n),
            snr_db: vec![30.0],
            trials: 300,
            seed: 1,
        };
        let c = &run_rate_curves(&cfg, &[*s]).expect("valid configuration")[0];
        println!(
            "{:<18} rate {:.3}  gain {:.3}  loss {:.3}",
            s.to_string(),
            c.rate_mean[0],
            c.rate_gain_mean[0],
            c.rate_loss_mean[0]
        );
    }
}
