//! Empirical distribution and group minimum of the alignment measure
//! against their closed-form bounds, plus the rate loss of minimum-INR
//! selection against its bound.
//!
//! Run with `cargo run --release --example bound_validation`.

use ibc_diversity::experiments::{validate_bounds, BoundsConfig};

fn main() {
    let cfg = BoundsConfig::new(4, 3, vec![10, 100], 300, 1);
    let report = validate_bounds(&cfg).expect("valid configuration");
    println!("{:>5} {:>7} {:>10} {:>10} {:>10} {:>10} {:>5}", "N", "lambda", "emp_cdf", "bound_cdf", "emp_min", "bound_min", "pass");
    for r in &report.rows {
        println!(
            "{:>5} {:>7} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>5}",
            r.n, r.lambda, r.empirical_cdf, r.bound_cdf, r.empirical_min_mean, r.bound_mean, r.pass
        );
    }
    for r in &report.rloss {
        println!(
            "rate loss N={} at {} dB: {:.3} ± {:.3} (bound {:.3}) pass={}",
            r.n, r.snr_db, r.empirical_mean, r.empirical_stderr, r.bound, r.pass
        );
    }
    println!("all checks pass: {}", report.all_pass());
}
