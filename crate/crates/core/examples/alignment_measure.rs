//! Interference alignment measure of a few interferer sets: the solver's
//! value and direction, its certified gap and cheap bounds, checked against
//! a sampling oracle.
//!
//! Run with `cargo run --release --example alignment_measure`.

use ibc_diversity::alignment::{alignment_lower_bound, alignment_upper_bound, iam, iam_oracle};
use ibc_diversity::channel::{sample_unit_vector, Purpose, RngStream};
use ibc_diversity::numerics::CVec;

fn report(label: &str, g: &[CVec], oracle_rng: &mut RngStream) {
    let res = iam(g).expect("valid interferers");
    let oracle = iam_oracle(g, 2000, oracle_rng).expect("valid interferers");
    println!(
        "{label:<28} lambda*={:.6} gap={:.1e} lower={:.4} upper={:.4} oracle={:.6}",
        res.lambda_star,
        res.certified_gap,
        alignment_lower_bound(g).unwrap(),
        alignment_upper_bound(g).unwrap(),
        oracle
    );
}

fn main() {
    let mut oracle_rng = RngStream::derive(1, Purpose::Oracle, 0, 0);

    // two orthogonal interferers in C^2: the best direction splits evenly
    report("standard basis, n=2", &[CVec::basis(2, 0), CVec::basis(2, 1)], &mut oracle_rng);

    // fewer interferers than antennas: perfect alignment is possible
    let mut rng = RngStream::derive(1, Purpose::Misc, 0, 0);
    let g: Vec<CVec> = (0..2).map(|_| sample_unit_vector(3, &mut rng)).collect();
    report("2 random in C^3", &g, &mut oracle_rng);

    for m in 3..=5 {
        let g: Vec<CVec> = (0..m).map(|_| sample_unit_vector(3, &mut rng)).collect();
        report(&format!("{m} random in C^3"), &g, &mut oracle_rng);
    }
}
