//! Compares every selection scheme on the same group of users: who is
//! picked, the post-processed SINR and the rate split into gain and loss.
//!
//! Run with `cargo run --release --example selection_schemes`.

use ibc_diversity::channel::{sample_user_group, Purpose, RngStream};
use ibc_diversity::experiments::db_to_power;
use ibc_diversity::selection::{select, SchemeId};

fn main() {
    let (k, n_r, n, snr_db) = (4, 3, 20, 30.0);
    let mut channel_rng = RngStream::derive(7, Purpose::Channels, 0, 0);
    let group = sample_user_group(n, k, n_r, db_to_power(snr_db), &mut channel_rng).expect("valid group");
    let mut selection_rng = RngStream::derive(7, Purpose::Selection, 0, 0);

    println!("K={k} Nr={n_r} N={n} SNR={snr_db} dB");
    println!("{:<16} {:>5} {:>10} {:>8} {:>8} {:>8}", "scheme", "user", "SINR", "rate", "gain", "loss");
    for scheme in [
        SchemeId::MaxSnr,
        SchemeId::MinInr,
        SchemeId::MaxSinr,
        SchemeId::MinIam,
        SchemeId::TwoStage { n1: 4, n2: 5 },
        SchemeId::RandomBaseline,
    ] {
        let o = select(scheme, &group, &mut selection_rng).expect("selection succeeds");
        println!(
            "{:<16} {:>5} {:>10.3} {:>8.3} {:>8.3} {:>8.3}",
            scheme.to_string(),
            o.user_index,
            o.sinr,
            o.rate,
            o.rate_gain,
            o.rate_loss
        );
    }
}
