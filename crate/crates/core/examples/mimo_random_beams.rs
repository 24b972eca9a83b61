//! Multi-antenna transmitters with random orthonormal beams: each beam is
//! scheduled separately and sees `K·n_t − 1` interfering streams. With one
//! transmit antenna the result is identical to the single-antenna path.
//!
//! Run with `cargo run --release --example mimo_random_beams`.

use ibc_diversity::channel::{sample_user_group, Purpose, RngStream};
use ibc_diversity::mimo::{mimo_select_and_rate, MimoConfig};
use ibc_diversity::selection::{select, SchemeId};

fn main() {
    for n_t in 1..=3 {
        let config = MimoConfig {
            k: 3,
            n_t,
            n_r: 4,
            n: 30,
            power: 1000.0,
        };
        let mut rng = RngStream::derive(3, Purpose::Misc, n_t, 0);
        let a = mimo_select_and_rate(config, SchemeId::MaxSinr, &mut rng).expect("valid configuration");
        println!(
            "n_t={n_t}: {} interferers per beam, users per beam {:?}, sum rate {:.3} (gain {:.3}, loss {:.3})",
            config.interferer_count(),
            a.users(),
            a.rate,
            a.rate_gain,
            a.rate_loss
        );
    }

    // one transmit antenna reproduces single-antenna selection bit for bit
    let config = MimoConfig {
        k: 3,
        n_t: 1,
        n_r: 2,
        n: 10,
        power: 100.0,
    };
    let mimo = mimo_select_and_rate(config, SchemeId::MinInr, &mut RngStream::new(5, 0)).unwrap();
    let mut rng = RngStream::new(5, 0);
    let group = sample_user_group(10, 3, 2, 100.0, &mut rng).unwrap();
    let simo = select(SchemeId::MinInr, &group, &mut rng).unwrap();
    println!(
        "n_t=1 matches single-antenna path: {}",
        mimo.per_beam[0] == simo && mimo.rate.to_bits() == simo.rate.to_bits()
    );
}
