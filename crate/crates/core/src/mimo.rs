//! Multi-antenna transmitters with random orthonormal beams.
//!
//! Each transmitter sends `n_t` streams along Haar-random orthonormal beams
//! with power `P/n_t` each. For the stream on beam `i` of the serving
//! transmitter, a user sees one desired effective channel `H·u_i` and
//! `K·n_t − 1` interfering effective channels: the other beams of its own
//! transmitter and every beam of the other transmitters. Each beam then
//! becomes an ordinary single-stream selection problem.

use rand::Rng;

use crate::channel::{sample_haar_beams, BeamSet, ChannelMatrix, UserChannelSet};
use crate::error::{Error, Result};
use crate::numerics::CVec;
use crate::selection::{select, SchemeId, SelectionOutcome};

/// Homogeneous multi-antenna configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MimoConfig {
    /// Transmitters.
    pub k: usize,
    /// Transmit antennas (and beams) per transmitter.
    pub n_t: usize,
    /// Receive antennas per user.
    pub n_r: usize,
    /// Users per group.
    pub n: usize,
    /// Total power per transmitter.
    pub power: f64,
}

impl MimoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n_t == 0 || self.n_r == 0 || self.n == 0 {
            return Err(Error::Config("K, n_t, n_r and N must all be positive".into()));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::Config(format!("power must be positive, got {}", self.power)));
        }
        Ok(())
    }

    /// Power carried by each beam.
    pub fn beam_power(&self) -> f64 {
        self.power / self.n_t as f64
    }

    /// Interferers seen on every beam.
    pub fn interferer_count(&self) -> usize {
        self.k * self.n_t - 1
    }

    /// Whether the receive dimension is below the total stream count, the
    /// interference-limited regime the selection schemes target.
    pub fn interference_limited(&self) -> bool {
        self.n_r < self.k * self.n_t
    }
}

/// Builds the single-stream view of beam `beam` for one user.
///
/// `channels[k]` is the `n_r × n_t` channel from transmitter `k` (index 0 is
/// the serving transmitter) and `beams[k]` that transmitter's beams.
pub fn effective_channels(
    channels: &[ChannelMatrix],
    beams: &[BeamSet],
    beam: usize,
    power: f64,
) -> Result<UserChannelSet> {
    if channels.is_empty() || channels.len() != beams.len() {
        return Err(Error::DimensionMismatch {
            expected: channels.len(),
            found: beams.len(),
        });
    }
    let n_t = beams[0].len();
    if beam >= n_t {
        return Err(Error::Domain(format!("beam {beam} out of range for {n_t} beams")));
    }
    let n_r = channels[0].rows();
    for (h, b) in channels.iter().zip(beams) {
        if h.rows() != n_r {
            return Err(Error::DimensionMismatch {
                expected: n_r,
                found: h.rows(),
            });
        }
        if h.cols() != n_t || b.len() != n_t {
            return Err(Error::DimensionMismatch {
                expected: n_t,
                found: if h.cols() != n_t { h.cols() } else { b.len() },
            });
        }
    }
    let project = |h: &ChannelMatrix, b: &BeamSet, j: usize| -> Result<CVec> {
        if b.is_identity() {
            Ok(h.column(j).clone())
        } else {
            h.mul_vec(&b.beams()[j])
        }
    };
    let desired = project(&channels[0], &beams[0], beam)?;
    let mut interferers = Vec::with_capacity(channels.len() * n_t - 1);
    for j in (0..n_t).filter(|&j| j != beam) {
        interferers.push(project(&channels[0], &beams[0], j)?);
    }
    for (h, b) in channels.iter().zip(beams).skip(1) {
        for j in 0..n_t {
            interferers.push(project(h, b, j)?);
        }
    }
    UserChannelSet::new(desired, interferers, power)
}

/// One channel realization: every user's channel from every transmitter and
/// every transmitter's beams.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoDraw {
    config: MimoConfig,
    /// `channels[n][k]`: user `n`, transmitter `k`.
    channels: Vec<Vec<ChannelMatrix>>,
    beams: Vec<BeamSet>,
}

impl MimoDraw {
    /// Draws channels user by user, then transmitter by transmitter, from
    /// `channel_rng`, and beams from `beam_rng`. With `n_t = 1` no beams are
    /// drawn and the channel entries match [`crate::channel::sample_user_group`]
    /// on the same stream.
    pub fn sample<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        config: MimoConfig,
        channel_rng: &mut R1,
        beam_rng: &mut R2,
    ) -> Result<Self> {
        config.validate()?;
        let channels = (0..config.n)
            .map(|_| {
                (0..config.k)
                    .map(|_| ChannelMatrix::sample(config.n_r, config.n_t, channel_rng))
                    .collect()
            })
            .collect();
        let beams = if config.n_t == 1 {
            vec![BeamSet::identity(1); config.k]
        } else {
            (0..config.k).map(|_| sample_haar_beams(config.n_t, beam_rng)).collect()
        };
        Ok(MimoDraw {
            config,
            channels,
            beams,
        })
    }

    /// Wraps given channels (`channels[n][k]`) and beams.
    pub fn new(config: MimoConfig, channels: Vec<Vec<ChannelMatrix>>, beams: Vec<BeamSet>) -> Result<Self> {
        config.validate()?;
        if channels.len() != config.n {
            return Err(Error::DimensionMismatch {
                expected: config.n,
                found: channels.len(),
            });
        }
        if beams.len() != config.k {
            return Err(Error::DimensionMismatch {
                expected: config.k,
                found: beams.len(),
            });
        }
        let draw = MimoDraw {
            config,
            channels,
            beams,
        };
        // validate shapes once
        draw.beam_group(0)?;
        Ok(draw)
    }

    pub fn config(&self) -> &MimoConfig {
        &self.config
    }

    pub fn beams(&self) -> &[BeamSet] {
        &self.beams
    }

    /// Every user's single-stream view of beam `beam`.
    pub fn beam_group(&self, beam: usize) -> Result<Vec<UserChannelSet>> {
        let power = self.config.beam_power();
        self.channels
            .iter()
            .map(|h| effective_channels(h, &self.beams, beam, power))
            .collect()
    }
}

/// Per-beam selections at the serving transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamUserAssignment {
    /// One outcome per beam; `outcome.user_index` is the selected user. The
    /// same user may hold several beams.
    pub per_beam: Vec<SelectionOutcome>,
    /// Sum of per-beam rates.
    pub rate: f64,
    pub rate_gain: f64,
    pub rate_loss: f64,
}

impl BeamUserAssignment {
    pub fn users(&self) -> Vec<usize> {
        self.per_beam.iter().map(|o| o.user_index).collect()
    }
}

/// Selects one user for each beam of the serving transmitter. Every beam
/// is scheduled on the same draw; a user holding several beams decodes each
/// stream separately, treating the others as interference.
pub fn assign_beams<R: Rng + ?Sized>(draw: &MimoDraw, scheme: SchemeId, rng: &mut R) -> Result<BeamUserAssignment> {
    let mut per_beam = Vec::with_capacity(draw.config.n_t);
    for beam in 0..draw.config.n_t {
        let group = draw.beam_group(beam)?;
        per_beam.push(select(scheme, &group, rng)?);
    }
    // a single beam is passed through without re-summing so n_t = 1 is exact
    let (rate, rate_gain, rate_loss) = if per_beam.len() == 1 {
        (per_beam[0].rate, per_beam[0].rate_gain, per_beam[0].rate_loss)
    } else {
        per_beam.iter().fold((0.0, 0.0, 0.0), |acc, o| {
            (acc.0 + o.rate, acc.1 + o.rate_gain, acc.2 + o.rate_loss)
        })
    };
    Ok(BeamUserAssignment {
        per_beam,
        rate,
        rate_gain,
        rate_loss,
    })
}

/// Draws one realization from `rng` (channels, then beams) and schedules
/// every beam with `scheme`, drawing any selection randomness from the same
/// stream afterwards.
pub fn mimo_select_and_rate<R: Rng>(config: MimoConfig, scheme: SchemeId, rng: &mut R) -> Result<BeamUserAssignment> {
    config.validate()?;
    let channels: Vec<Vec<ChannelMatrix>> = (0..config.n)
        .map(|_| {
            (0..config.k)
                .map(|_| ChannelMatrix::sample(config.n_r, config.n_t, rng))
                .collect()
        })
        .collect();
    let beams = if config.n_t == 1 {
        vec![BeamSet::identity(1); config.k]
    } else {
        (0..config.k).map(|_| sample_haar_beams(config.n_t, rng)).collect()
    };
    let draw = MimoDraw {
        config,
        channels,
        beams,
    };
    assign_beams(&draw, scheme, rng)
}
