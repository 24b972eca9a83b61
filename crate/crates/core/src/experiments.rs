//! Monte Carlo orchestration: SNR sweeps under user-scaling schedules,
//! degrees-of-freedom slope fits, time-division baselines and empirical
//! checks of the alignment-measure bounds.
//!
//! # Randomness
//!
//! Trial `t` draws its channels from the stream `(seed, Channels, 0, t)` at
//! every SNR point, so a group of `N` users is a prefix of any larger group
//! drawn in the same trial (common random numbers across the sweep). Beams
//! use `(seed, Beams, 0, t)`, selection randomness `(seed, Selection, p, t)`
//! at point `p`, and the time-division baselines `(seed, Tdma, ·, t)`.
//! Trials run in parallel and are reduced in trial order with pairwise
//! summation, so results do not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::alignment::{iam, iam_cdf_lower_bound, min_iam, min_iam_expectation_bound};
use crate::channel::{sample_channel_vector, sample_user_group, Purpose, RngStream};
use crate::error::{Error, Result};
use crate::mimo::{assign_beams, MimoConfig, MimoDraw};
use crate::numerics::{hermitian_eig, orthogonal_complement, CVec, HermitianMat};
use crate::selection::{rate_terms, select, RateTerms, SchemeId};
use crate::channel::UserChannelSet;

/// Default ceiling on the number of users a schedule may request.
pub const DEFAULT_USER_CAP: usize = 1_000_000;

/// `P = 10^{snr_db/10}` (unit noise power).
pub fn db_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// How the number of users grows with the transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// `N` users at every power.
    Fixed(usize),
    /// `N = round(a·P^b)`.
    PowerLaw { a: f64, b: f64 },
    /// `N = round(a·exp(P^b)·P^c)`.
    ExpPower { a: f64, b: f64, c: f64 },
}

/// A user-scaling schedule with a safety cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSchedule {
    pub kind: ScheduleKind,
    pub cap: usize,
}

impl ScalingSchedule {
    pub fn new(kind: ScheduleKind) -> Self {
        ScalingSchedule {
            kind,
            cap: DEFAULT_USER_CAP,
        }
    }

    pub fn fixed(n: usize) -> Self {
        Self::new(ScheduleKind::Fixed(n))
    }

    pub fn power_law(a: f64, b: f64) -> Self {
        Self::new(ScheduleKind::PowerLaw { a, b })
    }

    pub fn exp_power(a: f64, b: f64, c: f64) -> Self {
        Self::new(ScheduleKind::ExpPower { a, b, c })
    }

    pub fn with_cap(self, cap: usize) -> Self {
        ScalingSchedule { cap, ..self }
    }
}

impl fmt::Display for ScalingSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ScheduleKind::Fixed(n) => write!(f, "fixed:{n}"),
            ScheduleKind::PowerLaw { a, b } => write!(f, "powerlaw:{a}:{b}"),
            ScheduleKind::ExpPower { a, b, c } => write!(f, "exppower:{a}:{b}:{c}"),
        }
    }
}

impl FromStr for ScalingSchedule {
    type Err = Error;

    /// Parses `fixed:N`, `powerlaw:a:b` or `exppower:a:b:c`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |x: &str| -> Result<f64> {
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("bad number '{x}' in schedule '{s}'")))
        };
        let kind = match parts.as_slice() {
            ["fixed", n] => {
                let n: usize = n
                    .parse()
                    .map_err(|_| Error::Config(format!("bad user count in schedule '{s}'")))?;
                if n == 0 {
                    return Err(Error::Config("fixed schedule needs at least one user".into()));
                }
                ScheduleKind::Fixed(n)
            }
            ["powerlaw", a, b] => ScheduleKind::PowerLaw { a: num(a)?, b: num(b)? },
            ["exppower", a, b, c] => ScheduleKind::ExpPower {
                a: num(a)?,
                b: num(b)?,
                c: num(c)?,
            },
            _ => return Err(Error::Config(format!("unknown schedule '{s}'"))),
        };
        if let ScheduleKind::PowerLaw { a, .. } | ScheduleKind::ExpPower { a, .. } = kind {
            if a <= 0.0 {
                return Err(Error::Config(format!("schedule prefactor must be positive in '{s}'")));
            }
        }
        Ok(ScalingSchedule::new(kind))
    }
}

/// Number of users the schedule assigns at transmit power `power`
/// (nearest integer, at least one).
pub fn users_at(schedule: &ScalingSchedule, power: f64) -> Result<usize> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Domain(format!("power must be positive, got {power}")));
    }
    let users = match schedule.kind {
        ScheduleKind::Fixed(n) => n as f64,
        ScheduleKind::PowerLaw { a, b } => (a * power.powf(b)).round(),
        ScheduleKind::ExpPower { a, b, c } => (a * power.powf(b).exp() * power.powf(c)).round(),
    }
    .max(1.0);
    if !(users <= schedule.cap as f64) {
        return Err(Error::CapExceeded {
            snr_db: 10.0 * power.log10(),
            users,
            cap: schedule.cap,
        });
    }
    Ok(users as usize)
}

/// What a transmitter does at each operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// All transmitters active; user chosen by a selection scheme.
    Select(SchemeId),
    /// One transmitter active at a time; best user by channel gain.
    Tdma1,
    /// `n_r` transmitters active at a time; each user zero-forces the other
    /// `n_r − 1`, best user by post-projection gain.
    Tdma2,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Select(s) => s.fmt(f),
            Strategy::Tdma1 => write!(f, "tdma1"),
            Strategy::Tdma2 => write!(f, "tdma2"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tdma1" => Ok(Strategy::Tdma1),
            "tdma2" => Ok(Strategy::Tdma2),
            other => other.parse().map(Strategy::Select),
        }
    }
}

impl From<SchemeId> for Strategy {
    fn from(s: SchemeId) -> Self {
        Strategy::Select(s)
    }
}

/// One SNR sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Transmitters.
    pub k: usize,
    /// Receive antennas per user.
    pub n_r: usize,
    /// Transmit antennas (beams) per transmitter.
    pub n_t: usize,
    pub strategy: Strategy,
    pub schedule: ScalingSchedule,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n_r == 0 || self.n_t == 0 {
            return Err(Error::Config("K, Nr and Nt must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("need at least one trial".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("SNR grid must be a non-empty list of finite values".into()));
        }
        match self.strategy {
            Strategy::Select(_) if self.n_t == 1 && self.k < 2 => {
                Err(Error::Config("single-antenna selection needs K ≥ 2".into()))
            }
            Strategy::Tdma1 | Strategy::Tdma2 if self.n_t != 1 => {
                Err(Error::Config("time-division baselines are defined for Nt = 1".into()))
            }
            Strategy::Tdma2 if self.n_r > self.k => {
                Err(Error::Config(format!("tdma2 needs Nr ≤ K, got Nr={} K={}", self.n_r, self.k)))
            }
            _ => Ok(()),
        }
    }

    /// Users at every SNR point, failing on the first point over the cap.
    pub fn users(&self) -> Result<Vec<usize>> {
        self.snr_db
            .iter()
            .map(|&db| users_at(&self.schedule, db_to_power(db)))
            .collect()
    }
}

/// Average per-transmitter rate along an SNR sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub k: usize,
    pub n_r: usize,
    pub n_t: usize,
    pub strategy: Strategy,
    pub schedule: ScalingSchedule,
    pub snr_db: Vec<f64>,
    pub users: Vec<usize>,
    pub rate_mean: Vec<f64>,
    pub rate_stderr: Vec<f64>,
    pub rate_gain_mean: Vec<f64>,
    pub rate_loss_mean: Vec<f64>,
    /// Standard error of the rate gain and loss means.
    pub rate_gain_stderr: Vec<f64>,
    pub rate_loss_stderr: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl RateCurve {
    pub fn len(&self) -> usize {
        self.snr_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snr_db.is_empty()
    }
}

/// Sum in a fixed binary-tree order: the result depends only on the input
/// sequence, and rounding error grows like `log n`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Least-squares slope of `rate_mean` against `log₂ P` over the last
/// `window` points.
pub fn dof_slope(curve: &RateCurve, window: usize) -> Result<f64> {
    slope_of(&curve.snr_db, &curve.rate_mean, window)
}

/// Slope of arbitrary `values` against `log₂ P`, last `window` points.
pub fn slope_of(snr_db: &[f64], values: &[f64], window: usize) -> Result<f64> {
    let len = snr_db.len().min(values.len());
    if window < 2 || window > len {
        return Err(Error::Window { window, len });
    }
    let x: Vec<f64> = snr_db[len - window..len]
        .iter()
        .map(|db| db / 10.0 * std::f64::consts::LOG2_10)
        .collect();
    let y = &values[len - window..len];
    let mx = x.iter().sum::<f64>() / window as f64;
    let my = y.iter().sum::<f64>() / window as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("slope needs distinct SNR values".into()));
    }
    Ok(sxy / sxx)
}

/// Best single-transmitter rate `max_n log₂(1 + P‖h_n‖²)` for one trial,
/// before the `1/K` time share. Only desired channels are drawn.
fn tdma1_trial(n_r: usize, n: usize, power: f64, seed: u64, trial: usize) -> RateTerms {
    let mut rng = RngStream::derive(seed, Purpose::Tdma, 0, trial);
    let best = (0..n)
        .map(|_| sample_channel_vector(n_r, &mut rng).norm_sqr())
        .fold(0.0, f64::max);
    let rate = (1.0 + power * best).log2();
    RateTerms {
        rate,
        rate_gain: rate,
        rate_loss: 0.0,
    }
}

/// Zero-forcing rate for one trial with `n_r` simultaneous transmitters,
/// before the `n_r/K` time share: each user projects its desired channel
/// onto the complement of its `n_r − 1` interferers; the user with the
/// largest projected gain is served with the normalized projection.
fn tdma2_trial(n_r: usize, n: usize, power: f64, seed: u64, trial: usize) -> Result<RateTerms> {
    let mut rng = RngStream::derive(seed, Purpose::Tdma, 1, trial);
    let mut best: Option<(f64, CVec, UserChannelSet)> = None;
    for _ in 0..n {
        let desired = sample_channel_vector(n_r, &mut rng);
        let interferers: Vec<CVec> = (1..n_r).map(|_| sample_channel_vector(n_r, &mut rng)).collect();
        let projected = if interferers.is_empty() {
            desired.clone()
        } else {
            let mut p = CVec::zeros(n_r);
            for b in orthogonal_complement(n_r, &interferers) {
                let coef = b.dot(&desired);
                for (pi, bi) in p.as_mut_slice().iter_mut().zip(b.as_slice()) {
                    *pi += bi * coef;
                }
            }
            p
        };
        let gain = projected.norm_sqr();
        if best.as_ref().is_none_or(|b| gain > b.0) {
            best = Some((gain, projected, UserChannelSet::new(desired, interferers, power)?));
        }
    }
    let (_, projected, user) = best.ok_or(Error::EmptyGroup)?;
    let v = projected.normalized().ok_or(Error::ZeroChannel)?;
    rate_terms(&v, &user)
}

fn check_tdma(k: usize, n_r: usize, n: usize, power: f64, trials: usize) -> Result<()> {
    if k == 0 || n_r == 0 || n == 0 || trials == 0 {
        return Err(Error::Config("K, Nr, N and trials must be positive".into()));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Domain(format!("power must be positive, got {power}")));
    }
    Ok(())
}

/// `(1/K)·E[max_n log₂(1 + P‖h_n‖²)]`: one transmitter at a time.
pub fn tdma1_rate(k: usize, n_r: usize, n: usize, power: f64, trials: usize, seed: u64) -> Result<f64> {
    check_tdma(k, n_r, n, power, trials)?;
    let rates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| tdma1_trial(n_r, n, power, seed, t).rate)
        .collect();
    Ok(mean_and_stderr(&rates).0 / k as f64)
}

/// `(n_r/K)·E[zero-forcing rate]` with `n_r` transmitters active at a time.
pub fn tdma2_rate(k: usize, n_r: usize, n: usize, power: f64, trials: usize, seed: u64) -> Result<f64> {
    check_tdma(k, n_r, n, power, trials)?;
    if n_r > k {
        return Err(Error::Config(format!("tdma2 needs Nr ≤ K, got Nr={n_r} K={k}")));
    }
    let rates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| tdma2_trial(n_r, n, power, seed, t).map(|r| r.rate))
        .collect::<Result<_>>()?;
    Ok(mean_and_stderr(&rates).0 * n_r as f64 / k as f64)
}

/// Runs one trial at one SNR point for every strategy, sharing the channel
/// draw between the selection strategies.
fn run_trial(
    base: &ExperimentConfig,
    strategies: &[Strategy],
    point: usize,
    n: usize,
    power: f64,
    trial: usize,
) -> Result<Vec<RateTerms>> {
    let seed = base.seed;
    let needs_selection = strategies.iter().any(|s| matches!(s, Strategy::Select(_)));
    enum Draw {
        Simo(Vec<UserChannelSet>),
        Mimo(MimoDraw),
    }
    let draw = if !needs_selection {
        None
    } else {
        let mut channel_rng = RngStream::derive(seed, Purpose::Channels, 0, trial);
        Some(if base.n_t == 1 {
            Draw::Simo(sample_user_group(n, base.k, base.n_r, power, &mut channel_rng)?)
        } else {
            let cfg = MimoConfig {
                k: base.k,
                n_t: base.n_t,
                n_r: base.n_r,
                n,
                power,
            };
            let mut beam_rng = RngStream::derive(seed, Purpose::Beams, 0, trial);
            Draw::Mimo(MimoDraw::sample(cfg, &mut channel_rng, &mut beam_rng)?)
        })
    };
    strategies
        .iter()
        .map(|strategy| match strategy {
            Strategy::Select(scheme) => {
                let mut rng = RngStream::derive(seed, Purpose::Selection, point, trial);
                match draw.as_ref().expect("drawn when a selection strategy is present") {
                    Draw::Simo(group) => select(*scheme, group, &mut rng).map(|o| o.terms()),
                    Draw::Mimo(d) => assign_beams(d, *scheme, &mut rng).map(|a| RateTerms {
                        rate: a.rate,
                        rate_gain: a.rate_gain,
                        rate_loss: a.rate_loss,
                    }),
                }
            }
            Strategy::Tdma1 => {
                let t = tdma1_trial(base.n_r, n, power, seed, trial);
                let share = 1.0 / base.k as f64;
                Ok(RateTerms {
                    rate: t.rate * share,
                    rate_gain: t.rate_gain * share,
                    rate_loss: t.rate_loss * share,
                })
            }
            Strategy::Tdma2 => {
                let t = tdma2_trial(base.n_r, n, power, seed, trial)?;
                let share = base.n_r as f64 / base.k as f64;
                Ok(RateTerms {
                    rate: t.rate * share,
                    rate_gain: t.rate_gain * share,
                    rate_loss: t.rate_loss * share,
                })
            }
        })
        .collect()
}

/// Runs one sweep per strategy on shared channel draws. Each returned curve
/// is identical to running [`run_rate_curve`] with that strategy alone.
/// `base.strategy` is ignored.
pub fn run_rate_curves(base: &ExperimentConfig, strategies: &[Strategy]) -> Result<Vec<RateCurve>> {
    if strategies.is_empty() {
        return Err(Error::Config("no strategies given".into()));
    }
    for &s in strategies {
        ExperimentConfig {
            strategy: s,
            ..base.clone()
        }
        .validate()?;
    }
    let users = base.users()?;
    let mut curves: Vec<RateCurve> = strategies
        .iter()
        .map(|&strategy| RateCurve {
            k: base.k,
            n_r: base.n_r,
            n_t: base.n_t,
            strategy,
            schedule: base.schedule,
            snr_db: base.snr_db.clone(),
            users: users.clone(),
            rate_mean: Vec::new(),
            rate_stderr: Vec::new(),
            rate_gain_mean: Vec::new(),
            rate_loss_mean: Vec::new(),
            rate_gain_stderr: Vec::new(),
            rate_loss_stderr: Vec::new(),
            trials: base.trials,
            seed: base.seed,
        })
        .collect();
    for (point, (&db, &n)) in base.snr_db.iter().zip(&users).enumerate() {
        let power = db_to_power(db);
        let per_trial: Vec<Vec<RateTerms>> = (0..base.trials)
            .into_par_iter()
            .map(|t| run_trial(base, strategies, point, n, power, t))
            .collect::<Result<_>>()?;
        for (s, curve) in curves.iter_mut().enumerate() {
            let column = |f: fn(&RateTerms) -> f64| -> Vec<f64> { per_trial.iter().map(|r| f(&r[s])).collect() };
            let (rate, rate_se) = mean_and_stderr(&column(|r| r.rate));
            let (gain, gain_se) = mean_and_stderr(&column(|r| r.rate_gain));
            let (loss, loss_se) = mean_and_stderr(&column(|r| r.rate_loss));
            curve.rate_mean.push(rate);
            curve.rate_stderr.push(rate_se);
            curve.rate_gain_mean.push(gain);
            curve.rate_gain_stderr.push(gain_se);
            curve.rate_loss_mean.push(loss);
            curve.rate_loss_stderr.push(loss_se);
        }
    }
    Ok(curves)
}

/// Runs the sweep described by `cfg`.
pub fn run_rate_curve(cfg: &ExperimentConfig) -> Result<RateCurve> {
    Ok(run_rate_curves(cfg, &[cfg.strategy])?.remove(0))
}

/// Settings of the bound-validation suite.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub k: usize,
    pub n_r: usize,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Thresholds of the distribution table.
    pub lambdas: Vec<f64>,
    /// SNR points of the rate-loss comparison.
    pub rloss_snr_db: Vec<f64>,
}

impl BoundsConfig {
    pub fn new(k: usize, n_r: usize, n_list: Vec<usize>, trials: usize, seed: u64) -> Self {
        BoundsConfig {
            k,
            n_r,
            n_list,
            trials,
            seed,
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            rloss_snr_db: DEFAULT_RLOSS_SNR_DB.to_vec(),
        }
    }
}

pub const DEFAULT_LAMBDAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 1.0];
pub const DEFAULT_RLOSS_SNR_DB: [f64; 3] = [10.0, 20.0, 30.0];
/// Users per trial whose measure enters the empirical distribution.
pub const CDF_USERS_PER_TRIAL: usize = 10;
/// Allowed shortfall of the empirical distribution below its bound.
pub const CDF_SLACK: f64 = 0.01;

/// One `(N, λ)` row of the validation table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub n: usize,
    pub lambda: f64,
    pub empirical_cdf: f64,
    pub bound_cdf: f64,
    pub empirical_min_mean: f64,
    pub empirical_min_stderr: f64,
    pub bound_mean: f64,
    pub pass: bool,
}

/// Rate loss of minimum-INR selection against its closed-form bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RlossRow {
    pub n: usize,
    pub snr_db: f64,
    pub empirical_mean: f64,
    pub empirical_stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
    pub rloss: Vec<RlossRow>,
}

impl BoundsReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.rloss.iter().all(|r| r.pass)
    }
}

/// `log₂(1 + n_r P (K−1) N^{−1/(K−n_r)})`, the rate-loss bound of selecting
/// the best-aligned of `N` users.
pub fn rate_loss_bound(n: usize, k: usize, n_r: usize, power: f64) -> Result<f64> {
    let e = min_iam_expectation_bound(n, k, n_r)?;
    Ok((1.0 + n_r as f64 * power * (k - 1) as f64 * e).log2())
}

struct BoundsTrial {
    /// Measures of the first users (distribution sample).
    cdf_sample: Vec<f64>,
    /// Per entry of the sorted N list: smallest measure over the first N users.
    min_iam: Vec<f64>,
    /// Per entry: smallest `λ_min(Σ h h†)` over the first N users.
    min_inr: Vec<f64>,
}

fn bounds_trial(cfg: &BoundsConfig, ns: &[usize], trial: usize) -> Result<BoundsTrial> {
    let n_max = *ns.last().expect("non-empty");
    let mut rng = RngStream::derive(cfg.seed, Purpose::Bounds, 0, trial);
    let users: Vec<Vec<CVec>> = (0..n_max)
        .map(|_| (1..cfg.k).map(|_| sample_channel_vector(cfg.n_r, &mut rng)).collect())
        .collect();
    let directions: Vec<Vec<CVec>> = users
        .iter()
        .map(|u| u.iter().map(|h| h.normalized().ok_or(Error::ZeroChannel)).collect())
        .collect::<Result<_>>()?;
    let cdf_sample = directions[..CDF_USERS_PER_TRIAL.min(n_max)]
        .iter()
        .map(|d| iam(d).map(|r| r.lambda_star))
        .collect::<Result<_>>()?;
    let inr: Vec<f64> = users
        .iter()
        .map(|u| {
            let r = HermitianMat::sum_of_outer(cfg.n_r, 1.0, u)?;
            Ok(hermitian_eig(&r)?.min_eigenvalue().max(0.0))
        })
        .collect::<Result<_>>()?;
    let mut min_iam_values = Vec::with_capacity(ns.len());
    let mut min_inr_values = Vec::with_capacity(ns.len());
    let (mut best_iam, mut best_inr, mut start) = (f64::INFINITY, f64::INFINITY, 0);
    for &n in ns {
        if n > start {
            let (_, r) = min_iam(&directions[start..n])?;
            best_iam = best_iam.min(r.lambda_star);
            best_inr = inr[start..n].iter().copied().fold(best_inr, f64::min);
            start = n;
        }
        min_iam_values.push(best_iam);
        min_inr_values.push(best_inr);
    }
    Ok(BoundsTrial {
        cdf_sample,
        min_iam: min_iam_values,
        min_inr: min_inr_values,
    })
}

/// Empirical checks of the alignment-measure distribution bound, the
/// expected-minimum bound and the induced rate-loss bound.
///
/// For each `N` and `λ`: the empirical distribution of the measure (first
/// [`CDF_USERS_PER_TRIAL`] users of every trial) against its lower bound,
/// with [`CDF_SLACK`]; and the mean over trials of the smallest measure
/// among `N` users, which passes when `mean + 2·stderr < N^{−1/(K−n_r)}`.
/// For each `N` and SNR: the mean rate loss of minimum-INR selection
/// `log₂(1 + P·min_n λ_min(Σ_k h_k h_k†))` against [`rate_loss_bound`],
/// passing when `mean − 2·stderr ≤ bound`.
pub fn validate_bounds(cfg: &BoundsConfig) -> Result<BoundsReport> {
    if cfg.k <= cfg.n_r || cfg.n_r < 2 {
        return Err(Error::Config(format!(
            "bound validation needs K > Nr ≥ 2, got K={} Nr={}",
            cfg.k, cfg.n_r
        )));
    }
    if cfg.n_list.is_empty() || cfg.n_list.contains(&0) || cfg.trials == 0 {
        return Err(Error::Config("need a non-empty list of positive N and at least one trial".into()));
    }
    if cfg.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
        return Err(Error::Config("thresholds must lie in [0, 1]".into()));
    }
    let mut ns = cfg.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let trials: Vec<BoundsTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| bounds_trial(cfg, &ns, t))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut rloss = Vec::new();
    for &n in &cfg.n_list {
        let slot = ns.binary_search(&n).expect("listed");
        let sample: Vec<f64> = trials
            .iter()
            .flat_map(|t| t.cdf_sample[..CDF_USERS_PER_TRIAL.min(n)].iter().copied())
            .collect();
        let minima: Vec<f64> = trials.iter().map(|t| t.min_iam[slot]).collect();
        let (mean, stderr) = mean_and_stderr(&minima);
        let bound_mean = min_iam_expectation_bound(n, cfg.k, cfg.n_r)?;
        let mean_ok = mean + 2.0 * stderr < bound_mean;
        for &lambda in &cfg.lambdas {
            let empirical_cdf = sample.iter().filter(|&&x| x <= lambda).count() as f64 / sample.len() as f64;
            let bound_cdf = iam_cdf_lower_bound(lambda, cfg.k, cfg.n_r)?;
            rows.push(BoundsRow {
                n,
                lambda,
                empirical_cdf,
                bound_cdf,
                empirical_min_mean: mean,
                empirical_min_stderr: stderr,
                bound_mean,
                pass: mean_ok && empirical_cdf >= bound_cdf - CDF_SLACK,
            });
        }
        for &db in &cfg.rloss_snr_db {
            let power = db_to_power(db);
            let losses: Vec<f64> = trials.iter().map(|t| (1.0 + power * t.min_inr[slot]).log2()).collect();
            let (m, se) = mean_and_stderr(&losses);
            let bound = rate_loss_bound(n, cfg.k, cfg.n_r, power)?;
            rloss.push(RlossRow {
                n,
                snr_db: db,
                empirical_mean: m,
                empirical_stderr: se,
                bound,
                pass: m - 2.0 * se <= bound,
            });
        }
    }
    Ok(BoundsReport { rows, rloss })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(strategy: Strategy, schedule: ScalingSchedule, snr_db: Vec<f64>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            k: 4,
            n_r: 3,
            n_t: 1,
            strategy,
            schedule,
            snr_db,
            trials,
            seed: 7,
        }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(users_at(&ScalingSchedule::fixed(10), 1234.0).unwrap(), 10);
        assert_eq!(users_at(&ScalingSchedule::power_law(1.0, 1.0), 100.0).unwrap(), 100);
        assert_eq!(users_at(&ScalingSchedule::power_law(1.0, 0.5), 10000.0).unwrap(), 100);
        assert_eq!(users_at(&ScalingSchedule::power_law(0.001, 1.0), 10.0).unwrap(), 1);
        assert_eq!(users_at(&ScalingSchedule::exp_power(1.0, 0.5, 0.0), 4.0).unwrap(), 7);
        match users_at(&ScalingSchedule::exp_power(1.0, 1.0, 0.0), 100.0) {
            Err(Error::CapExceeded { snr_db, cap, .. }) => {
                assert!((snr_db - 20.0).abs() < 1e-12);
                assert_eq!(cap, DEFAULT_USER_CAP);
            }
            other => panic!("{other:?}"),
        }
        assert!(users_at(&ScalingSchedule::fixed(10).with_cap(5), 1.0).is_err());
        assert!(users_at(&ScalingSchedule::fixed(10), 0.0).is_err());
    }

    #[test]
    fn schedule_syntax() {
        for s in ["fixed:10", "powerlaw:1:0.5", "exppower:2:0.5:1"] {
            assert_eq!(s.parse::<ScalingSchedule>().unwrap().to_string(), s);
        }
        for s in ["fixed:0", "fixed", "powerlaw:1", "powerlaw:-1:1", "linear:3", "powerlaw:x:1"] {
            assert!(s.parse::<ScalingSchedule>().is_err(), "{s}");
        }
    }

    #[test]
    fn strategy_syntax() {
        for s in ["tdma1", "tdma2", "min-inr", "two-stage:3:4"] {
            assert_eq!(s.parse::<Strategy>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let v = vec![0.1; 1000];
        assert!((pairwise_sum(&v) - 100.0).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
        let (m, se) = mean_and_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[5.0]), (5.0, 0.0));
    }

    fn synthetic(snr_db: Vec<f64>, rate: Vec<f64>) -> RateCurve {
        let n = snr_db.len();
        RateCurve {
            k: 2,
            n_r: 1,
            n_t: 1,
            strategy: Strategy::Tdma1,
            schedule: ScalingSchedule::fixed(1),
            snr_db,
            users: vec![1; n],
            rate_mean: rate,
            rate_stderr: vec![0.0; n],
            rate_gain_mean: vec![0.0; n],
            rate_loss_mean: vec![0.0; n],
            rate_gain_stderr: vec![0.0; n],
            rate_loss_stderr: vec![0.0; n],
            trials: 1,
            seed: 0,
        }
    }

    #[test]
    fn slope_of_synthetic_curves() {
        let db: Vec<f64> = (0..9).map(|i| 5.0 * i as f64).collect();
        let lin: Vec<f64> = db.iter().map(|d| 3.0 + d / 10.0 * std::f64::consts::LOG2_10).collect();
        assert!((dof_slope(&synthetic(db.clone(), lin), 3).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(dof_slope(&synthetic(db.clone(), vec![2.5; 9]), 3).unwrap(), 0.0);
        assert!(matches!(
            dof_slope(&synthetic(db.clone(), vec![0.0; 9]), 10),
            Err(Error::Window { window: 10, len: 9 })
        ));
        assert!(dof_slope(&synthetic(db, vec![0.0; 9]), 1).is_err());
    }

    #[test]
    fn single_trial_matches_hand_evaluation() {
        let cfg = ExperimentConfig {
            k: 2,
            n_r: 2,
            ..base(
                Strategy::Select(SchemeId::MaxSnr),
                ScalingSchedule::fixed(1),
                vec![10.0],
                1,
            )
        };
        let curve = run_rate_curve(&cfg).unwrap();
        let mut rng = RngStream::derive(7, Purpose::Channels, 0, 0);
        let group = sample_user_group(1, 2, 2, 10.0, &mut rng).unwrap();
        let u = &group[0];
        let v = u.desired().normalized().unwrap();
        let s = 10.0 * v.abs_dot_sqr(u.desired());
        let i = 10.0 * v.abs_dot_sqr(&u.interferers()[0]);
        let want = (1.0 + s / (1.0 + i)).log2();
        assert!((curve.rate_mean[0] - want).abs() < 1e-12);
        assert_eq!(curve.rate_stderr[0], 0.0);
        assert_eq!(curve.users, vec![1]);
    }

    #[test]
    fn shared_draws_match_single_runs() {
        let strategies = [
            Strategy::Select(SchemeId::MinInr),
            Strategy::Select(SchemeId::RandomBaseline),
            Strategy::Tdma1,
            Strategy::Tdma2,
        ];
        let cfg = base(strategies[0], ScalingSchedule::fixed(4), vec![0.0, 20.0], 16);
        let together = run_rate_curves(&cfg, &strategies).unwrap();
        for (s, curve) in strategies.iter().zip(&together) {
            let alone = run_rate_curve(&ExperimentConfig {
                strategy: *s,
                ..cfg.clone()
            })
            .unwrap();
            assert_eq!(&alone, curve);
        }
    }

    #[test]
    fn curves_are_independent_of_thread_count() {
        let cfg = base(
            Strategy::Select(SchemeId::MaxSinr),
            ScalingSchedule::fixed(5),
            vec![0.0, 10.0, 20.0],
            50,
        );
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_rate_curve(&cfg).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn gain_minus_loss_is_rate() {
        let cfg = base(
            Strategy::Select(SchemeId::MinIam),
            ScalingSchedule::fixed(3),
            vec![10.0, 30.0],
            20,
        );
        let c = run_rate_curve(&cfg).unwrap();
        for i in 0..c.len() {
            assert!((c.rate_gain_mean[i] - c.rate_loss_mean[i] - c.rate_mean[i]).abs() < 1e-9);
            assert!(c.rate_mean[i] >= 0.0 && c.rate_stderr[i] >= 0.0);
        }
    }

    #[test]
    fn mimo_path_runs_and_single_beam_matches_simo() {
        let simo = base(Strategy::Select(SchemeId::MaxSinr), ScalingSchedule::fixed(3), vec![20.0], 10);
        let mimo = ExperimentConfig { n_t: 2, ..simo.clone() };
        let c = run_rate_curve(&mimo).unwrap();
        assert!(c.rate_mean[0] > 0.0);
        // K = 1 with one beam is not a valid single-antenna configuration,
        // but n_t = 1 through the MIMO draw equals the SIMO draw
        let cfg = MimoConfig {
            k: 4,
            n_t: 1,
            n_r: 3,
            n: 3,
            power: 100.0,
        };
        let mut a = RngStream::derive(7, Purpose::Channels, 0, 0);
        let mut b = a.clone();
        let draw = MimoDraw::sample(cfg, &mut a, &mut RngStream::new(0, 0)).unwrap();
        let group = sample_user_group(3, 4, 3, 100.0, &mut b).unwrap();
        assert_eq!(draw.beam_group(0).unwrap(), group);
    }

    #[test]
    fn tdma_prefactors() {
        let one = tdma1_rate(1, 2, 3, 100.0, 50, 1).unwrap();
        let four = tdma1_rate(4, 2, 3, 100.0, 50, 1).unwrap();
        assert_eq!(four, one / 4.0);
        // full activation and the single-antenna reduction
        let full = tdma2_rate(2, 2, 3, 100.0, 50, 1).unwrap();
        assert!(full > 0.0);
        let zf1 = tdma2_rate(3, 1, 3, 100.0, 50, 1).unwrap();
        let t1: Vec<f64> = (0..50).map(|t| tdma2_trial(1, 3, 100.0, 1, t).unwrap().rate).collect();
        assert!((zf1 - mean_and_stderr(&t1).0 / 3.0).abs() < 1e-12);
        assert!(tdma2_rate(2, 3, 3, 100.0, 5, 1).is_err());
    }

    #[test]
    fn tdma2_nulls_interference() {
        for t in 0..20 {
            let r = tdma2_trial(3, 5, 1000.0, 3, t).unwrap();
            assert!(r.rate_loss < 1e-9, "{}", r.rate_loss);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = base(Strategy::Tdma2, ScalingSchedule::fixed(2), vec![0.0], 1);
        cfg.k = 2;
        assert!(run_rate_curve(&cfg).is_err());
        let cfg = base(Strategy::Select(SchemeId::MaxSnr), ScalingSchedule::fixed(2), vec![], 1);
        assert!(run_rate_curve(&cfg).is_err());
        let cfg = base(
            Strategy::Select(SchemeId::MaxSnr),
            ScalingSchedule::exp_power(1.0, 1.0, 0.0),
            vec![0.0, 30.0],
            1,
        );
        assert!(matches!(run_rate_curve(&cfg), Err(Error::CapExceeded { .. })));
        let cfg = base(
            Strategy::Select(SchemeId::TwoStage { n1: 2, n2: 2 }),
            ScalingSchedule::fixed(5),
            vec![0.0],
            1,
        );
        assert!(matches!(run_rate_curve(&cfg), Err(Error::Factorization { .. })));
    }

    #[test]
    fn bounds_report_shape() {
        let cfg = BoundsConfig::new(4, 3, vec![10, 5], 40, 3);
        let report = validate_bounds(&cfg).unwrap();
        assert_eq!(report.rows.len(), 2 * DEFAULT_LAMBDAS.len());
        assert_eq!(report.rloss.len(), 2 * DEFAULT_RLOSS_SNR_DB.len());
        for row in &report.rows {
            if row.lambda == 1.0 {
                assert_eq!(row.empirical_cdf, 1.0);
                assert_eq!(row.bound_cdf, 1.0);
            }
        }
        assert_eq!(report.rows[0].n, 10);
        assert!((report.rows[0].bound_mean - 0.1).abs() < 1e-15);
        assert!(validate_bounds(&BoundsConfig::new(3, 3, vec![10], 5, 0)).is_err());
        assert!((rate_loss_bound(100, 4, 3, 1.0).unwrap() - (1.0 + 3.0 * 3.0 * 0.01_f64).log2()).abs() < 1e-15);
    }
}
