//! Receive filters, user selection schemes and per-realization rates.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::alignment::min_iam;
use crate::channel::{interference_covariance, UserChannelSet};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, quadratic_form, solve_identity_plus, CVec, HermitianMat};

/// Tolerance on `‖v‖² = 1` for receive filters passed in by callers.
pub const FILTER_UNIT_TOL: f64 = 1e-9;

/// User selection rule applied at one transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeId {
    /// Largest desired channel gain, matched filter.
    MaxSnr,
    /// Smallest `λ_min(R_n)`, minimum-eigenvector filter.
    MinInr,
    /// Largest `h†(I+R)⁻¹h`, MMSE-IRC filter.
    MaxSinr,
    /// Smallest interference alignment measure, minimum-eigenvector filter.
    MinIam,
    /// `n2` blocks of `n1` users: best gain per block, then smallest INR.
    TwoStage { n1: usize, n2: usize },
    /// Uniformly random user, minimum-eigenvector filter.
    RandomBaseline,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::MaxSnr => write!(f, "max-snr"),
            SchemeId::MinInr => write!(f, "min-inr"),
            SchemeId::MaxSinr => write!(f, "max-sinr"),
            SchemeId::MinIam => write!(f, "min-iam"),
            SchemeId::TwoStage { n1, n2 } => write!(f, "two-stage:{n1}:{n2}"),
            SchemeId::RandomBaseline => write!(f, "random"),
        }
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["max-snr"] => Ok(SchemeId::MaxSnr),
            ["min-inr"] => Ok(SchemeId::MinInr),
            ["max-sinr"] => Ok(SchemeId::MaxSinr),
            ["min-iam"] => Ok(SchemeId::MinIam),
            ["random"] => Ok(SchemeId::RandomBaseline),
            ["two-stage", a, b] => {
                let n1 = a.parse().map_err(|_| Error::Config(format!("bad two-stage size '{a}'")))?;
                let n2 = b.parse().map_err(|_| Error::Config(format!("bad two-stage size '{b}'")))?;
                if n1 == 0 || n2 == 0 {
                    return Err(Error::Config("two-stage sizes must be positive".into()));
                }
                Ok(SchemeId::TwoStage { n1, n2 })
            }
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

/// Rates in bits per channel use: `rate = rate_gain − rate_loss`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    pub rate: f64,
    pub rate_gain: f64,
    pub rate_loss: f64,
}

/// Result of selecting one user at a transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub user_index: usize,
    pub postprocess: CVec,
    pub sinr: f64,
    pub snr: f64,
    pub inr: f64,
    pub rate: f64,
    pub rate_gain: f64,
    pub rate_loss: f64,
}

impl SelectionOutcome {
    /// Evaluates filter `v` on user `index`.
    pub fn evaluate(index: usize, v: CVec, u: &UserChannelSet) -> Result<Self> {
        check_unit(&v)?;
        let p = u.power();
        let snr = p * v.abs_dot_sqr(u.desired());
        let inr = p * u.interferers().iter().map(|h| v.abs_dot_sqr(h)).sum::<f64>();
        let terms = rate_terms(&v, u)?;
        Ok(SelectionOutcome {
            user_index: index,
            postprocess: v,
            sinr: snr / (1.0 + inr),
            snr,
            inr,
            rate: terms.rate,
            rate_gain: terms.rate_gain,
            rate_loss: terms.rate_loss,
        })
    }

    pub fn terms(&self) -> RateTerms {
        RateTerms {
            rate: self.rate,
            rate_gain: self.rate_gain,
            rate_loss: self.rate_loss,
        }
    }
}

fn check_unit(v: &CVec) -> Result<()> {
    let norm_sq = v.norm_sqr();
    if (norm_sq - 1.0).abs() > FILTER_UNIT_TOL {
        Err(Error::NotUnit { norm_sq })
    } else {
        Ok(())
    }
}

/// Matched filter `h / ‖h‖`.
pub fn mrc_vector(u: &UserChannelSet) -> Result<CVec> {
    u.desired().normalized().ok_or(Error::ZeroChannel)
}

/// Eigenvector of the smallest eigenvalue of `R`.
pub fn min_inr_vector(r: &HermitianMat) -> Result<CVec> {
    Ok(hermitian_eig(r)?.min_eigenvector().clone())
}

/// MMSE-IRC filter `(I+R)⁻¹h / ‖(I+R)⁻¹h‖`.
pub fn mmse_irc_vector(u: &UserChannelSet) -> Result<CVec> {
    let r = interference_covariance(u);
    let x = solve_identity_plus(&r, u.desired())?;
    x.normalized().ok_or(Error::ZeroChannel)
}

/// `P|v†h|² / v†(I+R)v`.
pub fn postprocessed_sinr(v: &CVec, u: &UserChannelSet) -> Result<f64> {
    check_unit(v)?;
    v.check_dim(u.n_r())?;
    let r = interference_covariance(u);
    let denom = quadratic_form(v, &r.plus_identity())?;
    Ok(u.power() * v.abs_dot_sqr(u.desired()) / denom)
}

/// Achievable rate of filter `v` and its split into the gain term
/// `log₂(1 + P Σ_{k≥1} |v†h_k|²)` and the loss term
/// `log₂(1 + P Σ_{k≥2} |v†h_k|²)`.
pub fn rate_terms(v: &CVec, u: &UserChannelSet) -> Result<RateTerms> {
    check_unit(v)?;
    v.check_dim(u.n_r())?;
    let p = u.power();
    let signal = p * v.abs_dot_sqr(u.desired());
    let interference = p * u.interferers().iter().map(|h| v.abs_dot_sqr(h)).sum::<f64>();
    let rate_gain = (1.0 + signal + interference).log2();
    let rate_loss = (1.0 + interference).log2();
    Ok(RateTerms {
        rate: rate_gain - rate_loss,
        rate_gain,
        rate_loss,
    })
}

/// `h†(I+R)⁻¹h`, the per-user MAX-SINR criterion (SINR divided by `P`).
pub fn mmse_criterion(u: &UserChannelSet) -> Result<f64> {
    let r = interference_covariance(u);
    let x = solve_identity_plus(&r, u.desired())?;
    Ok(u.desired().dot(&x).re)
}

fn argmax_by(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn argmin_by(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn min_inr_outcome(index: usize, u: &UserChannelSet) -> Result<SelectionOutcome> {
    let v = min_inr_vector(&interference_covariance(u))?;
    SelectionOutcome::evaluate(index, v, u)
}

fn smallest_inr(u: &UserChannelSet) -> Result<f64> {
    Ok(hermitian_eig(&interference_covariance(u))?.min_eigenvalue())
}

/// Picks one user of `group` under `scheme`. Ties go to the lowest index.
/// `rng` is only drawn from by [`SchemeId::RandomBaseline`].
pub fn select<R: Rng + ?Sized>(
    scheme: SchemeId,
    group: &[UserChannelSet],
    rng: &mut R,
) -> Result<SelectionOutcome> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    match scheme {
        SchemeId::MaxSnr => {
            let i = argmax_by(group.iter().map(|u| u.desired().norm_sqr()));
            SelectionOutcome::evaluate(i, mrc_vector(&group[i])?, &group[i])
        }
        SchemeId::MinInr => {
            let inr: Vec<f64> = group.iter().map(smallest_inr).collect::<Result<_>>()?;
            let i = argmin_by(inr.into_iter());
            min_inr_outcome(i, &group[i])
        }
        SchemeId::MaxSinr => {
            let crit: Vec<f64> = group.iter().map(mmse_criterion).collect::<Result<_>>()?;
            let i = argmax_by(crit.into_iter());
            SelectionOutcome::evaluate(i, mmse_irc_vector(&group[i])?, &group[i])
        }
        SchemeId::MinIam => {
            let dirs: Vec<Vec<CVec>> = group
                .iter()
                .map(UserChannelSet::normalized_interferers)
                .collect::<Result<_>>()?;
            let (i, _) = min_iam(&dirs)?;
            min_inr_outcome(i, &group[i])
        }
        SchemeId::TwoStage { n1, n2 } => {
            if n1 * n2 != group.len() {
                return Err(Error::Factorization {
                    n1,
                    n2,
                    group: group.len(),
                });
            }
            let winners: Vec<usize> = (0..n2)
                .map(|b| {
                    let block = &group[b * n1..(b + 1) * n1];
                    b * n1 + argmax_by(block.iter().map(|u| u.desired().norm_sqr()))
                })
                .collect();
            let inr: Vec<f64> = winners
                .iter()
                .map(|&i| smallest_inr(&group[i]))
                .collect::<Result<_>>()?;
            let i = winners[argmin_by(inr.into_iter())];
            min_inr_outcome(i, &group[i])
        }
        SchemeId::RandomBaseline => {
            let i = rng.random_range(0..group.len());
            min_inr_outcome(i, &group[i])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_unit_vector, sample_user_group, RngStream};
    use num_complex::Complex64;

    fn user(desired: &[f64], interferers: &[&[f64]], power: f64) -> UserChannelSet {
        UserChannelSet::new(
            CVec::from_real(desired),
            interferers.iter().map(|h| CVec::from_real(h)).collect(),
            power,
        )
        .unwrap()
    }

    #[test]
    fn matched_filter() {
        let u = user(&[2.0, 0.0], &[&[0.0, 1.0]], 1.0);
        assert_eq!(mrc_vector(&u).unwrap(), CVec::from_real(&[1.0, 0.0]));
        let mut rng = RngStream::new(1, 1);
        let g = sample_user_group(1, 2, 3, 1.0, &mut rng).unwrap().remove(0);
        let v = mrc_vector(&g).unwrap();
        let h = g.desired();
        assert!((v.abs_dot_sqr(h) - h.norm_sqr()).abs() < 1e-12);
        for _ in 0..100 {
            let w = sample_unit_vector(3, &mut rng);
            assert!(w.abs_dot_sqr(h) <= h.norm_sqr() + 1e-12);
        }
        let zero = user(&[0.0, 0.0], &[&[1.0, 0.0]], 1.0);
        assert_eq!(mrc_vector(&zero), Err(Error::ZeroChannel));
    }

    #[test]
    fn min_inr_filter() {
        let v = min_inr_vector(&HermitianMat::diag(&[5.0, 1.0])).unwrap();
        assert_eq!(v, CVec::basis(2, 1));
        let g = CVec::new(vec![Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.7)]);
        let mut r = HermitianMat::zeros(2);
        r.add_outer(100.0, &g).unwrap();
        let v = min_inr_vector(&r).unwrap();
        assert!(quadratic_form(&v, &r).unwrap() <= 1e-9);
    }

    #[test]
    fn mmse_without_interference_is_matched_filter() {
        let u = user(&[3.0, 4.0], &[&[0.0, 0.0]], 2.0);
        let v = mmse_irc_vector(&u).unwrap();
        assert!((v.abs_dot_sqr(&mrc_vector(&u).unwrap()) - 1.0).abs() < 1e-15);
        assert!((postprocessed_sinr(&v, &u).unwrap() - 2.0 * 25.0).abs() < 1e-12);
    }

    #[test]
    fn mmse_diagonal_closed_form() {
        // interferers along the axes give R = diag(P·4, P·9)
        let p = 3.0;
        let u = user(&[1.0, 2.0], &[&[2.0, 0.0], &[0.0, 3.0]], p);
        let (r1, r2) = (p * 4.0, p * 9.0);
        let want = p * (1.0 / (1.0 + r1) + 4.0 / (1.0 + r2));
        let v = mmse_irc_vector(&u).unwrap();
        assert!((postprocessed_sinr(&v, &u).unwrap() - want).abs() < 1e-12);
        assert!((p * mmse_criterion(&u).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn sinr_cases() {
        let u = user(&[1.0, 0.0], &[&[0.0, 1.0]], 5.0);
        assert_eq!(postprocessed_sinr(&CVec::basis(2, 1), &u).unwrap(), 0.0);
        assert!(postprocessed_sinr(&CVec::from_real(&[1.0, 1.0]), &u).is_err());
    }

    #[test]
    fn rate_terms_cases() {
        let u = UserChannelSet::new(CVec::from_real(&[1.0, 1.0]), vec![], 4.0).unwrap();
        let v = CVec::from_real(&[1.0, 0.0]);
        let t = rate_terms(&v, &u).unwrap();
        assert_eq!(t.rate_loss, 0.0);
        assert!((t.rate - 5.0_f64.log2()).abs() < 1e-15);

        let u = user(&[1.0, 1.0], &[&[0.0, 2.0], &[0.0, -1.0]], 4.0);
        let t = rate_terms(&v, &u).unwrap();
        assert_eq!(t.rate_loss, 0.0);
    }

    #[test]
    fn single_user_group_selects_it() {
        let mut rng = RngStream::new(2, 2);
        let g = sample_user_group(1, 4, 3, 10.0, &mut rng).unwrap();
        for scheme in [
            SchemeId::MaxSnr,
            SchemeId::MinInr,
            SchemeId::MaxSinr,
            SchemeId::MinIam,
            SchemeId::TwoStage { n1: 1, n2: 1 },
            SchemeId::RandomBaseline,
        ] {
            assert_eq!(select(scheme, &g, &mut rng).unwrap().user_index, 0);
        }
    }

    #[test]
    fn max_snr_picks_strongest() {
        let mut rng = RngStream::new(3, 3);
        let mut g = sample_user_group(6, 3, 2, 10.0, &mut rng).unwrap();
        g[3] = UserChannelSet::new(
            CVec::from_real(&[10.0, 10.0]),
            g[3].interferers().to_vec(),
            10.0,
        )
        .unwrap();
        assert_eq!(select(SchemeId::MaxSnr, &g, &mut rng).unwrap().user_index, 3);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let u = user(&[1.0, 0.0], &[&[0.0, 1.0], &[1.0, 1.0]], 2.0);
        let g = vec![u.clone(), u.clone(), u];
        let mut rng = RngStream::new(0, 0);
        for scheme in [SchemeId::MaxSnr, SchemeId::MinInr, SchemeId::MaxSinr, SchemeId::MinIam] {
            assert_eq!(select(scheme, &g, &mut rng).unwrap().user_index, 0);
        }
    }

    #[test]
    fn selection_errors() {
        let mut rng = RngStream::new(0, 0);
        assert_eq!(select(SchemeId::MaxSnr, &[], &mut rng), Err(Error::EmptyGroup));
        let g = sample_user_group(6, 3, 2, 1.0, &mut rng).unwrap();
        assert!(matches!(
            select(SchemeId::TwoStage { n1: 4, n2: 2 }, &g, &mut rng),
            Err(Error::Factorization { .. })
        ));
    }

    #[test]
    fn two_stage_uses_block_winners() {
        let mut rng = RngStream::new(4, 4);
        let g = sample_user_group(12, 4, 3, 100.0, &mut rng).unwrap();
        let out = select(SchemeId::TwoStage { n1: 3, n2: 4 }, &g, &mut rng).unwrap();
        let block = out.user_index / 3;
        let best_in_block = (block * 3..block * 3 + 3)
            .max_by(|&a, &b| g[a].desired().norm_sqr().total_cmp(&g[b].desired().norm_sqr()))
            .unwrap();
        assert_eq!(out.user_index, best_in_block);
        // n1 = 1 reduces to MIN-INR
        let a = select(SchemeId::TwoStage { n1: 1, n2: 12 }, &g, &mut rng).unwrap();
        let b = select(SchemeId::MinInr, &g, &mut rng).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn max_sinr_dominates_other_schemes() {
        let mut rng = RngStream::new(5, 5);
        for _ in 0..200 {
            let g = sample_user_group(10, 4, 3, 100.0, &mut rng).unwrap();
            let best = select(SchemeId::MaxSinr, &g, &mut rng).unwrap();
            for scheme in [
                SchemeId::MaxSnr,
                SchemeId::MinInr,
                SchemeId::MinIam,
                SchemeId::TwoStage { n1: 2, n2: 5 },
                SchemeId::RandomBaseline,
            ] {
                let other = select(scheme, &g, &mut rng).unwrap();
                assert!(best.rate >= other.rate - 1e-9, "{scheme}: {} < {}", best.rate, other.rate);
            }
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in ["max-snr", "min-inr", "max-sinr", "min-iam", "two-stage:10:100", "random"] {
            assert_eq!(s.parse::<SchemeId>().unwrap().to_string(), s);
        }
        assert!("two-stage:0:5".parse::<SchemeId>().is_err());
        assert!("best".parse::<SchemeId>().is_err());
    }
}
