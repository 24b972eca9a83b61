//! Random channel generation.
//!
//! All randomness is drawn from [`RngStream`]s: ChaCha8 generators keyed by
//! a 64-bit seed and a 64-bit stream id. ChaCha is counter based, so a given
//! `(seed, stream_id)` pair yields the same sequence no matter which thread
//! draws it or in what order streams are consumed.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{CVec, HermitianMat};

/// What a stream is used for. Occupies the top byte of the stream id so
/// streams for different purposes never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    Channels = 1,
    Beams = 2,
    Selection = 3,
    Oracle = 4,
    Tdma = 5,
    Bounds = 6,
    Misc = 7,
}

/// Seeded, reproducible random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    /// Stream id layout: `purpose` in bits 56..64, `point` in bits 32..56,
    /// `index` in bits 0..32.
    pub fn derive(seed: u64, purpose: Purpose, point: usize, index: usize) -> Self {
        debug_assert!(point < (1 << 24) && index < (1usize << 32));
        let id = ((purpose as u64) << 56) | ((point as u64 & 0xFF_FFFF) << 32) | (index as u64);
        Self::new(seed, id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Circularly symmetric complex Gaussian with unit variance
/// (variance 1/2 per real component).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

pub fn sample_channel_vector<R: Rng + ?Sized>(n_r: usize, rng: &mut R) -> CVec {
    CVec::new((0..n_r).map(|_| complex_gaussian(rng)).collect())
}

/// Uniformly distributed unit vector in `C^dim`.
pub fn sample_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVec {
    loop {
        if let Some(v) = sample_channel_vector(dim, rng).normalized() {
            return v;
        }
    }
}

/// One user's view of the channel: its desired channel from the serving
/// transmitter, the interfering channels from every other transmitter, and
/// the per-transmitter power.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannelSet {
    desired: CVec,
    interferers: Vec<CVec>,
    power: f64,
}

impl UserChannelSet {
    pub fn new(desired: CVec, interferers: Vec<CVec>, power: f64) -> Result<Self> {
        let n_r = desired.dim();
        if n_r == 0 {
            return Err(Error::Domain("channel dimension must be positive".into()));
        }
        for g in &interferers {
            g.check_dim(n_r)?;
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::Domain(format!("power must be positive, got {power}")));
        }
        Ok(UserChannelSet {
            desired,
            interferers,
            power,
        })
    }

    pub fn desired(&self) -> &CVec {
        &self.desired
    }

    pub fn interferers(&self) -> &[CVec] {
        &self.interferers
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn n_r(&self) -> usize {
        self.desired.dim()
    }

    /// Same channels at a different transmit power.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(self.desired.clone(), self.interferers.clone(), power)
    }

    /// Interferer directions `h / ‖h‖`.
    pub fn normalized_interferers(&self) -> Result<Vec<CVec>> {
        self.interferers
            .iter()
            .map(|h| h.normalized().ok_or(Error::ZeroChannel))
            .collect()
    }
}

/// Draws `n` users, each with one desired and `k - 1` interfering channels.
/// Entries are drawn user by user, desired channel first.
pub fn sample_user_group<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    n_r: usize,
    power: f64,
    rng: &mut R,
) -> Result<Vec<UserChannelSet>> {
    if k < 2 {
        return Err(Error::Domain(format!("need at least two transmitters, got {k}")));
    }
    if n == 0 || n_r == 0 {
        return Err(Error::Domain("group size and antenna count must be positive".into()));
    }
    (0..n)
        .map(|_| {
            let desired = sample_channel_vector(n_r, rng);
            let interferers = (1..k).map(|_| sample_channel_vector(n_r, rng)).collect();
            UserChannelSet::new(desired, interferers, power)
        })
        .collect()
}

/// `R = P Σ_k h_k h_k†` over the interfering channels.
pub fn interference_covariance(u: &UserChannelSet) -> HermitianMat {
    let mut r = HermitianMat::zeros(u.n_r());
    for h in &u.interferers {
        r.add_outer(u.power, h).expect("dims checked at construction");
    }
    r
}

/// `n_t` orthonormal beams.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSet {
    beams: Vec<CVec>,
}

impl BeamSet {
    /// Checks orthonormality to `1e-12`.
    pub fn new(beams: Vec<CVec>) -> Result<Self> {
        let n = beams.len();
        for (i, u) in beams.iter().enumerate() {
            u.check_dim(n)?;
            for (j, w) in beams.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (u.dot(w) - target).norm();
                if dev > 1e-12 {
                    return Err(Error::Domain(format!(
                        "beams {i} and {j} deviate from orthonormality by {dev:.3e}"
                    )));
                }
            }
        }
        Ok(BeamSet { beams })
    }

    /// The standard basis, i.e. one antenna per stream.
    pub fn identity(n_t: usize) -> Self {
        BeamSet {
            beams: (0..n_t).map(|i| CVec::basis(n_t, i)).collect(),
        }
    }

    pub fn beams(&self) -> &[CVec] {
        &self.beams
    }

    /// True when every beam is exactly a standard basis vector `e_j`.
    pub fn is_identity(&self) -> bool {
        let n = self.beams.len();
        self.beams.iter().enumerate().all(|(j, u)| *u == CVec::basis(n, j))
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }
}

/// Haar-distributed orthonormal beams: Gram-Schmidt QR of an i.i.d. complex
/// Gaussian matrix. Gram-Schmidt leaves the diagonal of `R` real and
/// positive, which is the phase fix that makes `Q` exactly Haar.
pub fn sample_haar_beams<R: Rng + ?Sized>(n_t: usize, rng: &mut R) -> BeamSet {
    assert!(n_t >= 1, "need at least one beam");
    let columns: Vec<Vec<Complex64>> = (0..n_t)
        .map(|_| sample_channel_vector(n_t, rng).into_inner())
        .collect();
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(n_t);
    for mut w in columns {
        // reorthogonalize once so the Gram matrix is exact to rounding
        for _ in 0..2 {
            for b in &q {
                let proj: Complex64 = b.iter().zip(&w).map(|(a, x)| a.conj() * x).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in w.iter_mut() {
            *z /= norm;
        }
        q.push(w);
    }
    BeamSet {
        beams: q.into_iter().map(CVec::new).collect(),
    }
}

/// Complex `rows × cols` channel matrix, stored by columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    columns: Vec<CVec>,
}

impl ChannelMatrix {
    pub fn from_columns(rows: usize, columns: Vec<CVec>) -> Result<Self> {
        for c in &columns {
            c.check_dim(rows)?;
        }
        Ok(ChannelMatrix { rows, columns })
    }

    /// i.i.d. unit-variance complex Gaussian entries, drawn column by column.
    pub fn sample<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        ChannelMatrix {
            rows,
            columns: (0..cols).map(|_| sample_channel_vector(rows, rng)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &CVec {
        &self.columns[j]
    }

    /// `H u`.
    pub fn mul_vec(&self, u: &CVec) -> Result<CVec> {
        u.check_dim(self.cols())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (col, &uj) in self.columns.iter().zip(u.as_slice()) {
            for (o, h) in out.iter_mut().zip(col.as_slice()) {
                *o += h * uj;
            }
        }
        Ok(CVec::new(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_streams_are_identical() {
        let a = sample_channel_vector(4, &mut RngStream::new(42, 7));
        let b = sample_channel_vector(4, &mut RngStream::new(42, 7));
        assert_eq!(a, b);
        let c = sample_channel_vector(4, &mut RngStream::new(42, 8));
        assert_ne!(a, c);
    }

    #[test]
    fn derived_ids_do_not_collide() {
        let a = RngStream::derive(1, Purpose::Channels, 0, 5);
        let b = RngStream::derive(1, Purpose::Selection, 0, 5);
        let c = RngStream::derive(1, Purpose::Channels, 1, 5);
        assert_ne!(a.stream_id(), b.stream_id());
        assert_ne!(a.stream_id(), c.stream_id());
        assert_eq!(a.seed(), 1);
    }

    #[test]
    fn minimal_group_shape() {
        let g = sample_user_group(1, 2, 2, 1.0, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].interferers().len(), 1);
        assert_eq!(g[0].n_r(), 2);
    }

    #[test]
    fn group_entry_order_and_shape() {
        let g = sample_user_group(10, 4, 3, 100.0, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(g.len(), 10);
        assert!(g.iter().all(|u| u.interferers().len() == 3 && u.n_r() == 3));
    }

    #[test]
    fn group_rejects_single_transmitter() {
        assert!(sample_user_group(3, 1, 2, 1.0, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn covariance_cases() {
        let zero = UserChannelSet::new(CVec::basis(2, 0), vec![CVec::zeros(2)], 5.0).unwrap();
        assert_eq!(interference_covariance(&zero), HermitianMat::zeros(2));

        let g = CVec::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]);
        let u = UserChannelSet::new(CVec::basis(3, 0), vec![g], 10.0).unwrap();
        let eig = crate::numerics::hermitian_eig(&interference_covariance(&u)).unwrap();
        assert!((eig.eigenvalues[0] - 20.0).abs() < 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12 && eig.eigenvalues[2].abs() < 1e-12);
    }

    #[test]
    fn user_set_validation() {
        assert!(UserChannelSet::new(CVec::zeros(2), vec![CVec::zeros(3)], 1.0).is_err());
        assert!(UserChannelSet::new(CVec::zeros(2), vec![], 0.0).is_err());
    }

    #[test]
    fn haar_beams_are_orthonormal() {
        let mut rng = RngStream::new(3, 3);
        for n_t in 1..=5 {
            let b = sample_haar_beams(n_t, &mut rng);
            assert!(BeamSet::new(b.beams().to_vec()).is_ok());
        }
    }

    #[test]
    fn matrix_vector_product() {
        let h = ChannelMatrix::from_columns(
            2,
            vec![CVec::from_real(&[1.0, 2.0]), CVec::from_real(&[3.0, 4.0])],
        )
        .unwrap();
        let y = h.mul_vec(&CVec::from_real(&[1.0, -1.0])).unwrap();
        assert_eq!(y, CVec::from_real(&[-2.0, -2.0]));
        assert_eq!(h.mul_vec(&CVec::basis(2, 1)).unwrap(), *h.column(1));
    }
}
