//! Interference alignment measure.
//!
//! For unit interfering directions `g_1, …, g_m` in `C^n` the measure is
//!
//! ```text
//! λ* = min_{‖c‖=1} max_k |c† g_k|²
//! ```
//!
//! i.e. the smallest "cap" `{x : |c†x|² ≤ λ}` of the unit sphere that holds
//! every interferer. `λ* = 0` means the interference fits inside an
//! `(n-1)`-dimensional subspace and can be nulled by a receive filter.
//!
//! The problem is nonconvex in `c`. [`iam`] combines structured starting
//! points, annealed log-sum-exp descent on the sphere and an active-set
//! Newton polish, and reports a weak-duality gap: for any probability
//! weights `w`, `λ_min(Σ w_k g_k g_k†) ≤ λ*`.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{sample_unit_vector, Purpose, RngStream};
use crate::error::{Error, Result};
use crate::numerics::{fix_phase, hermitian_eig, orthogonal_complement, solve_real, CVec, HermitianMat};

/// Unit-norm tolerance on interferer directions.
pub const UNIT_TOL: f64 = 1e-9;

const DESCENT_ITERS: usize = 200;
const SMOOTHING_START: f64 = 20.0;
const SMOOTHING_END: f64 = 1e7;
/// Initial smoothing when refining points that are already near a minimum.
const SMOOTHING_REFINE: f64 = 1e4;
const POLISH_ITERS: usize = 40;
const POLISH_STARTS: usize = 2;
const MAX_SUBSET_STARTS: usize = 64;
const ORACLE_REFINE_STEPS: usize = 50;
const GENERIC_STARTS: usize = 2;
const SQUARE_GRID: usize = 256;
const SCREEN_STARTS: usize = 2048;
const SCREEN_KEEP: usize = 12;
/// Certified gap below which the first stage is accepted as optimal.
const CERTIFIED_TOL: f64 = 1e-10;

/// Solution of the alignment problem for one set of interferers.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    /// `max_k |c_star† g_k|²`, in `[0, 1]`.
    pub lambda_star: f64,
    /// Unit minimizing direction.
    pub c_star: CVec,
    pub iterations: usize,
    /// `lambda_star` minus the best dual lower bound found.
    pub certified_gap: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::Domain(format!("lambda must lie in [0, 1], got {lambda}")))
    }
}

/// Probability that `m` independent isotropic unit vectors in `C^{n_r}`
/// all fall in the cap `{x : |c†x|² ≤ λ}`: `(1 − (1−λ)^{n_r−1})^m`.
pub fn cap_containment_probability(lambda: f64, n_r: usize, m: usize) -> Result<f64> {
    check_lambda(lambda)?;
    if n_r < 2 {
        return Err(Error::Domain(format!("need n_r >= 2, got {n_r}")));
    }
    let single = 1.0 - (1.0 - lambda).powi(n_r as i32 - 1);
    Ok(single.powi(m as i32))
}

fn check_interference_limited(k: usize, n_r: usize) -> Result<()> {
    if k <= n_r || n_r < 2 {
        Err(Error::Domain(format!(
            "bound requires K > n_r >= 2, got K = {k}, n_r = {n_r}"
        )))
    } else {
        Ok(())
    }
}

/// Lower bound on `Pr[λ* ≤ λ]` for `K − 1` isotropic interferers:
/// `(1 − (1−λ)^{n_r−1})^{K−n_r}`.
pub fn iam_cdf_lower_bound(lambda: f64, k: usize, n_r: usize) -> Result<f64> {
    check_interference_limited(k, n_r)?;
    cap_containment_probability(lambda, n_r, k - n_r)
}

/// Upper bound `N^{−1/(K−n_r)}` on the expected smallest measure among `N`
/// users.
pub fn min_iam_expectation_bound(n: usize, k: usize, n_r: usize) -> Result<f64> {
    check_interference_limited(k, n_r)?;
    if n == 0 {
        return Err(Error::Domain("need at least one user".into()));
    }
    Ok((n as f64).powf(-1.0 / (k - n_r) as f64))
}

/// Flattened, validated interferer set.
struct Instance {
    n: usize,
    m: usize,
    g: Vec<Complex64>,
}

impl Instance {
    fn new(interferers: &[CVec]) -> Result<Self> {
        let n = interferers.first().map(CVec::dim).unwrap_or(0);
        if n == 0 {
            return Err(Error::Domain("need at least one interferer of positive dimension".into()));
        }
        let mut g = Vec::with_capacity(n * interferers.len());
        for v in interferers {
            v.check_dim(n)?;
            let norm_sq = v.norm_sqr();
            if (norm_sq - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotUnit { norm_sq });
            }
            g.extend_from_slice(v.as_slice());
        }
        Ok(Instance {
            n,
            m: interferers.len(),
            g,
        })
    }

    fn row(&self, k: usize) -> &[Complex64] {
        &self.g[k * self.n..(k + 1) * self.n]
    }

    fn vector(&self, k: usize) -> CVec {
        CVec::new(self.row(k).to_vec())
    }

    /// `g_k† c` for every k.
    fn projections(&self, c: &[Complex64], out: &mut [Complex64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.row(k).iter().zip(c).map(|(g, x)| g.conj() * x).sum();
        }
    }

    fn objective(&self, c: &[Complex64]) -> f64 {
        (0..self.m)
            .map(|k| {
                self.row(k)
                    .iter()
                    .zip(c)
                    .map(|(g, x)| g.conj() * x)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .fold(0.0, f64::max)
    }

    fn weighted_gram(&self, w: &[f64]) -> HermitianMat {
        let mut a = HermitianMat::zeros(self.n);
        for (k, &wk) in w.iter().enumerate() {
            if wk > 0.0 {
                a.add_outer(wk, &self.vector(k)).expect("consistent dims");
            }
        }
        a
    }

    /// Weak-duality bound `λ_min(Σ w_k g_k g_k†)` for probability weights.
    fn dual_bound(&self, w: &[f64]) -> f64 {
        let total: f64 = w.iter().map(|x| x.max(0.0)).sum();
        if !(total > 0.0) {
            return 0.0;
        }
        let w: Vec<f64> = w.iter().map(|x| x.max(0.0) / total).collect();
        let eig = hermitian_eig(&self.weighted_gram(&w)).expect("small dimension");
        eig.min_eigenvalue().max(0.0)
    }
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
}

/// Log-sum-exp smoothed maximum and its softmax weights.
fn smooth_max(values: &[f64], t: f64, weights: &mut [f64]) -> f64 {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (w, &v) in weights.iter_mut().zip(values) {
        *w = (t * (v - top)).exp();
        total += *w;
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    top + total.ln() / t
}

/// One local search: annealed smoothed descent on the sphere. Returns the
/// final point and its softmax weights.
fn descend(inst: &Instance, mut c: Vec<Complex64>, t_start: f64) -> (Vec<Complex64>, Vec<f64>) {
    let (n, m) = (inst.n, inst.m);
    let mut proj = vec![Complex64::new(0.0, 0.0); m];
    let mut vals = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mut trial_w = vec![0.0; m];
    let mut grad = vec![Complex64::new(0.0, 0.0); n];
    let mut cand = vec![Complex64::new(0.0, 0.0); n];
    let mut step: f64 = 0.5;
    let ratio = (SMOOTHING_END / t_start).ln();
    for it in 0..DESCENT_ITERS {
        let t = t_start * (ratio * it as f64 / (DESCENT_ITERS - 1) as f64).exp();
        inst.projections(&c, &mut proj);
        for (v, p) in vals.iter_mut().zip(&proj) {
            *v = p.norm_sqr();
        }
        let value = smooth_max(&vals, t, &mut weights);
        // ∂F/∂c̄ = Σ p_k g_k (g_k† c), projected onto the tangent space at c
        grad.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for k in 0..m {
            let coef = proj[k] * weights[k];
            for (gi, x) in grad.iter_mut().zip(inst.row(k)) {
                *gi += x * coef;
            }
        }
        let radial: Complex64 = c.iter().zip(&grad).map(|(a, b)| a.conj() * b).sum();
        for (gi, ci) in grad.iter_mut().zip(&c) {
            *gi -= ci * radial;
        }
        let gnorm_sq: f64 = grad.iter().map(|z| z.norm_sqr()).sum();
        if gnorm_sq < 1e-30 {
            continue;
        }
        step = (step * 2.0).min(1.0);
        loop {
            for ((x, ci), gi) in cand.iter_mut().zip(&c).zip(&grad) {
                *x = ci - gi * step;
            }
            normalize(&mut cand);
            inst.projections(&cand, &mut proj);
            for (v, p) in vals.iter_mut().zip(&proj) {
                *v = p.norm_sqr();
            }
            let next = smooth_max(&vals, t, &mut trial_w);
            if next <= value - 2e-4 * step * gnorm_sq {
                std::mem::swap(&mut c, &mut cand);
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
    }
    inst.projections(&c, &mut proj);
    for (v, p) in vals.iter_mut().zip(&proj) {
        *v = p.norm_sqr();
    }
    smooth_max(&vals, SMOOTHING_END, &mut weights);
    (c, weights)
}

/// Quadratic model of every `f_k(c(x)) = |c(x)† g_k|²` in real tangent
/// coordinates `x ∈ R^{2(n-1)}` around `c`, where
/// `c(x) = (c + Σ_j (x_{2j} + i x_{2j+1}) b_j) / sqrt(1 + ‖x‖²)`.
struct LocalModel {
    basis: Vec<CVec>,
    value: Vec<f64>,
    gradient: Vec<Vec<f64>>,
    hessian: Vec<Vec<f64>>,
}

impl LocalModel {
    fn at(inst: &Instance, c: &[Complex64]) -> Self {
        let n = inst.n;
        let d = 2 * (n - 1);
        let basis = orthogonal_complement(n, &[CVec::new(c.to_vec())]);
        debug_assert_eq!(basis.len(), n - 1);
        let mut value = Vec::with_capacity(inst.m);
        let mut gradient = Vec::with_capacity(inst.m);
        let mut hessian = Vec::with_capacity(inst.m);
        let mut gamma = vec![Complex64::new(0.0, 0.0); d];
        for k in 0..inst.m {
            let g = inst.row(k);
            let alpha: Complex64 = c.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
            for (j, b) in basis.iter().enumerate() {
                let beta: Complex64 = b.as_slice().iter().zip(g).map(|(a, x)| a.conj() * x).sum();
                gamma[2 * j] = beta;
                gamma[2 * j + 1] = Complex64::new(0.0, -1.0) * beta;
            }
            let a0 = alpha.norm_sqr();
            let grad: Vec<f64> = gamma.iter().map(|gi| 2.0 * (alpha.conj() * gi).re).collect();
            let mut hess = vec![0.0; d * d];
            for i in 0..d {
                for l in 0..d {
                    hess[i * d + l] = 2.0 * (gamma[i].conj() * gamma[l]).re;
                }
                hess[i * d + i] -= 2.0 * a0;
            }
            value.push(a0);
            gradient.push(grad);
            hessian.push(hess);
        }
        LocalModel {
            basis,
            value,
            gradient,
            hessian,
        }
    }

    fn retract(&self, c: &[Complex64], x: &[f64], scale: f64) -> Vec<Complex64> {
        let mut out = c.to_vec();
        for (j, b) in self.basis.iter().enumerate() {
            let z = Complex64::new(x[2 * j], x[2 * j + 1]) * scale;
            for (o, bi) in out.iter_mut().zip(b.as_slice()) {
                *o += bi * z;
            }
        }
        normalize(&mut out);
        out
    }

    /// Newton step on the KKT system of `min λ s.t. f_k ≤ λ, k ∈ active`:
    ///
    /// ```text
    /// [ Σ w_k H_k   B   0 ] [x]   [  0  ]
    /// [ Bᵀ          0  -1 ] [W] = [ -f  ]
    /// [ 0           1ᵀ  0 ] [λ]   [  1  ]
    /// ```
    fn newton_step(&self, active: &[usize], multipliers: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let d = self.gradient[0].len();
        let a = active.len();
        let size = d + a + 1;
        let mut mat = vec![0.0; size * size];
        let mut rhs = vec![0.0; size];
        for (&k, &w) in active.iter().zip(multipliers) {
            if w != 0.0 {
                for i in 0..d * d {
                    let (r, col) = (i / d, i % d);
                    mat[r * size + col] += w * self.hessian[k][i];
                }
            }
        }
        for (col, &k) in active.iter().enumerate() {
            for i in 0..d {
                mat[i * size + d + col] = self.gradient[k][i];
                mat[(d + col) * size + i] = self.gradient[k][i];
            }
            mat[(d + col) * size + d + a] = -1.0;
            rhs[d + col] = -self.value[k];
            mat[(d + a) * size + d + col] = 1.0;
        }
        rhs[d + a] = 1.0;
        let sol = solve_real(mat, rhs, size)?;
        Some((sol[..d].to_vec(), sol[d..d + a].to_vec()))
    }
}

/// Active-set Newton polish. Tries every "top-j" active set at each step and
/// keeps the best strictly improving move.
fn polish(inst: &Instance, c: &mut Vec<Complex64>, weights: &mut Vec<f64>) -> (f64, usize) {
    let d = 2 * (inst.n - 1);
    let mut best = inst.objective(c);
    let mut iters = 0;
    for _ in 0..POLISH_ITERS {
        iters += 1;
        let model = LocalModel::at(inst, c);
        let mut order: Vec<usize> = (0..inst.m).collect();
        order.sort_by(|&i, &j| model.value[j].total_cmp(&model.value[i]));
        let mut improved: Option<(Vec<Complex64>, f64, Vec<f64>)> = None;
        for size in 1..=inst.m.min(d + 1) {
            let active = &order[..size];
            let hint: f64 = active.iter().map(|&k| weights[k].max(0.0)).sum();
            let mult: Vec<f64> = if hint > 0.0 {
                active.iter().map(|&k| weights[k].max(0.0) / hint).collect()
            } else {
                vec![1.0 / size as f64; size]
            };
            let Some((x, w_new)) = model.newton_step(active, &mult) else {
                continue;
            };
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm < 1e-15 {
                continue;
            }
            let mut scale = (0.5 / norm).min(1.0);
            for _ in 0..6 {
                let cand = model.retract(c, &x, scale);
                let val = inst.objective(&cand);
                let target = improved.as_ref().map_or(best, |(_, v, _)| *v);
                if val < target {
                    let mut w_full = vec![0.0; inst.m];
                    for (&k, &w) in active.iter().zip(&w_new) {
                        w_full[k] = w;
                    }
                    improved = Some((cand, val, w_full));
                    break;
                }
                scale *= 0.5;
            }
        }
        match improved {
            Some((cand, val, w)) => {
                let gain = best - val;
                *c = cand;
                best = val;
                *weights = w;
                if gain <= 1e-16 * best.max(1e-300) {
                    break;
                }
            }
            None => break,
        }
    }
    (best, iters)
}

/// Orders candidate solutions: smaller value first, then lexicographically
/// smaller direction (after the phase convention).
fn better(a: (f64, &[Complex64]), b: (f64, &[Complex64])) -> bool {
    if a.0 != b.0 {
        return a.0 < b.0;
    }
    for (x, y) in a.1.iter().zip(b.1) {
        if x.re != y.re {
            return x.re < y.re;
        }
        if x.im != y.im {
            return x.im < y.im;
        }
    }
    false
}

/// Calls `f` with every `r`-subset of `0..m` in lexicographic order.
fn for_each_subset(m: usize, r: usize, limit: usize, mut f: impl FnMut(&[usize])) {
    if r > m {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    let mut count = 0;
    loop {
        f(&idx);
        count += 1;
        if count >= limit {
            return;
        }
        // rightmost position that can still advance
        let mut i = r;
        while i > 0 && idx[i - 1] == i - 1 + m - r {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Starting points: a direction orthogonal to each `(n-1)`-subset of the
/// interferers, plus the minimum eigenvector of `Σ g_k g_k†`.
fn starting_points(inst: &Instance) -> Vec<Vec<Complex64>> {
    let mut starts = Vec::new();
    if inst.n >= 2 {
        for_each_subset(inst.m, inst.n - 1, MAX_SUBSET_STARTS, |subset| {
            let vs: Vec<CVec> = subset.iter().map(|&k| inst.vector(k)).collect();
            if let Some(c) = orthogonal_complement(inst.n, &vs).into_iter().next() {
                starts.push(c.into_inner());
            }
        });
    }
    let uniform = vec![1.0 / inst.m as f64; inst.m];
    let eig = hermitian_eig(&inst.weighted_gram(&uniform)).expect("small dimension");
    starts.push(eig.min_eigenvector().as_slice().to_vec());
    // symmetric instances can put every structured start on a critical
    // point; generic directions (fixed seed, so results stay reproducible)
    // break the symmetry
    let sum = CVec::new(
        (0..inst.n)
            .map(|i| (0..inst.m).map(|k| inst.row(k)[i]).sum())
            .collect(),
    );
    if let Some(v) = sum.normalized() {
        starts.push(v.into_inner());
    }
    let mut rng = RngStream::derive(0, Purpose::Misc, 0, 0);
    for _ in 0..GENERIC_STARTS {
        starts.push(sample_unit_vector(inst.n, &mut rng).into_inner());
    }
    starts
}

/// Cheap lower bound on the measure: the dual bound at uniform weights,
/// `λ_min((1/m) Σ g_k g_k†)`.
pub fn alignment_lower_bound(interferers: &[CVec]) -> Result<f64> {
    let inst = Instance::new(interferers)?;
    Ok(inst.dual_bound(&vec![1.0; inst.m]))
}

/// Cheap upper bound: the best of the subset-orthogonal starting points,
/// without refinement.
pub fn alignment_upper_bound(interferers: &[CVec]) -> Result<f64> {
    let inst = Instance::new(interferers)?;
    if inst.m < inst.n {
        return Ok(0.0);
    }
    Ok(starting_points(&inst)
        .iter()
        .map(|c| inst.objective(c))
        .fold(f64::INFINITY, f64::min))
}

/// Exact route for as many interferers as antennas (`n ∈ {2, 3}`).
///
/// With `G = [g_1 … g_n]` invertible and `y = G†c`, `‖c‖² = y†My` for
/// `M = (G†G)⁻¹`, so `λ* = 1 / max_{|y_k| ≤ 1} y†My`. A convex function
/// peaks at an extreme point of the polydisc, i.e. `y_k = e^{iθ_k}`. For
/// `n = 3` the last phase has a closed form given the second, leaving a
/// smooth periodic function of one angle that is maximized on a grid and
/// refined by golden-section search.
///
/// Returns the value, the direction (phase convention applied) and the
/// certified gap against the KKT multipliers `w_k = λ Re((My)_k / y_k)`.
fn square_exact(inst: &Instance) -> Option<(f64, Vec<Complex64>, f64)> {
    let n = inst.n;
    if inst.m != n || !(2..=3).contains(&n) {
        return None;
    }
    let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for k in 0..n {
            gram[j * n + k] = inst.row(j).iter().zip(inst.row(k)).map(|(a, b)| a.conj() * b).sum();
        }
    }
    let eig = hermitian_eig(&HermitianMat::new(n, gram).ok()?).ok()?;
    if eig.min_eigenvalue() < 1e-10 {
        return None;
    }
    let mut m_inv = HermitianMat::zeros(n);
    for (val, vec) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        m_inv.add_outer(1.0 / val, vec).ok()?;
    }
    let m = |j: usize, k: usize| m_inv.get(j, k);
    let phases: Vec<f64> = if n == 2 {
        vec![0.0, -m(0, 1).arg()]
    } else {
        let trace = m_inv.trace();
        let third = |t: f64| -> (f64, f64) {
            let z = m(0, 2) + m(1, 2) * Complex64::from_polar(1.0, -t);
            (
                trace + 2.0 * (m(0, 1) * Complex64::from_polar(1.0, t)).re + 2.0 * z.norm(),
                -z.arg(),
            )
        };
        let h = std::f64::consts::TAU / SQUARE_GRID as f64;
        let values: Vec<f64> = (0..SQUARE_GRID).map(|i| third(i as f64 * h).0).collect();
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..SQUARE_GRID {
            let prev = values[(i + SQUARE_GRID - 1) % SQUARE_GRID];
            let next = values[(i + 1) % SQUARE_GRID];
            if values[i] < prev || values[i] < next {
                continue;
            }
            // golden-section search on [θ_{i-1}, θ_{i+1}]
            let (mut a, mut b) = ((i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
            let r = 0.5 * (5.0_f64.sqrt() - 1.0);
            let mut x1 = b - r * (b - a);
            let mut x2 = a + r * (b - a);
            let (mut f1, mut f2) = (third(x1).0, third(x2).0);
            for _ in 0..80 {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + r * (b - a);
                    f2 = third(x2).0;
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - r * (b - a);
                    f1 = third(x1).0;
                }
            }
            let t = 0.5 * (a + b);
            let v = third(t).0;
            if v > best.0 {
                best = (v, t);
            }
        }
        let t = best.1;
        vec![0.0, t, third(t).1]
    };
    let y: Vec<Complex64> = phases.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    let my = m_inv.mul_vec(&CVec::new(y.clone())).ok()?;
    // c = G M y, normalized
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        for (ci, gi) in c.iter_mut().zip(inst.row(k)) {
            *ci += gi * my[k];
        }
    }
    normalize(&mut c);
    fix_phase(&mut c);
    let value = inst.objective(&c);
    let weights: Vec<f64> = (0..n).map(|k| (my[k] / y[k]).re * value).collect();
    let lower = inst.dual_bound(&weights);
    Some((value, c, (value - lower).max(0.0)))
}

/// Interference alignment measure of a set of unit interferer directions.
pub fn iam(interferers: &[CVec]) -> Result<AlignmentResult> {
    let inst = Instance::new(interferers)?;
    let n = inst.n;

    if n == 1 {
        return Ok(AlignmentResult {
            lambda_star: inst.objective(&[Complex64::new(1.0, 0.0)]).min(1.0),
            c_star: CVec::basis(1, 0),
            iterations: 0,
            certified_gap: 0.0,
        });
    }
    if inst.m < n {
        // fewer interferers than antennas: null them all exactly
        let c = orthogonal_complement(n, interferers)
            .into_iter()
            .next()
            .expect("complement of fewer than n vectors is nontrivial")
            .with_phase_convention();
        return Ok(AlignmentResult {
            lambda_star: 0.0,
            c_star: c,
            iterations: 0,
            certified_gap: 0.0,
        });
    }

    if let Some((value, c, gap)) = square_exact(&inst) {
        if gap <= CERTIFIED_TOL {
            return Ok(AlignmentResult {
                lambda_star: value.clamp(0.0, 1.0),
                c_star: CVec::new(c),
                iterations: SQUARE_GRID,
                certified_gap: gap,
            });
        }
    }

    let mut iterations = 0;
    let mut lower = inst.dual_bound(&vec![1.0; inst.m]);
    let mut best: Option<(f64, Vec<Complex64>, Vec<f64>)> = None;
    let run_stage = |starts: Vec<Vec<Complex64>>,
                     t_start: f64,
                     keep: usize,
                     iterations: &mut usize,
                     lower: &mut f64,
                     best: &mut Option<(f64, Vec<Complex64>, Vec<f64>)>| {
        let mut refined: Vec<(f64, Vec<Complex64>, Vec<f64>)> = starts
            .into_iter()
            .map(|start| {
                *iterations += DESCENT_ITERS;
                let (c, w) = descend(&inst, start, t_start);
                (inst.objective(&c), c, w)
            })
            .collect();
        refined.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, mut c, mut w) in refined.into_iter().take(keep) {
            *lower = lower.max(inst.dual_bound(&w));
            let (_, it) = polish(&inst, &mut c, &mut w);
            *iterations += it;
            fix_phase(&mut c);
            let value = inst.objective(&c);
            *lower = lower.max(inst.dual_bound(&w));
            let replace = match best.as_ref() {
                None => true,
                Some((bv, bc, _)) => better((value, &c), (*bv, bc)),
            };
            if replace {
                *best = Some((value, c, w));
            }
        }
    };

    run_stage(starting_points(&inst), SMOOTHING_START, POLISH_STARTS, &mut iterations, &mut lower, &mut best);
    let gap = best.as_ref().map_or(f64::INFINITY, |b| b.0 - lower);
    if gap > CERTIFIED_TOL {
        // not certified: screen many generic directions and refine the best
        let mut rng = RngStream::derive(0, Purpose::Misc, 0, 1);
        let mut proj = vec![Complex64::new(0.0, 0.0); inst.m];
        let mut screened: Vec<(f64, Vec<Complex64>)> = (0..SCREEN_STARTS)
            .map(|_| {
                iterations += ORACLE_REFINE_STEPS;
                subgradient_refine(&inst, sample_unit_vector(inst.n, &mut rng).into_inner(), &mut proj)
            })
            .collect();
        screened.sort_by(|a, b| a.0.total_cmp(&b.0));
        let starts = screened.into_iter().take(SCREEN_KEEP).map(|(_, c)| c).collect();
        run_stage(starts, SMOOTHING_REFINE, SCREEN_KEEP, &mut iterations, &mut lower, &mut best);
    }
    lower = lower.max(inst.dual_bound(&vec![1.0; inst.m]));
    let (value, c, _) = best.expect("at least one starting point");
    let lambda_star = value.clamp(0.0, 1.0);
    Ok(AlignmentResult {
        lambda_star,
        c_star: CVec::new(c),
        iterations,
        certified_gap: (lambda_star - lower).max(0.0),
    })
}

/// Smallest measure across users, with ties going to the lowest index.
///
/// Users whose dual lower bound already exceeds the best measure found are
/// skipped; the result equals evaluating [`iam`] on every user.
pub fn min_iam(users: &[Vec<CVec>]) -> Result<(usize, AlignmentResult)> {
    if users.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let upper: Vec<f64> = users
        .iter()
        .map(|u| alignment_upper_bound(u))
        .collect::<Result<_>>()?;
    let first = (0..users.len())
        .min_by(|&i, &j| upper[i].total_cmp(&upper[j]))
        .expect("non-empty");
    let mut best_idx = first;
    let mut best = iam(&users[first])?;
    for (i, u) in users.iter().enumerate() {
        if i == first {
            continue;
        }
        if upper[i] > best.lambda_star && alignment_lower_bound(u)? > best.lambda_star {
            continue;
        }
        let r = iam(u)?;
        if r.lambda_star < best.lambda_star || (r.lambda_star == best.lambda_star && i < best_idx) {
            best = r;
            best_idx = i;
        }
    }
    Ok((best_idx, best))
}

/// Projected subgradient steps on the sphere with geometrically shrinking
/// length. Returns the smallest value visited and the point attaining it.
fn subgradient_refine(inst: &Instance, mut c: Vec<Complex64>, proj: &mut [Complex64]) -> (f64, Vec<Complex64>) {
    let mut best = (f64::INFINITY, c.clone());
    let mut step: f64 = 0.25;
    for _ in 0..ORACLE_REFINE_STEPS {
        inst.projections(&c, proj);
        let (top, value) = proj
            .iter()
            .map(|p| p.norm_sqr())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
        if value < best.0 {
            best = (value, c.clone());
        }
        let g = inst.row(top);
        let mut dir: Vec<Complex64> = g.iter().map(|x| x * proj[top]).collect();
        let radial: Complex64 = c.iter().zip(&dir).map(|(a, b)| a.conj() * b).sum();
        for (di, ci) in dir.iter_mut().zip(&c) {
            *di -= ci * radial;
        }
        let dnorm = dir.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if dnorm < 1e-300 {
            break;
        }
        for (ci, di) in c.iter_mut().zip(&dir) {
            *ci -= di * (step / dnorm);
        }
        normalize(&mut c);
        step *= 0.8;
    }
    let last = inst.objective(&c);
    if last < best.0 {
        best = (last, c);
    }
    best
}

/// Sampling upper bound on the measure, independent of [`iam`]: the best of
/// `samples` uniformly random unit directions, each refined by
/// projected subgradient steps with geometrically shrinking length.
///
/// Samples are drawn sequentially from `rng`, so with equal streams a run
/// with more samples never returns a larger value.
pub fn iam_oracle<R: Rng + ?Sized>(interferers: &[CVec], samples: usize, rng: &mut R) -> Result<f64> {
    let inst = Instance::new(interferers)?;
    let n = inst.n;
    let mut best = f64::INFINITY;
    let mut proj = vec![Complex64::new(0.0, 0.0); inst.m];
    for _ in 0..samples {
        let c = sample_unit_vector(n, rng).into_inner();
        best = best.min(subgradient_refine(&inst, c, &mut proj).0);
    }
    Ok(best.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RngStream;

    fn random_instance(m: usize, n: usize, rng: &mut RngStream) -> Vec<CVec> {
        (0..m).map(|_| sample_unit_vector(n, rng)).collect()
    }

    #[test]
    fn cap_probability_values() {
        assert_eq!(cap_containment_probability(0.0, 3, 2).unwrap(), 0.0);
        assert_eq!(cap_containment_probability(1.0, 3, 5).unwrap(), 1.0);
        assert!((cap_containment_probability(0.5, 2, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!(cap_containment_probability(1.5, 3, 1).is_err());
        assert!(cap_containment_probability(-0.1, 3, 1).is_err());
    }

    #[test]
    fn cdf_bound_values() {
        assert_eq!(iam_cdf_lower_bound(1.0, 4, 3).unwrap(), 1.0);
        assert!((iam_cdf_lower_bound(0.5, 4, 3).unwrap() - 0.75).abs() < 1e-15);
        assert!((iam_cdf_lower_bound(0.2, 5, 3).unwrap() - 0.1296).abs() < 1e-15);
        assert!(iam_cdf_lower_bound(0.5, 3, 3).is_err());
    }

    #[test]
    fn expectation_bound_values() {
        assert_eq!(min_iam_expectation_bound(1, 4, 3).unwrap(), 1.0);
        assert!((min_iam_expectation_bound(100, 4, 3).unwrap() - 0.01).abs() < 1e-15);
        assert!((min_iam_expectation_bound(64, 5, 3).unwrap() - 0.125).abs() < 1e-15);
        assert!(min_iam_expectation_bound(10, 2, 3).is_err());
    }

    #[test]
    fn repeated_interferer_is_perfectly_aligned() {
        let g = sample_unit_vector(3, &mut RngStream::new(1, 1));
        let r = iam(&[g.clone(), g.clone(), g.clone(), g.clone()]).unwrap();
        assert!(r.lambda_star <= 1e-9, "{}", r.lambda_star);
        assert!(r.c_star.abs_dot_sqr(&g) <= 1e-9);
    }

    #[test]
    fn standard_basis_gives_uniform_direction() {
        for n in 2..=4 {
            let basis: Vec<CVec> = (0..n).map(|i| CVec::basis(n, i)).collect();
            let r = iam(&basis).unwrap();
            assert!((r.lambda_star - 1.0 / n as f64).abs() < 1e-9, "n = {n}: {}", r.lambda_star);
            for z in r.c_star.as_slice() {
                assert!((z.norm_sqr() - 1.0 / n as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn too_few_interferers_returns_exact_zero() {
        let mut rng = RngStream::new(2, 2);
        let g = random_instance(2, 3, &mut rng);
        let r = iam(&g).unwrap();
        assert_eq!(r.lambda_star, 0.0);
        for v in &g {
            assert!(r.c_star.abs_dot_sqr(v) < 1e-20);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad = vec![CVec::from_real(&[1.0, 1.0, 0.0])];
        assert!(matches!(iam(&bad), Err(Error::NotUnit { .. })));
        let mixed = vec![CVec::basis(3, 0), CVec::basis(2, 0)];
        assert!(matches!(iam(&mixed), Err(Error::DimensionMismatch { .. })));
        assert!(iam(&[]).is_err());
    }

    #[test]
    fn feasibility_and_gap() {
        let mut rng = RngStream::new(3, 3);
        for m in 3..=5 {
            for _ in 0..20 {
                let g = random_instance(m, 3, &mut rng);
                let r = iam(&g).unwrap();
                let achieved = g.iter().map(|v| r.c_star.abs_dot_sqr(v)).fold(0.0, f64::max);
                assert!((achieved - r.lambda_star).abs() <= 1e-9);
                assert!((r.c_star.norm_sqr() - 1.0).abs() < 1e-12);
                assert!(r.certified_gap >= 0.0);
                assert!(alignment_lower_bound(&g).unwrap() <= r.lambda_star + 1e-12);
                assert!(alignment_upper_bound(&g).unwrap() >= r.lambda_star - 1e-12);
            }
        }
    }

    #[test]
    fn random_instance_matches_oracle() {
        let mut rng = RngStream::new(4, 4);
        let g = random_instance(4, 3, &mut rng);
        let r = iam(&g).unwrap();
        let oracle = iam_oracle(&g, 10_000, &mut RngStream::new(4, 5)).unwrap();
        assert!(r.lambda_star <= oracle + 1e-6);
        assert!(oracle <= r.lambda_star + r.certified_gap + 2e-3);
    }

    #[test]
    fn oracle_trivial_cases() {
        let g = sample_unit_vector(3, &mut RngStream::new(5, 5));
        let v = iam_oracle(&[g.clone(), g], 10_000, &mut RngStream::new(5, 6)).unwrap();
        assert!(v < 1e-6, "{v}");
        let basis: Vec<CVec> = (0..3).map(|i| CVec::basis(3, i)).collect();
        let v = iam_oracle(&basis, 10_000, &mut RngStream::new(5, 7)).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn oracle_running_minimum_never_increases() {
        let g = random_instance(5, 3, &mut RngStream::new(6, 6));
        let short = iam_oracle(&g, 10_000, &mut RngStream::new(6, 7)).unwrap();
        let long = iam_oracle(&g, 100_000, &mut RngStream::new(6, 7)).unwrap();
        assert!(short >= long - 1e-6);
    }

    #[test]
    fn min_over_users_matches_exhaustive() {
        let mut rng = RngStream::new(7, 7);
        for _ in 0..5 {
            let users: Vec<Vec<CVec>> = (0..30).map(|_| random_instance(3, 3, &mut rng)).collect();
            let (idx, r) = min_iam(&users).unwrap();
            let all: Vec<f64> = users.iter().map(|u| iam(u).unwrap().lambda_star).collect();
            let want = all.iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(r.lambda_star, want);
            assert_eq!(idx, all.iter().position(|&v| v == want).unwrap());
        }
    }

    #[test]
    fn subsets_enumerated_in_order() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, 100, |s| seen.push(s.to_vec()));
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        let mut count = 0;
        for_each_subset(3, 3, 100, |_| count += 1);
        assert_eq!(count, 1);
        for_each_subset(5, 1, 100, |_| count += 1);
        assert_eq!(count, 6);
    }
}
