//! Exact 3×3 algebra for the trace inequality
//!
//! ```text
//! tr(BU·conj(BU)) + β₁²(tr(UU*) − tr(U·conj U)) ≥ β₀² tr(UU*)
//! ```
//!
//! for self-adjoint `β₀ ≤ B ≤ β₁` and arbitrary complex `U`, together with its
//! reduction to three independent off-diagonal pair inequalities.
//!
//! `conj` is the entrywise conjugate, `*` the conjugate transpose.

use rand::RngExt;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{trial_rng, TrialRng};
use crate::{complexify_mat, CMat3, CVec3, Complex64, Error, Mat3, Result};

/// Real symmetric 3×3 matrix. Symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix3 {
    m: Mat3,
}

impl SymMatrix3 {
    pub fn new(a11: f64, a22: f64, a33: f64, a12: f64, a13: f64, a23: f64) -> Self {
        Self {
            m: Mat3::new(a11, a12, a13, a12, a22, a23, a13, a23, a33),
        }
    }

    /// Symmetric part `(m + mᵗ)/2`.
    pub fn from_matrix(m: &Mat3) -> Self {
        Self {
            m: (m + m.transpose()) * 0.5,
        }
    }

    pub fn identity() -> Self {
        Self {
            m: Mat3::identity(),
        }
    }

    pub fn diagonal(d1: f64, d2: f64, d3: f64) -> Self {
        Self::new(d1, d2, d3, 0.0, 0.0, 0.0)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    /// Eigenvalues in descending order `λ₁ ≥ λ₂ ≥ λ₃`.
    pub fn eigenvalues(&self) -> [f64; 3] {
        hermitian_eigenvalues(&complexify_mat(&self.m))
    }

    pub fn beta0(&self) -> f64 {
        self.eigenvalues()[2]
    }

    pub fn beta1(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.beta0() > 0.0
    }

    pub fn to_hermitian(&self) -> Hermitian3 {
        Hermitian3 {
            m: complexify_mat(&self.m),
        }
    }
}

/// Complex self-adjoint 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hermitian3 {
    m: CMat3,
}

impl Hermitian3 {
    /// Hermitian part `(m + m*)/2`.
    pub fn from_matrix(m: &CMat3) -> Self {
        Self {
            m: (m + m.adjoint()) * Complex64::from(0.5),
        }
    }

    pub fn matrix(&self) -> &CMat3 {
        &self.m
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        hermitian_eigenvalues(&self.m)
    }
}

impl From<SymMatrix3> for Hermitian3 {
    fn from(s: SymMatrix3) -> Self {
        s.to_hermitian()
    }
}

impl From<&SymMatrix3> for Hermitian3 {
    fn from(s: &SymMatrix3) -> Self {
        s.to_hermitian()
    }
}

/// Closed-form eigenvalues of a Hermitian 3×3 matrix, descending.
///
/// Trigonometric Cardano solution of the characteristic polynomial of the
/// deviatoric part, followed by a guarded Newton polish on the full
/// characteristic polynomial.
pub fn hermitian_eigenvalues(m: &CMat3) -> [f64; 3] {
    let q = m.trace().re / 3.0;
    let shifted = m - CMat3::identity() * Complex64::from(q);
    let p2 = shifted.iter().map(|z| z.norm_sqr()).sum::<f64>() / 6.0;
    if p2 == 0.0 {
        return [q; 3];
    }
    let p = p2.sqrt();
    let scaled = shifted / Complex64::from(p);
    let r = (scaled.determinant().re / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;

    // Characteristic roots are ill-conditioned when two eigenvalues cluster,
    // so only the best separated one is kept. Its eigenvector deflates the
    // matrix to a 2×2 Hermitian block solved without cancellation.
    let sep = if e1 - e2 >= e2 - e3 { e1 } else { e3 };
    let a = m - CMat3::identity() * Complex64::from(sep);
    let rows = [
        a.row(0).transpose(),
        a.row(1).transpose(),
        a.row(2).transpose(),
    ];
    let v = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| rows[i].cross(&rows[j]))
        .max_by(|x, y| x.norm_squared().total_cmp(&y.norm_squared()))
        .unwrap_or_else(CVec3::zeros);
    let vn = v.norm();
    if !(vn > 0.0) {
        let mut eig = [e1, e2, e3];
        eig.sort_by(|a, b| b.total_cmp(a));
        return eig;
    }
    let v = v / Complex64::from(vn);
    let k = (0..3)
        .min_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()))
        .unwrap_or(0);
    let mut u1 = CVec3::zeros();
    u1[k] = Complex64::from(1.0);
    u1 -= v * v.dotc(&u1);
    let u1 = u1 / Complex64::from(u1.norm());
    let u2 = v.conjugate().cross(&u1.conjugate());
    let h11 = u1.dotc(&(m * u1)).re;
    let h22 = u2.dotc(&(m * u2)).re;
    let h12 = u1.dotc(&(m * u2));
    let mid = 0.5 * (h11 + h22);
    let rad = (0.5 * (h11 - h22)).hypot(h12.norm());
    let lead = v.dotc(&(m * v)).re;
    let mut eig = [lead, mid + rad, mid - rad];
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// The three traces entering the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceForms {
    /// `Re tr(BU · conj(BU))`
    pub t1: f64,
    /// `tr(UU*)`, the squared Frobenius norm of `U`
    pub t2: f64,
    /// `Re tr(U · conj(U))`
    pub t3: f64,
}

pub fn trace_forms(b: &Hermitian3, u: &CMat3) -> TraceForms {
    let bu = b.matrix() * u;
    TraceForms {
        t1: (bu * bu.map(|z| z.conj())).trace().re,
        t2: u.iter().map(|z| z.norm_sqr()).sum(),
        t3: (u * u.map(|z| z.conj())).trace().re,
    }
}

/// `t1 + β₁²(t2 − t3) − β₀² t2` with `β₀, β₁` the extreme eigenvalues of `B`.
pub fn lemma31_residual(b: &Hermitian3, u: &CMat3) -> Result<f64> {
    let eig = b.eigenvalues();
    if eig[2] <= 0.0 {
        return Err(Error::Precondition(format!(
            "B must be positive definite (smallest eigenvalue {:e})",
            eig[2]
        )));
    }
    Ok(residual_with_bounds(b, u, eig[2], eig[0]))
}

/// Residual with caller-supplied bounds `β₀ ≤ B ≤ β₁`.
pub fn lemma31_residual_with_bounds(
    b: &Hermitian3,
    u: &CMat3,
    beta0: f64,
    beta1: f64,
) -> Result<f64> {
    let eig = b.eigenvalues();
    let slack = 1e-12 * eig[0].abs().max(1.0);
    if !(beta0 > 0.0 && eig[2] >= beta0 - slack && eig[0] <= beta1 + slack) {
        return Err(Error::Precondition(format!(
            "bounds [{beta0}, {beta1}] do not enclose spectrum [{}, {}]",
            eig[2], eig[0]
        )));
    }
    Ok(residual_with_bounds(b, u, beta0, beta1))
}

fn residual_with_bounds(b: &Hermitian3, u: &CMat3, beta0: f64, beta1: f64) -> f64 {
    let t = trace_forms(b, u);
    t.t1 + beta1 * beta1 * (t.t2 - t.t3) - beta0 * beta0 * t.t2
}

/// LHS − RHS of the pair inequality for indices `(i, j)`, `i ≠ j`:
///
/// ```text
/// λᵢλⱼ·2Re(wᵢⱼ conj wⱼᵢ) + β₁²(|wᵢⱼ|² + |wⱼᵢ|² − 2Re(wᵢⱼ conj wⱼᵢ)) − β₀²(|wᵢⱼ|² + |wⱼᵢ|²)
/// ```
pub fn offdiag_inequality(
    lam_i: f64,
    lam_j: f64,
    beta0: f64,
    beta1: f64,
    wij: Complex64,
    wji: Complex64,
) -> Result<f64> {
    let slack = 1e-12 * beta1.abs().max(1.0);
    let ordered = beta0 > 0.0
        && lam_i >= beta0 - slack
        && lam_j >= beta0 - slack
        && lam_i <= beta1 + slack
        && lam_j <= beta1 + slack;
    if !ordered {
        return Err(Error::Precondition(format!(
            "need β₁ ≥ λᵢ, λⱼ ≥ β₀ > 0, got λ=({lam_i}, {lam_j}), β=({beta0}, {beta1})"
        )));
    }
    let cross = 2.0 * (wij * wji.conj()).re;
    let mass = wij.norm_sqr() + wji.norm_sqr();
    Ok(lam_i * lam_j * cross + beta1 * beta1 * (mass - cross) - beta0 * beta0 * mass)
}

pub fn random_orthogonal(rng: &mut TrialRng) -> Mat3 {
    let g = Mat3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column signs so the distribution is Haar.
    let signs = Mat3::from_diagonal(&r.diagonal().map(|d| if d < 0.0 { -1.0 } else { 1.0 }));
    q * signs
}

pub fn random_unitary(rng: &mut TrialRng) -> CMat3 {
    let g = CMat3::from_fn(|_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMat3::from_diagonal(&r.diagonal().map(|d| {
        let n = d.norm();
        if n == 0.0 {
            Complex64::from(1.0)
        } else {
            d / Complex64::from(n)
        }
    }));
    q * phases
}

/// `Q diag(λ) Qᵗ` with eigenvalues log-uniform in `[lo, hi]`.
pub fn random_spd(rng: &mut TrialRng, lo: f64, hi: f64) -> SymMatrix3 {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let lam = nalgebra::Vector3::from_fn(|_, _| rng.random_range(llo..=lhi).exp());
    let q = random_orthogonal(rng);
    SymMatrix3::from_matrix(&(q * Mat3::from_diagonal(&lam) * q.transpose()))
}

/// Gaussian complex matrix rescaled to a Frobenius norm uniform in `[0, max_norm]`.
pub fn random_complex_matrix(rng: &mut TrialRng, max_norm: f64) -> CMat3 {
    let g = CMat3::from_fn(|_, _| {
        Complex64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let n = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = rng.random_range(0.0..=max_norm);
    if n == 0.0 {
        g
    } else {
        g * Complex64::from(target / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma31SweepConfig {
    pub trials: u64,
    pub seed: u64,
}

/// Worst trial of a Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Witness {
    pub trial: u64,
    /// Upper triangle `a11 a22 a33 a12 a13 a23`.
    pub b: [f64; 6],
    /// Row-major `(re, im)` pairs.
    pub u: Vec<[f64; 2]>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Sweep {
    pub trials: u64,
    pub seed: u64,
    /// Minimum of `residual / (‖B‖²_F ‖U‖²_F)`.
    pub min_normalized: f64,
    pub min_residual: f64,
    pub mean_residual: f64,
    pub argmin: Lemma31Witness,
}

/// Random SPD `B` (eigenvalues in `[0.1, 10]`) and complex `U` (`‖U‖_F ≤ 10`).
pub fn lemma31_sweep(trials: u64, seed: u64) -> Result<Lemma31Sweep> {
    if trials == 0 {
        return Err(Error::Precondition("sweep needs at least one trial".into()));
    }
    let cells: Vec<(u64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            let b = random_spd(&mut rng, 0.1, 10.0);
            let u = random_complex_matrix(&mut rng, 10.0);
            let h = b.to_hermitian();
            let r = lemma31_residual(&h, &u).expect("random_spd is positive definite");
            let scale = b.matrix().norm_squared() * u.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let normalized = if scale > 0.0 { r / scale } else { 0.0 };
            (k, r, normalized)
        })
        .collect();

    let mut worst = 0usize;
    let mut sum = 0.0;
    for (i, c) in cells.iter().enumerate() {
        sum += c.1;
        if c.2 < cells[worst].2 {
            worst = i;
        }
    }
    let k = cells[worst].0;
    let mut rng = trial_rng(seed, k);
    let b = random_spd(&mut rng, 0.1, 10.0);
    let u = random_complex_matrix(&mut rng, 10.0);
    let bm = b.matrix();
    Ok(Lemma31Sweep {
        trials,
        seed,
        min_normalized: cells[worst].2,
        min_residual: cells[worst].1,
        mean_residual: sum / trials as f64,
        argmin: Lemma31Witness {
            trial: k,
            b: [
                bm[(0, 0)],
                bm[(1, 1)],
                bm[(2, 2)],
                bm[(0, 1)],
                bm[(0, 2)],
                bm[(1, 2)],
            ],
            u: u.transpose().iter().map(|z| [z.re, z.im]).collect(),
            residual: cells[worst].1,
        },
    })
}

/// `max |r(OBO*, OUOᵗ) − r(B, U)| / (‖B‖²‖U‖²)` over random unitary `O`.
pub fn unitary_invariance_sweep(trials: u64, seed: u64) -> f64 {
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed ^ 0x5eed_u64, k);
            let b = random_spd(&mut rng, 0.1, 10.0).to_hermitian();
            let u = random_complex_matrix(&mut rng, 10.0);
            let o = random_unitary(&mut rng);
            let b2 = Hermitian3::from_matrix(&(o * b.matrix() * o.adjoint()));
            let u2 = o * u * o.transpose();
            let r1 = lemma31_residual(&b, &u).unwrap_or(f64::NAN);
            let r2 = lemma31_residual(&b2, &u2).unwrap_or(f64::NAN);
            let scale = b.matrix().norm_squared() * u.norm_squared();
            if scale > 0.0 {
                (r1 - r2).abs() / scale
            } else {
                (r1 - r2).abs()
            }
        })
        .reduce(|| 0.0, f64::max)
}
