//! Ready-made parameter families.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::density::{eigh, CMatrix, DensityMatrix};
use super::qfi::ParamFamily;
use crate::analytics::{p_detuned, Convention};
use crate::error::{Error, Result};
use crate::C64;

/// Parameters a Ramsey family can expose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RamseyParam {
    /// `ω_r t`.
    OmegaR,
    /// Shift of `ω_s t` from the base point (0 at the base point).
    OmegaS,
    /// `σ t`.
    Sigma,
}

/// Base values of a Ramsey family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyPoint {
    pub omega_r_t: f64,
    pub delta_s_t: f64,
    pub sigma_t: f64,
}

impl RamseyPoint {
    pub fn new(omega_r_t: f64, delta_s_t: f64, sigma_t: f64) -> Self {
        RamseyPoint {
            omega_r_t,
            delta_s_t,
            sigma_t,
        }
    }
}

fn default_step(p: RamseyParam, base: &RamseyPoint) -> f64 {
    match p {
        RamseyParam::OmegaR if base.omega_r_t != 0.0 => (base.omega_r_t.abs() * 1e-2).min(1e-5),
        _ => 1e-5,
    }
}

fn ramsey_probability(
    point: &RamseyPoint,
    params: &[RamseyParam],
    theta: &[f64],
    delta_s_t: f64,
    conv: Convention,
) -> Result<f64> {
    let mut r = point.omega_r_t;
    let mut shift = 0.0;
    let mut s = point.sigma_t;
    for (i, (&p, &v)) in params.iter().zip(theta).enumerate() {
        match p {
            RamseyParam::OmegaR => r = v,
            RamseyParam::OmegaS => shift = v,
            RamseyParam::Sigma => {
                if v < 0.0 {
                    return Err(Error::Domain { index: i, value: v });
                }
                s = v
            }
        }
    }
    p_detuned(delta_s_t - shift, r, s, conv)
}

/// Dephased Ramsey state `diag(1 − p, p)` in the measurement basis, with
/// the Gaussian averaged probability `p`.
#[derive(Debug, Clone)]
pub struct RamseyFamily {
    params: Vec<RamseyParam>,
    steps: Vec<f64>,
    point: RamseyPoint,
    convention: Convention,
}

impl RamseyFamily {
    pub fn new(params: &[RamseyParam], point: RamseyPoint, convention: Convention) -> Self {
        RamseyFamily {
            params: params.to_vec(),
            steps: params.iter().map(|&p| default_step(p, &point)).collect(),
            point,
            convention,
        }
    }

    pub fn with_steps(mut self, steps: Vec<f64>) -> Self {
        self.steps = steps;
        self
    }

    /// θ at the base point.
    pub fn theta0(&self) -> Vec<f64> {
        theta0(&self.params, &self.point)
    }
}

fn theta0(params: &[RamseyParam], point: &RamseyPoint) -> Vec<f64> {
    params
        .iter()
        .map(|p| match p {
            RamseyParam::OmegaR => point.omega_r_t,
            RamseyParam::OmegaS => 0.0,
            RamseyParam::Sigma => point.sigma_t,
        })
        .collect()
}

impl ParamFamily for RamseyFamily {
    fn n_params(&self) -> usize {
        self.params.len()
    }
    fn fd_step(&self, idx: usize) -> f64 {
        self.steps[idx]
    }
    fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix> {
        let p = ramsey_probability(&self.point, &self.params, theta, self.point.delta_s_t, self.convention)?;
        DensityMatrix::diagonal(&[1.0 - p, p])
    }
}

/// Equal-weight mixture of Ramsey measurements at several pulse
/// detunings, kept apart as a direct sum `⊕_k ρ_k / K`.
#[derive(Debug, Clone)]
pub struct MultiSettingRamsey {
    params: Vec<RamseyParam>,
    steps: Vec<f64>,
    point: RamseyPoint,
    settings: Vec<f64>,
    convention: Convention,
}

impl MultiSettingRamsey {
    /// `point.delta_s_t` is ignored; each entry of `settings` is a `δ_s t`.
    pub fn new(params: &[RamseyParam], point: RamseyPoint, settings: &[f64], convention: Convention) -> Self {
        MultiSettingRamsey {
            params: params.to_vec(),
            steps: params.iter().map(|&p| default_step(p, &point)).collect(),
            point,
            settings: settings.to_vec(),
            convention,
        }
    }

    pub fn with_steps(mut self, steps: Vec<f64>) -> Self {
        self.steps = steps;
        self
    }

    pub fn theta0(&self) -> Vec<f64> {
        theta0(&self.params, &self.point)
    }
}

impl ParamFamily for MultiSettingRamsey {
    fn n_params(&self) -> usize {
        self.params.len()
    }
    fn fd_step(&self, idx: usize) -> f64 {
        self.steps[idx]
    }
    fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix> {
        let w = 1.0 / self.settings.len() as f64;
        let mut diag = Vec::with_capacity(2 * self.settings.len());
        for &d in &self.settings {
            let p = ramsey_probability(&self.point, &self.params, theta, d, self.convention)?;
            diag.push(w * (1.0 - p));
            diag.push(w * p);
        }
        DensityMatrix::diagonal(&diag)
    }
}

/// `|ψ(θ)⟩ = exp(−iθσ_z/2)|+⟩`, QFI = 1.
#[derive(Debug, Clone, Copy)]
pub struct UnitaryQubitFamily;

impl ParamFamily for UnitaryQubitFamily {
    fn n_params(&self) -> usize {
        1
    }
    fn fd_step(&self, _idx: usize) -> f64 {
        1e-5
    }
    fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix> {
        let h = theta[0] / 2.0;
        let a = core::f64::consts::FRAC_1_SQRT_2;
        let psi = DVector::from_vec(vec![crate::polar(a, -h), crate::polar(a, h)]);
        DensityMatrix::pure(&psi)
    }
}

fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// `V exp(−iθΛ) V†` from a precomputed eigendecomposition of a generator.
fn unitary(vals: &[f64], vecs: &CMatrix, theta: f64) -> CMatrix {
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&l| crate::polar(1.0, -theta * l)));
    vecs * CMatrix::from_diagonal(&d) * vecs.adjoint()
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|&v| libm::exp(v - m)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Full-rank one-parameter family `U(θ) diag(softmax(a + bθ + cθ²)) U(θ)†`
/// with `U(θ) = exp(−iθH)` for a random Hermitian `H`.
#[derive(Debug, Clone)]
pub struct RandomFamily {
    gen_vals: Vec<f64>,
    gen_vecs: CMatrix,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl RandomFamily {
    pub fn generate<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let h = random_hermitian(dim, rng);
        let (gen_vals, gen_vecs) = eigh(&h);
        let mut draw =
            |n: usize, s: f64| -> Vec<f64> { (0..n).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect() };
        let a = draw(dim, 0.5);
        let b = draw(dim, 1.0);
        let c = draw(dim, 0.5);
        RandomFamily {
            gen_vals,
            gen_vecs,
            a,
            b,
            c,
        }
    }
}

impl ParamFamily for RandomFamily {
    fn n_params(&self) -> usize {
        1
    }
    fn fd_step(&self, _idx: usize) -> f64 {
        1e-5
    }
    fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix> {
        let t = theta[0];
        let x: Vec<f64> = (0..self.a.len())
            .map(|i| self.a[i] + self.b[i] * t + self.c[i] * t * t)
            .collect();
        let p = softmax(&x);
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            p.len(),
            p.into_iter().map(|v| C64::new(v, 0.0)),
        ));
        let u = unitary(&self.gen_vals, &self.gen_vecs, t);
        let m = &u * d * u.adjoint();
        // restore exact Hermiticity lost to rounding
        DensityMatrix::new((&m + m.adjoint()) * C64::new(0.5, 0.0))
    }
}

/// Two-parameter family `(s, u)` on dimension 4 with `ρ(s) = ρ(−s)`.
///
/// Regular variant: one eigenvalue is `b s²`, the others are fixed and the
/// frame rotates with `u`. Irregular variant: all eigenvalues are fixed and
/// `s` only enters through a rotation `exp(−i s² K)`.
#[derive(Debug, Clone)]
pub struct RandomBlockFamily {
    regular: bool,
    b: f64,
    rest: Vec<f64>,
    h_vals: Vec<f64>,
    h_vecs: CMatrix,
    k_vals: Vec<f64>,
    k_vecs: CMatrix,
}

impl RandomBlockFamily {
    pub fn generate<R: Rng + ?Sized>(regular: bool, rng: &mut R) -> Self {
        let (h_vals, h_vecs) = eigh(&random_hermitian(4, rng));
        let (k_vals, k_vecs) = eigh(&random_hermitian(4, rng));
        let raw: Vec<f64> = (0..3).map(|_| 0.2 + rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        RandomBlockFamily {
            regular,
            b: 0.25 + 0.2 * rng.random::<f64>(),
            rest: raw.into_iter().map(|v| v / total).collect(),
            h_vals,
            h_vecs,
            k_vals,
            k_vecs,
        }
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }
}

impl ParamFamily for RandomBlockFamily {
    fn n_params(&self) -> usize {
        2
    }
    fn fd_step(&self, idx: usize) -> f64 {
        if idx == 0 {
            1e-8
        } else {
            1e-5
        }
    }
    fn evaluate(&self, theta: &[f64]) -> Result<DensityMatrix> {
        let (s, u) = (theta[0], theta[1]);
        let small = if self.regular { self.b * s * s } else { 0.0 };
        let mut p = vec![small];
        p.extend(self.rest.iter().map(|v| v * (1.0 - small)));
        let d = DMatrix::from_diagonal(&DVector::from_iterator(4, p.into_iter().map(|v| C64::new(v, 0.0))));
        let mut u_mat = unitary(&self.h_vals, &self.h_vecs, u);
        if !self.regular {
            u_mat *= unitary(&self.k_vals, &self.k_vecs, 0.05 * s * s);
        }
        let m = &u_mat * d * u_mat.adjoint();
        DensityMatrix::new((&m + m.adjoint()) * C64::new(0.5, 0.0))
    }
}
