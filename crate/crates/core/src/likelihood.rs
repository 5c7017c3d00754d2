//! Outcome densities for homodyne and dual-homodyne detection, and the
//! posterior over Alice's states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::bessel_i;
use crate::states::{check_eta, Constellation};

/// Channel transmittance and detector excess noise (shot-noise units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelPoint {
    pub eta: f64,
    pub delta: f64,
}

impl ChannelPoint {
    pub fn new(eta: f64, delta: f64) -> Result<Self> {
        let ch = Self { eta, delta };
        ch.validate()?;
        Ok(ch)
    }

    pub fn lossless() -> Self {
        Self { eta: 1.0, delta: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)?;
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::Domain(format!("detector noise must be finite and >= 0, got {}", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    Homodyne,
    DualHomodyne,
}

/// Measured quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneOutcome {
    pub beta_x: f64,
}

/// Dual-homodyne outcome `β = β_r e^{−iφ}`, in the sign convention where
/// state `k` contributes `cos(2πk/d − χ + φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarOutcome {
    pub beta_r: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Homodyne(HomodyneOutcome),
    Polar(PolarOutcome),
}

impl From<HomodyneOutcome> for Outcome {
    fn from(o: HomodyneOutcome) -> Self {
        Outcome::Homodyne(o)
    }
}

impl From<PolarOutcome> for Outcome {
    fn from(o: PolarOutcome) -> Self {
        Outcome::Polar(o)
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Homodyne(o) => write!(f, "beta_x = {}", o.beta_x),
            Outcome::Polar(o) => write!(f, "beta_r = {}, phi = {}", o.beta_r, o.phi),
        }
    }
}

/// Mean of state `k` on the measured axis: `√η |α| cos(2πk/d − χ)`.
pub fn homodyne_mean(c: &Constellation, ch: &ChannelPoint, k: u32) -> f64 {
    ch.eta.sqrt() * c.amplitude * c.state_angle(k).cos()
}

/// Variance of the homodyne likelihood, `(1+δ) / (2(1 + tanh r))`.
pub fn homodyne_variance(c: &Constellation, ch: &ChannelPoint) -> f64 {
    (1.0 + ch.delta) / (2.0 * (1.0 + c.squeeze_r.tanh()))
}

fn ln_p_bx_given_k(c: &Constellation, ch: &ChannelPoint, k: u32, beta_x: f64) -> f64 {
    let t = c.squeeze_r.tanh();
    let dev = beta_x - homodyne_mean(c, ch, k);
    let norm = c.squeeze_r.cosh() * (PI * (1.0 - t) * (1.0 + ch.delta)).sqrt();
    -(1.0 + t) * dev * dev / (1.0 + ch.delta) - norm.ln()
}

/// `p(β_x | α_k)`: Gaussian with mean [`homodyne_mean`] and variance
/// [`homodyne_variance`].
pub fn p_bx_given_k(c: &Constellation, ch: &ChannelPoint, k: u32, out: HomodyneOutcome) -> f64 {
    let t = c.squeeze_r.tanh();
    let dev = out.beta_x - homodyne_mean(c, ch, k);
    (-(1.0 + t) * dev * dev / (1.0 + ch.delta)).exp()
        / (c.squeeze_r.cosh() * (PI * (1.0 - t) * (1.0 + ch.delta)).sqrt())
}

/// `p(β_x)` under a uniform prior.
pub fn p_bx(c: &Constellation, ch: &ChannelPoint, out: HomodyneOutcome) -> f64 {
    (0..c.d).map(|k| p_bx_given_k(c, ch, k, out)).sum::<f64>() / c.d as f64
}

fn require_coherent(c: &Constellation) -> Result<()> {
    if !c.is_coherent() {
        return Err(Error::Config(format!(
            "dual-homodyne detection is only defined for coherent states (squeeze_r = {})",
            c.squeeze_r
        )));
    }
    Ok(())
}

/// Bob's mean radius after the loss channel and the 50:50 split.
fn polar_mean_radius(c: &Constellation, ch: &ChannelPoint) -> f64 {
    (0.5 * ch.eta).sqrt() * c.amplitude
}

/// `|β − √(η/2) α_k|²` in polar form.
fn polar_distance_sq(c: &Constellation, ch: &ChannelPoint, k: u32, out: PolarOutcome) -> f64 {
    let m = polar_mean_radius(c, ch);
    let cross = 2.0 * m * out.beta_r * (c.state_angle(k) + out.phi).cos();
    (out.beta_r * out.beta_r + m * m - cross).max(0.0)
}

fn ln_p_polar_given_k(c: &Constellation, ch: &ChannelPoint, k: u32, out: PolarOutcome) -> f64 {
    let s = 1.0 + ch.delta;
    -polar_distance_sq(c, ch, k, out) / s - (PI * s).ln()
}

fn polar_density(c: &Constellation, ch: &ChannelPoint, k: u32, out: PolarOutcome) -> f64 {
    let s = 1.0 + ch.delta;
    (-polar_distance_sq(c, ch, k, out) / s).exp() / (PI * s)
}

/// `p(β | α_k)` for dual-homodyne detection in polar coordinates:
/// `exp(−|β − √(η/2) α_k|² / (1+δ)) / (π(1+δ))`.
pub fn p_polar_given_k(c: &Constellation, ch: &ChannelPoint, k: u32, out: PolarOutcome) -> Result<f64> {
    require_coherent(c)?;
    Ok(polar_density(c, ch, k, out))
}

pub fn p_polar(c: &Constellation, ch: &ChannelPoint, out: PolarOutcome) -> Result<f64> {
    require_coherent(c)?;
    Ok((0..c.d).map(|k| polar_density(c, ch, k, out)).sum::<f64>() / c.d as f64)
}

/// `p(β)` through the modified-Bessel expansion
/// `I_0(x) + 2 Σ_{m≥1} I_{md}(x) cos(md(φ − χ))`, `x = √(2η)|α|β_r/(1+δ)`.
pub fn p_polar_bessel(c: &Constellation, ch: &ChannelPoint, out: PolarOutcome) -> Result<f64> {
    require_coherent(c)?;
    let m = polar_mean_radius(c, ch);
    let s = 1.0 + ch.delta;
    let x = 2.0 * m * out.beta_r / s;
    let i0 = bessel_i(0, x)?;
    let mut series = i0;
    for j in 1u32.. {
        let order = j * c.d;
        let term = bessel_i(order, x)?;
        series += 2.0 * term * (order as f64 * (out.phi - c.axis_angle)).cos();
        if term < 1e-17 * i0 || order as f64 > x + 200.0 {
            break;
        }
    }
    Ok((-(out.beta_r * out.beta_r + m * m) / s).exp() / (PI * s) * series)
}

/// Natural-log likelihoods `ln p(outcome | α_k)` for every `k`.
pub fn log_likelihoods(c: &Constellation, ch: &ChannelPoint, out: Outcome) -> Result<Vec<f64>> {
    match out {
        Outcome::Homodyne(o) => Ok((0..c.d).map(|k| ln_p_bx_given_k(c, ch, k, o.beta_x)).collect()),
        Outcome::Polar(o) => {
            require_coherent(c)?;
            Ok((0..c.d).map(|k| ln_p_polar_given_k(c, ch, k, o)).collect())
        }
    }
}

/// Outcome density `p(outcome)` and posterior `p(α_k | outcome)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub density: f64,
    pub probs: Vec<f64>,
}

/// Joint evaluation of `p(outcome)` and the posterior. The posterior is
/// normalized in log space so it stays accurate where the density itself
/// is tiny; an outcome whose density underflows entirely is rejected.
pub fn posterior_with_density(c: &Constellation, ch: &ChannelPoint, out: Outcome) -> Result<Posterior> {
    let logs = log_likelihoods(c, ch, out)?;
    let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lmax.is_finite() || lmax.exp() < f64::MIN_POSITIVE {
        return Err(Error::DeadOutcome(out.to_string()));
    }
    let mut probs: Vec<f64> = logs.iter().map(|&l| (l - lmax).exp()).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(Posterior { density: lmax.exp() * total / c.d as f64, probs })
}

/// `p(α_k | outcome)` by Bayes' rule with a uniform prior.
pub fn posterior(c: &Constellation, ch: &ChannelPoint, out: Outcome) -> Result<Vec<f64>> {
    posterior_with_density(c, ch, out).map(|p| p.probs)
}
