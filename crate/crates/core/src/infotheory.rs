//! Mutual information between Alice and Bob, Eve's coefficients in the
//! orthonormal circle basis, and the Holevo quantities for direct and
//! reverse reconciliation. All information is in base-`d` units.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{
    homodyne_variance, posterior_with_density, ChannelPoint, HomodyneOutcome, Outcome, PolarOutcome, Posterior, Scheme,
};
use crate::numerics::{
    entropy_of_spectrum, hermitian_eigenvalues, shannon_entropy_nats, HermitianMatrix, LineGrid, PolarGrid,
    QuadratureSpec,
};
use crate::states::{check_eta, squeezed_overlap, Constellation};

const IMAG_TOL: f64 = 1e-10;
const NEGATIVE_TOL: f64 = 1e-10;
const SUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReconciliationMode {
    Direct,
    Reverse,
}

/// `|c_l|²`, the weights of Eve's averaged state in the orthonormal basis
/// spanned by her `d` states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveCoefficients {
    pub magnitudes_sq: Vec<f64>,
}

/// Eve's tapped state `k` on a circle of radius `√(1−η)|α|`, with state 0 on
/// the positive real axis. The axis angle only rotates the whole circle and
/// drops out of every overlap.
fn eve_point(c: &Constellation, eta: f64, k: u32) -> Complex64 {
    Complex64::from_polar((1.0 - eta).sqrt() * c.amplitude, TAU * k as f64 / c.d as f64)
}

/// `⟨ε_0|ε_k⟩` for Eve's tapped states, carrying the constellation's squeeze.
pub fn eve_overlap(c: &Constellation, eta: f64, k: u32) -> Result<Complex64> {
    check_eta(eta)?;
    if k >= c.d {
        return Err(Error::Domain(format!("state index {k} out of range for d = {}", c.d)));
    }
    Ok(squeezed_overlap(eve_point(c, eta, k), eve_point(c, eta, 0), c.squeeze_r))
}

/// Raw inverse-DFT weights `(1/d) Σ_k e^{−i2πkl/d} ⟨ε_0|ε_k⟩`, before any
/// validity checks.
pub fn eve_fourier_weights(c: &Constellation, eta: f64) -> Result<Vec<Complex64>> {
    let d = c.d;
    let overlaps: Vec<Complex64> = (0..d).map(|k| eve_overlap(c, eta, k)).collect::<Result<_>>()?;
    Ok((0..d)
        .map(|l| {
            overlaps
                .iter()
                .enumerate()
                .map(|(k, o)| {
                    Complex64::from_polar(1.0, -TAU * ((k as u64 * l as u64) % d as u64) as f64 / d as f64) * o
                })
                .sum::<Complex64>()
                / d as f64
        })
        .collect())
}

/// `|c_l|²` from the inverse DFT of Eve's overlaps.
///
/// The weights are the eigenvalues of Eve's averaged state only when her
/// Gram matrix is circulant. That holds for coherent states and for two
/// squeezed states; for more squeezed states the circle symmetry is broken
/// and the weights can go negative, which is reported as an error.
pub fn eve_coefficients(c: &Constellation, eta: f64) -> Result<EveCoefficients> {
    let weights = eve_fourier_weights(c, eta)?;
    let mut magnitudes_sq = Vec::with_capacity(weights.len());
    for (l, w) in weights.iter().enumerate() {
        if w.im.abs() > IMAG_TOL {
            return Err(Error::Construction(format!("weight {l} has imaginary part {:e}", w.im)));
        }
        if w.re < -NEGATIVE_TOL {
            return Err(Error::Construction(format!(
                "weight {l} = {:e} is negative (d = {}, squeeze_r = {})",
                w.re, c.d, c.squeeze_r
            )));
        }
        magnitudes_sq.push(w.re.max(0.0));
    }
    let total: f64 = magnitudes_sq.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::Construction(format!("weights sum to {total}")));
    }
    Ok(EveCoefficients { magnitudes_sq })
}

/// Shannon entropy in base `d`.
fn entropy_base_d(p: &[f64]) -> f64 {
    shannon_entropy_nats(p) / (p.len() as f64).ln()
}

/// Holevo information for direct reconciliation, `−Σ |c_l|² log_d |c_l|²`.
pub fn chi_direct(c: &Constellation, eta: f64) -> Result<f64> {
    Ok(entropy_base_d(&eve_coefficients(c, eta)?.magnitudes_sq))
}

/// Eve's side of the protocol at one `(constellation, η)`: the quantities
/// that do not depend on Bob's outcome.
#[derive(Debug, Clone)]
pub struct EveState {
    pub coefficients: EveCoefficients,
    pub chi_direct: f64,
    amplitudes: Vec<Complex64>,
}

impl EveState {
    pub fn new(c: &Constellation, eta: f64) -> Result<Self> {
        let coefficients = eve_coefficients(c, eta)?;
        let chi_direct = entropy_base_d(&coefficients.magnitudes_sq);
        let amplitudes = coefficients.magnitudes_sq.iter().map(|&m| Complex64::new(m.sqrt(), 0.0)).collect();
        Ok(Self { coefficients, chi_direct, amplitudes })
    }

    /// Eve's state conditioned on Bob's outcome with the given posterior.
    pub fn conditional_matrix(&self, posterior: &[f64]) -> HermitianMatrix {
        conditional_eve_matrix(&self.amplitudes, posterior, 1)
    }

    /// `χ^RR = χ^DR − S(ρ_m)`, base `d`.
    pub fn chi_reverse(&self, posterior: &[f64]) -> Result<f64> {
        let rho = self.conditional_matrix(posterior);
        let spectrum = hermitian_eigenvalues(&rho)?;
        let s = entropy_of_spectrum(&spectrum.eigenvalues, posterior.len() as f64)?;
        let chi = self.chi_direct - s;
        // concavity of the entropy keeps this >= 0 up to rounding
        Ok(if chi < 0.0 && chi > -1e-12 { 0.0 } else { chi })
    }
}

/// `ρ_{n,m} = c_n c_m* σ_{n−m}` with `σ_j = Σ_l e^{−i(2π/d) j (l + offset)} w_l`
/// and `w` the posterior over Alice's states.
///
/// Any phases carried by `amplitudes` amount to a diagonal unitary
/// conjugation and leave the spectrum unchanged, as does the offset.
pub fn conditional_eve_matrix(amplitudes: &[Complex64], posterior: &[f64], phase_offset: u32) -> HermitianMatrix {
    let d = amplitudes.len();
    assert_eq!(posterior.len(), d, "posterior and coefficient lengths differ");
    let sigma: Vec<Complex64> = (0..d)
        .map(|j| {
            posterior
                .iter()
                .enumerate()
                .map(|(l, &w)| {
                    let idx = (j * (l + phase_offset as usize)) % d;
                    Complex64::from_polar(w, -TAU * idx as f64 / d as f64)
                })
                .sum()
        })
        .collect();
    HermitianMatrix::from_lower(d, |n, m| amplitudes[n] * amplitudes[m].conj() * sigma[n - m])
}

/// Eve's conditional state for reverse reconciliation at one outcome.
pub fn rr_density_matrix(c: &Constellation, ch: &ChannelPoint, outcome: Outcome) -> Result<HermitianMatrix> {
    let eve = EveState::new(c, ch.eta)?;
    let post = posterior_with_density(c, ch, outcome)?;
    Ok(eve.conditional_matrix(&post.probs))
}

pub fn chi_reverse(c: &Constellation, ch: &ChannelPoint, outcome: Outcome) -> Result<f64> {
    let eve = EveState::new(c, ch.eta)?;
    let post = posterior_with_density(c, ch, outcome)?;
    eve.chi_reverse(&post.probs)
}

/// `H(A | outcome)` in base `d`.
pub fn conditional_entropy(posterior: &[f64]) -> f64 {
    entropy_base_d(posterior)
}

/// Integration range implied by the quadrature spec: the explicit limit if
/// one is set, otherwise the largest state mean plus eight standard
/// deviations.
pub fn outcome_limit(c: &Constellation, ch: &ChannelPoint, scheme: Scheme, quad: &QuadratureSpec) -> f64 {
    if let Some(limit) = quad.radial_limit {
        return limit;
    }
    match scheme {
        Scheme::Homodyne => ch.eta.sqrt() * c.amplitude + 8.0 * homodyne_variance(c, ch).sqrt(),
        Scheme::DualHomodyne => (0.5 * ch.eta).sqrt() * c.amplitude + 8.0 * (0.5 * (1.0 + ch.delta)).sqrt(),
    }
}

const CHUNK: usize = 2048;

type NodeFn = Box<dyn Fn(usize) -> (Outcome, f64) + Sync>;

/// `∫ p(outcome) f(posterior) d outcome` over the whole outcome space: the
/// real line for homodyne detection, the plane in polar coordinates for
/// dual-homodyne detection.
///
/// Outcomes whose density underflows contribute nothing. The grid is cut
/// into fixed chunks summed in order, so the result does not depend on the
/// thread count.
pub fn integrate_over_outcomes<F>(
    c: &Constellation,
    ch: &ChannelPoint,
    scheme: Scheme,
    quad: &QuadratureSpec,
    f: F,
) -> Result<f64>
where
    F: Fn(&Posterior, Outcome) -> Result<f64> + Sync,
{
    quad.validate()?;
    let limit = outcome_limit(c, ch, scheme, quad);
    let eval = |outcome: Outcome, weight: f64| -> Result<f64> {
        if weight == 0.0 {
            return Ok(0.0);
        }
        let post = match posterior_with_density(c, ch, outcome) {
            Ok(p) => p,
            Err(Error::DeadOutcome(_)) => return Ok(0.0),
            Err(e) => return Err(e),
        };
        let v = f(&post, outcome)?;
        let term = weight * post.density * v;
        if !term.is_finite() {
            let at = match outcome {
                Outcome::Homodyne(o) => o.beta_x,
                Outcome::Polar(o) => o.beta_r,
            };
            return Err(Error::NonFinite { at });
        }
        Ok(term)
    };

    let (len, node): (usize, NodeFn) = match scheme {
        Scheme::Homodyne => {
            let grid = LineGrid::new(-limit, limit, quad.step)?;
            (
                grid.len(),
                Box::new(move |i| {
                    let (x, w) = grid.node(i);
                    (HomodyneOutcome { beta_x: x }.into(), w)
                }),
            )
        }
        Scheme::DualHomodyne => {
            let grid = PolarGrid::new(limit, 0.0, TAU, quad)?;
            (
                grid.len(),
                Box::new(move |i| {
                    let (r, phi, w) = grid.node(i);
                    (PolarOutcome { beta_r: r, phi }.into(), w)
                }),
            )
        }
    };

    let chunks: Vec<Result<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut acc = 0.0;
            for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(len) {
                let (outcome, w) = node(i);
                acc += eval(outcome, w)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = 0.0;
    for part in chunks {
        total += part?;
    }
    Ok(total)
}

/// `I(A:B) = 1 − H(A|B)` in base `d`.
pub fn mutual_information(c: &Constellation, ch: &ChannelPoint, scheme: Scheme, quad: &QuadratureSpec) -> Result<f64> {
    c.validate()?;
    ch.validate()?;
    if c.amplitude == 0.0 {
        return Ok(0.0);
    }
    integrate_over_outcomes(c, ch, scheme, quad, |post, _| Ok(1.0 - conditional_entropy(&post.probs)))
}
