//! Secure key rates: per-outcome gain, postselection, error-correction
//! efficiency, amplitude optimization, axis-angle presets and η sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{
    conditional_entropy, integrate_over_outcomes, mutual_information, EveState, ReconciliationMode,
};
use crate::likelihood::{posterior_with_density, ChannelPoint, Outcome, Posterior, Scheme};
use crate::numerics::QuadratureSpec;
use crate::states::Constellation;

/// Error-correction efficiency `f(e)`; `Ideal` is the Shannon limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum ECModel {
    #[default]
    Ideal,
    Linear {
        a: f64,
        b: f64,
    },
}

impl ECModel {
    pub fn efficiency(&self, e: f64) -> f64 {
        match *self {
            ECModel::Ideal => 1.0,
            ECModel::Linear { a, b } => a + b * e,
        }
    }

    /// A linear model must not beat the Shannon limit anywhere on `[0, ½]`.
    pub fn validate(&self) -> Result<()> {
        if let ECModel::Linear { a, b } = *self {
            if !a.is_finite() || !b.is_finite() || a < 1.0 || a + 0.5 * b < 1.0 {
                return Err(Error::Config(format!("f(e) = {a} + {b}·e drops below 1 on [0, 0.5]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AmplitudePolicy {
    Fixed(f64),
    Optimize { max_amp: f64 },
}

/// Postselection keeps outcomes whose gain exceeds this; smaller values are
/// rounding noise around a vanishing gain (e.g. at η = 0).
pub const GAIN_FLOOR: f64 = 1e-12;

/// Upper end of the default amplitude search window.
pub const DEFAULT_MAX_AMPLITUDE: f64 = 13.0;

impl Default for AmplitudePolicy {
    fn default() -> Self {
        AmplitudePolicy::Optimize { max_amp: DEFAULT_MAX_AMPLITUDE }
    }
}

/// Everything needed to evaluate one key rate. The constellation's own
/// amplitude is the one used by [`secure_key_rate`]; the policy decides what
/// [`evaluate`] and [`sweep`] do with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub constellation: Constellation,
    pub channel: ChannelPoint,
    pub scheme: Scheme,
    pub mode: ReconciliationMode,
    pub postselection: bool,
    pub ec_model: ECModel,
    pub quad: QuadratureSpec,
    pub amplitude_policy: AmplitudePolicy,
}

impl ProtocolParams {
    /// Homodyne, direct reconciliation, postselection on, ideal error
    /// correction, default quadrature, optimized amplitude.
    pub fn new(constellation: Constellation, channel: ChannelPoint) -> Self {
        Self {
            constellation,
            channel,
            scheme: Scheme::Homodyne,
            mode: ReconciliationMode::Direct,
            postselection: true,
            ec_model: ECModel::Ideal,
            quad: QuadratureSpec::default(),
            amplitude_policy: AmplitudePolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constellation.validate()?;
        self.channel.validate()?;
        self.ec_model.validate()?;
        self.quad.validate()?;
        if self.scheme == Scheme::DualHomodyne && !self.constellation.is_coherent() {
            return Err(Error::Config(format!(
                "dual-homodyne detection requires coherent states, got squeeze_r = {}",
                self.constellation.squeeze_r
            )));
        }
        match self.amplitude_policy {
            AmplitudePolicy::Fixed(a) if !(a >= 0.0 && a.is_finite()) => {
                Err(Error::Config(format!("fixed amplitude must be finite and >= 0, got {a}")))
            }
            AmplitudePolicy::Optimize { max_amp } if !(max_amp > 0.0 && max_amp.is_finite()) => {
                Err(Error::Config(format!("amplitude window must be > 0, got {max_amp}")))
            }
            _ => Ok(()),
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { constellation: self.constellation.with_amplitude(amplitude), ..*self }
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        Self { channel: ChannelPoint { eta, ..self.channel }, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRatePoint {
    pub eta: f64,
    pub alpha_opt: f64,
    pub gain_base_d: f64,
    pub gain_bits: f64,
}

impl KeyRatePoint {
    pub fn new(eta: f64, alpha_opt: f64, gain_base_d: f64, d: u32) -> Self {
        Self { eta, alpha_opt, gain_base_d, gain_bits: to_bits(gain_base_d, d) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhasePreset {
    None,
    Global,
    Local,
}

/// Axis angle χ for the named preset.
pub fn phase_preset(d: u32, preset: PhasePreset) -> f64 {
    let t = std::f64::consts::TAU / d as f64;
    match preset {
        PhasePreset::None => 0.0,
        PhasePreset::Global => ((1.0 - t.cos()) / (2.0 + t.sin())).atan(),
        PhasePreset::Local => ((1.0 - t.cos()) / (3.0 * t.sin())).atan(),
    }
}

/// Base-`d` units to bits.
pub fn to_bits(g: f64, d: u32) -> f64 {
    g * (d as f64).log2()
}

/// Per-outcome gain `1 − f(e)·H(A|B) − χ`, with `e = 1 − max_k p(α_k|β)`.
fn gain_from_posterior(eve: &EveState, mode: ReconciliationMode, ec: &ECModel, post: &Posterior) -> Result<f64> {
    let h = conditional_entropy(&post.probs);
    let e = 1.0 - post.probs.iter().copied().fold(0.0, f64::max);
    let chi = match mode {
        ReconciliationMode::Direct => eve.chi_direct,
        ReconciliationMode::Reverse => eve.chi_reverse(&post.probs)?,
    };
    Ok(1.0 - ec.efficiency(e) * h - chi)
}

pub fn pointwise_gain(p: &ProtocolParams, outcome: Outcome) -> Result<f64> {
    p.validate()?;
    let eve = EveState::new(&p.constellation, p.channel.eta)?;
    let post = posterior_with_density(&p.constellation, &p.channel, outcome)?;
    gain_from_posterior(&eve, p.mode, &p.ec_model, &post)
}

/// `∫ p(outcome) gain(outcome)` at the constellation's amplitude. With
/// postselection only outcomes of positive gain contribute.
pub fn secure_key_rate(p: &ProtocolParams) -> Result<f64> {
    p.validate()?;
    if p.constellation.amplitude == 0.0 {
        return Ok(0.0);
    }
    let eve = EveState::new(&p.constellation, p.channel.eta)?;
    integrate_over_outcomes(&p.constellation, &p.channel, p.scheme, &p.quad, |post, _| {
        let g = gain_from_posterior(&eve, p.mode, &p.ec_model, post)?;
        Ok(if !p.postselection || g > GAIN_FLOOR { g } else { 0.0 })
    })
}

/// Coarse scan of five amplitudes on `[0, max_amp]`, then probes at ±step
/// around the incumbent with the step halved each round until it reaches
/// 0.01. Probes are clamped to the window; ties keep the incumbent.
pub fn optimize_amplitude(p: &ProtocolParams) -> Result<(f64, f64)> {
    let AmplitudePolicy::Optimize { max_amp } = p.amplitude_policy else {
        return Err(Error::Config("amplitude optimization needs an Optimize policy".into()));
    };
    p.validate()?;
    let rate = |a: f64| secure_key_rate(&p.with_amplitude(a));

    let mut step = max_amp / 4.0;
    let (mut best_a, mut best_g) = (0.0, rate(0.0)?);
    for i in 1..=4 {
        let a = step * i as f64;
        let g = rate(a)?;
        if g > best_g {
            (best_a, best_g) = (a, g);
        }
    }
    step /= 2.0;
    loop {
        let centre = best_a;
        for a in [centre - step, centre + step] {
            let a = a.clamp(0.0, max_amp);
            if a == centre {
                continue;
            }
            let g = rate(a)?;
            if g > best_g {
                (best_a, best_g) = (a, g);
            }
        }
        step /= 2.0;
        if step <= 0.01 {
            break;
        }
    }
    Ok((best_a, best_g))
}

/// Resolves the amplitude policy at the parameters' η.
pub fn evaluate(p: &ProtocolParams) -> Result<KeyRatePoint> {
    let (alpha, g) = match p.amplitude_policy {
        AmplitudePolicy::Fixed(a) => (a, secure_key_rate(&p.with_amplitude(a))?),
        AmplitudePolicy::Optimize { .. } => optimize_amplitude(p)?,
    };
    Ok(KeyRatePoint::new(p.channel.eta, alpha, g, p.constellation.d))
}

/// One [`KeyRatePoint`] per η. Failures are reported per point.
///
/// With `warm_start` the amplitude window of each point is narrowed to the
/// previous optimum plus one, which makes the points sequential; otherwise
/// they run in parallel.
pub fn sweep(p: &ProtocolParams, etas: &[f64], warm_start: bool) -> Vec<Result<KeyRatePoint>> {
    let warm = warm_start && matches!(p.amplitude_policy, AmplitudePolicy::Optimize { .. });
    if !warm {
        return etas.par_iter().map(|&eta| evaluate(&p.with_eta(eta))).collect();
    }
    let AmplitudePolicy::Optimize { max_amp } = p.amplitude_policy else { unreachable!() };
    let mut window = max_amp;
    etas.iter()
        .map(|&eta| {
            let params =
                ProtocolParams { amplitude_policy: AmplitudePolicy::Optimize { max_amp: window }, ..p.with_eta(eta) };
            let point = evaluate(&params)?;
            if point.alpha_opt > 0.0 {
                window = point.alpha_opt + 1.0;
            }
            Ok(point)
        })
        .collect()
}

/// Breakdown of the quantities entering the key rate at one amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub eta: f64,
    pub alpha: f64,
    pub mutual_information: f64,
    pub chi_direct: f64,
    /// Outcome-averaged reverse-reconciliation Holevo information.
    pub chi_reverse_mean: f64,
    pub gain_postselected: f64,
    pub gain_unpostselected: f64,
}

pub fn diagnose(p: &ProtocolParams, alpha: f64) -> Result<Diagnostics> {
    let p = p.with_amplitude(alpha);
    p.validate()?;
    let c = &p.constellation;
    let eve = EveState::new(c, p.channel.eta)?;
    let mi = mutual_information(c, &p.channel, p.scheme, &p.quad)?;
    let chi_reverse_mean = if alpha == 0.0 {
        0.0
    } else {
        integrate_over_outcomes(c, &p.channel, p.scheme, &p.quad, |post, _| eve.chi_reverse(&post.probs))?
    };
    let with_ps = secure_key_rate(&ProtocolParams { postselection: true, ..p })?;
    let without_ps = secure_key_rate(&ProtocolParams { postselection: false, ..p })?;
    Ok(Diagnostics {
        eta: p.channel.eta,
        alpha,
        mutual_information: mi,
        chi_direct: eve.chi_direct,
        chi_reverse_mean,
        gain_postselected: with_ps,
        gain_unpostselected: without_ps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::HomodyneOutcome;
    use crate::numerics::integrate_line;

    fn params(d: u32, a: f64, eta: f64) -> ProtocolParams {
        ProtocolParams::new(Constellation::coherent(d, a, 0.0).unwrap(), ChannelPoint::new(eta, 0.0).unwrap())
    }

    fn hd(x: f64) -> Outcome {
        HomodyneOutcome { beta_x: x }.into()
    }

    #[test]
    fn presets() {
        assert!((phase_preset(4, PhasePreset::Local) - (1.0f64 / 3.0).atan()).abs() < 1e-15);
        assert!((phase_preset(4, PhasePreset::Local) - 0.32175).abs() < 1e-5);
        assert!((phase_preset(8, PhasePreset::Local) - 0.13720370805).abs() < 1e-10);
        assert!((phase_preset(8, PhasePreset::Global) - 0.10777495508).abs() < 1e-10);
        for d in 2..10 {
            assert_eq!(phase_preset(d, PhasePreset::None), 0.0);
        }
    }

    #[test]
    fn bits() {
        assert_eq!(to_bits(1.0, 4), 2.0);
        assert_eq!(to_bits(0.37, 2), 0.37);
        assert!((to_bits(0.95, 8) - 2.85).abs() < 1e-12);
    }

    #[test]
    fn ec_validation() {
        assert!(ECModel::Linear { a: 1.1, b: 0.5 }.validate().is_ok());
        assert!(ECModel::Linear { a: 1.0, b: -0.5 }.validate().is_err());
        assert!(ECModel::Linear { a: 0.9, b: 1.0 }.validate().is_err());
        assert_eq!(ECModel::Linear { a: 1.2, b: 0.4 }.efficiency(0.5), 1.4);
    }

    #[test]
    fn rejects_squeezed_dual_homodyne() {
        let mut p = params(4, 1.0, 0.9);
        p.scheme = Scheme::DualHomodyne;
        p.constellation.squeeze_r = 0.2;
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn gain_limits() {
        let p = params(2, 1.0, 1.0);
        assert!(pointwise_gain(&p, hd(0.0)).unwrap().abs() < 1e-15);
        let p = params(4, 10.0, 1.0);
        assert!(pointwise_gain(&p, hd(10.0)).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn two_state_sign_change_matches_closed_form() {
        // root of 1 − h(e(β)) = χ with e(β) = 1/(1 + exp(4√η α β))
        let (a, eta) = (1.0f64, 0.7f64);
        let p = ProtocolParams { postselection: false, ..params(2, a, eta) };
        let x = (-2.0 * (1.0 - eta) * a * a).exp();
        let h2 = |q: f64| if q <= 0.0 || q >= 1.0 { 0.0 } else { -(q * q.log2() + (1.0 - q) * (1.0 - q).log2()) };
        let chi = h2(0.5 * (1.0 + x));
        let f = |b: f64| 1.0 - h2(1.0 / (1.0 + (4.0 * eta.sqrt() * a * b).exp())) - chi;
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        let root = 0.5 * (lo + hi);
        assert!(pointwise_gain(&p, hd(root - 1e-6)).unwrap() < 0.0);
        assert!(pointwise_gain(&p, hd(root + 1e-6)).unwrap() > 0.0);
        assert!(pointwise_gain(&p, hd(root)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn zero_amplitude() {
        assert_eq!(secure_key_rate(&params(3, 0.0, 0.5)).unwrap(), 0.0);
    }

    #[test]
    fn fold_equivalence() {
        for (d, a, eta) in [(2u32, 1.2, 0.7), (4, 2.0, 0.8), (6, 3.0, 0.9)] {
            let p = ProtocolParams { mode: ReconciliationMode::Reverse, ..params(d, a, eta) };
            let full = secure_key_rate(&p).unwrap();
            let limit = eta.sqrt() * a + 8.0 * 0.5f64.sqrt();
            let half = integrate_line(
                |x| {
                    let post = posterior_with_density(&p.constellation, &p.channel, hd(x)).unwrap();
                    post.density * pointwise_gain(&p, hd(x)).unwrap().max(0.0)
                },
                0.0,
                limit,
                0.01,
            )
            .unwrap();
            assert!((full - 2.0 * half).abs() < 1e-8, "d = {d}: {full} vs {}", 2.0 * half);
        }
    }

    #[test]
    fn lossless_two_states_saturate() {
        let (a, g) = optimize_amplitude(&params(2, 0.0, 1.0)).unwrap();
        assert!((g - 1.0).abs() < 1e-3, "{g}");
        let g_plus = secure_key_rate(&params(2, a + 1.0, 1.0)).unwrap();
        assert!((g_plus - g).abs() < 1e-3);
    }

    #[test]
    fn optimizer_without_signal() {
        let p = ProtocolParams { postselection: false, ..params(2, 0.0, 0.3) };
        assert_eq!(optimize_amplitude(&p).unwrap(), (0.0, 0.0));
        assert!(optimize_amplitude(&ProtocolParams { amplitude_policy: AmplitudePolicy::Fixed(1.0), ..p }).is_err());
    }

    #[test]
    fn sweep_matches_manual_composition() {
        let p = params(2, 0.0, 1.0);
        let swept = sweep(&p, &[0.8], false).pop().unwrap().unwrap();
        let (a, g) = optimize_amplitude(&p.with_eta(0.8)).unwrap();
        assert_eq!((swept.alpha_opt, swept.gain_base_d), (a, g));
        assert_eq!(swept.gain_bits, g);
    }

    #[test]
    fn sweep_reports_failures_per_point() {
        let p = params(2, 0.0, 1.0);
        let rows =
            sweep(&ProtocolParams { amplitude_policy: AmplitudePolicy::Fixed(1.0), ..p }, &[0.9, 1.5, 0.5], false);
        assert!(rows[0].is_ok() && rows[1].is_err() && rows[2].is_ok());
    }
}
