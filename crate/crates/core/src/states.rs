//! Phase-space labels of the prepared states, their overlaps, and the
//! beam-splitter tap.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point in phase space, shot-noise units.
pub type ComplexAmplitude = Complex64;

/// `d` states `|α| e^{i(2πk/d − χ)}` on a circle, optionally squeezed along
/// the measurement axis with radius `squeeze_r` (negative means
/// anti-squeezed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub d: u32,
    pub amplitude: f64,
    pub axis_angle: f64,
    pub squeeze_r: f64,
}

impl Constellation {
    pub fn new(d: u32, amplitude: f64, axis_angle: f64, squeeze_r: f64) -> Result<Self> {
        let c = Self { d, amplitude, axis_angle, squeeze_r };
        c.validate()?;
        Ok(c)
    }

    pub fn coherent(d: u32, amplitude: f64, axis_angle: f64) -> Result<Self> {
        Self::new(d, amplitude, axis_angle, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Config(format!("need at least 2 states, got d = {}", self.d)));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::Config(format!("amplitude must be finite and >= 0, got {}", self.amplitude)));
        }
        if !self.axis_angle.is_finite() || !self.squeeze_r.is_finite() {
            return Err(Error::Config("axis angle and squeeze radius must be finite".into()));
        }
        Ok(())
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..*self }
    }

    pub fn is_coherent(&self) -> bool {
        self.squeeze_r == 0.0
    }

    /// Angle `2πk/d − χ` of state `k`.
    pub fn state_angle(&self, k: u32) -> f64 {
        TAU * k as f64 / self.d as f64 - self.axis_angle
    }
}

pub fn constellation_point(c: &Constellation, k: u32) -> Result<ComplexAmplitude> {
    if k >= c.d {
        return Err(Error::Domain(format!("state index {k} out of range for d = {}", c.d)));
    }
    Ok(Complex64::from_polar(c.amplitude, c.state_angle(k)))
}

/// `⟨b|a⟩ = exp(−½(|a|² + |b|² − 2ab*))`.
pub fn coherent_overlap(a: ComplexAmplitude, b: ComplexAmplitude) -> Complex64 {
    (-0.5 * (a.norm_sqr() + b.norm_sqr() - 2.0 * a * b.conj())).exp()
}

/// Overlap of two equally squeezed states (squeeze angle 0) displaced to
/// `e0` and `ek`: `exp(−½(e_k e_0* − e_0 e_k*)) · exp(−½|β|²)` with
/// `β = (e_k − e_0) cosh r + (e_k − e_0)* sinh r`.
///
/// At `r = 0` this is `coherent_overlap(e0, ek)`.
pub fn squeezed_overlap(e0: ComplexAmplitude, ek: ComplexAmplitude, r: f64) -> Complex64 {
    if r == 0.0 {
        return coherent_overlap(e0, ek);
    }
    let diff = ek - e0;
    let beta = diff * r.cosh() + diff.conj() * r.sinh();
    let phase = -0.5 * (ek * e0.conj() - e0 * ek.conj());
    (phase - 0.5 * beta.norm_sqr()).exp()
}

/// Splits `a` on a beam splitter of transmittance `eta` into Bob's and Eve's
/// amplitudes. Squeezing is carried through unchanged by the caller.
pub fn beamsplit(a: ComplexAmplitude, eta: f64) -> Result<(ComplexAmplitude, ComplexAmplitude)> {
    check_eta(eta)?;
    Ok((a * eta.sqrt(), a * (1.0 - eta).sqrt()))
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("transmittance must lie in [0, 1], got {eta}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    /// `⟨b|a⟩` summed over the Fock basis, terms built in log space.
    fn fock_overlap(a: Complex64, b: Complex64, terms: usize) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        let z = a * b.conj();
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..terms {
            if n > 0 {
                term = term * z / n as f64;
            }
            sum += term;
        }
        sum * (-0.5 * (a.norm_sqr() + b.norm_sqr())).exp()
    }

    #[test]
    fn constellation_points() {
        let c = Constellation::coherent(2, 1.0, 0.0).unwrap();
        assert!(close(constellation_point(&c, 0).unwrap(), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(constellation_point(&c, 1).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
        let c = Constellation::coherent(4, 1.0, 0.0).unwrap();
        assert!(close(constellation_point(&c, 1).unwrap(), Complex64::new(0.0, 1.0), 1e-15));
        let c = Constellation::coherent(4, 5.0, (1.0f64 / 3.0).atan()).unwrap();
        let p = constellation_point(&c, 0).unwrap();
        assert!(close(p, Complex64::new(4.743416490252569, -1.5811388300841898), 1e-12));
        assert!(constellation_point(&c, 4).is_err());
    }

    #[test]
    fn rejects_bad_constellations() {
        assert!(Constellation::coherent(1, 1.0, 0.0).is_err());
        assert!(Constellation::coherent(2, -1.0, 0.0).is_err());
        assert!(Constellation::coherent(2, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn coherent_overlap_values() {
        let a = Complex64::new(0.3, -1.2);
        assert!(close(coherent_overlap(a, a), Complex64::new(1.0, 0.0), 1e-15));
        let v = coherent_overlap(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        assert!((v.norm_sqr() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn squeezed_overlap_matches_listing_formula() {
        // b2 and phase from the reference listing, evaluated independently
        let (ar, n, r, d, k) = (1.0f64, 0.5f64, 0.3f64, 4.0f64, 1.0f64);
        let th = TAU * k / d;
        let b2 = 2.0 * (1.0 - n) * ar * ar * (1.0 - th.cos()) * (r.cosh().powi(2) + r.sinh().powi(2))
            + (1.0 - n) * ar * ar * (2.0 + 2.0 * (2.0 * th).cos() - 4.0 * th.cos()) * r.sinh() * r.cosh();
        let listing = Complex64::new(0.0, -(1.0 - n) * ar * ar * th.sin()).exp() * (-b2 / 2.0).exp();

        let rad = ((1.0 - n) * ar * ar).sqrt();
        let e0 = Complex64::from_polar(rad, 0.0);
        let ek = Complex64::from_polar(rad, th);
        // the listing computes ⟨ε_k|ε_0⟩
        let ours = squeezed_overlap(e0, ek, r);
        assert!(close(ours, listing, 1e-14), "{ours} vs {listing}");
        assert!(close(squeezed_overlap(ek, e0, r), listing.conj(), 1e-14));
    }

    #[test]
    fn beamsplit_cases() {
        let a = Complex64::new(2.0, 0.0);
        let (b, e) = beamsplit(a, 1.0).unwrap();
        assert_eq!((b, e), (a, Complex64::new(0.0, 0.0)));
        let (b, e) = beamsplit(a, 0.5).unwrap();
        assert!(close(b, Complex64::new(2f64.sqrt(), 0.0), 1e-15));
        assert!(close(e, Complex64::new(2f64.sqrt(), 0.0), 1e-15));
        assert!(beamsplit(a, 1.5).is_err());
        assert!(beamsplit(a, -0.1).is_err());
    }

    fn amp() -> impl Strategy<Value = Complex64> {
        (-4.0f64..4.0, -4.0f64..4.0).prop_map(|(x, y)| Complex64::new(x, y))
    }

    proptest! {
        #[test]
        fn fock_series_agrees(a in amp(), b in amp()) {
            prop_assume!(a.norm() <= 4.0 && b.norm() <= 4.0);
            let want = fock_overlap(a, b, 200);
            prop_assert!((coherent_overlap(a, b).norm_sqr() - want.norm_sqr()).abs() < 1e-12);
            prop_assert!(close(coherent_overlap(a, b), want, 1e-12));
        }

        #[test]
        fn overlap_hermiticity(a in amp(), b in amp(), r in -0.8f64..0.8) {
            prop_assert!(close(coherent_overlap(a, b), coherent_overlap(b, a).conj(), 1e-14));
            prop_assert!(close(squeezed_overlap(a, b, r), squeezed_overlap(b, a, r).conj(), 1e-14));
            prop_assert!(coherent_overlap(a, b).norm() <= 1.0 + 1e-15);
            prop_assert!(squeezed_overlap(a, b, r).norm() <= 1.0 + 1e-15);
        }

        #[test]
        fn squeezed_reduces_to_coherent(a in amp(), b in amp()) {
            prop_assert_eq!(squeezed_overlap(a, b, 0.0), coherent_overlap(a, b));
        }

        #[test]
        fn squeezed_self_overlap(a in amp(), r in -1.0f64..1.0) {
            prop_assert!(close(squeezed_overlap(a, a, r), Complex64::new(1.0, 0.0), 1e-15));
        }

        #[test]
        fn closure(d in 2u32..16, k in 0u32..16, amp in 0.0f64..10.0, chi in -1.0f64..1.0) {
            let c = Constellation::coherent(d, amp, chi).unwrap();
            let k = k % d;
            let p = constellation_point(&c, k).unwrap();
            let q = Complex64::from_polar(amp, c.state_angle(k + d));
            prop_assert!(close(p, q, 1e-12));
        }

        #[test]
        fn energy_conservation(a in amp(), eta in 0.0f64..=1.0) {
            let (b, e) = beamsplit(a, eta).unwrap();
            prop_assert!((b.norm_sqr() + e.norm_sqr() - a.norm_sqr()).abs() < 1e-12);
        }

        #[test]
        fn eve_circle_symmetry_coherent(d in 2u32..10, k in 0u32..10, m in 0u32..10, rad in 0.0f64..3.0) {
            let (k, m) = (k % d, m % d);
            let c = Constellation::coherent(d, rad, 0.0).unwrap();
            let e = |j: u32| constellation_point(&c, j % d).unwrap();
            let lhs = coherent_overlap(e(k), e(0));
            let rhs = coherent_overlap(e(k + m), e(m));
            prop_assert!(close(lhs, rhs, 1e-12));
        }

        #[test]
        fn eve_circle_symmetry_squeezed_two_states(rad in 0.0f64..3.0, r in -0.5f64..0.5) {
            let e0 = Complex64::new(rad, 0.0);
            let e1 = -e0;
            prop_assert!(close(squeezed_overlap(e0, e1, r), squeezed_overlap(e1, e0, r), 1e-12));
        }
    }
}
