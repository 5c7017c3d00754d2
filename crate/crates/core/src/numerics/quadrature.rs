use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid settings for outcome-space integrals.
///
/// `radial_limit` of `None` means "derive it from the protocol": the widest
/// Gaussian's mean plus eight standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub step: f64,
    pub radial_limit: Option<f64>,
    pub angular_step: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { step: 0.01, radial_limit: None, angular_step: 0.02 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("quadrature step must be > 0, got {}", self.step)));
        }
        if !(self.angular_step > 0.0 && self.angular_step.is_finite()) {
            return Err(Error::Config(format!("angular step must be > 0, got {}", self.angular_step)));
        }
        if let Some(limit) = self.radial_limit {
            if !(limit > self.step) {
                return Err(Error::Config(format!("radial limit {limit} must exceed the step {}", self.step)));
            }
        }
        Ok(())
    }

    /// Same spec with both steps halved; used for refinement checks.
    pub fn halved(&self) -> Self {
        Self { step: 0.5 * self.step, angular_step: 0.5 * self.angular_step, ..*self }
    }
}

/// Composite trapezoid nodes on `[lo, hi]`. The step is shrunk so that an
/// integer number of panels covers the interval exactly.
#[derive(Debug, Clone)]
pub struct LineGrid {
    lo: f64,
    h: f64,
    panels: usize,
}

impl LineGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo < hi) || !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("bad line grid [{lo}, {hi}] step {step}")));
        }
        let panels = ((hi - lo) / step - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { lo, h: (hi - lo) / panels as f64, panels })
    }

    pub fn len(&self) -> usize {
        self.panels + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node `i` and its trapezoid weight.
    pub fn node(&self, i: usize) -> (f64, f64) {
        let x = if i == self.panels { self.lo + self.h * self.panels as f64 } else { self.lo + self.h * i as f64 };
        let w = if i == 0 || i == self.panels { 0.5 * self.h } else { self.h };
        (x, w)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Tensor grid in polar coordinates. Weights include the Jacobian `r`.
///
/// The radial rule is the trapezoid rule plus the first Euler-Maclaurin
/// correction at the origin: with `F(r) = r·∫f dφ` the derivative `F'(0)` is
/// just the angular integral at `r = 0`, so the centre nodes get weight
/// `h²/12` instead of zero.
///
/// A full `2π` angular range uses the periodic trapezoid rule (equal
/// weights, no duplicated endpoint); any other sector uses the ordinary
/// trapezoid rule.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    radial: LineGrid,
    angle_lo: f64,
    angle_h: f64,
    angle_nodes: usize,
    periodic: bool,
}

impl PolarGrid {
    pub fn new(radial_limit: f64, angle_lo: f64, angle_hi: f64, spec: &QuadratureSpec) -> Result<Self> {
        if !(radial_limit > 0.0) {
            return Err(Error::Domain(format!("radial limit must be > 0, got {radial_limit}")));
        }
        let radial = LineGrid::new(0.0, radial_limit, spec.step)?;
        let width = angle_hi - angle_lo;
        if !(width > 0.0) || width > TAU + 1e-12 {
            return Err(Error::Domain(format!("bad angular range [{angle_lo}, {angle_hi}]")));
        }
        let panels = (width / spec.angular_step - 1e-9).ceil().max(1.0) as usize;
        let periodic = (width - TAU).abs() < 1e-12;
        let angle_h = width / panels as f64;
        let angle_nodes = if periodic { panels } else { panels + 1 };
        Ok(Self { radial, angle_lo, angle_h, angle_nodes, periodic })
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.angle_nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(radius, angle, weight)` of node `i`; the radial index varies fastest.
    pub fn node(&self, i: usize) -> (f64, f64, f64) {
        let (ri, ai) = (i % self.radial.len(), i / self.radial.len());
        let (r, wr) = self.radial.node(ri);
        let phi = self.angle_lo + self.angle_h * ai as f64;
        let wa =
            if !self.periodic && (ai == 0 || ai + 1 == self.angle_nodes) { 0.5 * self.angle_h } else { self.angle_h };
        let w = if ri == 0 { self.radial.h * self.radial.h / 12.0 } else { wr * r };
        (r, phi, w * wa)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Composite trapezoid estimate of `∫_lo^hi f`.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> Result<f64> {
    let grid = LineGrid::new(lo, hi, step)?;
    let mut acc = 0.0;
    for (x, w) in grid.nodes() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// `∫∫ f(r, φ) r dr dφ` over `[0, radial_limit] × [angle_lo, angle_hi]`.
pub fn integrate_polar<F: Fn(f64, f64) -> f64>(
    f: F,
    radial_limit: f64,
    angle_lo: f64,
    angle_hi: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let grid = PolarGrid::new(radial_limit, angle_lo, angle_hi, spec)?;
    let mut acc = 0.0;
    for (r, phi, w) in grid.nodes() {
        if w == 0.0 {
            continue;
        }
        let v = f(r, phi);
        if !v.is_finite() {
            return Err(Error::NonFinite { at: r });
        }
        acc += w * v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_is_exact() {
        assert!((integrate_line(|_| 1.0, 0.0, 2.0, 0.1).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_normalization() {
        // N(0, 1/2)
        let v = integrate_line(|x| (-x * x).exp() / PI.sqrt(), -6.0, 6.0, 0.01).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn disc_area() {
        let spec = QuadratureSpec::default();
        for radius in [0.5, 3.0, 7.25] {
            let v = integrate_polar(|_, _| 1.0, radius, 0.0, TAU, &spec).unwrap();
            assert!((v / (PI * radius * radius) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn origin_correction_is_second_order_exact() {
        // ∫∫ e^{-r²} r dr dφ = π; plain trapezoid is off by ~πh²/6
        let spec = QuadratureSpec { step: 0.05, ..Default::default() };
        let v = integrate_polar(|r, _| (-r * r).exp(), 8.0, 0.0, TAU, &spec).unwrap();
        assert!((v / PI - 1.0).abs() < 1e-6);
    }

    #[test]
    fn periodic_grid_has_no_duplicate_endpoint() {
        let spec = QuadratureSpec { angular_step: 0.3, ..Default::default() };
        let g = PolarGrid::new(1.0, 0.0, TAU, &spec).unwrap();
        let last = g.node(g.len() - 1).1;
        assert!(last < TAU - 0.1);
    }

    #[test]
    fn non_finite_is_reported() {
        let err = integrate_line(|x| if x > 0.5 { f64::NAN } else { 0.0 }, 0.0, 1.0, 0.1);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        assert!(QuadratureSpec { step: 0.0, ..Default::default() }.validate().is_err());
        assert!(QuadratureSpec { radial_limit: Some(0.005), ..Default::default() }.validate().is_err());
    }
}
