use crate::error::{Error, Result};

const NEGATIVE_CLAMP: f64 = 1e-10;
const SUM_TOL: f64 = 1e-6;

/// Shannon entropy in nats of a probability vector. Zero entries contribute 0.
pub fn shannon_entropy_nats(p: &[f64]) -> f64 {
    // abs turns the -0.0 of an all-zero-term sum into 0.0; every term is >= 0
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum::<f64>().abs()
}

/// Von Neumann entropy of a density spectrum in the given logarithm base.
///
/// Eigenvalues in `[-1e-10, 0)` are treated as round-off and set to zero;
/// anything more negative, or a total off unity by more than `1e-6`, is
/// rejected.
pub fn entropy_of_spectrum(spectrum: &[f64], base: f64) -> Result<f64> {
    if !(base > 1.0) || !base.is_finite() {
        return Err(Error::Domain(format!("entropy base must exceed 1, got {base}")));
    }
    let mut cleaned = Vec::with_capacity(spectrum.len());
    for &lambda in spectrum {
        if !lambda.is_finite() || lambda < -NEGATIVE_CLAMP {
            return Err(Error::NotDensitySpectrum(format!("eigenvalue {lambda:e}")));
        }
        cleaned.push(lambda.max(0.0));
    }
    let total: f64 = cleaned.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::NotDensitySpectrum(format!("eigenvalues sum to {total}")));
    }
    Ok(shannon_entropy_nats(&cleaned) / base.ln())
}
