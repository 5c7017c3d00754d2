use super::SERIES_TOLERANCE;
use crate::error::{Error, Result};

/// Generalized exponential `e_{d,k}(x) = Σ_{n≥0} x^{dn+k} / (dn+k)!`.
///
/// Summing over all residues `k` recovers `e^x`; with `d = 1` it is `e^x`
/// itself. For a coherent state of intensity `x` the weight of Fock sector
/// `k mod d` is `e^{-x} e_{d,k}(x)`.
pub fn gen_exp(d: u32, k: u32, x: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("gen_exp needs d >= 1".into()));
    }
    if k >= d {
        return Err(Error::Domain(format!("gen_exp residue k = {k} must be < d = {d}")));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("gen_exp argument must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }

    // first term x^k / k!
    let mut term = 1.0;
    for j in 1..=k {
        term *= x / j as f64;
    }
    let mut sum = term;
    let mut m = k as f64;
    loop {
        for _ in 0..d {
            m += 1.0;
            term *= x / m;
        }
        sum += term;
        // terms only shrink once the running index has passed x
        if m > x && term < SERIES_TOLERANCE * sum {
            break;
        }
    }
    Ok(sum)
}

/// Modified Bessel function of the first kind `I_n(x)` from its power
/// series `Σ_s (x/2)^{2s+n} / (s! (s+n)!)`.
pub fn bessel_i(n: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_i argument must be finite and >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    // (x/2)^n / n!, built up multiplicatively to stay in range
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
    }
    let mut sum = term;
    let quarter_sq = half * half;
    let mut s = 0.0_f64;
    loop {
        s += 1.0;
        term *= quarter_sq / (s * (s + n as f64));
        sum += term;
        if s * (s + n as f64) > quarter_sq && term < SERIES_TOLERANCE * sum {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    Ok(sum)
}
