use num_complex::Complex64;

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Dense complex Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Wraps row-major entries after checking `a[i][j] = conj(a[j][i])`
    /// to within `1e-12`.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Domain(format!("expected {dim}x{dim} entries, got {}", entries.len())));
        }
        for i in 0..dim {
            for j in i..dim {
                let dev = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                if !(dev <= HERMITIAN_TOL) {
                    return Err(Error::NotHermitian { row: i, col: j, deviation: dev });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds the matrix from its lower triangle (`row >= col`); the upper
    /// triangle is the conjugate mirror and the diagonal is made real.
    pub fn from_lower<F: FnMut(usize, usize) -> Complex64>(dim: usize, mut lower: F) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(lower(i, i).re, 0.0);
            for j in 0..i {
                let v = lower(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_lower(dim, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `U M U†` for a diagonal unitary `U = diag(phases)`.
    pub fn conjugate_by_diagonal(&self, phases: &[Complex64]) -> Self {
        assert_eq!(phases.len(), self.dim);
        Self::from_lower(self.dim, |i, j| phases[i] * self.get(i, j) * phases[j].conj())
    }
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
}

impl HermitianSpectrum {
    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues by cyclic complex Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-12` times
/// the matrix norm, giving up after 100 sweeps.
pub fn hermitian_eigenvalues(m: &HermitianMatrix) -> Result<HermitianSpectrum> {
    let n = m.dim;
    let mut a = m.entries.clone();
    let threshold = OFF_DIAGONAL_TOL * m.frobenius_norm();

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a, n);
    while off > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual: off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, n, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a, n);
    }

    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    Ok(HermitianSpectrum { eigenvalues })
}

/// One rotation annihilating `a[p][q]`. With `a[p][q] = |b| e^{iθ}` the
/// unitary is `diag(1, e^{-iθ})` followed by a real Jacobi rotation.
fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let phase = apq / b; // e^{iθ}
    let theta = (aqq - app) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = [[c, s], [-s e^{-iθ}, c e^{-iθ}]] on the (p, q) plane.
    let u_qp = -s * phase.conj();
    let u_qq = c * phase.conj();

    // columns: A <- A U
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c + akq * u_qp;
        a[k * n + q] = akp * s + akq * u_qq;
    }
    // rows: A <- U† A
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c + aqk * u_qp.conj();
        a[q * n + k] = apk * s + aqk * u_qq.conj();
    }
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p] = Complex64::new(app - t * b, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * b, 0.0);
}
