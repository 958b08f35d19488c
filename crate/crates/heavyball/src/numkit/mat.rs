//! Dense symmetric matrices, a cyclic Jacobi eigensolver, and symmetric
//! fractional matrix powers. Everything targets desk scale (d <= 64);
//! there is no attempt at BLAS-level performance.

use crate::{Error, Result};

/// Symmetric d×d matrix. Symmetry is enforced by the setter, which always
/// writes both (i, j) and (j, i), so `entry(i, j) == entry(j, i)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    d: usize,
    data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(d: usize) -> Self {
        SymMat {
            d,
            data: vec![0.0; d * d],
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = SymMat::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * m.d + i] = v;
        }
        m
    }

    pub fn identity(d: usize) -> Self {
        SymMat::from_diag(&vec![1.0; d])
    }

    /// Builds `B Bᵀ` from a dense square `B` given in row-major order.
    pub fn gram(b_rows: &[Vec<f64>]) -> Self {
        let d = b_rows.len();
        let mut m = SymMat::zeros(d);
        for i in 0..d {
            for j in i..d {
                let v = dot(&b_rows[i], &b_rows[j]);
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    /// Sets both (i, j) and (j, i).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
        self.data[j * self.d + i] = v;
    }

    /// Adds `s` to every diagonal entry (i.e. `self + s I`).
    pub fn shift_diag(&self, s: f64) -> SymMat {
        let mut out = self.clone();
        for i in 0..self.d {
            out.data[i * self.d + i] += s;
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d);
        (0..self.d)
            .map(|i| {
                let row = &self.data[i * self.d..(i + 1) * self.d];
                dot(row, x)
            })
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                if i != j {
                    let v = self.data[i * self.d + j];
                    s += v * v;
                }
            }
        }
        s.sqrt()
    }
}

/// Eigendecomposition of a symmetric matrix: `values` ascending, and
/// `vectors[k]` the unit eigenvector paired with `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl Eigh {
    /// Spectral norm `max(|λ_min|, |λ_max|)`.
    pub fn spectral_norm(&self) -> f64 {
        let lo = self.values.first().copied().unwrap_or(0.0).abs();
        let hi = self.values.last().copied().unwrap_or(0.0).abs();
        lo.max(hi)
    }
}

const JACOBI_SWEEP_CAP: usize = 100;
const JACOBI_REL_THRESHOLD: f64 = 1e-14;

/// Eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps rotate away each off-diagonal entry in row order until the
/// off-diagonal Frobenius norm falls below `1e-14 * ||A||_F`, with a cap of
/// 100 sweeps. Eigenvalues are returned in ascending order; each eigenvector
/// is sign-normalized so its largest-magnitude component is positive.
pub fn jacobi_eigh(a: &SymMat) -> Result<Eigh> {
    let d = a.dim();
    let mut m = a.clone();
    let mut v = SymMat::identity(d); // accumulates rotations; used as a plain dense matrix
    let threshold = JACOBI_REL_THRESHOLD * a.frobenius_norm();

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < JACOBI_SWEEP_CAP {
        if m.off_diagonal_norm() <= threshold {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m.entry(p, q);
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle that zeroes (p, q).
                let tau = (m.entry(q, q) - m.entry(p, p)) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                apply_rotation(&mut m, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        sweeps += 1;
    }
    if !converged && m.off_diagonal_norm() > threshold {
        return Err(Error::JacobiNoConvergence {
            off_norm: m.off_diagonal_norm(),
            threshold,
            sweeps,
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m.entry(i, i).partial_cmp(&m.entry(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m.entry(i, i)).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..d).map(|i| v.entry(i, k)).collect();
            sign_normalize(&mut col);
            col
        })
        .collect();
    Ok(Eigh { values, vectors })
}

/// Flips the vector so its largest-magnitude component is positive.
fn sign_normalize(col: &mut [f64]) {
    let mut imax = 0;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > col[imax].abs() {
            imax = i;
        }
    }
    if col[imax] < 0.0 {
        for x in col.iter_mut() {
            *x = -*x;
        }
    }
}

/// Similarity transform `m <- Jᵀ m J` for the (p, q) rotation.
fn apply_rotation(m: &mut SymMat, p: usize, q: usize, c: f64, s: f64) {
    let d = m.dim();
    let app = m.entry(p, p);
    let aqq = m.entry(q, q);
    let apq = m.entry(p, q);
    for i in 0..d {
        if i == p || i == q {
            continue;
        }
        let aip = m.entry(i, p);
        let aiq = m.entry(i, q);
        m.set(i, p, c * aip - s * aiq);
        m.set(i, q, s * aip + c * aiq);
    }
    m.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
    m.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
    m.set(p, q, 0.0);
}

/// Right-multiplies the (non-symmetric) accumulator by the rotation.
fn rotate_columns(v: &mut SymMat, p: usize, q: usize, c: f64, s: f64) {
    let d = v.dim();
    for i in 0..d {
        let vip = v.data[i * d + p];
        let viq = v.data[i * d + q];
        v.data[i * d + p] = c * vip - s * viq;
        v.data[i * d + q] = s * vip + c * viq;
    }
}

/// `Mᵖ` for symmetric positive definite `M`, via `V diag(λᵖ) Vᵀ`.
pub fn sym_frac_power(m: &SymMat, p: f64) -> Result<SymMat> {
    let eig = jacobi_eigh(m)?;
    let lambda_min = eig.values[0];
    if lambda_min <= 0.0 {
        return Err(Error::NotPositiveDefinite { lambda_min });
    }
    let d = m.dim();
    let powered: Vec<f64> = eig.values.iter().map(|l| l.powf(p)).collect();
    let mut out = SymMat::zeros(d);
    for i in 0..d {
        for j in i..d {
            let v: f64 = powered
                .iter()
                .zip(&eig.vectors)
                .map(|(p, col)| p * col[i] * col[j])
                .sum();
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Dot product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `||a - b||`.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `||a + b||`.
pub fn sum_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x + y) * (x + y))
        .sum::<f64>()
        .sqrt()
}

/// Least-squares slope of y against x.
pub fn ols_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let sx: f64 = xy.iter().map(|(x, _)| x).sum();
    let sy: f64 = xy.iter().map(|(_, y)| y).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = xy.iter().map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Max absolute coordinate difference.
pub fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
