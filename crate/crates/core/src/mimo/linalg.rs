//! Small dense complex matrices: Hermitian Jacobi eigensolver, LU
//! determinant and Cholesky log-determinant.

use num_complex::Complex64;

use crate::{Error, Result};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Input(format!("expected {} entries for a {n}x{n} matrix, got {}", n * n, data.len())));
        }
        Ok(CMatrix { n, data })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    pub fn mul(&self, other: &CMatrix) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    m.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        m
    }

    /// `I + ρ·self`.
    pub fn shifted_identity(&self, rho: f64) -> Self {
        let mut m = self.scale(rho);
        for i in 0..self.n {
            m[(i, i)] += 1.0;
        }
        m
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns ascending eigenvalues and the matching eigenvectors
/// as the columns of the second matrix.
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.n;
    let mut m = a.clone();
    // symmetrize so roundoff in the input does not accumulate
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();
    let mut converged = n < 2 || scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::nonconvergence("hermitian_eigen", format!("{n}x{n} Jacobi sweeps did not converge")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vecs = CMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, col)] = v[(r, src)];
        }
    }
    Ok((values, vecs))
}

/// Zero `m[p][q]` with `J = diag-phase · real rotation`:
/// `J_pp = c, J_pq = s, J_qp = −s e^{-iφ}, J_qq = c e^{-iφ}`, `m ← Jᴴ m J`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let z = m[(p, q)];
    let r = z.norm();
    if r == 0.0 {
        return;
    }
    let n = m.n;
    let phase = z / r; // e^{iφ}
    let a = m[(p, p)].re;
    let b = m[(q, q)].re;
    let theta = (b - a) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;
    for k in 0..n {
        let (kp, kq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = kp * c + kq * jqp;
        m[(k, q)] = kp * s + kq * jqq;
        let (vp, vq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vp * c + vq * jqp;
        v[(k, q)] = vp * s + vq * jqq;
    }
    for k in 0..n {
        let (pk, qk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = pk * c + qk * jqp.conj();
        m[(q, k)] = pk * s + qk * jqq.conj();
    }
    m[(p, p)] = Complex64::new(a - t * r, 0.0);
    m[(q, q)] = Complex64::new(b + t * r, 0.0);
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
}

/// Largest `‖A v − λ v‖` over the eigenpairs.
pub fn eigen_residual(a: &CMatrix, values: &[f64], vectors: &CMatrix) -> f64 {
    let n = a.n;
    let mut worst: f64 = 0.0;
    for (col, &lambda) in values.iter().enumerate() {
        let mut norm2 = 0.0;
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[(i, k)] * vectors[(k, col)];
            }
            norm2 += (acc - vectors[(i, col)] * lambda).norm_sqr();
        }
        worst = worst.max(norm2.sqrt());
    }
    worst
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn lu_determinant(a: &CMatrix) -> Complex64 {
    let n = a.n;
    let mut m = a.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))
            .expect("nonempty range");
        if m[(pivot, col)].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                m.data.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let d = m[(col, col)];
        det *= d;
        for r in col + 1..n {
            let f = m[(r, col)] / d;
            for k in col..n {
                let sub = f * m[(col, k)];
                m[(r, k)] -= sub;
            }
        }
    }
    det
}

/// `ln det A` for Hermitian positive definite `A` via Cholesky.
pub fn cholesky_logdet(a: &CMatrix) -> Result<f64> {
    let n = a.n;
    let mut l = CMatrix::zeros(n);
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::Input("matrix is not positive definite".into()));
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        logdet += 2.0 * djj.ln();
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(logdet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> CMatrix {
        CMatrix::from_rows(
            3,
            vec![
                c(2.0, 0.0),
                c(0.5, 0.3),
                c(-0.2, 1.0),
                c(0.5, -0.3),
                c(1.5, 0.0),
                c(0.1, 0.1),
                c(-0.2, -1.0),
                c(0.1, -0.1),
                c(3.0, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn diagonal_and_identity() {
        let (vals, _) = hermitian_eigen(&CMatrix::diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        let (vals, _) = hermitian_eigen(&CMatrix::identity(4)).unwrap();
        assert!(vals.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn eigenpairs_satisfy_residual_and_invariants() {
        let a = sample();
        let (vals, vecs) = hermitian_eigen(&a).unwrap();
        assert!(eigen_residual(&a, &vals, &vecs) < 1e-12 * a.frobenius_norm());
        assert!((vals.iter().sum::<f64>() - a.trace().re).abs() < 1e-12);
        let det = lu_determinant(&a);
        assert!(det.im.abs() < 1e-12);
        assert!((vals.iter().product::<f64>() / det.re - 1.0).abs() < 1e-12);
        let vhv = vecs.adjoint().mul(&vecs);
        assert!(vhv.add(&CMatrix::identity(3).scale(-1.0)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn cholesky_matches_lu() {
        let a = sample().shifted_identity(1.0);
        let ld = cholesky_logdet(&a).unwrap();
        assert!((ld - lu_determinant(&a).re.ln()).abs() < 1e-12);
        assert!(cholesky_logdet(&CMatrix::diagonal(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn lu_handles_pivoting_and_singular() {
        let p = CMatrix::from_rows(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(lu_determinant(&p), c(-1.0, 0.0));
        assert_eq!(lu_determinant(&CMatrix::zeros(2)), c(0.0, 0.0));
    }
}
