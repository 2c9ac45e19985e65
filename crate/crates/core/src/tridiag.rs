//! Kernels for tridiagonal matrices: symmetric eigendecomposition by
//! implicit QL with Wilkinson shifts, and the Thomas solver for complex
//! systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenpairs of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Row-major `s x s`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

impl TridiagEigen {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn vector_entry(&self, row: usize, col: usize) -> f64 {
        self.vectors[row * self.values.len() + col]
    }
}

/// Iteration budget per unit of block size.
const QL_ITERATIONS_PER_ROW: usize = 50;

/// Eigendecompose the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
///
/// `block` only labels the error when the iteration cap is hit.
pub fn tridiag_eigendecompose(diag: &[f64], off: &[f64], block: usize) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen { values: vec![], vectors: vec![] });
    }
    if off.len() + 1 != n {
        return Err(Error::Usage(format!(
            "off-diagonal length {} does not match size {n}",
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // Transposed accumulator: row `k` of `zt` is eigenvector `k`, so each
    // rotation touches two contiguous rows.
    let mut zt = vec![0.0; n * n];
    for i in 0..n {
        zt[i * n + i] = 1.0;
    }

    let cap = QL_ITERATIONS_PER_ROW * n;
    let mut iterations = 0;
    for l in 0..n {
        loop {
            // Look for a negligible off-diagonal element to split at.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iterations >= cap {
                return Err(Error::NoConvergence { block, iterations });
            }
            iterations += 1;

            // Wilkinson shift from the leading 2x2.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (head, tail) = zt.split_at_mut((i + 1) * n);
                let zi = &mut head[i * n..];
                let zi1 = &mut tail[..n];
                for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                    let f = *b;
                    *b = s * *a + c * f;
                    *a = c * *a - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let mut vectors = vec![0.0; n * n];
    for row in 0..n {
        for (col, &k) in order.iter().enumerate() {
            vectors[row * n + col] = zt[k * n + row];
        }
    }
    Ok(TridiagEigen { values, vectors })
}

/// Smallest acceptable `|pivot| / row scale` in a Thomas sweep.
pub const PIVOT_GUARD: f64 = 1e-14;

/// Forward-elimination coefficients of a complex tridiagonal matrix, reusable
/// across right-hand sides.
#[derive(Debug, Clone, PartialEq)]
pub struct ThomasFactor {
    lower: Vec<Complex64>,
    /// `upper[i] / pivot[i]`.
    upper_scaled: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

impl ThomasFactor {
    /// Factor the matrix with sub-diagonal `lower`, diagonal `diag` and
    /// super-diagonal `upper` (`lower[i] = A[i+1][i]`, `upper[i] = A[i][i+1]`).
    pub fn new(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Ok(Self { lower: vec![], upper_scaled: vec![], inv_pivot: vec![] });
        }
        if lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::Usage(format!(
                "band lengths ({}, {n}, {}) are inconsistent",
                lower.len(),
                upper.len()
            )));
        }
        let mut upper_scaled = Vec::with_capacity(n - 1);
        let mut inv_pivot = Vec::with_capacity(n);
        for i in 0..n {
            let mut pivot = diag[i];
            if i > 0 {
                pivot -= lower[i - 1] * upper_scaled[i - 1];
            }
            let scale = diag[i].norm()
                + if i > 0 { lower[i - 1].norm() } else { 0.0 }
                + if i + 1 < n { upper[i].norm() } else { 0.0 };
            if !(pivot.norm() > PIVOT_GUARD * scale) {
                return Err(Error::Singular { row: i, pivot: pivot.norm() });
            }
            let inv = pivot.inv();
            inv_pivot.push(inv);
            if i + 1 < n {
                upper_scaled.push(upper[i] * inv);
            }
        }
        Ok(Self { lower: lower.to_vec(), upper_scaled, inv_pivot })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrite `x` (holding the right-hand side) with the solution.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.inv_pivot.len();
        assert_eq!(x.len(), n);
        if n == 0 {
            return;
        }
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper_scaled[i] * x[i + 1];
        }
    }
}

/// Solve `A x = rhs` for complex tridiagonal `A` in one forward and one
/// backward sweep, without pivoting.
pub fn thomas_solve(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    if rhs.len() != diag.len() {
        return Err(Error::Usage(format!(
            "right-hand side has length {}, matrix has size {}",
            rhs.len(),
            diag.len()
        )));
    }
    let factor = ThomasFactor::new(lower, diag, upper)?;
    let mut x = rhs.to_vec();
    factor.solve_in_place(&mut x);
    Ok(x)
}
