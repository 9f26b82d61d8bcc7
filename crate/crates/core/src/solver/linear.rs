//! Sparse symmetric positive-definite solves for the implicit step.

/// CSR matrix with a fixed pattern; values are rewritten every assembly.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    pub values: Vec<f64>,
    diag: Vec<usize>,
}

impl CsrMatrix {
    /// Pattern with the diagonal plus both entries of every `(a, b)` pair.
    /// Returns the matrix and, for each pair, the positions of (a,b) and (b,a).
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> (Self, Vec<(usize, usize)>) {
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for &(a, b) in pairs {
            rows[a].push(b);
            rows[b].push(a);
        }
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for r in &rows {
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let find = |row: usize, col: usize| -> usize {
            let slice = &cols[row_ptr[row]..row_ptr[row + 1]];
            row_ptr[row] + slice.binary_search(&col).expect("entry in pattern")
        };
        let diag = (0..n).map(|i| find(i, i)).collect();
        let positions = pairs.iter().map(|&(a, b)| (find(a, b), find(b, a))).collect();
        let values = vec![0.0; cols.len()];
        (
            CsrMatrix {
                n,
                row_ptr,
                cols,
                values,
                diag,
            },
            positions,
        )
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn add_diagonal(&mut self, i: usize, v: f64) {
        self.values[self.diag[i]] += v;
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.values[self.diag[i]]
    }

    pub fn multiply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients. `x` holds the initial guess
/// on entry and the solution on exit. Returns `Err(stats)` when the
/// tolerance is not reached within `max_iter`.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    tolerance: f64,
    max_iter: usize,
) -> Result<SolveStats, SolveStats> {
    let n = a.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = (0..n).map(|i| 1.0 / a.diagonal(i)).collect();
    let mut r = vec![0.0; n];
    a.multiply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = norm(&r) / b_norm;
    let mut iterations = 0;
    while residual > tolerance && iterations < max_iter {
        a.multiply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        residual = norm(&r) / b_norm;
        iterations += 1;
    }
    let stats = SolveStats {
        iterations,
        relative_residual: residual,
    };
    if residual <= tolerance {
        Ok(stats)
    } else {
        Err(stats)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_small_laplacian() {
        // chain 0-1-2 with unit links and unit diagonal shift
        let (mut a, pos) = CsrMatrix::from_pairs(3, &[(0, 1), (1, 2)]);
        for &(ab, ba) in &pos {
            a.values[ab] = -1.0;
            a.values[ba] = -1.0;
        }
        for (i, d) in [2.0, 3.0, 2.0].into_iter().enumerate() {
            a.add_diagonal(i, d);
        }
        let expected = [1.0, -2.0, 0.5];
        let mut b = vec![0.0; 3];
        a.multiply(&expected, &mut b);
        let mut x = vec![0.0; 3];
        let stats = conjugate_gradient(&a, &b, &mut x, 1e-14, 50).unwrap();
        assert!(stats.iterations <= 3);
        for (x, e) in x.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (mut a, _) = CsrMatrix::from_pairs(2, &[]);
        a.add_diagonal(0, 1.0);
        a.add_diagonal(1, 1.0);
        let mut x = vec![3.0, 4.0];
        conjugate_gradient(&a, &[0.0, 0.0], &mut x, 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }
}
