//! Householder least squares with deterministic column dropping.
//!
//! Columns are processed left to right. A column whose component orthogonal
//! to the already-kept columns has norm at most `tol` times its own norm is
//! treated as collinear and dropped, so earlier columns always win.

/// Default relative tolerance for declaring a column collinear.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// Indices of retained columns, ascending.
    pub kept: Vec<usize>,
    /// Indices of dropped columns, ascending.
    pub dropped: Vec<usize>,
    /// Coefficients for `kept`, same order.
    pub beta: Vec<f64>,
    /// Diagonal of (X_kᵀ X_k)⁻¹ for the retained columns.
    pub inv_gram_diag: Vec<f64>,
}

struct Reflector {
    start: usize,
    v: Vec<f64>,
    tau: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        let tail = &mut x[self.start..];
        let s = self.tau * dot(&self.v, tail);
        for (xi, vi) in tail.iter_mut().zip(&self.v) {
            *xi -= s * vi;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    // scaled to avoid overflow on large entries
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * a.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// Solve min ‖y − Xβ‖² for column-major `columns` (each of length `y.len()`).
pub fn least_squares(columns: &[Vec<f64>], y: &[f64], tol: f64) -> LeastSquares {
    let m = y.len();
    let mut reflectors: Vec<Reflector> = Vec::new();
    // r_cols[c] holds rows 0..=c of the c-th kept column of R
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();

    for (j, col) in columns.iter().enumerate() {
        debug_assert_eq!(col.len(), m);
        let k = reflectors.len();
        let col_norm = norm(col);
        if col_norm == 0.0 || k >= m {
            dropped.push(j);
            continue;
        }
        let mut a = col.clone();
        for h in &reflectors {
            h.apply(&mut a);
        }
        let sub_norm = norm(&a[k..]);
        if sub_norm <= tol * col_norm {
            dropped.push(j);
            continue;
        }
        let alpha = if a[k] >= 0.0 { -sub_norm } else { sub_norm };
        let mut v = a[k..].to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        let mut r = a[..k].to_vec();
        r.push(alpha);
        r_cols.push(r);
        reflectors.push(Reflector {
            start: k,
            v,
            tau: 2.0 / vv,
        });
        kept.push(j);
    }

    let n = kept.len();
    let mut qty = y.to_vec();
    for h in &reflectors {
        h.apply(&mut qty);
    }
    let beta = back_substitute(&r_cols, &qty[..n]);

    // Rows of R⁻¹: (XᵀX)⁻¹ = R⁻¹R⁻ᵀ, so its diagonal is the squared row norms.
    let mut inv_gram_diag = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[i] = 1.0;
        let col = back_substitute(&r_cols[..=i], &e[..=i]);
        for (row, value) in col.iter().enumerate() {
            inv_gram_diag[row] += value * value;
        }
    }

    LeastSquares {
        kept,
        dropped,
        beta,
        inv_gram_diag,
    }
}

/// Solve R z = b for upper-triangular R given by columns.
fn back_substitute(r_cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = r_cols.len();
    let mut z = b[..n].to_vec();
    for c in (0..n).rev() {
        z[c] /= r_cols[c][c];
        let zc = z[c];
        for (row, rv) in r_cols[c][..c].iter().enumerate() {
            z[row] -= rv * zc;
        }
    }
    z
}
