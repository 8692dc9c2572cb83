use alloc::vec::Vec;


use crate::{Error, Result};

/// Solves the real `n x n` system `a x = rhs` (row-major `a`) by Gaussian
/// elimination with partial pivoting.
pub fn solve_real(a: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    if a.len() != n * n {
        return Err(Error::invalid("coefficient matrix is not n x n"));
    }
    let mut m = a.to_vec();
    let mut x = rhs.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().partial_cmp(&m[j * n + col].abs()).unwrap_or(core::cmp::Ordering::Equal))
            .expect("nonempty range");
        let p = m[pivot * n + col];
        if !(p.abs() > scale * 1e-300) || !p.is_finite() {
            return Err(Error::invalid("singular linear system"));
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        for r in (col + 1)..n {
            let f = m[r * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in (col + 1)..n {
            s -= m[col * n + k] * x[k];
        }
        x[col] = s / m[col * n + col];
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::invalid("singular linear system"))
    }
}
