//! Small dense linear algebra: log-determinants for matrix-tree evaluations.

/// Log-determinant of a square matrix via LU with partial pivoting.
///
/// Returns `None` when the matrix is (numerically) singular or the
/// determinant is not strictly positive. Matrix-tree minors of connected
/// graphs are positive, so a `None` signals disconnection.
pub(crate) fn lu_log_det(mut a: Vec<f64>, n: usize) -> Option<f64> {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return Some(0.0); // det of the empty matrix is 1
    }
    let mut log_det = 0.0;
    let mut sign = 1.0f64;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            sign = -sign;
        }
        let diag = a[col * n + col];
        if diag < 0.0 {
            sign = -sign;
        }
        log_det += diag.abs().ln();
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
        }
    }
    if sign < 0.0 {
        return None;
    }
    Some(log_det)
}

/// Exact integer determinant via the fraction-free Bareiss algorithm.
///
/// Intermediate values are determinants of leading minors; for Laplacian
/// minors of graphs on <= 16 vertices they fit comfortably in i128.
pub(crate) fn bareiss_det(mut a: Vec<i128>, n: usize) -> i128 {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for col in 0..n - 1 {
        if a[col * n + col] == 0 {
            let pivot = (col + 1..n).find(|&r| a[r * n + col] != 0);
            match pivot {
                Some(r) => {
                    for k in 0..n {
                        a.swap(col * n + k, r * n + k);
                    }
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for row in col + 1..n {
            for k in col + 1..n {
                let num = a[row * n + k] * a[col * n + col] - a[row * n + col] * a[col * n + k];
                a[row * n + k] = num / prev;
            }
            a[row * n + col] = 0;
        }
        prev = a[col * n + col];
    }
    sign * a[n * n - 1]
}
