//! Sturm-sequence bisection for symmetric tridiagonal eigenproblems.

/// Number of eigenvalues strictly below `lambda`, by counting negative
/// pivots of the LDLᵀ factorization of T - lambda I.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let guard = 1e-300;
    let mut count = 0usize;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < guard {
            if q >= 0.0 {
                guard
            } else {
                -guard
            }
        } else {
            q
        };
        q = (diag[i] - lambda) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin bounds for all eigenvalues.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        if i > 0 {
            radius += off[i - 1].abs();
        }
        if i + 1 < n {
            radius += off[i].abs();
        }
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    (lo, hi)
}

/// k-th smallest eigenvalue (0-based) by bisection to absolute tolerance `tol`.
pub fn eigenvalue_k(diag: &[f64], off: &[f64], k: usize, tol: f64) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    // widen slightly so the counts at the endpoints bracket k
    let pad = 1e-10 * (hi - lo).abs().max(1.0);
    lo -= pad;
    hi += pad;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Discrete 1D Laplacian -u'' on (0,1), Dirichlet: eigenvalues
    /// (2 - 2 cos(k pi h)) / h^2.
    fn laplacian(n: usize) -> (Vec<f64>, Vec<f64>) {
        let h = 1.0 / (n as f64 + 1.0);
        (vec![2.0 / (h * h); n], vec![-1.0 / (h * h); n - 1])
    }

    #[test]
    fn laplacian_spectrum() {
        let n = 200;
        let (d, e) = laplacian(n);
        let h = 1.0 / (n as f64 + 1.0);
        for k in 0..3 {
            let exact =
                (2.0 - 2.0 * ((k as f64 + 1.0) * std::f64::consts::PI * h).cos()) / (h * h);
            let got = eigenvalue_k(&d, &e, k, 1e-10);
            assert!((got - exact).abs() < 1e-6 * exact, "k={k}: {got} vs {exact}");
        }
    }

    #[test]
    fn count_is_monotone() {
        let (d, e) = laplacian(50);
        let (lo, hi) = gershgorin(&d, &e);
        let mut prev = 0;
        for i in 0..=20 {
            let lam = lo + (hi - lo) * i as f64 / 20.0;
            let c = sturm_count(&d, &e, lam);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(sturm_count(&d, &e, hi + 1.0), 50);
    }
}
