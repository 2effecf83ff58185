//! MINRES for symmetric (possibly indefinite) linear systems.
//!
//! The grid Newton solver needs this: the linearization -Δ - f'(u) of an
//! unstable solution is indefinite, so CG is not applicable.

/// Solve A x = b for symmetric A given as a matrix-vector product.
///
/// Returns the iteration count, or None if the residual target was not met
/// within `max_iter`. `x` holds the best iterate either way.
pub fn minres<F>(apply: F, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Option<usize>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut v_prev = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut work = vec![0.0; n];

    // r0 = b - A x0
    apply(x, &mut work);
    for i in 0..n {
        v[i] = b[i] - work[i];
    }
    let b_norm = norm(b).max(f64::MIN_POSITIVE);
    let mut beta = norm(&v);
    if beta <= rel_tol * b_norm {
        return Some(0);
    }
    for vi in v.iter_mut() {
        *vi /= beta;
    }

    let mut eta = beta;
    let (mut c_old, mut c) = (1.0_f64, 1.0_f64);
    let (mut s_old, mut s) = (0.0_f64, 0.0_f64);
    let mut w = vec![0.0; n];
    let mut w_old = vec![0.0; n];
    let mut res = beta;

    for k in 1..=max_iter {
        // Lanczos step
        apply(&v, &mut work);
        let alpha = dot(&v, &work);
        for i in 0..n {
            work[i] -= alpha * v[i] + beta * v_prev[i];
        }
        let beta_new = norm(&work);

        // Givens rotations updating the QR of the tridiagonal
        let rho1_hat = c * alpha - c_old * s * beta;
        let rho1 = (rho1_hat * rho1_hat + beta_new * beta_new).sqrt();
        let rho2 = s * alpha + c_old * c * beta;
        let rho3 = s_old * beta;

        let c_new = if rho1 != 0.0 { rho1_hat / rho1 } else { 1.0 };
        let s_new = if rho1 != 0.0 { beta_new / rho1 } else { 0.0 };

        for i in 0..n {
            let wi = (v[i] - rho3 * w_old[i] - rho2 * w[i]) / rho1;
            w_old[i] = w[i];
            w[i] = wi;
            x[i] += c_new * eta * wi;
        }
        res *= s_new.abs();
        eta = -s_new * eta;

        if res <= rel_tol * b_norm {
            return Some(k);
        }
        if beta_new == 0.0 {
            break;
        }
        for i in 0..n {
            let tmp = work[i] / beta_new;
            v_prev[i] = v[i];
            v[i] = tmp;
        }
        beta = beta_new;
        c_old = c;
        c = c_new;
        s_old = s;
        s = s_new;
    }
    None
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
    fn indefinite_diagonal() {
        let d = [3.0, -1.0, 2.0, -5.0, 7.0, 0.5];
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..x.len() {
                y[i] = d[i] * x[i];
            }
        };
        let b = [1.0, 2.0, -1.0, 4.0, 0.0, 3.0];
        let mut x = vec![0.0; 6];
        let it = minres(apply, &b, &mut x, 1e-12, 100).expect("converged");
        assert!(it <= 12);
        for i in 0..6 {
            assert!((x[i] - b[i] / d[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn dense_symmetric() {
        // small SPD-ish symmetric matrix with a negative eigenvalue
        let a = [
            [4.0, 1.0, 0.0, 0.5],
            [1.0, -2.0, 0.3, 0.0],
            [0.0, 0.3, 3.0, 1.0],
            [0.5, 0.0, 1.0, 5.0],
        ];
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..4 {
                y[i] = (0..4).map(|j| a[i][j] * x[j]).sum();
            }
        };
        let xs = [1.0, -2.0, 0.7, 3.0];
        let mut b = vec![0.0; 4];
        apply(&xs, &mut b);
        let mut x = vec![0.0; 4];
        minres(apply, &b, &mut x, 1e-13, 200).expect("converged");
        for i in 0..4 {
            assert!((x[i] - xs[i]).abs() < 1e-8, "{x:?}");
        }
    }
}
