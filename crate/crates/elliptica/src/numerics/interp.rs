//! Cubic Hermite interpolation of a sampled function with known derivatives.

/// Piecewise-cubic interpolant through (x_i, y_i) with slopes dy_i.
///
/// The radial profiles store both u and u' on the mesh, so Hermite data is
/// available without estimating slopes.
pub struct Hermite<'a> {
    x: &'a [f64],
    y: &'a [f64],
    dy: &'a [f64],
}

impl<'a> Hermite<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64], dy: &'a [f64]) -> Self {
        debug_assert!(x.len() == y.len() && y.len() == dy.len());
        debug_assert!(x.windows(2).all(|w| w[0] < w[1]));
        Self { x, y, dy }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    fn segment(&self, xq: f64) -> usize {
        match self
            .x
            .binary_search_by(|v| v.partial_cmp(&xq).unwrap())
        {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    /// Interpolated value; clamps to the boundary segments outside the domain.
    pub fn eval(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.y[i] + h10 * h * self.dy[i] + h01 * self.y[i + 1] + h11 * h * self.dy[i + 1]
    }

    /// Interpolated first derivative.
    pub fn eval_deriv(&self, xq: f64) -> f64 {
        let i = self.segment(xq);
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let dh00 = 6.0 * t * t - 6.0 * t;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        (dh00 * self.y[i] + dh01 * self.y[i + 1]) / h + dh10 * self.dy[i] + dh11 * self.dy[i + 1]
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}
