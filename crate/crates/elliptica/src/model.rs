//! Core domain types shared by every other module.
//!
//! Everything here is immutable after construction and safe to share across
//! parallel workers.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::interp::Hermite;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SignClass {
    Nonnegative,
    /// Nonnegative up to the zero `z`, nonpositive after.
    NonnegativeThenNonpositive { z: f64 },
    SignChanging,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    C11,
    C21,
    C31,
}

/// A nonlinearity f together with its derivatives and metadata.
#[derive(Clone)]
pub struct Nonlinearity {
    pub name: String,
    pub eval: ScalarFn,
    pub deriv1: ScalarFn,
    pub deriv2: Option<ScalarFn>,
    pub deriv3: Option<ScalarFn>,
    pub sign_class: SignClass,
    /// Known roots of f (provided, not root-found).
    pub zeros: Vec<f64>,
    pub smoothness: Smoothness,
    /// Range on which sign class and derivative consistency are spot-checked.
    pub check_range: (f64, f64),
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("sign_class", &self.sign_class)
            .field("zeros", &self.zeros)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BuiltinNonlinearity {
    Exp,
    Power { p: f64 },
    Truncated { p: f64, beta: f64 },
    AllenCahn,
    Constant { c: f64 },
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("exponent must satisfy p > 1, got p = {p}")]
    BadExponent { p: f64 },
    #[error("truncation level must be positive, got beta = {beta}")]
    BadTruncation { beta: f64 },
    #[error("mesh is not strictly increasing at index {index}")]
    NonMonotoneMesh { index: usize },
    #[error("non-finite value in profile at index {index}")]
    NonFiniteValue { index: usize },
    #[error("mesh too short: {len} points, need at least {min}")]
    MeshTooShort { len: usize, min: usize },
    #[error("test function is discontinuous at breakpoint r = {r}: jump {jump:e}")]
    DiscontinuousTestFunction { r: f64, jump: f64 },
    #[error("test function must end with a Zero piece (compact support)")]
    NotCompactlySupported,
    #[error("listed zero t0 = {t0} has |f(t0)| = {value:e}, above tolerance")]
    BadZero { t0: f64, value: f64 },
}

/// Builds the named builtin nonlinearity with sign class and zeros filled in.
///
/// `Power(p)` is t^p on t >= 0 and 0 below, keeping f nonnegative; the
/// radial constructions only evaluate it on nonnegative states.
pub fn make_builtin_nonlinearity(which: BuiltinNonlinearity) -> Result<Nonlinearity, ModelError> {
    match which {
        BuiltinNonlinearity::Exp => Ok(Nonlinearity {
            name: "exp".into(),
            eval: Arc::new(f64::exp),
            deriv1: Arc::new(f64::exp),
            deriv2: Some(Arc::new(f64::exp)),
            deriv3: Some(Arc::new(f64::exp)),
            sign_class: SignClass::Nonnegative,
            zeros: vec![],
            smoothness: Smoothness::C31,
            check_range: (-30.0, 5.0),
        }),
        BuiltinNonlinearity::Power { p } => {
            if p <= 1.0 {
                return Err(ModelError::BadExponent { p });
            }
            let pow = move |t: f64, q: f64| if t > 0.0 { t.powf(q) } else { 0.0 };
            Ok(Nonlinearity {
                name: format!("power({p})"),
                eval: Arc::new(move |t| pow(t, p)),
                deriv1: Arc::new(move |t| p * pow(t, p - 1.0)),
                deriv2: if p > 2.0 {
                    Some(Arc::new(move |t| p * (p - 1.0) * pow(t, p - 2.0)))
                } else {
                    None
                },
                deriv3: if p > 3.0 {
                    Some(Arc::new(move |t| {
                        p * (p - 1.0) * (p - 2.0) * pow(t, p - 3.0)
                    }))
                } else {
                    None
                },
                sign_class: SignClass::Nonnegative,
                zeros: vec![0.0],
                smoothness: smoothness_from_exponent(p),
                check_range: (0.0, 50.0),
            })
        }
        BuiltinNonlinearity::Truncated { p, beta } => {
            if p <= 1.0 {
                return Err(ModelError::BadExponent { p });
            }
            if beta <= 0.0 {
                return Err(ModelError::BadTruncation { beta });
            }
            let pow = move |t: f64, q: f64| {
                let s = t - beta;
                if s > 0.0 {
                    s.powf(q)
                } else {
                    0.0
                }
            };
            Ok(Nonlinearity {
                name: format!("truncated({p},{beta})"),
                eval: Arc::new(move |t| pow(t, p)),
                deriv1: Arc::new(move |t| p * pow(t, p - 1.0)),
                deriv2: if p > 2.0 {
                    Some(Arc::new(move |t| p * (p - 1.0) * pow(t, p - 2.0)))
                } else {
                    None
                },
                deriv3: if p > 3.0 {
                    Some(Arc::new(move |t| {
                        p * (p - 1.0) * (p - 2.0) * pow(t, p - 3.0)
                    }))
                } else {
                    None
                },
                sign_class: SignClass::Nonnegative,
                zeros: vec![beta],
                smoothness: smoothness_from_exponent(p),
                check_range: (0.0, 50.0),
            })
        }
        BuiltinNonlinearity::AllenCahn => Ok(Nonlinearity {
            name: "allen-cahn".into(),
            eval: Arc::new(|t| t - t * t * t),
            deriv1: Arc::new(|t| 1.0 - 3.0 * t * t),
            deriv2: Some(Arc::new(|t| -6.0 * t)),
            deriv3: Some(Arc::new(|_| -6.0)),
            sign_class: SignClass::SignChanging,
            zeros: vec![-1.0, 0.0, 1.0],
            smoothness: Smoothness::C31,
            check_range: (-2.0, 2.0),
        }),
        BuiltinNonlinearity::Constant { c } => Ok(Nonlinearity {
            name: format!("constant({c})"),
            eval: Arc::new(move |_| c),
            deriv1: Arc::new(|_| 0.0),
            deriv2: Some(Arc::new(|_| 0.0)),
            deriv3: Some(Arc::new(|_| 0.0)),
            sign_class: if c >= 0.0 {
                SignClass::Nonnegative
            } else {
                SignClass::SignChanging
            },
            zeros: vec![],
            smoothness: Smoothness::C31,
            check_range: (-10.0, 10.0),
        }),
    }
}

fn smoothness_from_exponent(p: f64) -> Smoothness {
    if p >= 4.0 {
        Smoothness::C31
    } else if p >= 3.0 {
        Smoothness::C21
    } else {
        Smoothness::C11
    }
}

impl Nonlinearity {
    pub fn f(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn df(&self, t: f64) -> f64 {
        (self.deriv1)(t)
    }

    /// Centered-difference consistency of deriv1 against eval.
    ///
    /// Step h = 1e-5 (1 + |t|) balances truncation against round-off at
    /// double precision.
    pub fn check_derivative_consistency(&self, samples: usize, rel_tol: f64) -> Result<(), f64> {
        let (a, b) = self.check_range;
        let mut worst = 0.0_f64;
        for i in 0..samples {
            let t = a + (b - a) * (i as f64 + 0.5) / samples as f64;
            let h = 1e-5 * (1.0 + t.abs());
            let fd = (self.f(t + h) - self.f(t - h)) / (2.0 * h);
            let d = self.df(t);
            let scale = d.abs().max(fd.abs()).max(1e-8);
            worst = worst.max((fd - d).abs() / scale);
        }
        if worst <= rel_tol {
            Ok(())
        } else {
            Err(worst)
        }
    }

    /// Checks each listed zero against |f(t0)| <= 1e-12 (1 + |t0|).
    pub fn check_zeros(&self) -> Result<(), ModelError> {
        for &t0 in &self.zeros {
            let v = self.f(t0).abs();
            if v > 1e-12 * (1.0 + t0.abs()) {
                return Err(ModelError::BadZero { t0, value: v });
            }
        }
        Ok(())
    }
}

/// Provenance of a radial profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ProfileMeta {
    Shooting {
        dim: u32,
        center_value: f64,
        rel_tol: f64,
        abs_tol: f64,
        series_radius: f64,
    },
    ClosedForm {
        label: String,
    },
}

/// A radial function sampled with its derivative on a graded mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    pub dim: u32,
    pub mesh: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub center_value: f64,
    pub inf_estimate: f64,
    pub meta: ProfileMeta,
}

impl RadialProfile {
    pub fn check_mesh(&self) -> Result<(), ModelError> {
        if self.mesh.len() < 2 {
            return Err(ModelError::MeshTooShort {
                len: self.mesh.len(),
                min: 2,
            });
        }
        for i in 1..self.mesh.len() {
            if !(self.mesh[i] > self.mesh[i - 1]) {
                return Err(ModelError::NonMonotoneMesh { index: i });
            }
        }
        for (i, (&a, &b)) in self.u.iter().zip(&self.du).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(ModelError::NonFiniteValue { index: i });
            }
        }
        Ok(())
    }

    pub fn r_max(&self) -> f64 {
        *self.mesh.last().unwrap()
    }

    /// Whether the sample starts at the origin (regular radial data).
    pub fn starts_at_origin(&self) -> bool {
        self.mesh[0] == 0.0
    }

    pub fn interpolant(&self) -> Hermite<'_> {
        Hermite::new(&self.mesh, &self.u, &self.du)
    }

    /// Samples a closed-form radial function on a geometrically graded mesh.
    pub fn from_closed_form(
        dim: u32,
        label: &str,
        r_min: f64,
        r_max: f64,
        ratio: f64,
        u: impl Fn(f64) -> f64,
        du: impl Fn(f64) -> f64,
    ) -> Self {
        let mesh = graded_mesh(r_min, r_max, ratio);
        let uv: Vec<f64> = mesh.iter().map(|&r| u(r)).collect();
        let duv: Vec<f64> = mesh.iter().map(|&r| du(r)).collect();
        let center = uv[0];
        let inf = uv.iter().cloned().fold(f64::INFINITY, f64::min);
        RadialProfile {
            dim,
            mesh,
            u: uv,
            du: duv,
            center_value: center,
            inf_estimate: inf,
            meta: ProfileMeta::ClosedForm {
                label: label.into(),
            },
        }
    }
}

/// Geometric mesh from r_min (or 0) to r_max.
///
/// Solutions are smooth but the weighted integrands carry r^{2-N} factors,
/// so points are graded toward the origin; starting at 0 inserts the origin
/// plus a geometric fan from `seed`.
pub fn graded_mesh(r_min: f64, r_max: f64, ratio: f64) -> Vec<f64> {
    assert!(ratio > 1.0 && r_max > r_min && r_min >= 0.0);
    let mut mesh = Vec::new();
    let seed = if r_min > 0.0 { r_min } else { 1e-2_f64.min(r_max / 100.0) };
    if r_min == 0.0 {
        mesh.push(0.0);
    }
    let mut r = seed;
    while r < r_max {
        mesh.push(r);
        r *= ratio;
    }
    mesh.push(r_max);
    // drop a possibly crowded penultimate point
    let n = mesh.len();
    if n >= 3 && mesh[n - 1] - mesh[n - 2] < 1e-9 * mesh[n - 1] {
        mesh.remove(n - 2);
    }
    mesh
}

/// Residual report from `validate_profile`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub l2_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Per-point residual of u'' + (N-1)/r u' + f(u) using finite differences
/// on the stored mesh (u'' from a 3-point nonuniform stencil, u' from the
/// stored du channel).
pub fn validate_profile(
    p: &RadialProfile,
    f: &Nonlinearity,
    tol: f64,
) -> Result<ResidualReport, ModelError> {
    if p.mesh.len() < 16 {
        return Err(ModelError::MeshTooShort {
            len: p.mesh.len(),
            min: 16,
        });
    }
    p.check_mesh()?;
    let n = p.mesh.len();
    let nm1 = (p.dim as f64) - 1.0;
    let mut max_res = 0.0_f64;
    let mut sum_sq = 0.0_f64;
    let mut count = 0usize;
    for i in 1..n - 1 {
        let hm = p.mesh[i] - p.mesh[i - 1];
        let hp = p.mesh[i + 1] - p.mesh[i];
        let upp = 2.0 * ((p.u[i + 1] - p.u[i]) / hp - (p.u[i] - p.u[i - 1]) / hm) / (hp + hm);
        let r = p.mesh[i];
        let res = upp + nm1 / r * p.du[i] + f.f(p.u[i]);
        max_res = max_res.max(res.abs());
        sum_sq += res * res;
        count += 1;
    }
    let l2 = (sum_sq / count as f64).sqrt();
    Ok(ResidualReport {
        max_residual: max_res,
        l2_residual: l2,
        tol,
        pass: max_res <= tol,
    })
}

/// One closed-form piece of a radial Lipschitz test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    /// a * r^k
    Power { a: f64, k: f64 },
    Constant { c: f64 },
    /// c * ln(r / r2^2) / ln(1 / r2), the logarithmic cap on [r2, r2^2)
    LogCap { c: f64, r2: f64 },
    /// a * r + b
    Linear { a: f64, b: f64 },
    Zero,
}

impl Piece {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Piece::Power { a, k } => a * r.powf(k),
            Piece::Constant { c } => c,
            Piece::LogCap { c, r2 } => c * (r / (r2 * r2)).ln() / (1.0 / r2).ln(),
            Piece::Linear { a, b } => a * r + b,
            Piece::Zero => 0.0,
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        match *self {
            Piece::Power { a, k } => a * k * r.powf(k - 1.0),
            Piece::Constant { .. } => 0.0,
            Piece::LogCap { c, r2 } => c / (r * (1.0 / r2).ln()),
            Piece::Linear { a, .. } => a,
            Piece::Zero => 0.0,
        }
    }
}

/// Piecewise-defined radial cutoff: piece i is active on
/// [breakpoints[i], breakpoints[i+1]), the last piece from the last
/// breakpoint onward and must be `Zero`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFunction {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Piece>,
    pub alpha: Option<f64>,
}

impl TestFunction {
    pub fn new(
        breakpoints: Vec<f64>,
        pieces: Vec<Piece>,
        alpha: Option<f64>,
    ) -> Result<Self, ModelError> {
        assert_eq!(breakpoints.len(), pieces.len());
        for i in 1..breakpoints.len() {
            if !(breakpoints[i] > breakpoints[i - 1]) {
                return Err(ModelError::NonMonotoneMesh { index: i });
            }
        }
        if !matches!(pieces.last(), Some(Piece::Zero)) {
            return Err(ModelError::NotCompactlySupported);
        }
        let tf = TestFunction {
            breakpoints,
            pieces,
            alpha,
        };
        tf.check_continuity()?;
        Ok(tf)
    }

    fn piece_index(&self, r: f64) -> Option<usize> {
        if r < self.breakpoints[0] {
            return None;
        }
        let mut i = match self
            .breakpoints
            .binary_search_by(|v| v.partial_cmp(&r).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        if i >= self.pieces.len() {
            i = self.pieces.len() - 1;
        }
        Some(i)
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self.piece_index(r) {
            Some(i) => self.pieces[i].eval(r),
            None => 0.0,
        }
    }

    pub fn deriv(&self, r: f64) -> f64 {
        match self.piece_index(r) {
            Some(i) => self.pieces[i].deriv(r),
            None => 0.0,
        }
    }

    /// Last breakpoint: support is contained in [0, support_end].
    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Adjacent pieces must agree at each interior breakpoint to 1e-12
    /// relative (global Lipschitz continuity).
    pub fn check_continuity(&self) -> Result<(), ModelError> {
        for i in 1..self.pieces.len() {
            let r = self.breakpoints[i];
            let left = self.pieces[i - 1].eval(r);
            let right = self.pieces[i].eval(r);
            let scale = left.abs().max(right.abs()).max(1.0);
            let jump = (left - right).abs();
            if jump > 1e-12 * scale {
                return Err(ModelError::DiscontinuousTestFunction { r, jump });
            }
        }
        Ok(())
    }
}

/// Boundary-condition tag for grid solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Dirichlet0,
    Neumann0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Disk { radius: f64 },
    Box { a: f64, b: f64 },
}

/// Finite-difference solution on a disk or box, for moving-plane sweeps.
///
/// Values are stored on the full (n x n) square covering the geometry,
/// row-major; points outside the domain hold 0 and are masked out by
/// `inside`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSolution2D {
    pub geometry: Geometry,
    pub h: f64,
    pub n: usize,
    pub u: Vec<f64>,
    pub bc: BoundaryCondition,
    pub residual_norm: f64,
}

impl GridSolution2D {
    pub fn half_extent(&self) -> (f64, f64) {
        match self.geometry {
            Geometry::Disk { radius } => (radius, radius),
            Geometry::Box { a, b } => (a / 2.0, b / 2.0),
        }
    }

    pub fn coord(&self, i: usize, j: usize) -> (f64, f64) {
        let (hx, hy) = self.half_extent();
        (-hx + self.h * i as f64, -hy + self.h * j as f64)
    }

    pub fn inside(&self, i: usize, j: usize) -> bool {
        let (x, y) = self.coord(i, j);
        match self.geometry {
            Geometry::Disk { radius } => x * x + y * y < radius * radius - 1e-12,
            Geometry::Box { a, b } => {
                x.abs() < a / 2.0 - 1e-12 && y.abs() < b / 2.0 - 1e-12
            }
        }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.u[i * self.n + j]
    }
}

/// Quantity measured by a decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayQuantity {
    SupDeviation,
    GradientTail,
}

/// Result of a log-log least-squares fit over dyadic radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub constant: f64,
    pub fit_range: (f64, f64),
    pub residual: f64,
    pub quantity: DecayQuantity,
}

/// Spectral summary over a family of balls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    pub dim: u32,
    pub radii: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub neg_count: Vec<usize>,
    pub grid_resolution: usize,
    /// Smallest tested R0 with lambda1(Annulus(R0, R)) >= 0 for every tested
    /// R > R0; None means no tested R0 works.
    pub stable_outside: Option<f64>,
}

impl SpectralReport {
    /// Domain monotonicity: lambda1 nonincreasing, neg_count nondecreasing.
    pub fn check_monotonicity(&self, slack: f64) -> bool {
        self.lambda1.windows(2).all(|w| w[1] <= w[0] + slack)
            && self.neg_count.windows(2).all(|w| w[1] >= w[0])
    }
}
