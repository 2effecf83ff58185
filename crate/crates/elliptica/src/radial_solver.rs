//! Radial solutions of u'' + (N-1)/r u' + f(u) = 0 by shooting from the
//! origin, a classified sweep over center values, and 1D monotone profiles
//! from the first integral.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    graded_mesh, ModelError, Nonlinearity, ProfileMeta, RadialProfile,
};
use crate::numerics::interp::Hermite;
use crate::numerics::ode::{Dopri5, OdeError, StepOutcome};
use crate::numerics::quad::gk15;

/// Absolute blow-up guard on |u|.
const BLOW_UP_GUARD: f64 = 1e8;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ShootingParams {
    pub dim: u32,
    pub center_value: f64,
    pub r_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Switch point from the Taylor start to the adaptive stepper.
    pub series_radius: f64,
    pub max_steps: usize,
}

impl ShootingParams {
    pub fn new(dim: u32, center_value: f64, r_max: f64) -> Self {
        Self {
            dim,
            center_value,
            r_max,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            series_radius: 1e-3,
            max_steps: 2_000_000,
        }
    }

    fn check(&self) -> Result<(), SolverError> {
        if !(self.series_radius > 0.0 && self.series_radius < 0.1 * self.r_max) {
            return Err(SolverError::BadParams {
                what: "series_radius must be positive and well inside r_max".into(),
            });
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2 && self.abs_tol > 0.0
            && self.abs_tol <= 1e-2)
        {
            return Err(SolverError::BadParams {
                what: "tolerances must lie in (0, 1e-2]".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("solution blows up at r = {radius}")]
    BlowUp { radius: f64 },
    #[error("adaptive stepper failed near r = {r}")]
    StepFailure { r: f64 },
    #[error("invalid shooting parameters: {what}")]
    BadParams { what: String },
    #[error("target level c = {c} is not a zero of f: |f(c)| = {value:e}")]
    NotAZero { c: f64, value: f64 },
    #[error("f is not positive at t = {t} inside (0, c); no monotone connection")]
    NotPositiveInside { t: f64 },
    #[error("potential well violation at t = {t}: F(c) <= F(t)")]
    NoMonotoneConnection { t: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Taylor start near the origin:
/// u(r) = a - f(a) r^2 / (2N) + f(a) f'(a) r^4 / (8N(N+2)).
fn series_start(f: &Nonlinearity, dim: u32, a: f64, r: f64) -> (f64, f64) {
    let n = dim as f64;
    let fa = f.f(a);
    let dfa = f.df(a);
    let u = a - fa * r * r / (2.0 * n) + fa * dfa * r.powi(4) / (8.0 * n * (n + 2.0));
    let du = -fa * r / n + fa * dfa * r.powi(3) / (2.0 * n * (n + 2.0));
    (u, du)
}

/// Integrates the radial equation outward from u(0) = a, u'(0) = 0, sampling
/// on a geometrically graded mesh.
pub fn shoot(f: &Nonlinearity, sp: &ShootingParams) -> Result<RadialProfile, SolverError> {
    sp.check()?;
    let n = sp.dim as f64;
    let mesh = graded_mesh(0.0, sp.r_max, 1.05);
    let rhs = move |r: f64, y: &[f64; 2]| [y[1], -(n - 1.0) / r * y[1] - f.f(y[0])];
    let guard = |_: f64, y: &[f64; 2]| y[0].abs() > BLOW_UP_GUARD;

    let solver = Dopri5 {
        rel_tol: sp.rel_tol,
        abs_tol: sp.abs_tol,
        max_steps: sp.max_steps,
    };

    let mut u = Vec::with_capacity(mesh.len());
    let mut du = Vec::with_capacity(mesh.len());
    let mut r_cur = sp.series_radius;
    let (u0, du0) = series_start(f, sp.dim, sp.center_value, r_cur);
    let mut y = [u0, du0];
    let mut steps = 0usize;

    for &r in &mesh {
        if r == 0.0 {
            u.push(sp.center_value);
            du.push(0.0);
            continue;
        }
        if r <= sp.series_radius {
            let (us, dus) = series_start(f, sp.dim, sp.center_value, r);
            u.push(us);
            du.push(dus);
            continue;
        }
        match solver.integrate_to(&rhs, r_cur, &mut y, r, &guard, &mut steps) {
            Ok(StepOutcome::Reached) => {
                r_cur = r;
                u.push(y[0]);
                du.push(y[1]);
            }
            Ok(StepOutcome::GuardTripped(rc)) => {
                return Err(SolverError::BlowUp { radius: rc });
            }
            Err(OdeError::StepUnderflow { t }) | Err(OdeError::StepBudget { t, .. }) => {
                return Err(SolverError::StepFailure { r: t });
            }
        }
    }

    let inf = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let profile = RadialProfile {
        dim: sp.dim,
        mesh,
        u,
        du,
        center_value: sp.center_value,
        inf_estimate: inf,
        meta: ProfileMeta::Shooting {
            dim: sp.dim,
            center_value: sp.center_value,
            rel_tol: sp.rel_tol,
            abs_tol: sp.abs_tol,
            series_radius: sp.series_radius,
        },
    };
    profile.check_mesh()?;
    Ok(profile)
}

/// Qualitative classification of a single shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BranchClass {
    /// u settles in a compact range: total variation on the last 10% of the
    /// radius window is below 1e-3 (1 + |u(r_max)|).
    Bounded,
    /// u hits a zero of f below the start value, or changes monotonicity.
    Crossing,
    BlowUp { radius: f64 },
    /// No blow-up but no finite limit either (e.g. logarithmic drift).
    Drifting,
    /// The stepper failed before reaching r_max.
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchSample {
    pub a: f64,
    pub class: BranchClass,
    pub profile: Option<RadialProfile>,
}

impl BranchSample {
    pub fn bounded(&self) -> bool {
        self.class == BranchClass::Bounded
    }
}

/// Classifies a successfully computed shot.
pub fn classify_shot(profile: &RadialProfile, f: &Nonlinearity) -> BranchClass {
    let a = profile.center_value;
    let crossed_zero = f
        .zeros
        .iter()
        .any(|&z| z < a && profile.u.iter().any(|&ui| ui < z));
    if crossed_zero {
        return BranchClass::Crossing;
    }
    // monotonicity change: u' turns positive after having been clearly
    // negative (tolerance filters stepper noise near flat tails)
    let scale = profile.u.iter().fold(0.0_f64, |m, &v| m.max(v.abs())).max(1.0);
    let tol = 1e-9 * scale;
    let mut was_negative = false;
    for &d in &profile.du {
        if d < -tol {
            was_negative = true;
        } else if was_negative && d > tol {
            return BranchClass::Crossing;
        }
    }
    // bounded: total variation of u over the last 10% of the radius window
    let r_max = profile.r_max();
    let window_start = 0.9 * r_max;
    let mut tv = 0.0;
    let mut prev: Option<f64> = None;
    for (&r, &ui) in profile.mesh.iter().zip(&profile.u) {
        if r >= window_start {
            if let Some(p) = prev {
                tv += (ui - p).abs();
            }
            prev = Some(ui);
        }
    }
    let u_end = *profile.u.last().unwrap();
    if tv <= 1e-3 * (1.0 + u_end.abs()) {
        BranchClass::Bounded
    } else {
        BranchClass::Drifting
    }
}

/// Sweeps center values over a logarithmic grid, classifying each shot.
///
/// Shot errors are recorded per sample; the sweep never aborts. One round
/// of trisection refinement is inserted wherever adjacent samples disagree.
pub fn find_bounded_stable_branch(
    f: &Nonlinearity,
    dim: u32,
    a_range: (f64, f64),
    samples: usize,
    r_max: f64,
) -> Vec<BranchSample> {
    assert!(dim >= 3, "sweep requires N >= 3");
    assert!(a_range.0 > 0.0 && a_range.1 > a_range.0);
    assert!(samples >= 2);
    let (lo, hi) = a_range;
    let grid: Vec<f64> = (0..samples)
        .map(|i| lo * (hi / lo).powf(i as f64 / (samples - 1) as f64))
        .collect();
    let mut out = run_samples(f, dim, &grid, r_max);

    // trisection refinement across classification boundaries
    let mut refine = Vec::new();
    for w in out.windows(2) {
        if std::mem::discriminant(&w[0].class) != std::mem::discriminant(&w[1].class) {
            let (a0, a1) = (w[0].a, w[1].a);
            refine.push(a0 + (a1 - a0) / 3.0);
            refine.push(a0 + 2.0 * (a1 - a0) / 3.0);
        }
    }
    if !refine.is_empty() {
        out.extend(run_samples(f, dim, &refine, r_max));
        out.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    }
    out
}

fn run_samples(f: &Nonlinearity, dim: u32, grid: &[f64], r_max: f64) -> Vec<BranchSample> {
    grid.par_iter()
        .map(|&a| {
            let sp = ShootingParams::new(dim, a, r_max);
            match shoot(f, &sp) {
                Ok(profile) => {
                    let class = classify_shot(&profile, f);
                    BranchSample {
                        a,
                        class,
                        profile: Some(profile),
                    }
                }
                Err(SolverError::BlowUp { radius }) => BranchSample {
                    a,
                    class: BranchClass::BlowUp { radius },
                    profile: None,
                },
                Err(_) => BranchSample {
                    a,
                    class: BranchClass::Failed,
                    profile: None,
                },
            }
        })
        .collect()
}

/// Monotone increasing 1D profile connecting 0 to the level c, built from
/// the first integral u'^2 / 2 + F(u) = F(c) with F' = f, F(0) = 0.
pub fn halfspace_profile_1d(
    f: &Nonlinearity,
    c: f64,
    x_max: f64,
) -> Result<RadialProfile, SolverError> {
    if !(c > 0.0) {
        return Err(SolverError::BadParams {
            what: format!("target level must be positive, got c = {c}"),
        });
    }
    let fc = f.f(c).abs();
    if fc > 1e-10 * (1.0 + c.abs()) {
        return Err(SolverError::NotAZero { c, value: fc });
    }
    // positivity of f on (0, c), sampled
    let check_n = 512;
    for i in 1..check_n {
        let t = c * i as f64 / check_n as f64;
        if f.f(t) <= 0.0 {
            return Err(SolverError::NotPositiveInside { t });
        }
    }

    // cumulative F on a fine uniform grid; derivative channel is f itself,
    // so the Hermite interpolant is 4th-order accurate
    let nf = 4096usize;
    let hu = c / nf as f64;
    let mut tgrid = Vec::with_capacity(nf + 1);
    let mut fval = Vec::with_capacity(nf + 1);
    let mut dval = Vec::with_capacity(nf + 1);
    let mut acc = 0.0;
    tgrid.push(0.0);
    fval.push(0.0);
    dval.push(f.f(0.0));
    for i in 1..=nf {
        let a = hu * (i - 1) as f64;
        let b = hu * i as f64;
        acc += gk15(&|t| f.f(t), a, b).0;
        tgrid.push(b);
        fval.push(acc);
        dval.push(f.f(b));
    }
    let cap = acc; // F(c)
    let big_f = Hermite::new(&tgrid, &fval, &dval);
    for i in 1..check_n {
        let t = c * i as f64 / check_n as f64;
        if cap - big_f.eval(t) <= 0.0 {
            return Err(SolverError::NoMonotoneConnection { t });
        }
    }

    let g = move |u: f64| {
        if u >= c {
            0.0
        } else {
            (2.0 * (cap - big_f.eval(u)).max(0.0)).sqrt()
        }
    };
    let rhs = move |_x: f64, y: &[f64; 2]| [g(y[0]), 0.0];
    let solver = Dopri5 {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        max_steps: 20_000_000,
    };
    let nop = |_: f64, _: &[f64; 2]| false;

    // uniform mesh fine enough that the 3-point residual check resolves 1e-8
    let h = 2.5e-4;
    let npts = (x_max / h).ceil() as usize;
    let mut mesh = Vec::with_capacity(npts + 1);
    let mut u = Vec::with_capacity(npts + 1);
    let mut du = Vec::with_capacity(npts + 1);
    let mut y = [0.0_f64, 0.0];
    let mut x_cur = 0.0;
    let mut steps = 0usize;
    for i in 0..=npts {
        let x = h * i as f64;
        if i > 0 {
            match solver.integrate_to(&rhs, x_cur, &mut y, x, &nop, &mut steps) {
                Ok(_) => {}
                Err(OdeError::StepUnderflow { t }) | Err(OdeError::StepBudget { t, .. }) => {
                    return Err(SolverError::StepFailure { r: t });
                }
            }
            x_cur = x;
        }
        mesh.push(x);
        u.push(y[0]);
        du.push(g(y[0]));
    }

    Ok(RadialProfile {
        dim: 1,
        mesh,
        u,
        du,
        center_value: 0.0,
        inf_estimate: 0.0,
        meta: ProfileMeta::ClosedForm {
            label: format!("halfspace-first-integral(c={c})"),
        },
    })
}

/// Checks r^{N-1} u'(r) nonincreasing: it equals the cumulative integral
/// -int_0^r s^{N-1} f(u) ds, which is nonincreasing whenever f >= 0.
pub fn check_flux_monotone(profile: &RadialProfile, tol: f64) -> bool {
    let n = profile.dim as f64;
    let mut prev = f64::INFINITY;
    for (&r, &d) in profile.mesh.iter().zip(&profile.du) {
        let flux = r.powf(n - 1.0) * d;
        if flux > prev + tol {
            return false;
        }
        prev = prev.min(flux);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_builtin_nonlinearity, validate_profile, BuiltinNonlinearity};

    #[test]
    fn constant_source_gives_parabola() {
        // f = 2N, a = 0, N = 3: exact solution u = -r^2
        let n = 3u32;
        let f = make_builtin_nonlinearity(BuiltinNonlinearity::Constant { c: 2.0 * n as f64 })
            .unwrap();
        let sp = ShootingParams::new(n, 0.0, 10.0);
        let p = shoot(&f, &sp).unwrap();
        for (&r, &u) in p.mesh.iter().zip(&p.u) {
            assert!((u + r * r).abs() <= 1e-9 * (1.0 + r * r), "r={r} u={u}");
        }
        let rep = validate_profile(&p, &f, 1e-8).unwrap();
        assert!(rep.pass, "residual {}", rep.max_residual);
    }

    #[test]
    fn exp_dim10_drifts_to_singular_level() {
        // u(r) + 2 ln r -> ln(2(N-2)) = ln 16 for N = 10
        let f = make_builtin_nonlinearity(BuiltinNonlinearity::Exp).unwrap();
        let sp = ShootingParams::new(10, 0.0, 1e3);
        let p = shoot(&f, &sp).unwrap();
        let u_end = *p.u.last().unwrap();
        let v = u_end + 2.0 * (1e3_f64).ln();
        assert!((v - 16.0_f64.ln()).abs() < 0.05, "v = {v}");
    }

    #[test]
    fn critical_power_shot_matches_bubble() {
        // N = 3, p = 5: shot from a = 1 reproduces
        // (1 + r^2/(N(N-2)))^{-(N-2)/2}
        let f = make_builtin_nonlinearity(BuiltinNonlinearity::Power { p: 5.0 }).unwrap();
        let mut sp = ShootingParams::new(3, 1.0, 50.0);
        sp.rel_tol = 1e-11;
        sp.abs_tol = 1e-14;
        let p = shoot(&f, &sp).unwrap();
        for (&r, &u) in p.mesh.iter().zip(&p.u) {
            let exact = (1.0 + r * r / 3.0).powf(-0.5);
            assert!((u - exact).abs() <= 1e-7, "r={r}: {u} vs {exact}");
        }
    }

    #[test]
    fn flux_is_monotone_for_nonnegative_f() {
        let f = make_builtin_nonlinearity(BuiltinNonlinearity::Power { p: 5.0 }).unwrap();
        let p = shoot(&f, &ShootingParams::new(3, 1.0, 50.0)).unwrap();
        assert!(check_flux_monotone(&p, 1e-8));
    }

    #[test]
    fn series_handoff_is_insensitive() {
        let f = make_builtin_nonlinearity(BuiltinNonlinearity::Exp).unwrap();
        let mut sp = ShootingParams::new(9, 0.5, 100.0);
        let p1 = shoot(&f, &sp).unwrap();
        sp.series_radius /= 2.0;
        let p2 = shoot(&f, &sp).unwrap();
        let (a, b) = (*p1.u.last().unwrap(), *p2.u.last().unwrap());
        assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn tolerance_refinement_is_consistent() {
        let f = make_builtin_nonlinearity(BuiltinNonlinearity::Power { p: 5.0 }).unwrap();
        let mut sp = ShootingParams::new(3, 1.0, 50.0);
        sp.rel_tol = 1e-8;
        let p1 = shoot(&f, &sp).unwrap();
        sp.rel_tol = 5e-9;
        let p2 = shoot(&f, &sp).unwrap();
        let (a, b) = (*p1.u.last().unwrap(), *p2.u.last().unwrap());
        assert!((a - b).abs() <= 5.0 * 1e-8 * (1.0 + a.abs()));
    }

    #[test]
    fn blow_up_is_reported_with_radius() {
        // starting above the unstable equilibrium u = 1, f(u) = u - u^3 is
        // negative and growing in magnitude: finite-radius blow-up
        let f = make_builtin_nonlinearity(BuiltinNonlinearity::AllenCahn).unwrap();
        let sp = ShootingParams::new(3, 3.0, 1e4);
        match shoot(&f, &sp) {
            Err(SolverError::BlowUp { radius }) => {
                assert!(radius > 0.0 && radius < 1e4);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn branch_sweep_classifies_bubble_as_bounded() {
        let f = make_builtin_nonlinearity(BuiltinNonlinearity::Power { p: 5.0 }).unwrap();
        let out = find_bounded_stable_branch(&f, 3, (0.5, 2.0), 5, 100.0);
        assert!(out.iter().any(|s| s.bounded()), "{:?}",
            out.iter().map(|s| (s.a, s.class)).collect::<Vec<_>>());
    }

    #[test]
    fn halfspace_logistic_profile() {
        let f = logistic();
        let p = halfspace_profile_1d(&f, 1.0, 20.0).unwrap();
        assert_eq!(p.u[0], 0.0);
        assert!(p.du.iter().all(|&d| d >= 0.0));
        let sup = *p.u.last().unwrap();
        assert!((sup - 1.0).abs() < 1e-3, "sup = {sup}");
        assert!(f.f(1.0).abs() <= 1e-15);
        let rep = validate_profile(&p, &f, 1e-8).unwrap();
        assert!(rep.pass, "residual {}", rep.max_residual);
    }

    #[test]
    fn halfspace_rejects_degenerate_target() {
        let f = logistic();
        assert!(matches!(
            halfspace_profile_1d(&f, 0.0, 10.0),
            Err(SolverError::BadParams { .. })
        ));
        let zero = make_builtin_nonlinearity(BuiltinNonlinearity::Constant { c: 0.0 }).unwrap();
        assert!(halfspace_profile_1d(&zero, 0.0, 10.0).is_err());
    }

    #[test]
    fn halfspace_sine_heteroclinic() {
        let f = sine_pi();
        let p = halfspace_profile_1d(&f, 1.0, 20.0).unwrap();
        let rep = validate_profile(&p, &f, 1e-8).unwrap();
        assert!(rep.pass, "residual {}", rep.max_residual);
        assert!(p.u.windows(2).all(|w| w[1] >= w[0]));
    }

    fn logistic() -> Nonlinearity {
        use crate::model::{SignClass, Smoothness};
        use std::sync::Arc;
        Nonlinearity {
            name: "logistic".into(),
            eval: Arc::new(|t| t * (1.0 - t)),
            deriv1: Arc::new(|t| 1.0 - 2.0 * t),
            deriv2: Some(Arc::new(|_| -2.0)),
            deriv3: Some(Arc::new(|_| 0.0)),
            sign_class: SignClass::SignChanging,
            zeros: vec![0.0, 1.0],
            smoothness: Smoothness::C31,
            check_range: (-1.0, 2.0),
        }
    }

    fn sine_pi() -> Nonlinearity {
        use crate::model::{SignClass, Smoothness};
        use std::f64::consts::PI;
        use std::sync::Arc;
        Nonlinearity {
            name: "sin(pi t)".into(),
            eval: Arc::new(|t| (PI * t).sin()),
            deriv1: Arc::new(|t| PI * (PI * t).cos()),
            deriv2: Some(Arc::new(|t| -PI * PI * (PI * t).sin())),
            deriv3: Some(Arc::new(|t| -PI * PI * PI * (PI * t).cos())),
            sign_class: SignClass::SignChanging,
            zeros: vec![0.0, 1.0],
            smoothness: Smoothness::C31,
            check_range: (-1.0, 2.0),
        }
    }
}
