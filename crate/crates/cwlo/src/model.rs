//! Model parameters, regime classification, profile functions, and the
//! mean-field fixed point.
//!
//! The measure P(eps = sigma) ∝ exp{(d beta / n)(sum sigma_j)^2 + h sum sigma_j}
//! is invariant under (sigma, h) -> (-sigma, -h), so every function here
//! evaluates at |h|; outputs are exactly h <-> -h symmetric by construction.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default tolerance for regime classification: |h| above it means Field,
/// |beta - beta_c| within it (relative to beta_c) means Critical.
pub const REGIME_TOL: f64 = 1e-12;

/// Interaction parameters. `d` is the inverse-temperature carrier the
/// coupling scales with (beta_c = 1/(2d)), `beta >= 0` the inverse
/// temperature, `h` the external field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: u32,
    pub beta: f64,
    pub h: f64,
}

/// Which asymptotic regime governs the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    HighTemp,
    Critical,
    LowTemp,
    Field,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::HighTemp => "high_temp",
            Regime::Critical => "critical",
            Regime::LowTemp => "low_temp",
            Regime::Field => "field",
        };
        f.write_str(s)
    }
}

impl ModelParams {
    pub fn new(d: u32, beta: f64, h: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParams("d must be >= 1".into()));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParams(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        if !h.is_finite() {
            return Err(Error::InvalidParams(format!("h must be finite, got {h}")));
        }
        Ok(Self { d, beta, h })
    }

    /// beta_c = 1/(2d), exact in f64 for any d.
    pub fn beta_critical(&self) -> f64 {
        1.0 / (2.0 * self.d as f64)
    }

    /// 2 d beta = beta / beta_c, the coupling the fixed point sees.
    pub fn coupling(&self) -> f64 {
        2.0 * self.d as f64 * self.beta
    }

    pub fn h_abs(&self) -> f64 {
        self.h.abs()
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self, REGIME_TOL)
    }

    pub(crate) fn require_positive_beta(&self, who: &str) -> Result<()> {
        if self.beta > 0.0 {
            Ok(())
        } else {
            Err(Error::ZeroBeta(format!("{who} divides by d*beta")))
        }
    }
}

/// Field if |h| > tol, otherwise Critical if |beta - beta_c| <= tol * beta_c,
/// otherwise HighTemp/LowTemp by the sign of beta - beta_c.
pub fn classify_regime(p: &ModelParams, tol: f64) -> Regime {
    if p.h.abs() > tol {
        return Regime::Field;
    }
    let bc = p.beta_critical();
    if (p.beta - bc).abs() <= tol * bc {
        Regime::Critical
    } else if p.beta < bc {
        Regime::HighTemp
    } else {
        Regime::LowTemp
    }
}

/// The Laplace profile phi(t) = ln cosh t - (t - |h|)^2 / (4 d beta).
/// Z equals 2^n times the Gaussian-smoothed integral of e^{n phi}.
pub fn phi(p: &ModelParams, t: f64) -> Result<f64> {
    p.require_positive_beta("phi")?;
    let dt = t - p.h_abs();
    Ok(crate::special::ln_cosh(t) - dt * dt / (4.0 * p.d as f64 * p.beta))
}

/// The two-variable profile behind the balance sum:
/// psi(t, u) = (1/2)[ln(cosh(2t)/2 + cos(u)/2) - (t - |h|)^2 / (2 d beta)].
/// At the singular node (t, u) = (0, ±pi) the log argument vanishes and the
/// function is -inf (the integrand it feeds vanishes there).
pub fn psi(p: &ModelParams, t: f64, u: f64) -> Result<f64> {
    p.require_positive_beta("psi")?;
    // cosh(2t)/2 + cos(u)/2 = (e^{2|t|}/4) (1 + e^{-4|t|} + 2 cos(u) e^{-2|t|})
    let a = 2.0 * t.abs();
    let w = (-2.0 * a).exp() + 2.0 * u.cos() * (-a).exp();
    let ln_c = if w <= -1.0 {
        f64::NEG_INFINITY
    } else {
        a - (4.0f64).ln() + w.ln_1p()
    };
    let dt = t - p.h_abs();
    Ok(0.5 * (ln_c - dt * dt / (2.0 * p.d as f64 * p.beta)))
}

/// rho(t, u) = (e^{-t} + e^t cos u) / sqrt(2 cosh 2t + 2 cos u), the parity
/// factor of the odd balance integral. Written as s/hypot(s, c) with the
/// identity 2cosh2t + 2cos u = (e^{-t} + e^t cos u)^2 + (e^t sin u)^2, so
/// rho(t, 0) = 1 exactly and |rho| <= 1 always. The only genuine singularity
/// is (t, u) = (0, ±pi) where numerator and denominator both vanish.
pub fn rho(t: f64, u: f64) -> Result<f64> {
    let (s, c) = if t >= 0.0 {
        // scaled by e^{-t}
        ((-2.0 * t).exp() + u.cos(), u.sin())
    } else {
        // scaled by e^{t}
        (1.0 + (2.0 * t).exp() * u.cos(), (2.0 * t).exp() * u.sin())
    };
    if s == 0.0 && c == 0.0 {
        return Err(Error::Domain(format!(
            "rho singular at (t, u) = ({t}, {u})"
        )));
    }
    Ok(s / s.hypot(c))
}

/// Binary entropy density s(m) = -((1+m)/2) ln((1+m)/2) - ((1-m)/2) ln((1-m)/2),
/// with s(±1) = 0.
pub fn entropy_density(m: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!(
            "entropy_density needs |m| <= 1, got {m}"
        )));
    }
    fn xlnx(x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            x * x.ln()
        }
    }
    Ok(-xlnx(0.5 * (1.0 + m)) - xlnx(0.5 * (1.0 - m)))
}

/// Mean-field free energy f(m) = -d beta m^2 - |h| m - s(m) on [-1, 1].
/// (|h| keeps the h-symmetry; the minimizer is z_star and
/// -f(z_star) = ln 2 + phi(t_star).)
pub fn free_energy(p: &ModelParams, m: f64) -> Result<f64> {
    let s = entropy_density(m)?;
    Ok(-(p.d as f64) * p.beta * m * m - p.h_abs() * m - s)
}

/// The mean-field fixed point(s) of z = tanh(2 d beta z + |h|).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanFieldSolution {
    /// Largest solution; in [0, 1).
    pub z_star: f64,
    /// Tilt t_star = 2 d beta z_star + |h|.
    pub t_star: f64,
    /// tanh(2 d beta z_star + |h|) - z_star at the returned root.
    pub residual: f64,
    /// All solutions in [-1, 1], ascending (1 to 3 of them).
    pub all_solutions: Vec<f64>,
}

fn fixed_point_gap(coupling: f64, h_abs: f64, z: f64) -> f64 {
    (coupling * z + h_abs).tanh() - z
}

/// Solve z = tanh(2 d beta z + |h|) by a 2048-point sign scan on [-1, 1],
/// bisection to `tol` (1e-14 default via [`solve_mean_field_default`]), and a
/// Newton polish. With h = 0 and beta <= beta_c the unique root 0 is returned
/// exactly; with h = 0, beta > beta_c the root set {-z, 0, z} is mirrored
/// exactly.
pub fn solve_mean_field(p: &ModelParams, tol: f64) -> Result<MeanFieldSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let c = p.coupling();
    let ha = p.h_abs();
    if ha == 0.0 && c <= 1.0 {
        return Ok(MeanFieldSolution {
            z_star: 0.0,
            t_star: 0.0,
            residual: 0.0,
            all_solutions: vec![0.0],
        });
    }

    const GRID: usize = 2048;
    let g = |z: f64| fixed_point_gap(c, ha, z);
    let mut roots: Vec<f64> = Vec::new();
    let mut z_prev = -1.0;
    let mut g_prev = g(z_prev);
    for i in 1..GRID {
        let z = -1.0 + 2.0 * i as f64 / (GRID - 1) as f64;
        let gz = g(z);
        if g_prev == 0.0 {
            roots.push(z_prev);
        } else if g_prev * gz < 0.0 {
            roots.push(refine_root(&g, c, ha, z_prev, z, tol));
        }
        z_prev = z;
        g_prev = gz;
    }
    if g_prev == 0.0 {
        roots.push(z_prev);
    }
    if roots.is_empty() {
        return Err(Error::Solver(format!(
            "no fixed point found for coupling {c}, |h| {ha}"
        )));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);

    if ha == 0.0 {
        // exact symmetry: rebuild the set from the positive root
        let zp = roots.last().copied().unwrap().abs();
        roots = if c > 1.0 && zp > 1e-8 {
            vec![-zp, 0.0, zp]
        } else {
            vec![0.0]
        };
    }

    let z_star = *roots.last().unwrap();
    Ok(MeanFieldSolution {
        z_star,
        t_star: c * z_star + ha,
        residual: g(z_star),
        all_solutions: roots,
    })
}

/// [`solve_mean_field`] at the documented default tolerance 1e-14.
pub fn solve_mean_field_default(p: &ModelParams) -> Result<MeanFieldSolution> {
    solve_mean_field(p, 1e-14)
}

fn refine_root(
    g: &impl Fn(f64) -> f64,
    c: f64,
    ha: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    let mut glo = g(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if glo * gm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    // Newton polish
    let mut z = 0.5 * (lo + hi);
    for _ in 0..4 {
        let th = (c * z + ha).tanh();
        let gp = c * (1.0 - th * th) - 1.0;
        if gp.abs() < 1e-300 {
            break;
        }
        let step = (th - z) / gp;
        let z_new = z - step;
        if (-1.0..=1.0).contains(&z_new) {
            z = z_new;
        } else {
            break;
        }
    }
    z
}

/// Number of mean-field solutions at the given parameters (grid-scan count).
pub fn solution_count(p: &ModelParams) -> Result<usize> {
    Ok(solve_mean_field_default(p)?.all_solutions.len())
}

/// Locate the field-regime threshold beta_0(d, h): for h != 0 the fixed-point
/// set has one element for beta < beta_0 and three for beta > beta_0.
/// Bisection on the solution count; the count comes from the 2048-point grid
/// scan, so resolution near the tangency limits the answer to ~1e-6 absolute
/// regardless of `tol`.
pub fn locate_beta0(d: u32, h: f64, tol: f64) -> Result<f64> {
    if h == 0.0 || !h.is_finite() {
        return Err(Error::InvalidParams(
            "beta_0 is defined for h != 0 only".into(),
        ));
    }
    let bc = 1.0 / (2.0 * d as f64);
    let mut lo = bc;
    if solution_count(&ModelParams::new(d, lo, h)?)? >= 2 {
        return Err(Error::Solver("count already >= 2 at beta_c".into()));
    }
    let mut hi = 2.0 * bc;
    let mut tries = 0;
    while solution_count(&ModelParams::new(d, hi, h)?)? < 2 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::Solver(format!(
                "no 3-solution region found below beta = {hi}"
            )));
        }
    }
    while hi - lo > tol.max(1e-13) {
        let mid = 0.5 * (lo + hi);
        if solution_count(&ModelParams::new(d, mid, h)?)? >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(d: u32, beta: f64, h: f64) -> ModelParams {
        ModelParams::new(d, beta, h).unwrap()
    }

    #[test]
    fn beta_critical_values() {
        assert_eq!(p(1, 0.1, 0.0).beta_critical(), 0.5);
        assert_eq!(p(2, 0.1, 0.0).beta_critical(), 0.25);
        assert_eq!(p(4, 0.1, 0.0).beta_critical(), 0.125);
    }

    #[test]
    fn param_validation() {
        assert!(ModelParams::new(0, 0.3, 0.0).is_err());
        assert!(ModelParams::new(1, -0.1, 0.0).is_err());
        assert!(ModelParams::new(1, f64::NAN, 0.0).is_err());
        assert!(ModelParams::new(1, 0.3, f64::INFINITY).is_err());
    }

    #[test]
    fn regime_classification() {
        assert_eq!(p(1, 0.3, 0.0).regime(), Regime::HighTemp);
        assert_eq!(p(1, 0.5, 0.0).regime(), Regime::Critical);
        assert_eq!(p(1, 0.5000000001, 0.0).regime(), Regime::LowTemp);
        assert_eq!(p(1, 0.2, 1e-9).regime(), Regime::Field);
        assert_eq!(p(2, 0.25 + 1e-16, 0.0).regime(), Regime::Critical);
        assert_eq!(p(1, 0.0, 0.0).regime(), Regime::HighTemp);
    }

    #[test]
    fn phi_reference_values() {
        // ln cosh 1 - 1 at (d=1, beta=0.25, h=0); mpmath: -0.56621916951697281297
        assert_relative_eq!(
            phi(&p(1, 0.25, 0.0), 1.0).unwrap(),
            -0.566_219_169_516_972_8,
            max_relative = 1e-14
        );
        assert_eq!(phi(&p(1, 0.3, 0.0), 0.0).unwrap(), 0.0);
        assert!(matches!(
            phi(&p(1, 0.0, 0.0), 1.0),
            Err(crate::Error::ZeroBeta(_))
        ));
        // h enters as |h|
        assert_eq!(
            phi(&p(1, 0.3, 0.4), 0.7).unwrap(),
            phi(&p(1, 0.3, -0.4), 0.7).unwrap()
        );
    }

    #[test]
    fn psi_reference_values() {
        // psi(0, pi/2) = (1/2) ln(1/2)
        assert_relative_eq!(
            psi(&p(1, 0.25, 0.0), 0.0, std::f64::consts::FRAC_PI_2).unwrap(),
            0.5 * 0.5f64.ln(),
            max_relative = 1e-14
        );
        // singular node
        assert_eq!(
            psi(&p(1, 0.25, 0.0), 0.0, std::f64::consts::PI).unwrap(),
            f64::NEG_INFINITY
        );
        // psi(t, 0) = phi(t)
        for &t in &[0.0, 0.17, -1.3, 2.9, 11.0] {
            let a = psi(&p(2, 0.2, 0.3), t, 0.0).unwrap();
            let b = phi(&p(2, 0.2, 0.3), t).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-13, epsilon = 1e-14);
        }
    }

    #[test]
    fn psi_dominated_by_phi() {
        let pars = p(1, 0.4, 0.2);
        for i in 0..60 {
            let t = -3.0 + 0.1 * i as f64;
            let f = phi(&pars, t).unwrap();
            for j in 1..30 {
                let u = -3.1 + 0.21 * j as f64;
                let g = psi(&pars, t, u).unwrap();
                assert!(g <= f + 1e-13, "psi({t},{u}) = {g} > phi = {f}");
            }
        }
    }

    #[test]
    fn rho_properties() {
        assert_eq!(rho(0.7, 0.0).unwrap(), 1.0);
        assert_eq!(rho(-12.3, 0.0).unwrap(), 1.0);
        assert_eq!(rho(400.0, 0.0).unwrap(), 1.0);
        for i in 0..40 {
            let t = -4.0 + 0.2 * i as f64;
            for j in 0..40 {
                let u = -3.1 + 0.155 * j as f64;
                let r = rho(t, u).unwrap();
                assert!(
                    (-1.0 - 1e-15..=1.0 + 1e-15).contains(&r),
                    "rho({t},{u}) = {r}"
                );
            }
        }
        // near the singular node the limit is 0 and must not produce NaN
        let r = rho(0.0, std::f64::consts::PI).unwrap();
        assert!(r.abs() < 1e-7, "rho at node limit: {r}");
    }

    #[test]
    fn entropy_and_free_energy() {
        assert_eq!(entropy_density(1.0).unwrap(), 0.0);
        assert_eq!(entropy_density(-1.0).unwrap(), 0.0);
        assert_relative_eq!(
            entropy_density(0.0).unwrap(),
            std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        // s(0.5), mpmath 0.56233514461880835029
        assert_relative_eq!(
            entropy_density(0.5).unwrap(),
            0.562_335_144_618_808_35,
            max_relative = 1e-14
        );
        assert!(entropy_density(1.0000001).is_err());
        // f(0.5) at (1, 1, 0) = -0.25 - s(0.5)
        assert_relative_eq!(
            free_energy(&p(1, 1.0, 0.0), 0.5).unwrap(),
            -0.25 - 0.562_335_144_618_808_35,
            max_relative = 1e-14
        );
    }

    #[test]
    fn solver_subcritical_is_exactly_zero() {
        for pars in [p(1, 0.3, 0.0), p(1, 0.5, 0.0), p(3, 0.05, 0.0)] {
            let s = solve_mean_field_default(&pars).unwrap();
            assert_eq!(s.z_star, 0.0);
            assert_eq!(s.t_star, 0.0);
            assert_eq!(s.all_solutions, vec![0.0]);
        }
    }

    #[test]
    fn solver_low_temp() {
        // z = tanh(2z); mpmath root 0.95750402407726874068
        let s = solve_mean_field_default(&p(1, 1.0, 0.0)).unwrap();
        assert_relative_eq!(s.z_star, 0.957_504_024_077_268_7, max_relative = 1e-12);
        assert_relative_eq!(s.t_star, 2.0 * s.z_star, max_relative = 1e-15);
        assert!(s.residual.abs() < 1e-12);
        assert_eq!(s.all_solutions.len(), 3);
        assert_eq!(s.all_solutions[0], -s.all_solutions[2]);
        assert_eq!(s.all_solutions[1], 0.0);
        // independent bisection oracle on [0.5, 1]
        let (mut lo, mut hi) = (0.5f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if (2.0 * mid).tanh() - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((s.z_star - 0.5 * (lo + hi)).abs() < 1e-13);
    }

    #[test]
    fn solver_field() {
        // z = tanh(0.6 z + 0.2); mpmath 0.42696476456625607196
        let s = solve_mean_field_default(&p(1, 0.3, 0.2)).unwrap();
        assert_relative_eq!(s.z_star, 0.426_964_764_566_256_07, max_relative = 1e-12);
        assert_eq!(s.all_solutions.len(), 1);
        // h-symmetry of the whole solution object
        let sm = solve_mean_field_default(&p(1, 0.3, -0.2)).unwrap();
        assert_eq!(s, sm);
        // beta = 0 pins z = tanh |h|
        let s0 = solve_mean_field_default(&p(1, 0.0, 0.7)).unwrap();
        assert_relative_eq!(s0.z_star, 0.7f64.tanh(), max_relative = 1e-12);
        assert_relative_eq!(s0.t_star, 0.7, max_relative = 1e-12);
    }

    #[test]
    fn minus_free_energy_equals_ln2_plus_phi() {
        for pars in [
            p(1, 1.0, 0.0),
            p(1, 0.75, 0.0),
            p(1, 0.3, 0.2),
            p(2, 0.4, 0.55),
            p(1, 0.3, 0.0),
            p(3, 0.9, 1.1),
        ] {
            let s = solve_mean_field_default(&pars).unwrap();
            let lhs = -free_energy(&pars, s.z_star).unwrap();
            let rhs = std::f64::consts::LN_2 + phi(&pars, s.t_star).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-12,
                "{pars:?}: -f = {lhs}, ln2 + phi = {rhs}"
            );
        }
    }

    #[test]
    fn phi_maximized_at_t_star() {
        for pars in [
            p(1, 1.0, 0.0),
            p(1, 0.3, 0.2),
            p(1, 0.3, 0.0),
            p(2, 0.5, 0.9),
        ] {
            let s = solve_mean_field_default(&pars).unwrap();
            let fmax = phi(&pars, s.t_star).unwrap();
            for i in 0..400 {
                let t = -10.0 + 0.05 * i as f64;
                assert!(phi(&pars, t).unwrap() <= fmax + 1e-13);
            }
        }
    }

    #[test]
    fn field_threshold() {
        // verified independently: tangency root of tanh(z/(1-z^2)+h) = z gives
        // beta_0(1, 0.2) = 0.74343559615756206631
        let b0 = locate_beta0(1, 0.2, 1e-9).unwrap();
        assert!((b0 - 0.743_435_596_157_562).abs() < 2e-6, "beta_0 = {b0}");
        let lo = ModelParams::new(1, b0 - 1e-4, 0.2).unwrap();
        let hi = ModelParams::new(1, b0 + 1e-4, 0.2).unwrap();
        assert_eq!(solution_count(&lo).unwrap(), 1);
        assert_eq!(solution_count(&hi).unwrap(), 3);
        assert!(locate_beta0(1, 0.0, 1e-9).is_err());
    }
}
