//! Tanh-sinh quadrature, Laplace peak windows, and the integral
//! representations Z(x), W(x), W^odd(x).
//!
//! The identities these implement are exact for every n, not asymptotic:
//! Z_n = 2^n Z(1/√n) (Hubbard-Stratonovich), O_n = 2^n W(1/√n) and
//! O_n^odd = 2^n W^odd(1/√n) (same, plus a Fourier factor enforcing the
//! balance constraint), which is what makes them oracles for the exact sums.

use crate::model::{self, ModelParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: u32,
    /// Initial truncation radius in units of the local Gaussian sigma.
    pub truncation_sigmas: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 12,
            truncation_sigmas: 14.0,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParams(
                "quadrature tolerances must be > 0".into(),
            ));
        }
        if self.max_subdivisions < 3 || self.max_subdivisions > 20 {
            return Err(Error::InvalidParams(
                "max_subdivisions must be in 3..=20".into(),
            ));
        }
        if !(self.truncation_sigmas > 0.0) {
            return Err(Error::InvalidParams("truncation_sigmas must be > 0".into()));
        }
        Ok(())
    }
}

const TAU_MAX: f64 = 4.0;

/// Tanh-sinh quadrature of `f` over (a, b), doubling the node density until
/// two consecutive levels agree to tolerance. Nodes cluster at the endpoints
/// but (up to f64 rounding at the extreme tail) never touch them; a
/// non-finite integrand value is treated as 0, which is the right limit for
/// the integrable endpoint behavior this rule exists to handle.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParams(format!(
            "tanh_sinh needs finite a < b, got [{a}, {b}]"
        )));
    }
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut eval = |tau: f64| -> f64 {
        let s = 0.5 * PI * tau.sinh();
        let node = s.tanh();
        let ch = s.cosh();
        let w = 0.5 * PI * tau.cosh() / (ch * ch);
        if w == 0.0 || !w.is_finite() {
            return 0.0;
        }
        let v = f(c + r * node);
        if v.is_finite() {
            v * w
        } else {
            0.0
        }
    };

    let mut h = TAU_MAX / 4.0;
    let mut sum = eval(0.0);
    let mut k = 1usize;
    loop {
        let tau = k as f64 * h;
        if tau > TAU_MAX {
            break;
        }
        sum += eval(tau) + eval(-tau);
        k += 1;
    }
    let mut integral = sum * h;
    let mut last_delta = f64::INFINITY;
    for level in 1..=cfg.max_subdivisions {
        h *= 0.5;
        let mut new_sum = 0.0;
        let mut k = 1usize;
        loop {
            let tau = k as f64 * h;
            if tau > TAU_MAX {
                break;
            }
            new_sum += eval(tau) + eval(-tau);
            k += 2;
        }
        let next = 0.5 * integral + new_sum * h;
        last_delta = (next - integral).abs();
        integral = next;
        if level >= 3 && last_delta <= cfg.abs_tol.max(cfg.rel_tol * integral.abs()) {
            return Ok(integral * r);
        }
    }
    Err(Error::Quadrature(format!(
        "tanh-sinh on [{a}, {b}] did not reach tolerance: value {}, last level delta {}",
        integral * r,
        last_delta * r
    )))
}

fn merge_intervals(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (lo, hi) in iv {
        match out.last_mut() {
            Some(prev) if lo <= prev.1 => prev.1 = prev.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// ln of ∫ exp(log_f) dt over a union of peak windows. `centers` holds
/// (peak location, initial half-width); each window doubles until exp(log_f)
/// at its edges is negligible against the peak, overlapping windows merge,
/// and each merged panel goes through [`tanh_sinh`] after max-shifting.
pub fn log_integrate_peaks<F: FnMut(f64) -> f64>(
    mut log_f: F,
    centers: &[(f64, f64)],
    cfg: &QuadConfig,
) -> Result<f64> {
    if centers.is_empty() {
        return Err(Error::InvalidParams(
            "log_integrate_peaks: no centers".into(),
        ));
    }
    let peak = centers
        .iter()
        .map(|&(c, _)| log_f(c))
        .fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(Error::Quadrature(
            "log-integrand is -inf at every peak center".into(),
        ));
    }
    let mut windows = Vec::with_capacity(centers.len());
    for &(c, w0) in centers {
        let w0 = w0.max(1e-12);
        let mut w = w0;
        let mut grown = 0;
        loop {
            // tail mass ~ e^{edge - peak} * w must stay below rel_tol of the
            // peak mass ~ w0 / truncation_sigmas
            let threshold = (cfg.rel_tol * w0 / (10.0 * cfg.truncation_sigmas * w)).ln() + peak;
            let edge = log_f(c - w).max(log_f(c + w));
            if edge <= threshold {
                break;
            }
            w *= 2.0;
            grown += 1;
            if grown > 60 {
                return Err(Error::Quadrature(format!(
                    "peak window at {c} grew past 2^60 x {w0} without the integrand decaying"
                )));
            }
        }
        windows.push((c - w, c + w));
    }
    let mut total = 0.0;
    for (lo, hi) in merge_intervals(windows) {
        total += tanh_sinh(|t| (log_f(t) - peak).exp(), lo, hi, cfg)?;
    }
    if !(total > 0.0) {
        return Err(Error::Quadrature(format!(
            "peak integral not positive: {total} (log scale {peak})"
        )));
    }
    Ok(peak + total.ln())
}

/// The profile maxima of φ as t-locations: outer fixed points only (the
/// middle of a 3-root set is the minimum between the bumps).
pub(crate) fn phi_maxima_t(p: &ModelParams, sol: &model::MeanFieldSolution) -> Vec<f64> {
    let c = p.coupling();
    let ha = p.h_abs();
    let roots = &sol.all_solutions;
    if roots.len() == 3 {
        vec![c * roots[0] + ha, c * roots[2] + ha]
    } else {
        vec![c * roots[0] + ha]
    }
}

/// Initial half-width for a peak window at t0: the local Gaussian sigma when
/// φ'' < 0 there, capped by the quartic scale that takes over at criticality.
fn initial_half_width(p: &ModelParams, t0: f64, x: f64, cfg: &QuadConfig) -> f64 {
    let sech2 = {
        let th = t0.tanh();
        1.0 - th * th
    };
    let ddphi = sech2 - 1.0 / (2.0 * p.d as f64 * p.beta);
    let w_quartic = 6.0 * x.sqrt();
    if ddphi < -1e-9 {
        (cfg.truncation_sigmas * x / (-ddphi).sqrt()).min(w_quartic)
    } else {
        w_quartic
    }
}

/// log Z(x) where Z_n = 2^n Z(1/√n): adaptive quadrature of
/// (2√(πdβ) x)^{-1} ∫ e^{φ(t)/x²} dt.
pub fn quad_z_of_x(p: &ModelParams, x: f64, cfg: &QuadConfig) -> Result<f64> {
    cfg.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParams(format!("x must be > 0, got {x}")));
    }
    if p.beta <= 0.0 {
        return Err(Error::ZeroBeta("quad_z_of_x integrates e^{phi/x^2}".into()));
    }
    let sol = model::solve_mean_field_default(p)?;
    let centers: Vec<(f64, f64)> = phi_maxima_t(p, &sol)
        .into_iter()
        .map(|t0| (t0, initial_half_width(p, t0, x, cfg)))
        .collect();
    let x2 = x * x;
    let ln_integral = log_integrate_peaks(
        |t| model::phi(p, t).expect("beta > 0 checked") / x2,
        &centers,
        cfg,
    )?;
    Ok(ln_integral - (2.0 * (PI * p.d as f64 * p.beta).sqrt() * x).ln())
}

/// ln of the inner u-integral ∫_{-π}^{π} e^{(ψ(t,u)-φ(t))/x²}·[ρ] du at fixed
/// t. The u-maximum sits at u = 0 for every t, where ψ(t,0) = φ(t), so the
/// shifted integrand peaks at 1.
fn inner_u_log(p: &ModelParams, t: f64, x: f64, odd: bool, cfg: &QuadConfig) -> Result<f64> {
    let x2 = x * x;
    let base = model::phi(p, t)?;
    let mut w = (cfg.truncation_sigmas * 2.0 * x * t.cosh()).min(PI);
    while w < PI {
        let edge = (model::psi(p, t, w)? - base) / x2;
        if edge < (cfg.rel_tol * cfg.abs_tol).ln() {
            break;
        }
        w = (2.0 * w).min(PI);
    }
    let val = tanh_sinh(
        |u| {
            let g = (model::psi(p, t, u).expect("beta > 0 checked") - base) / x2;
            let e = g.exp();
            if odd {
                e * model::rho(t, u).unwrap_or(0.0)
            } else {
                e
            }
        },
        -w,
        w,
        cfg,
    )?;
    if val > 0.0 {
        Ok(val.ln())
    } else {
        // far tilts can round the signed odd integrand to zero; the outer
        // integral treats this as a negligible contribution
        Ok(f64::NEG_INFINITY)
    }
}

fn quad_w_impl(p: &ModelParams, x: f64, odd: bool, cfg: &QuadConfig) -> Result<f64> {
    cfg.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParams(format!("x must be > 0, got {x}")));
    }
    if p.beta <= 0.0 {
        return Err(Error::ZeroBeta("quad_w integrates e^{psi/x^2}".into()));
    }
    let sol = model::solve_mean_field_default(p)?;
    let centers: Vec<(f64, f64)> = phi_maxima_t(p, &sol)
        .into_iter()
        .map(|t0| (t0, initial_half_width(p, t0, x, cfg)))
        .collect();
    let x2 = x * x;
    let inner_err: RefCell<Option<Error>> = RefCell::new(None);
    let ln_outer = log_integrate_peaks(
        |t| {
            if inner_err.borrow().is_some() {
                return f64::NEG_INFINITY;
            }
            match inner_u_log(p, t, x, odd, cfg) {
                Ok(lj) => model::phi(p, t).expect("beta > 0 checked") / x2 + lj,
                Err(e) => {
                    *inner_err.borrow_mut() = Some(e);
                    f64::NEG_INFINITY
                }
            }
        },
        &centers,
        cfg,
    );
    if let Some(e) = inner_err.into_inner() {
        return Err(e);
    }
    let ln_outer = ln_outer?;
    let pref = (2.0 * PI).powf(1.5) * (2.0 * p.d as f64 * p.beta).sqrt() * x;
    Ok(ln_outer - pref.ln())
}

/// log W(x) where O_n = 2^n W(1/√n) for even n.
pub fn quad_w(p: &ModelParams, x: f64, cfg: &QuadConfig) -> Result<f64> {
    quad_w_impl(p, x, false, cfg)
}

/// log W^odd(x) where O_n^odd = 2^n W^odd(1/√n) for odd n; the integrand
/// carries the parity factor ρ(t, u).
pub fn quad_w_odd(p: &ModelParams, x: f64, cfg: &QuadConfig) -> Result<f64> {
    quad_w_impl(p, x, true, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(d: u32, beta: f64, h: f64) -> ModelParams {
        ModelParams::new(d, beta, h).unwrap()
    }

    #[test]
    fn tanh_sinh_smooth_and_singular() {
        let cfg = QuadConfig::default();
        let v = tanh_sinh(|x| x.exp(), 0.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(v, std::f64::consts::E - 1.0, max_relative = 1e-12);
        // endpoint singularity 1/sqrt(x): nodes cannot represent x closer to 0
        // than one ulp of the interval, which floors the error near 1e-8
        let v = tanh_sinh(|x| 1.0 / x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 2e-8);
        // sqrt(1-x^2): half disk
        let v = tanh_sinh(|x| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(v, 0.5 * PI, max_relative = 1e-9);
        // full Gaussian mass inside a wide window
        let v = tanh_sinh(|x| (-x * x).exp(), -20.0, 20.0, &cfg).unwrap();
        assert_relative_eq!(v, PI.sqrt(), max_relative = 1e-10);
        assert!(tanh_sinh(|x| x, 1.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn peak_integral_gaussians() {
        let cfg = QuadConfig::default();
        let ln_v = log_integrate_peaks(|t: f64| -0.5 * (t - 3.0) * (t - 3.0), &[(3.0, 1.0)], &cfg)
            .unwrap();
        assert_relative_eq!(ln_v, (2.0 * PI).sqrt().ln(), max_relative = 1e-10);
        // two well-separated bumps, windows must not miss either
        let ln_v = log_integrate_peaks(
            |t: f64| {
                let a = (-0.5 * (t - 5.0) * (t - 5.0)).exp();
                let b = (-0.5 * (t + 5.0) * (t + 5.0)).exp();
                (a + b).ln()
            },
            &[(-5.0, 1.0), (5.0, 1.0)],
            &cfg,
        )
        .unwrap();
        assert_relative_eq!(ln_v, (2.0 * (2.0 * PI).sqrt()).ln(), max_relative = 1e-9);
        // a shifted peak level must not break anything (scale invariance)
        let ln_v = log_integrate_peaks(|t: f64| 300.0 - 0.5 * t * t, &[(0.0, 1.0)], &cfg).unwrap();
        assert_relative_eq!(ln_v, 300.0 + (2.0 * PI).sqrt().ln(), max_relative = 1e-10);
    }

    #[test]
    fn z_identity_tiny_n() {
        // 2^2 Z(1/sqrt 2) = 2 + 2 e^{1/2}; the HS identity is exact at n = 2
        let cfg = QuadConfig::default();
        let lnz = quad_z_of_x(&p(1, 0.25, 0.0), 1.0 / 2.0f64.sqrt(), &cfg).unwrap();
        let target = 1.667_224_164_740_051_99; // ln(2 + 2 e^{1/2})
        assert_relative_eq!(
            lnz + 2.0 * std::f64::consts::LN_2,
            target,
            max_relative = 1e-9
        );
    }

    #[test]
    fn z_identity_all_regimes_small_n() {
        let cfg = QuadConfig::default();
        for (pars, n) in [
            (p(1, 0.3, 0.0), 5u64),
            (p(1, 0.5, 0.0), 6),
            (p(1, 1.0, 0.0), 6),
            (p(1, 0.3, 0.4), 7),
            (p(2, 0.4, -0.2), 4),
        ] {
            let x = 1.0 / (n as f64).sqrt();
            let lnz = quad_z_of_x(&pars, x, &cfg).unwrap();
            let exact = crate::exact::log_partition(&pars, n).unwrap().log_value;
            assert_relative_eq!(
                lnz + n as f64 * std::f64::consts::LN_2,
                exact,
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn w_identity_small_n() {
        let cfg = QuadConfig::default();
        for (pars, n) in [
            (p(1, 0.3, 0.0), 8u64),
            (p(1, 0.5, 0.0), 6),
            (p(1, 1.0, 0.0), 10),
            (p(1, 0.3, 0.4), 8),
        ] {
            let x = 1.0 / (n as f64).sqrt();
            let lnw = quad_w(&pars, x, &cfg).unwrap();
            let exact = crate::exact::log_o_even(&pars, n).unwrap().log_value;
            assert_relative_eq!(
                lnw + n as f64 * std::f64::consts::LN_2,
                exact,
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn w_odd_identity_small_n() {
        // h > 0 cases pin the orientation of the parity factor rho
        let cfg = QuadConfig::default();
        for (pars, n) in [
            (p(1, 0.3, 0.0), 9u64),
            (p(1, 0.4, 0.3), 7),
            (p(1, 1.0, 0.0), 9),
            (p(1, 0.5, 0.0), 11),
        ] {
            let x = 1.0 / (n as f64).sqrt();
            let lnw = quad_w_odd(&pars, x, &cfg).unwrap();
            let exact = crate::exact::log_o_odd(&pars, n).unwrap().log_value;
            assert_relative_eq!(
                lnw + n as f64 * std::f64::consts::LN_2,
                exact,
                max_relative = 1e-7
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = QuadConfig::default();
        assert!(quad_z_of_x(&p(1, 0.0, 0.0), 0.1, &cfg).is_err());
        assert!(quad_z_of_x(&p(1, 0.3, 0.0), -1.0, &cfg).is_err());
        let bad = QuadConfig {
            abs_tol: -1.0,
            ..QuadConfig::default()
        };
        assert!(quad_z_of_x(&p(1, 0.3, 0.0), 0.1, &bad).is_err());
    }
}
