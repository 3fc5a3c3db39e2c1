//! Asymptotic expansion ladders in powers of n.
//!
//! Every ladder is produced by Laplace / saddle analysis of the exact
//! integral representations: Taylor data of the phase at its maximum feeds a
//! Gaussian-moment composition, giving closed-form coefficients that the
//! exact sums then confirm term by term. Noncritical ladders step by n^{-1};
//! at the critical point the quartic saddle makes quarter powers appear and
//! the step shrinks to n^{-1/2}.

mod bipoly;
mod rational;
mod taylor;

pub use bipoly::BiSeries;
pub use rational::Power;
pub use taylor::{taylor_phi_at, taylor_psi_at, UniSeries, PHI_ORDER_MAX, PSI_DEGREE_MAX};

use crate::model::{self, ModelParams, Regime};
use crate::special::{double_factorial_odd, gamma, ln_cosh};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Highest order index accepted by [`e_coeffs`]; keeps the Taylor data the
/// critical branch needs (2 * order + 4) within [`PHI_ORDER_MAX`].
pub const E_ORDER_MAX: usize = 4;
/// Highest order index accepted by [`gamma_coeffs`]; the critical branch
/// needs psi through total degree 2 * order + 4, within [`PSI_DEGREE_MAX`].
pub const GAMMA_ORDER_MAX: usize = 2;
/// Highest order index accepted by [`qn_coeffs`].
pub const QN_ORDER_MAX: usize = 2;

/// Which quantity a ladder expands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionKind {
    /// Z_n 2^{-n} e^{-n phi*}
    Z,
    /// O_n 2^{-n} e^{-n phi*}
    O,
    /// Q_n itself (the prefactor cancels in the ratio)
    Qn,
    /// Q_n^+ leading term
    QnPlus,
}

/// A finished expansion: value(n) ~ e^{n prefactor_log} * sum_i values[i] *
/// n^{powers[i]}, with `powers` strictly decreasing. For the probability
/// kinds `prefactor_log` is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoeffs {
    pub regime: Regime,
    pub kind: ExpansionKind,
    pub prefactor_log: f64,
    pub powers: Vec<Power>,
    pub values: Vec<f64>,
}

impl ExpansionCoeffs {
    /// Partial ladder sum through order index `upto` (inclusive).
    pub fn ladder_sum_upto(&self, n: f64, upto: usize) -> f64 {
        let last = upto.min(self.values.len().saturating_sub(1));
        (0..=last)
            .map(|i| self.values[i] * n.powf(self.powers[i].as_f64()))
            .sum()
    }

    /// ln of the predicted value at n, using terms through index `upto`.
    pub fn predict_log(&self, n: f64, upto: usize) -> f64 {
        n * self.prefactor_log + self.ladder_sum_upto(n, upto).ln()
    }

    /// Predicted value at n using terms through index `upto`; for the Z and O
    /// kinds this carries the exponential prefactor and can overflow for
    /// large n — prefer [`Self::predict_log`] there.
    pub fn predict(&self, n: f64, upto: usize) -> f64 {
        if self.prefactor_log == 0.0 {
            self.ladder_sum_upto(n, upto)
        } else {
            self.predict_log(n, upto).exp()
        }
    }

    /// Highest usable order index.
    pub fn max_order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Visit every ordered tuple (m_1, ..., m_k) with m_i >= 1 and sum m_i =
/// `total`; `leaf` receives the tuple length k and the product of
/// `value(m_i)`. Tuples whose product carries a zero factor still visit the
/// leaf (the zero term is harmless), so `value` may return exact zeros for
/// vanishing Taylor coefficients.
fn each_composition(total: usize, value: &dyn Fn(usize) -> f64, leaf: &mut dyn FnMut(usize, f64)) {
    fn go(
        rem: usize,
        k: usize,
        prod: f64,
        value: &dyn Fn(usize) -> f64,
        leaf: &mut dyn FnMut(usize, f64),
    ) {
        if rem == 0 {
            leaf(k, prod);
            return;
        }
        for m in 1..=rem {
            go(rem - m, k + 1, prod * value(m), value, leaf);
        }
    }
    if total > 0 {
        go(total, 0, 1.0, value, leaf);
    }
}

/// Visit every ordered tuple of `atoms` entries whose `step` values sum to
/// `budget`; `leaf` receives the tuple length, the summed powers of each
/// variable, and the product of the atom coefficients.
fn each_atom_tuple(
    budget: usize,
    atoms: &[(usize, usize, f64)],
    step: &dyn Fn(usize, usize) -> usize,
    leaf: &mut dyn FnMut(usize, usize, usize, f64),
) {
    #[allow(clippy::too_many_arguments)] // local recursion carrying its whole state
    fn go(
        rem: usize,
        k: usize,
        sa: usize,
        sb: usize,
        prod: f64,
        atoms: &[(usize, usize, f64)],
        step: &dyn Fn(usize, usize) -> usize,
        leaf: &mut dyn FnMut(usize, usize, usize, f64),
    ) {
        if rem == 0 {
            if k > 0 {
                leaf(k, sa, sb, prod);
            }
            return;
        }
        for &(a, b, v) in atoms {
            let s = step(a, b);
            if s <= rem {
                go(rem - s, k + 1, sa + a, sb + b, prod * v, atoms, step, leaf);
            }
        }
    }
    go(budget, 0, 0, 0, 1.0, atoms, step, leaf);
}

/// int_R s^j exp(-s^4/12) ds for even j.
fn quartic_moment(j: u32) -> f64 {
    let e = (f64::from(j) + 1.0) / 4.0;
    0.5 * 12f64.powf(e) * gamma(e)
}

/// int_R v^j exp(-v^2/8) dv for even j.
fn gauss8_moment(j: u32) -> f64 {
    2f64.powi(j as i32 + 1) * double_factorial_odd(j / 2) * (2.0 * PI).sqrt()
}

/// Relative corrections 1, e_1/e_0, ... for a quadratic saddle: expanding
/// exp(n sum_{m>=3} a_m tau^m) against the Gaussian exp(n a_2 tau^2) and
/// taking moments gives, per ordered tuple (m_1..m_k) with sum m_i = 2p,
/// prod a_{m_i+2} (2p+2k-1)!! / (k! (2|a_2|)^{p+k}).
fn e_ladder_noncritical(phi: &UniSeries, m_max: usize) -> Vec<f64> {
    let a2 = phi.coeffs[2];
    let mut out = vec![1.0];
    for p in 1..=m_max {
        let mut acc = 0.0;
        each_composition(2 * p, &|m| phi.coeffs[m + 2], &mut |k, prod| {
            acc += prod * double_factorial_odd((p + k) as u32)
                / ((2.0 * a2.abs()).powi((p + k) as i32) * factorial(k));
        });
        out.push(acc);
    }
    out
}

/// Absolute coefficients for the quartic saddle at the critical point, where
/// exp(n phi) rescales to exp(-s^4/12) times corrections from a_6, a_8, ...
/// (all d-independent). The tuple (m_1..m_k), sum m_i = p, pulls the moment
/// of s^{2p+4k}.
fn e_ladder_critical(phi: &UniSeries, m_max: usize) -> Vec<f64> {
    debug_assert!(phi.coeffs[2].abs() < 1e-12 && (phi.coeffs[4] + 1.0 / 12.0).abs() < 1e-12);
    let pref = 1.0 / (2.0 * PI).sqrt();
    let mut out = vec![pref * quartic_moment(0)];
    for p in 1..=m_max {
        let mut acc = 0.0;
        each_composition(p, &|m| phi.coeffs[2 * m + 4], &mut |k, prod| {
            acc += prod * quartic_moment((2 * p + 4 * k) as u32) / factorial(k);
        });
        out.push(pref * acc);
    }
    out
}

/// Relative corrections for the two-variable saddle of psi: atoms are the
/// coefficients alpha_{ab} with a + b >= 3 (b even; odd-u coefficients vanish
/// identically), and an ordered tuple contributes
/// prod alpha (P-1)!! (Q-1)!! / (k! (2|alpha_20|)^{P/2} (2|alpha_02|)^{Q/2})
/// when P = sum a_i is even (odd-P moments vanish), with Q = sum b_i.
fn gamma_ladder_noncritical(psi: &BiSeries, m_max: usize) -> Vec<f64> {
    let a20 = psi.get(2, 0);
    let a02 = psi.get(0, 2);
    let mut atoms = Vec::new();
    for a in 0..=psi.deg() {
        for b in (0..=psi.deg() - a).step_by(2) {
            if a + b >= 3 && psi.get(a, b) != 0.0 {
                atoms.push((a, b, psi.get(a, b)));
            }
        }
    }
    let mut out = vec![1.0];
    for p in 1..=m_max {
        let mut acc = 0.0;
        each_atom_tuple(2 * p, &atoms, &|a, b| a + b - 2, &mut |k, sa, sb, prod| {
            if sa % 2 == 0 {
                acc += prod
                    * double_factorial_odd((sa / 2) as u32)
                    * double_factorial_odd((sb / 2) as u32)
                    / ((2.0 * a20.abs()).powi((sa / 2) as i32)
                        * (2.0 * a02.abs()).powi((sb / 2) as i32)
                        * factorial(k));
            }
        });
        out.push(acc);
    }
    out
}

/// Absolute coefficients for the critical two-variable saddle: tau scales as
/// n^{-1/4} against exp(-s^4/12), u as n^{-1/2} against exp(-v^2/8), so the
/// perturbation atoms are the even-even alpha_{ab} with a + 2b >= 6 and an
/// ordered tuple with sum (a_i + 2b_i - 4) = 2p contributes the product of
/// the two one-dimensional moments.
fn gamma_ladder_critical(psi: &BiSeries, m_max: usize) -> Vec<f64> {
    debug_assert!(psi.get(2, 0).abs() < 1e-12 && (psi.get(0, 2) + 0.125).abs() < 1e-12);
    let pref = (2.0 * PI).powf(-1.5);
    let mut atoms = Vec::new();
    for a in (0..=psi.deg()).step_by(2) {
        for b in (0..=psi.deg() - a).step_by(2) {
            if a + 2 * b >= 6 && psi.get(a, b) != 0.0 {
                atoms.push((a, b, psi.get(a, b)));
            }
        }
    }
    let mut out = vec![pref * quartic_moment(0) * gauss8_moment(0)];
    for p in 1..=m_max {
        let mut acc = 0.0;
        each_atom_tuple(
            2 * p,
            &atoms,
            &|a, b| a + 2 * b - 4,
            &mut |k, sa, sb, prod| {
                acc += prod * quartic_moment(sa as u32) * gauss8_moment(sb as u32) / factorial(k);
            },
        );
        out.push(pref * acc);
    }
    out
}

fn order_guard(order: usize, cap: usize, ladder: &str) -> Result<()> {
    if order > cap {
        return Err(Error::OrderRange(format!(
            "{ladder} ladder order {order} exceeds the supported cap {cap}"
        )));
    }
    Ok(())
}

/// Expansion of the partition function: `predict_log(n, upto)` approximates
/// ln Z_n. At beta = 0 the ladder is the exact closed form
/// Z_n = (2 cosh h)^n; at the critical point the powers step by n^{-1/2}
/// starting from n^{1/4}; otherwise they are integers starting from n^0, and
/// below beta_c at h = 0 the mirrored maxima double every coefficient.
pub fn e_coeffs(p: &ModelParams, order: usize) -> Result<ExpansionCoeffs> {
    order_guard(order, E_ORDER_MAX, "partition")?;
    let regime = p.regime();
    if p.beta == 0.0 {
        let mut values = vec![0.0; order + 1];
        values[0] = 1.0;
        return Ok(ExpansionCoeffs {
            regime,
            kind: ExpansionKind::Z,
            prefactor_log: LN_2 + ln_cosh(p.h_abs()),
            powers: (0..=order).map(|k| Power::int(-(k as i64))).collect(),
            values,
        });
    }
    if regime == Regime::Critical {
        let phi = taylor_phi_at(p, 0.0, 2 * order + 4)?;
        return Ok(ExpansionCoeffs {
            regime,
            kind: ExpansionKind::Z,
            prefactor_log: LN_2 + model::phi(p, 0.0)?,
            powers: (0..=order)
                .map(|k| Power::quarter(1 - 2 * k as i64))
                .collect(),
            values: e_ladder_critical(&phi, order),
        });
    }
    let sol = model::solve_mean_field_default(p)?;
    let phi = taylor_phi_at(p, sol.t_star, 2 * order + 2)?;
    let a2 = phi.coeffs[2];
    if !(a2 < 0.0) {
        return Err(Error::Solver(format!(
            "phi''({}) = {} is not negative away from the critical point",
            sol.t_star,
            2.0 * a2
        )));
    }
    let peaks = if regime == Regime::LowTemp { 2.0 } else { 1.0 };
    let lead = peaks / (2.0 * p.coupling() * a2.abs()).sqrt();
    let values = e_ladder_noncritical(&phi, order)
        .into_iter()
        .map(|r| lead * r)
        .collect();
    Ok(ExpansionCoeffs {
        regime,
        kind: ExpansionKind::Z,
        prefactor_log: LN_2 + model::phi(p, sol.t_star)?,
        powers: (0..=order).map(|k| Power::int(-(k as i64))).collect(),
        values,
    })
}

/// Expansion of the even split sum O_n (the Q_n numerator):
/// `predict_log(n, upto)` approximates ln O_n. Powers start at n^{-1/2} off
/// criticality (stepping by n^{-1}) and at n^{-1/4} at the critical point
/// (stepping by n^{-1/2}). Beta = 0 has no integral representation to expand
/// and is rejected; the exact Bernoulli route covers it.
pub fn gamma_coeffs(p: &ModelParams, order: usize) -> Result<ExpansionCoeffs> {
    order_guard(order, GAMMA_ORDER_MAX, "split")?;
    if p.beta == 0.0 {
        return Err(Error::ZeroBeta(
            "the split ladder expands the beta > 0 integral representation; \
             at beta = 0 the split probability is already a closed form"
                .into(),
        ));
    }
    let regime = p.regime();
    if regime == Regime::Critical {
        let psi = taylor_psi_at(p, 0.0, 2 * order + 4)?;
        return Ok(ExpansionCoeffs {
            regime,
            kind: ExpansionKind::O,
            prefactor_log: LN_2 + model::phi(p, 0.0)?,
            powers: (0..=order)
                .map(|k| Power::quarter(-1 - 2 * k as i64))
                .collect(),
            values: gamma_ladder_critical(&psi, order),
        });
    }
    let sol = model::solve_mean_field_default(p)?;
    let psi = taylor_psi_at(p, sol.t_star, 2 * order + 2)?;
    let (a20, a02) = (psi.get(2, 0), psi.get(0, 2));
    if !(a20 < 0.0 && a02 < 0.0) {
        return Err(Error::Solver(format!(
            "psi is not strictly concave at ({}, 0): alpha20 = {a20}, alpha02 = {a02}",
            sol.t_star
        )));
    }
    let peaks = if regime == Regime::LowTemp { 2.0 } else { 1.0 };
    let lead = peaks * 0.5 / (2.0 * PI * p.coupling() * a20.abs() * a02.abs()).sqrt();
    let values = gamma_ladder_noncritical(&psi, order)
        .into_iter()
        .map(|r| lead * r)
        .collect();
    Ok(ExpansionCoeffs {
        regime,
        kind: ExpansionKind::O,
        prefactor_log: LN_2 + model::phi(p, sol.t_star)?,
        powers: (0..=order)
            .map(|k| Power::neg_half(1 + 2 * k as i64))
            .collect(),
        values,
    })
}

/// Expansion of Q_n itself (even n), as the quotient of the split ladder by
/// the partition ladder; the shared exponential prefactor cancels exactly, as
/// does the peak doubling below beta_c. Powers are n^{-1/2-k} off criticality
/// and n^{-1/2-k/2} at the critical point.
pub fn qn_coeffs(p: &ModelParams, order: usize) -> Result<ExpansionCoeffs> {
    order_guard(order, QN_ORDER_MAX, "concentration")?;
    let e = e_coeffs(p, order)?;
    let g = gamma_coeffs(p, order)?;
    debug_assert_eq!(e.prefactor_log, g.prefactor_log);
    let mut values = vec![0.0; order + 1];
    for i in 0..=order {
        let mut s = g.values[i];
        for j in 1..=i {
            s -= e.values[j] * values[i - j];
        }
        values[i] = s / e.values[0];
    }
    let critical = g.regime == Regime::Critical;
    let powers = (0..=order)
        .map(|k| {
            if critical {
                Power::quarter(-2 - 2 * k as i64)
            } else {
                Power::neg_half(1 + 2 * k as i64)
            }
        })
        .collect();
    Ok(ExpansionCoeffs {
        regime: g.regime,
        kind: ExpansionKind::Qn,
        prefactor_log: 0.0,
        powers,
        values,
    })
}

/// Leading asymptotic of Q_n^+ = max_k P(S_n = k). Off criticality the local
/// limit at the dominant magnetization gives
/// sqrt(2 (1 - 2 d beta (1 - z*^2)) / (pi (1 - z*^2))) n^{-1/2}, halved below
/// beta_c where the mass splits over the mirrored magnetizations; at the
/// critical point S_n / n^{3/4} has the quartic limit law and
/// Q_n^+ ~ 4 / (12^{1/4} Gamma(1/4)) n^{-3/4}.
pub fn qn_plus_asymptotic(p: &ModelParams) -> Result<ExpansionCoeffs> {
    let regime = p.regime();
    let (value, power) = if regime == Regime::Critical {
        (4.0 / (12f64.powf(0.25) * gamma(0.25)), Power::quarter(-3))
    } else {
        let sol = model::solve_mean_field_default(p)?;
        let z2 = sol.z_star * sol.z_star;
        let var_inv = 1.0 / (1.0 - z2) - p.coupling();
        if !(var_inv > 0.0) {
            return Err(Error::Solver(format!(
                "spin variance is not positive at z* = {}: 1/(1-z*^2) - 2 d beta = {var_inv}",
                sol.z_star
            )));
        }
        let mass = if regime == Regime::LowTemp { 0.5 } else { 1.0 };
        (mass * (2.0 * var_inv / PI).sqrt(), Power::neg_half(1))
    };
    Ok(ExpansionCoeffs {
        regime,
        kind: ExpansionKind::QnPlus,
        prefactor_log: 0.0,
        powers: vec![power],
        values: vec![value],
    })
}
