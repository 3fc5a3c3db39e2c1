//! Taylor data of the exponent functions at an expansion point.
//!
//! phi goes through the exact integer recurrence for the derivative
//! polynomials of ln cosh; psi goes through bivariate series arithmetic on
//! cosh(2t)/2 + cos(u)/2. The two routes are independent, and psi's u = 0
//! slice must reproduce phi's coefficients exactly — a structural test both
//! modules lean on.

use super::bipoly::BiSeries;
use crate::model::ModelParams;
use crate::{Error, Result};

pub const PHI_ORDER_MAX: usize = 24;
pub const PSI_DEGREE_MAX: usize = 12;

/// A univariate Taylor polynomial: sum_k coeffs[k] (t - center)^k.
#[derive(Debug, Clone, PartialEq)]
pub struct UniSeries {
    pub center: f64,
    pub coeffs: Vec<f64>,
}

impl UniSeries {
    pub fn eval(&self, t: f64) -> f64 {
        let d = t - self.center;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * d + c)
    }
}

/// d^k/dt^k ln cosh t = P_{k-1}(tanh t) with P_0 = u, P_{k+1} = (1 - u^2) P_k'.
/// Integer coefficients reach ~1.6e19 by order 24, hence i128.
fn lncosh_derivative_polys(order: usize) -> Vec<Vec<i128>> {
    let mut polys: Vec<Vec<i128>> = Vec::with_capacity(order);
    if order == 0 {
        return polys;
    }
    polys.push(vec![0, 1]);
    for _ in 1..order {
        let prev = polys.last().unwrap();
        // (1 - u^2) * prev'
        let mut next = vec![0i128; prev.len() + 1];
        for (e, &c) in prev.iter().enumerate().skip(1) {
            let d = c * e as i128;
            next[e - 1] += d;
            next[e + 1] -= d;
        }
        polys.push(next);
    }
    polys
}

fn eval_int_poly(poly: &[i128], u: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, &c| acc * u + c as f64)
}

/// Taylor coefficients of phi at t0 through the given order (inclusive).
pub fn taylor_phi_at(p: &ModelParams, t0: f64, order: usize) -> Result<UniSeries> {
    p.require_positive_beta("taylor_phi_at")?;
    if order > PHI_ORDER_MAX {
        return Err(Error::OrderRange(format!(
            "phi Taylor order {order} exceeds validated max {PHI_ORDER_MAX}"
        )));
    }
    let mut coeffs = vec![0.0; order + 1];
    coeffs[0] = crate::special::ln_cosh(t0);
    let th = t0.tanh();
    let polys = lncosh_derivative_polys(order);
    let mut fact = 1.0;
    for k in 1..=order {
        fact *= k as f64;
        coeffs[k] = eval_int_poly(&polys[k - 1], th) / fact;
    }
    // subtract (t - h)^2 / (4 d beta) around t0
    let inv = 1.0 / (4.0 * p.d as f64 * p.beta);
    let dev = t0 - p.h_abs();
    coeffs[0] -= dev * dev * inv;
    if order >= 1 {
        coeffs[1] -= 2.0 * dev * inv;
    }
    if order >= 2 {
        coeffs[2] -= inv;
    }
    Ok(UniSeries { center: t0, coeffs })
}

fn axpy(dst: &mut BiSeries, s: f64, src: &BiSeries) {
    for i in 0..=dst.deg() {
        for j in 0..=dst.deg() - i {
            let v = src.get(i, j);
            if v != 0.0 {
                dst.add_to(i, j, s * v);
            }
        }
    }
}

/// Bivariate Taylor coefficients of psi at (t0, 0) through total degree
/// `degree`: entry (j, k) multiplies (t - t0)^j u^k. Split as
/// psi = phi(t) + (1/2) ln(1 - D) with D = (1 - cos u) / (2 cosh^2 t), so the
/// u = 0 slice is bitwise the [`taylor_phi_at`] coefficients and all odd-k
/// entries vanish identically (psi is even in u). D factors into univariate
/// series: in tau it is half the derivative of tanh(t0 + tau), which the
/// integer polynomials above supply exactly.
pub fn taylor_psi_at(p: &ModelParams, t0: f64, degree: usize) -> Result<BiSeries> {
    p.require_positive_beta("taylor_psi_at")?;
    if degree > PSI_DEGREE_MAX {
        return Err(Error::OrderRange(format!(
            "psi Taylor degree {degree} exceeds validated max {PSI_DEGREE_MAX}"
        )));
    }
    let phi = taylor_phi_at(p, t0, degree)?;
    let mut psi = BiSeries::zero(degree);
    for (j, &c) in phi.coeffs.iter().enumerate() {
        psi.set(j, 0, c);
    }
    if degree < 2 {
        return Ok(psi);
    }
    let th = t0.tanh();
    let polys = lncosh_derivative_polys(degree + 2);
    let mut g = vec![0.0; degree + 1];
    let mut fact = 1.0;
    for (m, gm) in g.iter_mut().enumerate() {
        if m > 0 {
            fact *= m as f64;
        }
        *gm = 0.5 * eval_int_poly(&polys[m + 1], th) / fact;
    }
    let mut cu = vec![0.0; degree + 1];
    let mut fact = 1.0;
    for k in (2..=degree).step_by(2) {
        fact *= ((k - 1) * k) as f64;
        cu[k] = if k % 4 == 0 { -1.0 } else { 1.0 } / fact;
    }
    let mut d = BiSeries::zero(degree);
    for (m, &gm) in g.iter().enumerate() {
        for k in (2..=degree - m).step_by(2) {
            d.set(m, k, gm * cu[k]);
        }
    }
    let mut pw = d.clone();
    let mut k = 1usize;
    loop {
        axpy(&mut psi, -0.5 / k as f64, &pw);
        k += 1;
        if 2 * k > degree {
            break;
        }
        pw = pw.mul(&d);
    }
    Ok(psi)
}
