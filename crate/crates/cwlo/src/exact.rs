//! Exact finite-n concentration quantities for the Curie-Weiss measure.
//!
//! Everything here is a finite sum over magnetization levels or pair counts,
//! evaluated on the centered log scale (terms carry ln C(n,k) - n ln 2, so the
//! 2^n bulk cancels before any exp). Outputs are exact up to f64 rounding and
//! serve as the ground truth the quadrature and series modules are tested
//! against.
//!
//! Field sign convention: every quantity is invariant under h -> -h except the
//! odd-n split probability, whose event orientation flips with the field. We
//! canonicalize to |h| throughout and report the T = +1 probability for the
//! |h| model; this is the representative the odd-n bracket uses.

use crate::model::ModelParams;
use crate::quad::{self, QuadConfig};
use crate::special::{ln_binom_pmf_half, StreamingLogSum};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// A quantity carried on the log scale (natural log).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub log_value: f64,
}

/// Where a supremum is attained: magnetization levels k (for Q_n^+) or
/// split descriptors (group size, target imbalance) (for Q_n, P_n and the
/// Bernoulli suprema).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Attainment {
    Levels(Vec<u64>),
    Splits(Vec<(u64, i64)>),
}

/// An exactly computed small-ball probability with its attainment set and
/// the log-scale numerator/denominator it came from.
/// Invariant: `probability == (log_numerator - log_denominator).exp()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationResult {
    pub probability: f64,
    pub attaining_indices: Attainment,
    pub log_numerator: f64,
    pub log_denominator: f64,
}

impl ConcentrationResult {
    fn from_logs(log_numerator: f64, log_denominator: f64, attaining: Attainment) -> Self {
        Self {
            probability: (log_numerator - log_denominator).exp(),
            attaining_indices: attaining,
            log_numerator,
            log_denominator,
        }
    }
}

fn require_n(n: u64, least: u64, what: &str) -> Result<()> {
    if n < least {
        return Err(Error::InvalidParams(format!(
            "{what} needs n >= {least}, got {n}"
        )));
    }
    Ok(())
}

/// ln of one magnetization term of Z_n 2^{-n}: the pmf factor C(n,k) 2^{-n}
/// times the Gibbs weight at m = 2k - n.
fn z_log_term(p: &ModelParams, n: u64, k: u64) -> f64 {
    let m = (2 * k as i64 - n as i64) as f64;
    ln_binom_pmf_half(n, k) + (p.d as f64) * p.beta / (n as f64) * (m * m) + p.h_abs() * m
}

/// ln(Z_n 2^{-n}), summed on the centered scale so no 2^n appears.
pub fn reduced_log_partition(p: &ModelParams, n: u64) -> Result<f64> {
    require_n(n, 1, "partition function")?;
    let mut s = StreamingLogSum::new();
    for k in 0..=n {
        s.add(z_log_term(p, n, k));
    }
    Ok(s.total())
}

/// ln Z_n.
pub fn log_partition(p: &ModelParams, n: u64) -> Result<LogValue> {
    Ok(LogValue {
        log_value: n as f64 * LN_2 + reduced_log_partition(p, n)?,
    })
}

/// Q_n^+ = max_k P(sum eps = 2k - n): the largest single magnetization atom.
/// Attainment lists every k whose term ties the max within 1e-12 on the log
/// scale (exact symmetric ties at h = 0 land bitwise equal).
pub fn qn_plus_exact(p: &ModelParams, n: u64) -> Result<ConcentrationResult> {
    require_n(n, 1, "Q_n^+")?;
    let mut z = StreamingLogSum::new();
    let mut max_term = f64::NEG_INFINITY;
    for k in 0..=n {
        let t = z_log_term(p, n, k);
        z.add(t);
        if t > max_term {
            max_term = t;
        }
    }
    let mut ks = Vec::new();
    for k in 0..=n {
        if z_log_term(p, n, k) >= max_term - 1e-12 {
            ks.push(k);
        }
    }
    let shift = n as f64 * LN_2;
    Ok(ConcentrationResult::from_logs(
        shift + max_term,
        shift + z.total(),
        Attainment::Levels(ks),
    ))
}

/// ln(O_n 2^{-n}) for even n: O_n sums the weight of configurations with
/// equal up-spin counts in the two halves of a balanced split, i.e. the
/// event sum_A eps = sum_B eps.
pub fn reduced_log_o_even(p: &ModelParams, n: u64) -> Result<f64> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Parity(format!(
            "O_n^even needs even n >= 2, got {n}"
        )));
    }
    let half = n / 2;
    let (db, ha, nf) = ((p.d as f64) * p.beta, p.h_abs(), n as f64);
    let mut s = StreamingLogSum::new();
    for a in 0..=half {
        let m = (4 * a as i64 - n as i64) as f64;
        s.add(2.0 * ln_binom_pmf_half(half, a) + db / nf * (m * m) + ha * m);
    }
    Ok(s.total())
}

/// ln O_n for even n.
pub fn log_o_even(p: &ModelParams, n: u64) -> Result<LogValue> {
    Ok(LogValue {
        log_value: n as f64 * LN_2 + reduced_log_o_even(p, n)?,
    })
}

/// Q_n = P(sum_A eps = sum_B eps) for a balanced split of even n; by
/// exchangeability the choice of split does not matter, and this fixed-split
/// probability is the n-spin value of the weighted supremum Q_n.
pub fn qn_even_exact(p: &ModelParams, n: u64) -> Result<ConcentrationResult> {
    let num = log_o_even(p, n)?.log_value;
    let den = log_partition(p, n)?.log_value;
    Ok(ConcentrationResult::from_logs(
        num,
        den,
        Attainment::Splits(vec![(n / 2, 0)]),
    ))
}

/// ln(O_n^odd 2^{-n}) for odd n: the event sum_A eps - sum_B eps = +1 where A
/// is the smaller group, |A| = (n-1)/2. This orientation is the h >= 0
/// canonical one; pair counts C((n-1)/2, a) C((n+1)/2, a) at total
/// magnetization m = 4a - n.
pub fn reduced_log_o_odd(p: &ModelParams, n: u64) -> Result<f64> {
    if n % 2 == 0 {
        return Err(Error::Parity(format!("O_n^odd needs odd n >= 1, got {n}")));
    }
    let pp = (n - 1) / 2;
    let qq = n - pp;
    let (db, ha, nf) = ((p.d as f64) * p.beta, p.h_abs(), n as f64);
    let mut s = StreamingLogSum::new();
    for a in 0..=pp {
        let m = (4 * a as i64 - n as i64) as f64;
        s.add(ln_binom_pmf_half(pp, a) + ln_binom_pmf_half(qq, a) + db / nf * (m * m) + ha * m);
    }
    Ok(s.total())
}

/// ln O_n^odd for odd n.
pub fn log_o_odd(p: &ModelParams, n: u64) -> Result<LogValue> {
    Ok(LogValue {
        log_value: n as f64 * LN_2 + reduced_log_o_odd(p, n)?,
    })
}

/// P_n = P(sum_A eps - sum_B eps = +1) for odd n, |A| = (n-1)/2.
pub fn pn_odd_exact(p: &ModelParams, n: u64) -> Result<ConcentrationResult> {
    let num = log_o_odd(p, n)?.log_value;
    let den = log_partition(p, n)?.log_value;
    Ok(ConcentrationResult::from_logs(
        num,
        den,
        Attainment::Splits(vec![((n - 1) / 2, 1)]),
    ))
}

/// The two-sided bracket for Q_n: even n is exact on both sides; odd n is
/// sandwiched as P_n <= Q_n <= Q_{n-1}.
pub fn qn_bounds(p: &ModelParams, n: u64) -> Result<(f64, f64)> {
    require_n(n, 2, "Q_n bracket")?;
    if n % 2 == 0 {
        let q = qn_even_exact(p, n)?.probability;
        Ok((q, q))
    } else {
        Ok((
            pn_odd_exact(p, n)?.probability,
            qn_even_exact(p, n - 1)?.probability,
        ))
    }
}

/// P(up) for an i.i.d. spin tilted by t, i.e. sigma(2t).
fn sigma_2t(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-2.0 * t).exp())
    } else {
        let e = (2.0 * t).exp();
        e / (1.0 + e)
    }
}

/// Q_{n,p} for i.i.d. spins with P(eps = +1) = p: the exact supremum over
/// group sizes l and integer targets d of P(sum_A eps - sum_B eps = d),
/// |A| = l. Runs in O(n^3); attainment lists every (l, d) tying the max to
/// relative 1e-12, ascending. The denominator is 1, so `log_denominator = 0`.
pub fn bernoulli_qnp(n: u64, prob_up: f64) -> Result<ConcentrationResult> {
    require_n(n, 1, "Q_{n,p}")?;
    if !prob_up.is_finite() || !(0.0..=1.0).contains(&prob_up) {
        return Err(Error::InvalidParams(format!(
            "Bernoulli parameter must lie in [0, 1], got {prob_up}"
        )));
    }
    let n_us = usize::try_from(n).expect("n fits usize");
    // pmf[l][a] = C(l, a) p^a q^{l-a} by the Pascal recurrence: one rounding
    // per entry, exact dyadic values at p = 1/2, no log/exp detour
    let q = 1.0 - prob_up;
    let mut pmf: Vec<Vec<f64>> = Vec::with_capacity(n_us + 1);
    pmf.push(vec![1.0]);
    for l in 1..=n_us {
        let prev = &pmf[l - 1];
        let mut row = Vec::with_capacity(l + 1);
        row.push(q * prev[0]);
        for a in 1..l {
            row.push(prob_up * prev[a - 1] + q * prev[a]);
        }
        row.push(prob_up * prev[l - 1]);
        pmf.push(row);
    }
    let prob_at = |l: usize, s: i64| -> f64 {
        let r = n_us - l;
        let a_lo = s.max(0);
        let a_hi = (l as i64).min(r as i64 + s);
        let mut acc = 0.0;
        let mut a = a_lo;
        while a <= a_hi {
            acc += pmf[l][a as usize] * pmf[r][(a - s) as usize];
            a += 1;
        }
        acc
    };
    let mut best = 0.0f64;
    for l in 0..=n_us {
        for s in -((n_us - l) as i64)..=(l as i64) {
            best = best.max(prob_at(l, s));
        }
    }
    let mut ties = Vec::new();
    for l in 0..=n_us {
        for s in -((n_us - l) as i64)..=(l as i64) {
            if prob_at(l, s) >= best * (1.0 - 1e-12) {
                ties.push((l as u64, 2 * s + n as i64 - 2 * l as i64));
            }
        }
    }
    Ok(ConcentrationResult::from_logs(
        best.ln(),
        0.0,
        Attainment::Splits(ties),
    ))
}

/// ln nu_n(x): the de Finetti mixing density of the up-probability p = x,
/// x in (0, 1). Under the Gaussian linearization the spins are i.i.d. with
/// p = sigma(2t) given the tilt t, and nu is the image of the tilt weight.
pub fn log_nu_density(p: &ModelParams, n: u64, x: f64) -> Result<f64> {
    require_n(n, 1, "mixing density")?;
    p.require_positive_beta("nu is the image of the Gaussian tilt measure")?;
    if !x.is_finite() || x <= 0.0 || x >= 1.0 {
        return Err(Error::Domain(format!(
            "nu density needs x in (0, 1), got {x}"
        )));
    }
    let u = 2.0 * x - 1.0;
    let (db, nf) = ((p.d as f64) * p.beta, n as f64);
    let red_z = reduced_log_partition(p, n)?;
    let dev = u.atanh() - p.h_abs();
    Ok(-red_z + 0.5 * (nf / (PI * db)).ln()
        - (1.0 + 0.5 * nf) * (-u * u).ln_1p()
        - nf / (4.0 * db) * dev * dev)
}

/// nu_n(x) on the linear scale.
pub fn nu_density(p: &ModelParams, n: u64, x: f64) -> Result<f64> {
    log_nu_density(p, n, x).map(f64::exp)
}

/// ln of the tilt-space integral of e^{extra(t)} against the mixing weight;
/// `extra = 0` gives the total mass (exactly 1 up to quadrature), and
/// `extra = ln Q_{n, sigma(2t)}` gives the mixture representation of Q_n.
fn mixture_integral<F: Fn(f64) -> f64>(
    p: &ModelParams,
    n: u64,
    cfg: &QuadConfig,
    extra: F,
) -> Result<f64> {
    cfg.validate()?;
    require_n(n, 1, "mixture integral")?;
    p.require_positive_beta("the mixture runs over the Gaussian tilt")?;
    let (db, nf) = ((p.d as f64) * p.beta, n as f64);
    let red_z = reduced_log_partition(p, n)?;
    let base = -red_z + 0.5 * (nf / (PI * db)).ln() - LN_2;
    let sol = crate::model::solve_mean_field_default(p)?;
    let w0 = 12.0 * (2.0 * db / nf).sqrt();
    let centers: Vec<(f64, f64)> = quad::phi_maxima_t(p, &sol)
        .into_iter()
        .map(|t0| (t0, w0))
        .collect();
    quad::log_integrate_peaks(
        |t| base + nf * crate::model::phi(p, t).expect("beta > 0 checked") + extra(t),
        &centers,
        cfg,
    )
}

/// Total mass of nu_n, computed by quadrature in the tilt variable. Equals 1
/// exactly; the deviation measures nothing but quadrature error.
pub fn nu_total_mass(p: &ModelParams, n: u64, cfg: &QuadConfig) -> Result<f64> {
    mixture_integral(p, n, cfg, |_| 0.0).map(f64::exp)
}

/// Q_n recovered through the conditional i.i.d. structure:
/// Q_n = int Q_{n, sigma(2t)} dmu(t). Agrees with [`qn_even_exact`] to
/// quadrature accuracy; the Bernoulli supremum under the integral is exact.
pub fn qn_even_via_mixture(p: &ModelParams, n: u64, cfg: &QuadConfig) -> Result<f64> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Parity(format!(
            "mixture Q_n needs even n >= 2, got {n}"
        )));
    }
    mixture_integral(p, n, cfg, |t| {
        bernoulli_qnp(n, sigma_2t(t))
            .expect("sigma(2t) is a valid probability")
            .probability
            .ln()
    })
    .map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_binomial;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(d: u32, beta: f64, h: f64) -> ModelParams {
        ModelParams::new(d, beta, h).unwrap()
    }

    /// Independent oracle: brute 2^n enumeration of the spin measure, with the
    /// odd event oriented exactly as the pair-count formula claims (A = first
    /// (n-1)/2 coordinates, sum_A - sum_B = +1, field |h|).
    fn enumerate(pars: &ModelParams, n: u64) -> (f64, f64) {
        let (db, ha, nf) = ((pars.d as f64) * pars.beta, pars.h_abs(), n as f64);
        let a_size = if n % 2 == 0 { n / 2 } else { (n - 1) / 2 } as u32;
        let target = if n % 2 == 0 { 0 } else { 1 };
        let mut z = 0.0;
        let mut o = 0.0;
        for bits in 0u64..(1 << n) {
            let ones = bits.count_ones() as i64;
            let m = (2 * ones - n as i64) as f64;
            let w = (db / nf * m * m + ha * m).exp();
            z += w;
            let ones_a = (bits & ((1 << a_size) - 1)).count_ones() as i64;
            let sum_a = 2 * ones_a - a_size as i64;
            let sum_b = (2 * ones - n as i64) - sum_a;
            if sum_a - sum_b == target {
                o += w;
            }
        }
        (z, o)
    }

    #[test]
    fn partition_frozen_values() {
        let v = log_partition(&p(1, 0.25, 0.0), 2).unwrap().log_value;
        assert_relative_eq!(v, 1.667_224_164_740_051_99, max_relative = 1e-15);
        assert_relative_eq!(v, (2.0 + 2.0 * 0.5f64.exp()).ln(), max_relative = 1e-15);
        let v = log_partition(&p(3, 0.0, 0.0), 7).unwrap().log_value;
        assert_relative_eq!(v, 7.0 * LN_2, max_relative = 1e-15);
        let v = log_partition(&p(1, 1.0, 0.0), 4).unwrap().log_value;
        let expect = (2.0 * 4.0f64.exp() + 8.0 * 1.0f64.exp() + 6.0).ln();
        assert_relative_eq!(v, expect, max_relative = 1e-14);
        assert_relative_eq!(
            reduced_log_partition(&p(1, 1.0, 0.0), 4).unwrap(),
            expect - 4.0 * LN_2,
            max_relative = 1e-13
        );
        assert!(log_partition(&p(1, 0.3, 0.0), 0).is_err());
    }

    #[test]
    fn qn_plus_frozen_values() {
        let r = qn_plus_exact(&p(1, 1.0, 0.0), 4).unwrap();
        assert_relative_eq!(
            r.probability,
            0.398_693_818_405_536_25,
            max_relative = 1e-14
        );
        assert_eq!(r.attaining_indices, Attainment::Levels(vec![0, 4]));
        let r = qn_plus_exact(&p(1, 0.0, 0.0), 4).unwrap();
        assert_relative_eq!(r.probability, 0.375, max_relative = 1e-15);
        assert_eq!(r.attaining_indices, Attainment::Levels(vec![2]));
        // beta = 0 with a field: the max binomial atom
        let pr = sigma_2t(0.7);
        let r = qn_plus_exact(&p(1, 0.0, 0.7), 6).unwrap();
        let direct = (0..=6u64)
            .map(|k| {
                (ln_binomial(6, k) + k as f64 * pr.ln() + (6 - k) as f64 * (-pr).ln_1p()).exp()
            })
            .fold(0.0f64, f64::max);
        assert_relative_eq!(r.probability, direct, max_relative = 1e-13);
    }

    #[test]
    fn qn_even_frozen_values() {
        let r = qn_even_exact(&p(1, 1.0, 0.0), 4).unwrap();
        assert_relative_eq!(
            r.probability,
            0.826_596_964_831_417_954,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            r.log_numerator,
            (2.0 * 4.0f64.exp() + 4.0).ln(),
            max_relative = 1e-14
        );
        assert_eq!(r.attaining_indices, Attainment::Splits(vec![(2, 0)]));
        let r = qn_even_exact(&p(1, 0.0, 0.0), 4).unwrap();
        assert_relative_eq!(r.probability, 0.375, max_relative = 1e-15);
        assert_relative_eq!(
            log_o_even(&p(1, 0.0, 0.0), 4).unwrap().log_value,
            6.0f64.ln(),
            max_relative = 1e-15
        );
        assert!(log_o_even(&p(1, 0.3, 0.0), 5).is_err());
    }

    #[test]
    fn pn_odd_frozen_values() {
        let r = pn_odd_exact(&p(1, 0.0, 0.0), 3).unwrap();
        assert_relative_eq!(r.probability, 0.375, max_relative = 1e-15);
        assert_eq!(r.attaining_indices, Attainment::Splits(vec![(1, 1)]));
        let r = pn_odd_exact(&p(1, 0.4, 0.3), 3).unwrap();
        assert_relative_eq!(
            r.probability,
            0.265_823_520_200_953_037,
            max_relative = 1e-14
        );
        // n = 1: P(eps = -1) = 1 / (1 + e^{2|h|})
        let r = pn_odd_exact(&p(1, 0.3, 0.5), 1).unwrap();
        assert_relative_eq!(
            r.probability,
            1.0 / (1.0 + 1.0f64.exp()),
            max_relative = 1e-14
        );
        assert!(log_o_odd(&p(1, 0.3, 0.0), 4).is_err());
    }

    #[test]
    fn bounds_bracket() {
        let b = qn_bounds(&p(1, 0.0, 0.0), 4).unwrap();
        assert_eq!(b, (0.375, 0.375));
        let b = qn_bounds(&p(1, 0.0, 0.0), 3).unwrap();
        assert_relative_eq!(b.0, 0.375, max_relative = 1e-15);
        assert_relative_eq!(b.1, 0.5, max_relative = 1e-15);
        assert!(qn_bounds(&p(1, 0.3, 0.0), 1).is_err());
    }

    #[test]
    fn bernoulli_supremum() {
        let r = bernoulli_qnp(2, 0.5).unwrap();
        assert_relative_eq!(r.probability, 0.5, max_relative = 1e-14);
        assert_eq!(
            r.attaining_indices,
            Attainment::Splits(vec![(0, 0), (1, 0), (2, 0)])
        );
        assert_eq!(r.log_denominator, 0.0);
        let r = bernoulli_qnp(2, 0.9).unwrap();
        assert_relative_eq!(r.probability, 0.82, max_relative = 1e-14);
        assert_eq!(r.attaining_indices, Attainment::Splits(vec![(1, 0)]));
        let r = bernoulli_qnp(4, 0.5).unwrap();
        assert_relative_eq!(r.probability, 0.375, max_relative = 1e-14);
        assert_eq!((r.log_numerator - r.log_denominator).exp(), r.probability);
        assert_eq!(
            r.attaining_indices,
            Attainment::Splits(vec![(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)])
        );
        // frozen tilted case, p = sigma(1.4)
        let pr = sigma_2t(0.7);
        assert_relative_eq!(pr, 0.802_183_888_558_581_748, max_relative = 1e-15);
        let r = bernoulli_qnp(6, pr).unwrap();
        assert_relative_eq!(
            r.probability,
            0.421_230_195_291_657_046,
            max_relative = 1e-14
        );
        assert_eq!(r.attaining_indices, Attainment::Splits(vec![(3, 0)]));
        // degenerate endpoints stay NaN-free
        let r = bernoulli_qnp(3, 0.0).unwrap();
        assert_eq!(r.probability, 1.0);
        assert!(bernoulli_qnp(3, 1.5).is_err());
    }

    #[test]
    fn beta_zero_is_iid() {
        // at beta = 0 the model is i.i.d. with p = sigma(2h)
        let cw = qn_even_exact(&p(1, 0.0, 0.7), 6).unwrap();
        let ber = bernoulli_qnp(6, sigma_2t(0.7)).unwrap();
        assert_relative_eq!(cw.probability, ber.probability, max_relative = 1e-13);
    }

    #[test]
    fn enumeration_oracle_small_n() {
        for pars in [
            p(1, 0.3, 0.0),
            p(1, 0.5, 0.0),
            p(1, 1.0, 0.0),
            p(1, 0.3, 0.4),
            p(2, 0.7, -0.6),
            p(3, 0.05, 0.2),
        ] {
            for n in 2..=10u64 {
                let (z, o) = enumerate(&pars, n);
                assert_relative_eq!(
                    log_partition(&pars, n).unwrap().log_value,
                    z.ln(),
                    max_relative = 1e-13
                );
                let formula = if n % 2 == 0 {
                    log_o_even(&pars, n).unwrap().log_value
                } else {
                    log_o_odd(&pars, n).unwrap().log_value
                };
                assert_relative_eq!(formula, o.ln(), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn mixture_matches_exact() {
        let cfg = QuadConfig::default();
        let pars = p(1, 0.3, 0.0);
        let direct = qn_even_exact(&pars, 8).unwrap().probability;
        assert_relative_eq!(direct, 0.301_490_893_983_603_582_4, max_relative = 1e-13);
        let mixed = qn_even_via_mixture(&pars, 8, &cfg).unwrap();
        assert_relative_eq!(mixed, direct, max_relative = 1e-9);
        // with a field
        let pars = p(1, 0.3, 0.4);
        let mixed = qn_even_via_mixture(&pars, 8, &cfg).unwrap();
        assert_relative_eq!(
            mixed,
            qn_even_exact(&pars, 8).unwrap().probability,
            max_relative = 1e-9
        );
        assert!(qn_even_via_mixture(&pars, 7, &cfg).is_err());
        assert!(qn_even_via_mixture(&p(1, 0.0, 0.0), 8, &cfg).is_err());
    }

    #[test]
    fn nu_is_a_probability_density() {
        let cfg = QuadConfig::default();
        for pars in [
            p(1, 0.3, 0.0),
            p(1, 0.3, 0.4),
            p(1, 1.0, 0.0),
            p(1, 0.5, 0.0),
        ] {
            let mass = nu_total_mass(&pars, 12, &cfg).unwrap();
            assert_relative_eq!(mass, 1.0, max_relative = 1e-9);
        }
        // the x-space density integrates to 1 as well
        let pars = p(1, 0.3, 0.2);
        let mass =
            quad::tanh_sinh(|x| nu_density(&pars, 10, x).unwrap_or(0.0), 0.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-9);
        assert!(log_nu_density(&pars, 10, 0.0).is_err());
        assert!(log_nu_density(&pars, 10, 1.0).is_err());
        assert!(log_nu_density(&p(1, 0.0, 0.0), 10, 0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_sign_never_matters(
            d in 1u32..=3,
            beta in 0.0f64..1.5,
            h in 0.0f64..1.0,
            n in 2u64..=9,
        ) {
            let plus = p(d, beta, h);
            let minus = p(d, beta, -h);
            prop_assert_eq!(
                qn_plus_exact(&plus, n).unwrap(),
                qn_plus_exact(&minus, n).unwrap()
            );
            let n_even = n & !1;
            prop_assert_eq!(
                qn_even_exact(&plus, n_even).unwrap(),
                qn_even_exact(&minus, n_even).unwrap()
            );
            let n_odd = n_even - 1;
            prop_assert_eq!(
                pn_odd_exact(&plus, n_odd).unwrap(),
                pn_odd_exact(&minus, n_odd).unwrap()
            );
        }

        #[test]
        fn probability_matches_logs(
            d in 1u32..=3,
            beta in 0.0f64..1.5,
            h in -1.0f64..1.0,
            n in 2u64..=12,
        ) {
            let pars = p(d, beta, h);
            for r in [
                qn_plus_exact(&pars, n).unwrap(),
                qn_even_exact(&pars, n & !1).unwrap(),
                pn_odd_exact(&pars, (n & !1) - 1).unwrap(),
            ] {
                prop_assert_eq!(
                    r.probability.to_bits(),
                    (r.log_numerator - r.log_denominator).exp().to_bits()
                );
            }
        }

        #[test]
        fn level_atom_never_beats_split(
            d in 1u32..=3,
            beta in 0.0f64..1.5,
            h in -1.0f64..1.0,
            n in 1u64..=6,
        ) {
            let pars = p(d, beta, h);
            let n = 2 * n;
            let plus = qn_plus_exact(&pars, n).unwrap().probability;
            let qn = qn_even_exact(&pars, n).unwrap().probability;
            prop_assert!(qn >= plus * (1.0 - 1e-12));
        }

        #[test]
        fn odd_bracket_is_ordered(
            d in 1u32..=3,
            beta in 0.0f64..1.5,
            h in -1.0f64..1.0,
            n in 2u64..=6,
        ) {
            let pars = p(d, beta, h);
            let (lo, hi) = qn_bounds(&pars, 2 * n + 1).unwrap();
            prop_assert!(lo <= hi * (1.0 + 1e-12));
        }

        #[test]
        fn bernoulli_chain_is_monotone(
            pr in 0.0f64..=1.0,
            n in 2u64..=9,
        ) {
            let a = bernoulli_qnp(n, pr).unwrap().probability;
            let b = bernoulli_qnp(n - 1, pr).unwrap().probability;
            prop_assert!(a <= b * (1.0 + 1e-12));
        }
    }
}
