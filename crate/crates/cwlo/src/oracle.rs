//! Brute-force and combinatorial oracles for the Littlewood-Offord side.

use crate::model::ModelParams;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest n for which `brute_force_sup` enumerates all 2^n spin patterns.
pub const SUP_MAX_N: usize = 16;
/// Largest n for which `brute_force_qn` searches over weight assignments.
pub const QN_MAX_N: usize = 12;
/// Largest grid (distinct magnitudes) `brute_force_qn` accepts.
pub const QN_MAX_GRID: usize = 4;
/// Largest weight-sequence length for `noncrossing_bruteforce`.
pub const NONCROSSING_MAX_LEN: usize = 9;

/// A finite signed atom distribution: sorted support with strictly positive
/// masses summing to 1. Atoms closer than 1e-12 times the support scale are
/// merged on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDistribution {
    atoms: Vec<(f64, f64)>,
}

impl AtomDistribution {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParams("no atoms".into()));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "atom ({x}, {w}) needs finite position and positive mass"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let scale = atoms.iter().map(|&(x, _)| x.abs()).fold(1.0f64, f64::max);
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(prev) if x - prev.0 <= 1e-12 * scale => prev.1 += w,
                _ => merged.push((x, w)),
            }
        }
        let mass: f64 = merged.iter().map(|&(_, w)| w).sum();
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "atom masses sum to {mass}, not 1"
            )));
        }
        Ok(Self { atoms: merged })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// A finite nonnegative sequence that rises to a peak and then falls
/// (weakly). The shift-overlap lemma the noncrossing oracle checks holds for
/// exactly this class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimodalWeights {
    values: Vec<f64>,
}

impl UnimodalWeights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParams("empty weight sequence".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonUnimodal);
        }
        let peak = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let rises = values[..=peak].windows(2).all(|w| w[0] <= w[1]);
        let falls = values[peak..].windows(2).all(|w| w[0] >= w[1]);
        if rises && falls {
            Ok(Self { values })
        } else {
            Err(Error::NonUnimodal)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Law of sum_i v_i eps_i under the n-spin model, by full 2^n enumeration.
/// The field enters through |h|; flipping h mirrors the distribution, which
/// leaves every window supremum unchanged.
fn signed_sum_distribution(p: &ModelParams, v: &[f64]) -> Result<AtomDistribution> {
    let n = v.len();
    if n == 0 {
        return Err(Error::InvalidParams("empty weight vector".into()));
    }
    if n > SUP_MAX_N {
        return Err(Error::Budget(format!(
            "n = {n} spins exceed the 2^{SUP_MAX_N} enumeration cap"
        )));
    }
    for &x in v {
        if !x.is_finite() || x.abs() < 1.0 {
            return Err(Error::InvalidParams(format!(
                "weight {x} violates |v_i| >= 1"
            )));
        }
    }
    let quad = p.coupling() / (2.0 * n as f64);
    let h = p.h_abs();
    let mut entries = Vec::with_capacity(1usize << n);
    for mask in 0u32..(1u32 << n) {
        let mut atom = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            atom += if mask >> i & 1 == 1 { vi } else { -vi };
        }
        let s = (2 * mask.count_ones() as i64 - n as i64) as f64;
        entries.push((atom, quad * s * s + h * s));
    }
    distribution_from_log_weights(entries)
}

/// Normalise (atom, log-weight) pairs into a probability distribution.
fn distribution_from_log_weights(entries: Vec<(f64, f64)>) -> Result<AtomDistribution> {
    let max_lw = entries
        .iter()
        .map(|e| e.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut atoms: Vec<(f64, f64)> = entries
        .into_iter()
        .map(|(x, lw)| (x, (lw - max_lw).exp()))
        .collect();
    let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    AtomDistribution::new(atoms)
}

/// Sweep every window (x-1, x+1) over a sorted atom distribution and return
/// the heaviest mass together with a witnessing centre x. The optimal open
/// window can always be slid until an atom sits on its closed left edge, so
/// scanning half-open windows [a, a + 2 - 2 delta) with a small guard
/// delta = 1e-9 * (support scale) is exhaustive; atoms separated by less than
/// 2 delta short of the full width are conservatively split.
fn window_sup(dist: &AtomDistribution) -> (f64, f64) {
    let atoms = dist.atoms();
    let scale = atoms.iter().map(|&(x, _)| x.abs()).fold(1.0f64, f64::max);
    let delta = 1e-9 * scale;
    let mut prefix = Vec::with_capacity(atoms.len() + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for &(_, w) in atoms {
        acc += w;
        prefix.push(acc);
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut j = 0usize;
    for i in 0..atoms.len() {
        if j < i {
            j = i;
        }
        while j < atoms.len() && atoms[j].0 < atoms[i].0 + 2.0 - 2.0 * delta {
            j += 1;
        }
        let mass = prefix[j] - prefix[i];
        if mass > best.0 {
            // Centre the witness on the covered atoms: their span is under
            // 2 - 2 delta wide, so (x-1, x+1) holds them with margin > delta.
            best = (mass, 0.5 * (atoms[i].0 + atoms[j - 1].0));
        }
    }
    best
}

/// Exact concentration of sum_i v_i eps_i: enumerate all 2^n spin patterns
/// (n = v.len() <= 16, every |v_i| >= 1) and report the heaviest open unit
/// window together with a witnessing centre.
pub fn brute_force_sup(p: &ModelParams, v: &[f64]) -> Result<(f64, f64)> {
    let dist = signed_sum_distribution(p, v)?;
    Ok(window_sup(&dist))
}

fn binomial(c: usize, a: usize) -> f64 {
    let mut out = 1.0f64;
    for i in 0..a.min(c - a) {
        out = out * (c - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Window supremum for the weight multiset given by `counts[j]` copies of
/// `signed[j]`. Spins within a weight class are exchangeable, so only the
/// per-class counts of +1 spins matter; each choice carries a binomial
/// multiplicity on top of the spin-model energy.
fn multiset_sup(p: &ModelParams, n: usize, signed: &[f64], counts: &[usize]) -> Result<f64> {
    let classes: Vec<(f64, usize)> = signed
        .iter()
        .zip(counts)
        .filter(|&(_, &c)| c > 0)
        .map(|(&w, &c)| (w, c))
        .collect();
    let quad = p.coupling() / (2.0 * n as f64);
    let h = p.h_abs();
    let mut entries = Vec::new();
    let mut a = vec![0usize; classes.len()];
    'states: loop {
        let mut atom = 0.0;
        let mut s = 0i64;
        let mut mult = 1.0f64;
        for (j, &(w, c)) in classes.iter().enumerate() {
            let d = 2 * a[j] as i64 - c as i64;
            atom += d as f64 * w;
            s += d;
            mult *= binomial(c, a[j]);
        }
        let sf = s as f64;
        entries.push((atom, mult.ln() + quad * sf * sf + h * sf));
        for j in 0..classes.len() {
            a[j] += 1;
            if a[j] <= classes[j].1 {
                continue 'states;
            }
            a[j] = 0;
        }
        break;
    }
    let dist = distribution_from_log_weights(entries)?;
    Ok(window_sup(&dist).0)
}

/// Search all weight vectors with entries drawn (with repetition and either
/// sign) from `grid` for the largest window supremum. Exchangeability cuts
/// the search to multisets of signed magnitudes, and a global sign flip only
/// mirrors the distribution, so mirrored multisets are searched once. Returns
/// the best supremum and a sorted optimal weight vector; assignments within
/// 1e-12 relative of the maximum count as ties and resolve toward the most
/// balanced (then lexicographically least) multiset.
pub fn brute_force_qn(p: &ModelParams, n: usize, grid: &[f64]) -> Result<(f64, Vec<f64>)> {
    if n == 0 || n > QN_MAX_N {
        return Err(Error::Budget(format!(
            "n = {n} outside 1..={QN_MAX_N} for the assignment search"
        )));
    }
    if grid.is_empty() || grid.len() > QN_MAX_GRID {
        return Err(Error::Budget(format!(
            "grid of {} magnitudes outside 1..={QN_MAX_GRID}",
            grid.len()
        )));
    }
    for &g in grid {
        if !g.is_finite() || g < 1.0 {
            return Err(Error::InvalidParams(format!(
                "grid magnitude {g} violates v >= 1"
            )));
        }
    }
    let mut mags = grid.to_vec();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mags.dedup();
    // Ascending symmetric list of signed values: index i mirrors to 2m-1-i.
    let signed: Vec<f64> = mags
        .iter()
        .rev()
        .map(|&g| -g)
        .chain(mags.iter().copied())
        .collect();

    let mut multisets: Vec<Vec<usize>> = Vec::new();
    let mut counts = vec![0usize; signed.len()];
    fill_counts(&mut multisets, &mut counts, 0, n);
    multisets.retain(|c| {
        let mirrored: Vec<usize> = c.iter().rev().copied().collect();
        *c <= mirrored
    });

    use rayon::prelude::*;
    let evaluated: Vec<(f64, &Vec<usize>)> = multisets
        .par_iter()
        .map(|c| multiset_sup(p, n, &signed, c).map(|sup| (sup, c)))
        .collect::<Result<_>>()?;

    let imbalance = |c: &[usize]| {
        c.iter()
            .zip(&signed)
            .map(|(&k, &w)| k as f64 * w)
            .sum::<f64>()
            .abs()
    };
    // Enumeration noise of order machine epsilon must not decide between
    // genuinely tied assignments, so anything within 1e-12 relative of the
    // maximum counts as a tie; ties prefer the most balanced (then
    // lexicographically least) multiset.
    let max_sup = evaluated
        .iter()
        .map(|e| e.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * max_sup;
    let mut best: Option<(f64, &Vec<usize>)> = None;
    for &(sup, c) in &evaluated {
        if sup + tol < max_sup {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, bc)) => (imbalance(c), c) < (imbalance(bc), bc),
        };
        if better {
            best = Some((sup, c));
        }
    }
    let (sup, counts) = best.expect("at least one multiset");
    let mut v = Vec::with_capacity(n);
    for (j, &c) in counts.iter().enumerate() {
        v.extend(std::iter::repeat_n(signed[j], c));
    }
    Ok((sup, v))
}

fn fill_counts(out: &mut Vec<Vec<usize>>, counts: &mut Vec<usize>, from: usize, left: usize) {
    if from + 1 == counts.len() {
        counts[from] = left;
        out.push(counts.clone());
        return;
    }
    for c in 0..=left {
        counts[from] = c;
        fill_counts(out, counts, from + 1, left - c);
    }
    counts[from] = 0;
}

/// Exact maximum over integer shifts d of sum_k f(k) g(k - d). Ties prefer
/// the shift of least magnitude (then the lesser d).
pub fn parallel_shift_max(f: &UnimodalWeights, g: &UnimodalWeights) -> (f64, i64) {
    let (fv, gv) = (f.values(), g.values());
    let mut best = (f64::NEG_INFINITY, 0i64);
    for d in -(gv.len() as i64 - 1)..=(fv.len() as i64 - 1) {
        let mut s = 0.0;
        for (k, &fk) in fv.iter().enumerate() {
            let m = k as i64 - d;
            if (0..gv.len() as i64).contains(&m) {
                s += fk * gv[m as usize];
            }
        }
        if s > best.0 || (s == best.0 && (d.abs(), d) < (best.1.abs(), best.1)) {
            best = (s, d);
        }
    }
    best
}

/// Maximum total weight sum_i f(k_i) g(m_i) over all noncrossing edge sets,
/// i.e. chains strictly increasing in both coordinates, by dynamic
/// programming over the grid. With unimodal weights this must equal
/// `parallel_shift_max` exactly; chains accumulate in the same ascending
/// order as the diagonal sums, so agreement is bitwise.
pub fn noncrossing_bruteforce(f: &UnimodalWeights, g: &UnimodalWeights) -> Result<f64> {
    let (fv, gv) = (f.values(), g.values());
    if fv.len() > NONCROSSING_MAX_LEN || gv.len() > NONCROSSING_MAX_LEN {
        return Err(Error::Budget(format!(
            "weight lengths ({}, {}) exceed the {NONCROSSING_MAX_LEN}-point chain search",
            fv.len(),
            gv.len()
        )));
    }
    // prefix[m][k]: best chain weight using rows < m and columns < k.
    let mut prefix = vec![vec![0.0f64; fv.len() + 1]; gv.len() + 1];
    for (m, &gm) in gv.iter().enumerate() {
        for (k, &fk) in fv.iter().enumerate() {
            let ending_here = gm * fk + prefix[m][k];
            prefix[m + 1][k + 1] = ending_here.max(prefix[m][k + 1]).max(prefix[m + 1][k]);
        }
    }
    Ok(prefix[gv.len()][fv.len()])
}

/// Least-squares slope and intercept of ln r against ln n. Requires at least
/// four samples with strictly positive n and r.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 4 {
        return Err(Error::InvalidParams(format!(
            "{} samples are too few for a power-law fit (need 4)",
            samples.len()
        )));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for &(n, r) in samples {
        if !(n > 0.0 && r > 0.0 && n.is_finite() && r.is_finite()) {
            return Err(Error::Domain(format!(
                "sample ({n}, {r}) is outside the positive quadrant"
            )));
        }
        pts.push((n.ln(), r.ln()));
    }
    let m = pts.len() as f64;
    let xbar = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ybar = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all samples share one n".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    Ok((slope, ybar - slope * xbar))
}
