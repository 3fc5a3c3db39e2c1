//! Dense bivariate series truncated by total degree, just enough arithmetic
//! to Taylor-expand psi: products and the log of a series with positive
//! constant term.

use crate::{Error, Result};

/// Coefficients c[(i, j)] of tau^i u^j for i + j <= deg.
#[derive(Debug, Clone, PartialEq)]
pub struct BiSeries {
    deg: usize,
    c: Vec<f64>,
}

impl BiSeries {
    pub fn zero(deg: usize) -> Self {
        Self {
            deg,
            c: vec![0.0; (deg + 1) * (deg + 2) / 2],
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + j <= self.deg);
        i * (self.deg + 1) - i * (i.saturating_sub(1)) / 2 + j
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j <= self.deg {
            self.c[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.c[k] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.c[k] += v;
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.c {
            *v *= s;
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let deg = self.deg.min(other.deg);
        let mut out = Self::zero(deg);
        for i1 in 0..=self.deg {
            for j1 in 0..=(self.deg - i1) {
                let a = self.c[self.idx(i1, j1)];
                if a == 0.0 {
                    continue;
                }
                for i2 in 0..=other.deg.min(deg.saturating_sub(i1 + j1)) {
                    let jmax = (other.deg - i2).min(deg.saturating_sub(i1 + j1 + i2));
                    for j2 in 0..=jmax {
                        let b = other.c[other.idx(i2, j2)];
                        if b != 0.0 && i1 + i2 + j1 + j2 <= deg {
                            out.add_to(i1 + i2, j1 + j2, a * b);
                        }
                    }
                }
            }
        }
        out
    }

    /// ln of the series, truncated to the same degree. Needs a positive
    /// constant term: write self = c00 (1 + w) and expand ln(1 + w).
    pub fn ln_series(&self) -> Result<Self> {
        let c00 = self.get(0, 0);
        if !(c00 > 0.0) {
            return Err(Error::Domain(format!(
                "series log needs a positive constant term, got {c00}"
            )));
        }
        let mut w = self.clone();
        w.scale(1.0 / c00);
        w.set(0, 0, 0.0);
        let mut out = Self::zero(self.deg);
        out.set(0, 0, c00.ln());
        // w has no constant term, so w^k only reaches degrees >= k
        let mut pw = w.clone();
        for k in 1..=self.deg {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            for i in 0..=self.deg {
                for j in 0..=(self.deg - i) {
                    out.add_to(i, j, sign / k as f64 * pw.get(i, j));
                }
            }
            if k < self.deg {
                pw = pw.mul(&w);
            }
        }
        Ok(out)
    }

    /// Plain evaluation at (tau, u); exact powers, no Horner needed at these
    /// sizes.
    pub fn eval(&self, tau: f64, u: f64) -> f64 {
        let mut acc = 0.0;
        let mut tp = 1.0;
        for i in 0..=self.deg {
            let mut up = 1.0;
            for j in 0..=(self.deg - i) {
                acc += self.c[self.idx(i, j)] * tp * up;
                up *= u;
            }
            tp *= tau;
        }
        acc
    }
}
