//! Sparse multivariate polynomials with real coefficients, just enough for
//! expanding sphere polynomials and bounding them on boxes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numeric::binomial;

/// `Σ c_α x^α` over exponent vectors `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1.0);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, exps: Vec<u32>, coef: f64) {
        assert_eq!(exps.len(), self.nvars, "exponent vector of wrong length");
        if coef == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += coef;
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars);
        let mut s = 0.0;
        for (e, &c) in &self.terms {
            let mut m = c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m *= xi.powi(k as i32);
                }
            }
            s += m;
        }
        s
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> MultiPoly {
        let mut out = Self::zero(self.nvars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut out = Self::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Substitutes polynomial `subs[i]` for `x_i`.
    pub fn compose(&self, subs: &[MultiPoly]) -> MultiPoly {
        assert_eq!(subs.len(), self.nvars);
        let target = subs.first().map_or(0, |s| s.nvars);
        let mut out = Self::zero(target);
        for (e, &c) in &self.terms {
            let mut m = Self::constant(target, c);
            for (s, &k) in subs.iter().zip(e) {
                if k > 0 {
                    m = m.mul(&s.pow(k));
                }
            }
            out = out.add(&m);
        }
        out
    }

    /// Coefficients of `y ↦ p(center + y)`.
    pub fn shift(&self, center: &[f64]) -> MultiPoly {
        assert_eq!(center.len(), self.nvars);
        let mut out = Self::zero(self.nvars);
        for (e, &c) in &self.terms {
            // Π_i (c_i + y_i)^{e_i}, expanded binomially per coordinate.
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(vec![0; self.nvars], c)];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let mut next = Vec::with_capacity(partial.len() * (k as usize + 1));
                for (exps, coef) in &partial {
                    for j in 0..=k {
                        let w = binomial(k as u64, j as u64) as f64 * center[i].powi((k - j) as i32);
                        if w == 0.0 {
                            continue;
                        }
                        let mut ex = exps.clone();
                        ex[i] = j;
                        next.push((ex, coef * w));
                    }
                }
                partial = next;
            }
            for (exps, coef) in partial {
                out.add_term(exps, coef);
            }
        }
        out
    }

    /// Value at `center` and a bound on `|p(x) - p(center)|` over the box
    /// `|x_i - center_i| ≤ radii_i`, from the shifted coefficients.
    pub fn box_spread(&self, center: &[f64], radii: &[f64]) -> (f64, f64) {
        let shifted = self.shift(center);
        let mut value = 0.0;
        let mut spread = 0.0;
        let mut magnitude = 0.0;
        for (e, &c) in &shifted.terms {
            if e.iter().all(|&k| k == 0) {
                value = c;
                continue;
            }
            let mut m = c.abs();
            for (r, &k) in radii.iter().zip(e) {
                if k > 0 {
                    m *= r.powi(k as i32);
                }
            }
            spread += m;
        }
        // Slack for the rounding in the shifted coefficients themselves.
        for (e, &c) in &self.terms {
            let mut m = c.abs();
            for ((x, r), &k) in center.iter().zip(radii).zip(e) {
                m *= (x.abs() + r.abs()).max(1.0).powi(k as i32);
            }
            magnitude += m;
        }
        (value, spread + 64.0 * f64::EPSILON * magnitude)
    }
}
