//! Sparse Fourier vector fields on the torus: Leray projection, the advection
//! term `v·∂w` in Fourier space, Sobolev norms and the two-mode trial fields
//! that realize the lower bound.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::lattice::LatticeVector;
use crate::numeric::pow_int_base;

/// Relative tolerance for the reality condition `v_{-k} = conj(v_k)`.
const REALITY_TOL: f64 = 1e-12;

/// A real, zero-mean vector field `Σ v_k e_k` with finitely many modes.
/// Both `k` and `-k` are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    d: usize,
    coeffs: BTreeMap<LatticeVector, Vec<Complex64>>,
}

fn cdot_real(c: &[Complex64], k: &[i64]) -> Complex64 {
    c.iter().zip(k).map(|(z, &x)| z * x as f64).sum()
}

fn norm_sq_c(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}

impl FourierField {
    pub fn zero(d: usize) -> Self {
        Self {
            d,
            coeffs: BTreeMap::new(),
        }
    }

    /// Builds a field from all of its modes and validates it.
    pub fn from_modes<I>(d: usize, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (LatticeVector, Vec<Complex64>)>,
    {
        let mut f = Self::zero(d);
        for (k, c) in modes {
            f.check_mode(&k, &c)?;
            if f.coeffs.insert(k.clone(), c).is_some() {
                return Err(invalid(format!("mode {k} given twice")));
            }
        }
        f.validate()?;
        Ok(f)
    }

    /// Sets `v_k = c` and `v_{-k} = conj(c)`.
    pub fn insert_pair(&mut self, k: LatticeVector, c: Vec<Complex64>) -> Result<()> {
        self.check_mode(&k, &c)?;
        let conj: Vec<Complex64> = c.iter().map(|z| z.conj()).collect();
        self.coeffs.insert(k.neg(), conj);
        self.coeffs.insert(k, c);
        Ok(())
    }

    fn check_mode(&self, k: &LatticeVector, c: &[Complex64]) -> Result<()> {
        if k.dim() != self.d || c.len() != self.d {
            return Err(invalid(format!("mode {k} does not have dimension {}", self.d)));
        }
        if k.is_zero() {
            return Err(invalid("a zero-mean field has no k = 0 coefficient"));
        }
        if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid(format!("non-finite coefficient at {k}")));
        }
        Ok(())
    }

    /// Checks `v_{-k} = conj(v_k)` for every stored mode.
    pub fn validate(&self) -> Result<()> {
        let scale = self.coeffs.values().map(|c| norm_sq_c(c)).fold(0.0, f64::max).sqrt();
        for (k, c) in &self.coeffs {
            let Some(m) = self.coeffs.get(&k.neg()) else {
                return Err(invalid(format!("mode {k} present without its conjugate")));
            };
            let gap: f64 = c.iter().zip(m).map(|(a, b)| (a - b.conj()).norm_sqr()).sum();
            if gap.sqrt() > REALITY_TOL * scale {
                return Err(invalid(format!("modes {k} and {} are not conjugate", k.neg())));
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, k: &LatticeVector) -> Option<&[Complex64]> {
        self.coeffs.get(k).map(|c| c.as_slice())
    }

    pub fn modes(&self) -> impl Iterator<Item = (&LatticeVector, &[Complex64])> {
        self.coeffs.iter().map(|(k, c)| (k, c.as_slice()))
    }

    /// Largest `|k·v_k| / (|k||v_k|)` over the modes.
    pub fn divergence_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let nc = norm_sq_c(c).sqrt();
                if nc == 0.0 {
                    0.0
                } else {
                    cdot_real(c, k.coords()).norm() / (k.norm() * nc)
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn is_divergence_free(&self, tol: f64) -> bool {
        self.divergence_defect() <= tol
    }

    pub fn scale(&self, s: f64) -> FourierField {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.clone(), c.iter().map(|z| z * s).collect()))
            .collect();
        Self { d: self.d, coeffs }
    }

    /// Text form: one line per mode, `k_1 … k_d  re_1 im_1 … re_d im_d`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, c) in &self.coeffs {
            let ks: Vec<String> = k.coords().iter().map(|x| x.to_string()).collect();
            let cs: Vec<String> = c.iter().map(|z| format!("{} {}", z.re, z.im)).collect();
            let _ = writeln!(out, "{}  {}", ks.join(" "), cs.join(" "));
        }
        out
    }

    /// Parses [`FourierField::to_text`] output. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_text(d: usize, text: &str) -> Result<Self> {
        let mut modes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 * d {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, found {}",
                    lineno + 1,
                    3 * d,
                    fields.len()
                )));
            }
            let bad = |what: &str, s: &str| Error::Parse(format!("line {}: bad {what} {s:?}", lineno + 1));
            let k = fields[..d]
                .iter()
                .map(|s| s.parse::<i64>().map_err(|_| bad("wavevector component", s)))
                .collect::<Result<Vec<_>>>()?;
            let nums = fields[d..]
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| bad("coefficient", s)))
                .collect::<Result<Vec<_>>>()?;
            let c = nums.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
            modes.push((LatticeVector::new(k)?, c));
        }
        Self::from_modes(d, modes)
    }
}

/// `c ↦ c - (k·c/|k|²) k` on every mode.
pub fn leray_project(field: &FourierField) -> FourierField {
    let coeffs = field
        .coeffs
        .iter()
        .map(|(k, c)| {
            let kc = k.coords();
            let s = cdot_real(c, kc) / k.norm_sq() as f64;
            let p = c.iter().zip(kc).map(|(z, &x)| z - s * x as f64).collect();
            (k.clone(), p)
        })
        .collect();
    FourierField { d: field.d, coeffs }
}

/// `(v·∂w)_k = i (2π)^{-d/2} Σ_h [v_h·(k-h)] w_{k-h}`.
///
/// Fails if the result would have a nonzero mean, which happens only when
/// `v` is not divergence-free.
pub fn advect(v: &FourierField, w: &FourierField) -> Result<FourierField> {
    if v.d != w.d {
        return Err(invalid("fields of different dimension"));
    }
    let d = v.d;
    let factor = Complex64::new(0.0, (2.0 * PI).powf(-(d as f64) / 2.0));
    let mut out: BTreeMap<LatticeVector, Vec<Complex64>> = BTreeMap::new();
    let mut mean = vec![Complex64::new(0.0, 0.0); d];
    let mut scale = 0.0;
    for (h, vh) in &v.coeffs {
        for (g, wg) in &w.coeffs {
            let s = cdot_real(vh, g.coords()) * factor;
            scale += norm_sq_c(vh).sqrt() * g.norm() * norm_sq_c(wg).sqrt();
            let k = h.add(g);
            let target = if k.is_zero() {
                &mut mean
            } else {
                out.entry(k).or_insert_with(|| vec![Complex64::new(0.0, 0.0); d])
            };
            for (t, z) in target.iter_mut().zip(wg) {
                *t += s * z;
            }
        }
    }
    if norm_sq_c(&mean).sqrt() > 1e-12 * scale {
        return Err(Error::Domain(
            "advection of a field that is not divergence-free has a nonzero mean".into(),
        ));
    }
    // Keep the reality condition exact: rebuild each -k from its partner.
    let keys: Vec<LatticeVector> = out.keys().cloned().collect();
    for k in keys {
        let m = k.neg();
        if k > m {
            let conj: Vec<Complex64> = out[&k].iter().map(|z| z.conj()).collect();
            out.insert(m, conj);
        }
    }
    out.retain(|_, c| c.iter().any(|z| *z != Complex64::new(0.0, 0.0)));
    Ok(FourierField { d, coeffs: out })
}

/// `‖v‖_n = (Σ |k|^{2n} |v_k|²)^{1/2}`.
pub fn sobolev_norm(field: &FourierField, n: f64) -> f64 {
    field
        .coeffs
        .iter()
        .map(|(k, c)| pow_int_base(k.norm_sq() as u64, n) * norm_sq_c(c))
        .sum::<f64>()
        .sqrt()
}

/// Amplitudes of the two-mode trial fields: `v` carries `(0, α, α̌)` at
/// `e_1`, `w` carries `(β, 0, β̌)` at `e_2`, both with conjugates at the
/// opposite modes. `α̌`, `β̌` have `d - 2` components.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialAmplitudes {
    pub alpha: Complex64,
    pub alpha_rest: Vec<Complex64>,
    pub beta: Complex64,
    pub beta_rest: Vec<Complex64>,
}

impl TrialAmplitudes {
    /// `α = 1`, `α̌ = 0`, and `β = 0`, `β̌ = e_1` for `d ≥ 3`; `α = β = 1` for `d = 2`.
    pub fn canonical(d: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let rest = d.saturating_sub(2);
        if d == 2 {
            Self {
                alpha: one,
                alpha_rest: vec![],
                beta: one,
                beta_rest: vec![],
            }
        } else {
            let mut beta_rest = vec![zero; rest];
            beta_rest[0] = one;
            Self {
                alpha: one,
                alpha_rest: vec![zero; rest],
                beta: zero,
                beta_rest,
            }
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {d}")));
        }
        if self.alpha_rest.len() != d - 2 || self.beta_rest.len() != d - 2 {
            return Err(invalid(format!("trailing amplitudes need {} components", d - 2)));
        }
        if self.alpha.norm_sqr() + norm_sq_c(&self.alpha_rest) == 0.0 {
            return Err(invalid("the amplitudes of v are all zero"));
        }
        if self.beta.norm_sqr() + norm_sq_c(&self.beta_rest) == 0.0 {
            return Err(invalid("the amplitudes of w are all zero"));
        }
        Ok(())
    }
}

/// The trial fields `(v, w)`.
pub fn trial_fields(d: usize, amps: &TrialAmplitudes) -> Result<(FourierField, FourierField)> {
    amps.check(d)?;
    let zero = Complex64::new(0.0, 0.0);
    let unit = |i: usize| {
        let mut c = vec![0i64; d];
        c[i] = 1;
        LatticeVector::new(c)
    };
    let mut a_vec = vec![zero, amps.alpha];
    a_vec.extend_from_slice(&amps.alpha_rest);
    let mut b_vec = vec![amps.beta, zero];
    b_vec.extend_from_slice(&amps.beta_rest);
    let mut v = FourierField::zero(d);
    v.insert_pair(unit(0)?, a_vec)?;
    let mut w = FourierField::zero(d);
    w.insert_pair(unit(1)?, b_vec)?;
    Ok((v, w))
}

/// Closed-form value of `‖L(v·∂w)‖_n / (‖v‖_n ‖w‖_{n+1})` for the trial fields:
/// `2^{n/2} (2π)^{-d/2} |α| ((|β|²/2 + |β̌|²) / ((|α|² + |α̌|²)(|β|² + |β̌|²)))^{1/2}`.
pub fn witness_closed_form(d: usize, n: f64, amps: &TrialAmplitudes) -> Result<f64> {
    amps.check(d)?;
    let a2 = amps.alpha.norm_sqr();
    let ar = norm_sq_c(&amps.alpha_rest);
    let b2 = amps.beta.norm_sqr();
    let br = norm_sq_c(&amps.beta_rest);
    let sq = 2f64.powf(n) / (2.0 * PI).powf(d as f64) * a2 * (0.5 * b2 + br) / ((a2 + ar) * (b2 + br));
    Ok(sq.sqrt())
}

/// Result of [`lower_bound_witness`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessReport {
    /// `‖L(v·∂w)‖_n / (‖v‖_n ‖w‖_{n+1})`, computed from the fields.
    pub ratio: f64,
    pub closed_form: f64,
    pub rel_diff: f64,
}

/// Builds the trial fields and evaluates their ratio through
/// [`advect`], [`leray_project`] and [`sobolev_norm`].
pub fn lower_bound_witness(d: usize, n: f64, amps: &TrialAmplitudes) -> Result<WitnessReport> {
    let (v, w) = trial_fields(d, amps)?;
    let adv = leray_project(&advect(&v, &w)?);
    let ratio = sobolev_norm(&adv, n) / (sobolev_norm(&v, n) * sobolev_norm(&w, n + 1.0));
    let closed_form = witness_closed_form(d, n, amps)?;
    Ok(WitnessReport {
        ratio,
        closed_form,
        rel_diff: (ratio - closed_form).abs() / closed_form,
    })
}
