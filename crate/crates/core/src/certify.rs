//! The full bound computation: symmetry-reduced search for `sup K_m`,
//! domination of the region beyond the search radius by the asymptotic
//! expansion, and the constants `K⁺_n`, `K⁻_n`.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{remainder_extrema, ExtremaOptions, RemainderExtrema};
use crate::lattice::{canonical_ball, LatticeVector, Radius};
use crate::numeric::{round_down_sig, round_up_sig};
use crate::sums::{build_q, extremize_q, k_m_unchecked, vv_nt, z_n, SphereSearchOptions, SumConfig};
use crate::tail::delta_k;

/// Significant digits used when presenting `K⁺` (rounded up) and `K⁻` (rounded down).
pub const PRESENTATION_DIGITS: u32 = 3;

/// Extremes of `K_m` over the canonical vectors with `s ≤ |k| < s + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellStats {
    pub shell: u64,
    pub count: usize,
    pub max: f64,
    pub argmax: LatticeVector,
    pub min: f64,
    pub argmin: LatticeVector,
}

/// Outcome of [`search_sup_km`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub max: f64,
    pub argmax: LatticeVector,
    pub evaluated: usize,
    pub shells: Vec<ShellStats>,
}

fn better(v: f64, k: &LatticeVector, best: f64, best_k: &LatticeVector) -> bool {
    v > best || (v == best && k < best_k)
}

/// Exact maximum of `K_m` over nonzero `|k| < search_radius`, evaluated on
/// canonical representatives only. Ties go to the lexicographically smaller
/// canonical vector, so the result does not depend on the thread count.
pub fn search_sup_km(cfg: &SumConfig, search_radius: f64) -> Result<SearchResult> {
    let two_rho = 2.0 * cfg.rho().value();
    if !(search_radius >= two_rho) {
        return Err(invalid(format!(
            "search radius {search_radius} must be at least 2*rho = {two_rho}"
        )));
    }
    let reps = canonical_ball(cfg.d(), Radius::new(search_radius)?)?;
    if reps.is_empty() {
        return Err(invalid("search region contains no lattice vectors"));
    }
    let values: Vec<f64> = reps
        .par_iter()
        .with_min_len(8)
        .map(|k| k_m_unchecked(k.coords(), cfg))
        .collect();

    let mut best = f64::NEG_INFINITY;
    let mut best_k = reps[0].clone();
    let mut shells: Vec<ShellStats> = Vec::new();
    for (k, &v) in reps.iter().zip(&values) {
        if better(v, k, best, &best_k) {
            best = v;
            best_k = k.clone();
        }
        let shell = (k.norm_sq() as f64).sqrt().floor() as u64;
        let shell = if (shell + 1) as i128 * (shell + 1) as i128 <= k.norm_sq() {
            shell + 1
        } else if shell as i128 * shell as i128 > k.norm_sq() {
            shell - 1
        } else {
            shell
        };
        let idx = match shells.binary_search_by_key(&shell, |s| s.shell) {
            Ok(i) => i,
            Err(i) => {
                shells.insert(
                    i,
                    ShellStats {
                        shell,
                        count: 0,
                        max: f64::NEG_INFINITY,
                        argmax: k.clone(),
                        min: f64::INFINITY,
                        argmin: k.clone(),
                    },
                );
                i
            }
        };
        let s = &mut shells[idx];
        s.count += 1;
        if better(v, k, s.max, &s.argmax) {
            s.max = v;
            s.argmax = k.clone();
        }
        if v < s.min || (v == s.min && k < &s.argmin) {
            s.min = v;
            s.argmin = k.clone();
        }
    }
    Ok(SearchResult {
        max: best,
        argmax: best_k,
        evaluated: reps.len(),
        shells,
    })
}

/// Enclosure of `min/max Q_{nℓ}` on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QCoefficient {
    pub ell: usize,
    /// Lower bound for the minimum, `q_{nℓ}`.
    pub min_lower: f64,
    /// Upper bound for the maximum, `Q_{nℓ}`.
    pub max_upper: f64,
    pub max_attained: f64,
    pub argmax: Vec<f64>,
}

/// The coefficients of the sandwich valid for `|k| ≥ 2ρ`:
/// `Z + Σ q_ℓ|k|^{-ℓ} + v|k|^{-t} ≤ K_m(k) ≤ Z + Σ Q_ℓ|k|^{-ℓ} + V|k|^{-t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticModel {
    pub d: usize,
    pub n: f64,
    pub rho: f64,
    pub t: usize,
    pub z_n: f64,
    pub q: Vec<QCoefficient>,
    pub v: f64,
    pub big_v: f64,
    pub remainder: RemainderExtrema,
}

/// Upper model value at `|k|` and its supremum over `[|k|, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBound {
    pub value: f64,
    pub sup_beyond: f64,
}

impl AsymptoticModel {
    pub fn build(cfg: &SumConfig, t: usize, extrema: &ExtremaOptions, sphere: &SphereSearchOptions) -> Result<Self> {
        if t % 2 == 1 || t < 2 {
            return Err(invalid(format!("t must be even and at least 2, got {t}")));
        }
        let remainder = remainder_extrema(cfg.n(), t, extrema)?;
        let mut q = Vec::new();
        for ell in (2..t).step_by(2) {
            let poly = build_q(cfg, ell)?;
            let ex = extremize_q(&poly, sphere)?;
            q.push(QCoefficient {
                ell,
                min_lower: ex.min_lower,
                max_upper: ex.max_upper,
                max_attained: ex.max_attained,
                argmax: ex.argmax,
            });
        }
        let (v, big_v) = vv_nt(cfg, t, &remainder)?;
        Ok(Self {
            d: cfg.d(),
            n: cfg.n(),
            rho: cfg.rho().value(),
            t,
            z_n: z_n(cfg),
            q,
            v,
            big_v,
            remainder,
        })
    }

    /// `Z + Σ q_ℓ x^{-ℓ} + v x^{-t}`.
    pub fn lower_at(&self, x: f64) -> f64 {
        let mut s = self.z_n;
        for c in &self.q {
            s += c.min_lower * x.powi(-(c.ell as i32));
        }
        s + self.v * x.powi(-(self.t as i32))
    }

    /// `Z + Σ Q_ℓ x^{-ℓ} + max(V, 0) x^{-t}`.
    pub fn upper_at(&self, x: f64) -> f64 {
        let mut s = self.z_n;
        for c in &self.q {
            s += c.max_upper * x.powi(-(c.ell as i32));
        }
        s + self.big_v.max(0.0) * x.powi(-(self.t as i32))
    }

    /// The nonincreasing majorant `Z + Σ max(Q_ℓ, 0) x^{-ℓ} + max(V, 0) x^{-t}`,
    /// whose value at `x` bounds the upper model on all of `[x, ∞)`.
    pub fn majorant_at(&self, x: f64) -> f64 {
        let mut s = self.z_n;
        for c in &self.q {
            s += c.max_upper.max(0.0) * x.powi(-(c.ell as i32));
        }
        s + self.big_v.max(0.0) * x.powi(-(self.t as i32))
    }
}

/// Evaluates the upper asymptotic model at `k_norm ≥ 2ρ`.
pub fn asymptotic_upper(model: &AsymptoticModel, k_norm: f64) -> Result<AsymptoticBound> {
    if !(k_norm >= 2.0 * model.rho) {
        return Err(invalid(format!(
            "asymptotic bound needs |k| >= 2*rho = {}, got {k_norm}",
            2.0 * model.rho
        )));
    }
    Ok(AsymptoticBound {
        value: model.upper_at(k_norm),
        sup_beyond: model.majorant_at(k_norm),
    })
}

/// `K⁻_n = 2^{n/2} U_d / (2π)^{d/2}` with `U_2 = 2^{-1/2}` and `U_d = 1` for
/// `d ≥ 3`, the ratio attained by the two-mode trial fields.
pub fn k_minus(d: usize, n: f64) -> Result<f64> {
    if d < 2 {
        return Err(invalid(format!("dimension must be at least 2, got {d}")));
    }
    let u = if d == 2 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
    Ok(2f64.powf(n / 2.0) * u / (2.0 * PI).powf(d as f64 / 2.0))
}

/// `K⁺ = (2π)^{-d/2} √(sup KK)`.
pub fn k_plus_from_sup(d: usize, sup_kk_upper: f64) -> f64 {
    sup_kk_upper.sqrt() / (2.0 * PI).powf(d as f64 / 2.0)
}

/// Default cutoff: 20 for `d = 3, n = 2`, otherwise 10, raised when needed
/// so that `ρ > 2√d`.
pub fn default_rho(d: usize, n: f64) -> f64 {
    let base = if d == 3 && n == 2.0 { 20.0 } else { 10.0 };
    let min = (2.0 * (d as f64).sqrt()).floor() + 1.0;
    f64::max(base, min)
}

/// Inputs of [`certify_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub d: usize,
    pub n: f64,
    pub rho: Radius,
    pub t: usize,
    /// Defaults to `2ρ`.
    pub search_radius: Option<f64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub extrema: ExtremaOptions,
    pub sphere: SphereSearchOptions,
}

impl CertifyOptions {
    pub fn new(d: usize, n: f64) -> Self {
        let rho = Radius::new(default_rho(d, n)).expect("default cutoff is positive");
        Self {
            d,
            n,
            rho,
            t: 6,
            search_radius: None,
            threads: None,
            extrema: ExtremaOptions::default(),
            sphere: SphereSearchOptions::default(),
        }
    }

    pub fn with_rho(mut self, rho: Radius) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    pub fn with_search_radius(mut self, r: f64) -> Self {
        self.search_radius = Some(r);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn search_radius(&self) -> f64 {
        self.search_radius.unwrap_or(2.0 * self.rho.value())
    }
}

/// Everything computed along the way, kept for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub model: AsymptoticModel,
    pub asymptotic_at_search_radius: f64,
    pub evaluated: usize,
    pub shells: Vec<ShellStats>,
    pub enclosure_width: f64,
}

/// `K⁻_n ≤ K_n ≤ K⁺_n` with the data behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub d: usize,
    pub n: f64,
    pub rho: f64,
    pub t: usize,
    pub search_radius: f64,
    pub sup_km: f64,
    pub argmax: LatticeVector,
    pub sup_kk_lower: f64,
    pub sup_kk_upper: f64,
    pub delta_k: f64,
    pub z_n: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub k_plus_rounded: String,
    pub k_minus_rounded: String,
    pub asymptotic_bound: f64,
    pub diagnostics: Diagnostics,
    pub runtime_ms: u64,
}

impl BoundCertificate {
    /// `K⁻/K⁺` from the presented (rounded) values, truncated to three digits.
    pub fn rounded_ratio(&self) -> String {
        let kp: f64 = self.k_plus_rounded.parse().unwrap_or(self.k_plus);
        let km: f64 = self.k_minus_rounded.parse().unwrap_or(self.k_minus);
        round_down_sig(km / kp, PRESENTATION_DIGITS).0
    }
}

/// Computes the certificate. Fails with [`Error::InconclusiveSearchRadius`]
/// when the asymptotic bound beyond the search radius exceeds the search
/// maximum.
pub fn certify_bounds(opts: &CertifyOptions) -> Result<BoundCertificate> {
    match opts.threads {
        Some(0) => Err(invalid("thread count must be positive")),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::ResourceExhausted(format!("thread pool: {e}")))?;
            pool.install(|| certify_inner(opts))
        }
        None => certify_inner(opts),
    }
}

fn certify_inner(opts: &CertifyOptions) -> Result<BoundCertificate> {
    let start = Instant::now();
    let d = opts.d;
    let n = opts.n;
    if opts.t % 2 == 1 || opts.t < 2 {
        return Err(invalid(format!("t must be even and at least 2, got {}", opts.t)));
    }
    let cfg = SumConfig::new(d, n, opts.rho)?;
    let search_radius = opts.search_radius();
    let rho = opts.rho.value();
    if !(search_radius >= 2.0 * rho) {
        return Err(invalid(format!(
            "search radius {search_radius} must be at least 2*rho = {}",
            2.0 * rho
        )));
    }
    let dk = delta_k(d, n, rho)?;
    let model = AsymptoticModel::build(&cfg, opts.t, &opts.extrema, &opts.sphere)?;
    let outer = asymptotic_upper(&model, search_radius)?;
    let search = search_sup_km(&cfg, search_radius)?;
    if outer.sup_beyond > search.max {
        return Err(Error::InconclusiveSearchRadius {
            search_radius,
            asymptotic_bound: outer.sup_beyond,
            search_max: search.max,
        });
    }
    let sup_kk_upper = search.max + dk;
    let k_plus = k_plus_from_sup(d, sup_kk_upper);
    let k_minus = k_minus(d, n)?;
    Ok(BoundCertificate {
        d,
        n,
        rho,
        t: opts.t,
        search_radius,
        sup_km: search.max,
        argmax: search.argmax,
        sup_kk_lower: search.max,
        sup_kk_upper,
        delta_k: dk,
        z_n: model.z_n,
        k_plus,
        k_minus,
        k_plus_rounded: round_up_sig(k_plus, PRESENTATION_DIGITS).0,
        k_minus_rounded: round_down_sig(k_minus, PRESENTATION_DIGITS).0,
        asymptotic_bound: outer.sup_beyond,
        diagnostics: Diagnostics {
            asymptotic_at_search_radius: outer.value,
            model,
            evaluated: search.evaluated,
            shells: search.shells,
            enclosure_width: sup_kk_upper - search.max,
        },
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}
