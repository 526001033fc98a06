use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use nsconst::fields::{TrialAmplitudes, WitnessReport};
use nsconst::lattice::LatticeVector;
use nsconst::sums::Interval;
use nsconst::BoundCertificate;

use crate::error::Result;
use crate::golden::{
    self, matches_significant, GoldenRow, Tolerance, ARGMAX_TOLERANCE, BOUND_TOLERANCE, ENCLOSURE_SOURCE,
    SUP_TOLERANCE, TABLE_SOURCE,
};
use crate::Format;

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| crate::CliError::Serialize(e.to_string()))
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub certificates: Vec<BoundCertificate>,
}

#[derive(Serialize)]
struct CertificateCsv<'a> {
    d: usize,
    n: f64,
    rho: f64,
    t: usize,
    search_radius: f64,
    sup_km: f64,
    argmax: String,
    sup_kk_lower: f64,
    sup_kk_upper: f64,
    delta_k: f64,
    z_n: f64,
    asymptotic_bound: f64,
    k_minus: f64,
    k_plus: f64,
    k_minus_rounded: &'a str,
    k_plus_rounded: &'a str,
    runtime_ms: u64,
}

impl CertifyReport {
    /// JSON is an array of full certificates.
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(&self.certificates),
            Format::Csv => {
                let rows: Vec<CertificateCsv> = self
                    .certificates
                    .iter()
                    .map(|c| CertificateCsv {
                        d: c.d,
                        n: c.n,
                        rho: c.rho,
                        t: c.t,
                        search_radius: c.search_radius,
                        sup_km: c.sup_km,
                        argmax: c.argmax.to_string(),
                        sup_kk_lower: c.sup_kk_lower,
                        sup_kk_upper: c.sup_kk_upper,
                        delta_k: c.delta_k,
                        z_n: c.z_n,
                        asymptotic_bound: c.asymptotic_bound,
                        k_minus: c.k_minus,
                        k_plus: c.k_plus,
                        k_minus_rounded: &c.k_minus_rounded,
                        k_plus_rounded: &c.k_plus_rounded,
                        runtime_ms: c.runtime_ms,
                    })
                    .collect();
                to_csv(&rows)
            }
            Format::Human => {
                let mut s = String::new();
                for (i, c) in self.certificates.iter().enumerate() {
                    if i > 0 {
                        s.push('\n');
                    }
                    let _ = writeln!(
                        s,
                        "d={} n={} rho={} t={} search radius {}",
                        c.d, c.n, c.rho, c.t, c.search_radius
                    );
                    let _ = writeln!(
                        s,
                        "  sup K_m       {} at {} ({} canonical vectors)",
                        c.sup_km, c.argmax, c.diagnostics.evaluated
                    );
                    let _ = writeln!(s, "  delta K       {:e}", c.delta_k);
                    let _ = writeln!(s, "  sup KK in     [{}, {}]", c.sup_kk_lower, c.sup_kk_upper);
                    let _ = writeln!(s, "  Z_n           {}", c.z_n);
                    let _ = writeln!(s, "  outer bound   {} (beyond the search radius)", c.asymptotic_bound);
                    let _ = writeln!(s, "  K-            {}  ({})", c.k_minus_rounded, c.k_minus);
                    let _ = writeln!(s, "  K+            {}  ({})", c.k_plus_rounded, c.k_plus);
                    let _ = writeln!(s, "  K-/K+         {}", c.rounded_ratio());
                    let _ = writeln!(s, "  runtime       {} ms", c.runtime_ms);
                }
                Ok(s)
            }
        }
    }
}

/// Comparison of one computed quantity with its published value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub field: &'static str,
    pub computed: String,
    pub published: String,
    pub tolerance: Tolerance,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub n: f64,
    pub k_minus: String,
    pub k_plus: String,
    pub ratio: String,
    pub sup_km: f64,
    pub argmax: LatticeVector,
    pub delta_k: f64,
    pub certificate: BoundCertificate,
    pub published: Option<GoldenRow>,
    pub checks: Vec<Check>,
}

fn string_check(field: &'static str, computed: &str, published: &str) -> Check {
    Check {
        field,
        computed: computed.to_string(),
        published: published.to_string(),
        tolerance: BOUND_TOLERANCE,
        pass: computed == published,
    }
}

fn digits_check(field: &'static str, computed: f64, published: f64) -> Check {
    let Tolerance::SignificantDigits(digits) = SUP_TOLERANCE else {
        unreachable!("sup tolerance is a digit count")
    };
    Check {
        field,
        computed: computed.to_string(),
        published: published.to_string(),
        tolerance: SUP_TOLERANCE,
        pass: matches_significant(computed, published, digits),
    }
}

impl TableRow {
    pub fn new(cert: BoundCertificate) -> Self {
        let published = golden::lookup(cert.d, cert.n).copied();
        let ratio = cert.rounded_ratio();
        let mut checks = Vec::new();
        if let Some(g) = &published {
            checks.push(string_check("k_minus", &cert.k_minus_rounded, g.k_minus));
            checks.push(string_check("k_plus", &cert.k_plus_rounded, g.k_plus));
            checks.push(string_check("ratio", &ratio, g.ratio));
            checks.push(digits_check("sup_km", cert.sup_km, g.sup_km));
            let expected = LatticeVector::new(g.argmax.to_vec()).expect("golden argmax is three-dimensional");
            checks.push(Check {
                field: "argmax",
                computed: cert.argmax.to_string(),
                published: expected.to_string(),
                tolerance: ARGMAX_TOLERANCE,
                pass: cert.argmax == expected,
            });
            checks.push(digits_check("delta_k", cert.delta_k, g.delta_k));
        }
        Self {
            n: cert.n,
            k_minus: cert.k_minus_rounded.clone(),
            k_plus: cert.k_plus_rounded.clone(),
            ratio,
            sup_km: cert.sup_km,
            argmax: cert.argmax.clone(),
            delta_k: cert.delta_k,
            certificate: cert,
            published,
            checks,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.published.is_none() {
            "computed"
        } else if self.checks.iter().all(|c| c.pass) {
            "ok"
        } else {
            "MISMATCH"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub d: usize,
    pub rows: Vec<TableRow>,
}

#[derive(Serialize)]
struct Sources {
    bounds: &'static str,
    enclosures: &'static str,
}

#[derive(Serialize)]
struct TableJson<'a> {
    d: usize,
    sources: Sources,
    mismatches: usize,
    rows: &'a [TableRow],
}

#[derive(Serialize)]
struct TableCsv<'a> {
    n: f64,
    k_minus: &'a str,
    k_plus: &'a str,
    ratio: &'a str,
    sup_km: f64,
    argmax: String,
    delta_k: f64,
    status: &'static str,
}

impl TableReport {
    pub fn mismatch_count(&self) -> usize {
        self.rows.iter().flat_map(|r| &r.checks).filter(|c| !c.pass).count()
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(&TableJson {
                d: self.d,
                sources: Sources {
                    bounds: TABLE_SOURCE,
                    enclosures: ENCLOSURE_SOURCE,
                },
                mismatches: self.mismatch_count(),
                rows: &self.rows,
            }),
            Format::Csv => {
                let rows: Vec<TableCsv> = self
                    .rows
                    .iter()
                    .map(|r| TableCsv {
                        n: r.n,
                        k_minus: &r.k_minus,
                        k_plus: &r.k_plus,
                        ratio: &r.ratio,
                        sup_km: r.sup_km,
                        argmax: r.argmax.to_string(),
                        delta_k: r.delta_k,
                        status: r.status(),
                    })
                    .collect();
                to_csv(&rows)
            }
            Format::Human => {
                let mut s = String::new();
                let _ = writeln!(s, "d = {}", self.d);
                let _ = writeln!(
                    s,
                    "{:>6} {:>7} {:>7} {:>7} {:>14} {:>10} {:>12}  status",
                    "n", "K-", "K+", "K-/K+", "sup K_m", "argmax", "delta K"
                );
                for r in &self.rows {
                    let _ = writeln!(
                        s,
                        "{:>6} {:>7} {:>7} {:>7} {:>14.6} {:>10} {:>12.5e}  {}",
                        r.n,
                        r.k_minus,
                        r.k_plus,
                        r.ratio,
                        r.sup_km,
                        r.argmax.to_string(),
                        r.delta_k,
                        r.status()
                    );
                }
                let failed: Vec<(f64, &Check)> = self
                    .rows
                    .iter()
                    .flat_map(|r| r.checks.iter().map(move |c| (r.n, c)))
                    .filter(|(_, c)| !c.pass)
                    .collect();
                if !failed.is_empty() {
                    let _ = writeln!(s, "\ndifferences from published values:");
                    for (n, c) in failed {
                        let _ = writeln!(
                            s,
                            "  n={n} {}: computed {}, published {}",
                            c.field, c.computed, c.published
                        );
                    }
                }
                Ok(s)
            }
        }
    }
}

fn fmt_complex(z: &Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

#[derive(Serialize)]
struct WitnessCsv {
    d: usize,
    n: f64,
    ratio: f64,
    closed_form: f64,
    rel_diff: f64,
    k_minus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessOutput {
    pub d: usize,
    pub n: f64,
    pub alpha: String,
    pub alpha_rest: Vec<String>,
    pub beta: String,
    pub beta_rest: Vec<String>,
    pub ratio: f64,
    pub closed_form: f64,
    pub rel_diff: f64,
    pub k_minus: f64,
}

impl WitnessOutput {
    pub fn new(d: usize, n: f64, amps: &TrialAmplitudes, r: &WitnessReport, k_minus: f64) -> Self {
        Self {
            d,
            n,
            alpha: fmt_complex(&amps.alpha),
            alpha_rest: amps.alpha_rest.iter().map(fmt_complex).collect(),
            beta: fmt_complex(&amps.beta),
            beta_rest: amps.beta_rest.iter().map(fmt_complex).collect(),
            ratio: r.ratio,
            closed_form: r.closed_form,
            rel_diff: r.rel_diff,
            k_minus,
        }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => to_csv(&[WitnessCsv {
                d: self.d,
                n: self.n,
                ratio: self.ratio,
                closed_form: self.closed_form,
                rel_diff: self.rel_diff,
                k_minus: self.k_minus,
            }]),
            Format::Human => {
                let mut s = String::new();
                let _ = writeln!(s, "d={} n={}", self.d, self.n);
                let _ = writeln!(s, "  alpha         {} {:?}", self.alpha, self.alpha_rest);
                let _ = writeln!(s, "  beta          {} {:?}", self.beta, self.beta_rest);
                let _ = writeln!(s, "  ratio         {}", self.ratio);
                let _ = writeln!(s, "  closed form   {}", self.closed_form);
                let _ = writeln!(s, "  rel. diff     {:e}", self.rel_diff);
                let _ = writeln!(s, "  K-            {}", self.k_minus);
                Ok(s)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumsReport {
    pub d: usize,
    pub n: f64,
    pub rho: f64,
    pub k: LatticeVector,
    pub k_m: f64,
    pub z_n: f64,
    pub delta_k: f64,
    pub direct: Option<Interval>,
}

#[derive(Serialize)]
struct SumsCsv {
    d: usize,
    n: f64,
    rho: f64,
    k: String,
    k_m: f64,
    z_n: f64,
    delta_k: f64,
    direct_lower: Option<f64>,
    direct_upper: Option<f64>,
}

impl SumsReport {
    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => to_json(self),
            Format::Csv => to_csv(&[SumsCsv {
                d: self.d,
                n: self.n,
                rho: self.rho,
                k: self.k.to_string(),
                k_m: self.k_m,
                z_n: self.z_n,
                delta_k: self.delta_k,
                direct_lower: self.direct.map(|i| i.lower),
                direct_upper: self.direct.map(|i| i.upper),
            }]),
            Format::Human => {
                let mut s = String::new();
                let _ = writeln!(s, "d={} n={} rho={} k={}", self.d, self.n, self.rho, self.k);
                let _ = writeln!(s, "  K_m(k)        {}", self.k_m);
                let _ = writeln!(s, "  Z_n           {}", self.z_n);
                let _ = writeln!(s, "  delta K       {:e}", self.delta_k);
                if let Some(i) = self.direct {
                    let _ = writeln!(s, "  KK(k) in      [{}, {}]", i.lower, i.upper);
                }
                Ok(s)
            }
        }
    }
}
