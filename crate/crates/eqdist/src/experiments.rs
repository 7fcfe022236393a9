//! Desk-scale experiments: the MPZ discrepancy sweep over densely
//! divisible moduli, the Katz-Sato-Tate short-interval equidistribution
//! test for Kloosterman angles, and grid-driven bound audits. Reports are
//! deterministic: fixed iteration order, Kahan-compensated accumulation,
//! results merged in index order regardless of the worker count.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::arith::{crt_combine, eq_eval_frac, gcd_u64, gcd_with_modulus, FactoredModulus};
use crate::completion::{incomplete_sum, make_cutoff, CutoffShape, SmoothCutoff};
use crate::densediv::{enumerate_moduli, ModuliInterval, ModuliMode};
use crate::error::{precondition, Error, Result};
use crate::exponents::Rat;
use crate::expsum::{
    complete_phase_sum, composite_correlation, kf_table, kl_correlation, two_var_sum,
    vdc_estimate_phase, CorrelationForm, HkCache, KfNormalization, KfParams, TwoVarSumSpec,
};
use crate::poly::RationalPhase;
use crate::report::ExperimentReport;
use crate::sieve;

/// Worker count: `EQDIST_THREADS` override, else the machine's parallelism.
pub fn thread_count() -> usize {
    if let Ok(v) = std::env::var("EQDIST_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Order-preserving parallel map; the output index matches the input
/// index, so downstream accumulation is deterministic.
pub fn parallel_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let workers = thread_count().min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut out: Vec<Option<U>> = Vec::with_capacity(items.len());
    out.resize_with(items.len(), || None);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<&mut Option<U>>> =
        out.iter_mut().map(std::sync::Mutex::new).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let v = f(&items[i]);
                **slots[i].lock().unwrap() = Some(v);
            });
        }
    });
    drop(slots);
    out.into_iter().map(|v| v.expect("worker filled slot")).collect()
}

/// Kahan-compensated accumulator for deterministic sums.
#[derive(Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Configuration of one MPZ discrepancy sweep.
#[derive(Debug, Clone)]
pub struct MpzExperimentConfig {
    /// Window parameter: the sweep sums `Λ` over `[x, 2x]`.
    pub x: u64,
    pub varpi: Rat,
    pub delta: Rat,
    pub multiplicity: u32,
    /// Seed residue: `a_q` is CRT-composed from `a mod p` over `p | q`.
    pub residue_seed: i64,
    pub mode: ModuliMode,
    /// Prime interval for the moduli set (open); `None` means `(1, ∞)`.
    pub interval: Option<(f64, f64)>,
    /// Normalization exponents `A`: the report carries `D·(log x)^A / x`.
    pub norm_exponents: Vec<u32>,
    /// Drop moduli whose `D₀`-smooth part exceeds `exp(log^{2/3} x)`, with
    /// `D₀ = exp(log^{1/3} x)`. Off by default: at desk scale `D₀ < 10`
    /// and the filter is a proof technicality.
    pub filter_exceptional: bool,
}

#[derive(Debug, Clone)]
pub struct MpzOutcome {
    pub report: ExperimentReport,
    /// `D = Σ_q |Δ(Λ 1_{[x,2x]}; a_q (q))|`.
    pub total_discrepancy: f64,
    /// `T = Σ_q (1/φ(q)) Σ_{(n,q)=1} Λ(n)`.
    pub trivial_comparator: f64,
    pub ratio: f64,
    pub moduli_count: usize,
    pub skipped_non_coprime: usize,
}

pub fn run_mpz(config: &MpzExperimentConfig) -> Result<MpzOutcome> {
    if config.x < 4 || config.x > 10_000_000 {
        return Err(precondition("x must lie in [4, 10⁷]"));
    }
    let x = config.x;
    let varpi = config.varpi.to_f64().ok_or(Error::Range("varpi"))?;
    let delta = config.delta.to_f64().ok_or(Error::Range("delta"))?;
    let q_limit = (x as f64).powf(0.5 + 2.0 * varpi).floor() as u64;
    let y = (x as f64).powf(delta).max(1.0);
    let (lo, hi) = config.interval.unwrap_or((1.0, f64::INFINITY));
    let mut moduli = enumerate_moduli(
        &ModuliInterval::new(lo, hi, q_limit.max(1))?,
        config.multiplicity,
        y,
        config.mode,
    )?;
    let mut filtered_exceptional = 0usize;
    if config.filter_exceptional {
        let log_x = (x as f64).ln();
        let d0 = log_x.powf(1.0 / 3.0).exp();
        let cap = log_x.powf(2.0 / 3.0).exp();
        let before = moduli.len();
        moduli.retain(|q| {
            let small_part: f64 = q
                .primes()
                .filter(|&p| (p as f64) <= d0)
                .map(|p| p as f64)
                .product();
            small_part <= cap
        });
        filtered_exceptional = before - moduli.len();
    }
    let lambda = sieve::von_mangoldt_range(x, 2 * x);

    struct PerModulus {
        q: u64,
        result: Option<(u64, f64, f64)>, // (a_q, delta, coprime_mean)
    }
    let rows: Vec<PerModulus> = parallel_map(&moduli, |q| {
        let qv = q.value();
        if gcd_with_modulus(config.residue_seed, qv) != 1 {
            return PerModulus { q: qv, result: None };
        }
        // CRT-compose a_q from the per-prime residues a mod p
        let residues: Vec<(u64, u64)> = q
            .primes()
            .map(|p| (config.residue_seed.rem_euclid(p as i64) as u64, p))
            .collect();
        let (a_q, modulus) = crt_combine(&residues);
        debug_assert_eq!(modulus, qv);
        debug_assert_eq!(a_q, config.residue_seed.rem_euclid(qv as i64) as u64);

        let mut coprime_class = vec![true; qv as usize];
        for p in q.primes() {
            let mut r = 0usize;
            while r < qv as usize {
                coprime_class[r] = false;
                r += p as usize;
            }
        }
        let mut in_class = KahanSum::default();
        let mut coprime = KahanSum::default();
        let mut r = (x % qv) as usize;
        for &v in &lambda {
            if v != 0.0 {
                if r as u64 == a_q {
                    in_class.add(v);
                }
                if coprime_class[r] {
                    coprime.add(v);
                }
            }
            r += 1;
            if r == qv as usize {
                r = 0;
            }
        }
        let phi = q.euler_phi() as f64;
        let mean = coprime.value() / phi;
        PerModulus { q: qv, result: Some((a_q, in_class.value() - mean, mean)) }
    });

    let mut report = ExperimentReport::new("mpz");
    report.meta("x", x);
    report.meta("varpi", &config.varpi);
    report.meta("delta", &config.delta);
    report.meta("i", config.multiplicity);
    report.meta("a", config.residue_seed);
    report.meta("mode", format!("{:?}", config.mode));
    report.meta("q_limit", q_limit);
    report.meta("y", format!("{y:.6}"));
    report.columns = vec![
        "q".into(),
        "a_q".into(),
        "discrepancy".into(),
        "abs_discrepancy".into(),
        "coprime_mean".into(),
    ];

    let mut d_total = KahanSum::default();
    let mut t_total = KahanSum::default();
    let mut skipped = 0usize;
    for row in &rows {
        match row.result {
            None => skipped += 1,
            Some((a_q, delta_q, mean)) => {
                d_total.add(delta_q.abs());
                t_total.add(mean);
                report.rows.push(vec![
                    row.q.to_string(),
                    a_q.to_string(),
                    format!("{delta_q:.9}"),
                    format!("{:.9}", delta_q.abs()),
                    format!("{mean:.9}"),
                ]);
            }
        }
    }
    let d = d_total.value();
    let t = t_total.value();
    let ratio = if t > 0.0 { d / t } else { f64::NAN };
    report.summary("D", format!("{d:.9}"));
    report.summary("T", format!("{t:.9}"));
    report.summary("ratio", format!("{ratio:.9}"));
    report.summary("moduli", rows.len() - skipped);
    report.summary("skipped_non_coprime", skipped);
    if config.filter_exceptional {
        report.summary("filtered_exceptional", filtered_exceptional);
    }
    for &a in &config.norm_exponents {
        let norm = d * (x as f64).ln().powi(a as i32) / x as f64;
        report.summary(&format!("normalized_A{a}"), format!("{norm:.9}"));
    }
    Ok(MpzOutcome {
        report,
        total_discrepancy: d,
        trivial_comparator: t,
        ratio,
        moduli_count: rows.len() - skipped,
        skipped_non_coprime: skipped,
    })
}

// ---------------------------------------------------------------------------
// Sato-Tate angles

/// CDF of the Sato-Tate measure `(2/π) sin²θ dθ` on `[0, π]`.
pub fn sato_tate_cdf(theta: f64) -> f64 {
    let t = theta.clamp(0.0, std::f64::consts::PI);
    (t - (2.0 * t).sin() / 2.0) / std::f64::consts::PI
}

const ST2_GRID: usize = 2000;

/// CDF of the pushforward of `μ_ST × μ_ST` under
/// `(θ, θ') ↦ acos(cos θ · cos θ')`, tabulated by composite Simpson
/// integration on a 2000-point grid and cached (in memory and on disk).
pub fn sato_tate2_cdf(theta: f64) -> f64 {
    static GRID: OnceLock<Vec<f64>> = OnceLock::new();
    let grid = GRID.get_or_init(|| {
        let cache_path = std::env::temp_dir().join("eqdist-mu-st2-grid-v1.txt");
        if let Ok(text) = std::fs::read_to_string(&cache_path) {
            let vals: Vec<f64> = text.lines().filter_map(|l| l.parse().ok()).collect();
            if vals.len() == ST2_GRID + 1 {
                return vals;
            }
        }
        let vals = compute_st2_grid();
        let text: String = vals.iter().map(|v| format!("{v:.17e}\n")).collect();
        let _ = std::fs::write(&cache_path, text);
        vals
    });
    let pi = std::f64::consts::PI;
    let t = theta.clamp(0.0, pi);
    let pos = t / pi * ST2_GRID as f64;
    let idx = (pos.floor() as usize).min(ST2_GRID - 1);
    let frac = pos - idx as f64;
    grid[idx] * (1.0 - frac) + grid[idx + 1] * frac
}

fn compute_st2_grid() -> Vec<f64> {
    let pi = std::f64::consts::PI;
    // P(acos(cosθ cosθ') ≤ t) = ∫ f_ST(θ)·P_θ(t) dθ by Simpson
    let prob_given_theta = |theta: f64, cos_t: f64| -> f64 {
        let c = theta.cos();
        if c.abs() < 1e-12 {
            // product is 0: condition 0 ≥ cos t
            return if cos_t <= 0.0 { 1.0 } else { 0.0 };
        }
        let bound = cos_t / c;
        if c > 0.0 {
            // cos θ' ≥ bound  ⟺  θ' ≤ acos(bound)
            if bound >= 1.0 {
                0.0
            } else if bound <= -1.0 {
                1.0
            } else {
                sato_tate_cdf(bound.acos())
            }
        } else {
            // cos θ' ≤ bound  ⟺  θ' ≥ acos(bound)
            if bound >= 1.0 {
                1.0
            } else if bound <= -1.0 {
                0.0
            } else {
                1.0 - sato_tate_cdf(bound.acos())
            }
        }
    };
    let steps = 2000usize;
    (0..=ST2_GRID)
        .map(|g| {
            let t = g as f64 / ST2_GRID as f64 * pi;
            let cos_t = t.cos();
            let h = pi / steps as f64;
            let density =
                |th: f64| 2.0 / pi * th.sin().powi(2) * prob_given_theta(th, cos_t);
            let mut acc = 0.0;
            for k in 0..steps {
                let a = k as f64 * h;
                acc += h / 6.0 * (density(a) + 4.0 * density(a + h / 2.0) + density(a + h));
            }
            acc.clamp(0.0, 1.0)
        })
        .collect()
}

/// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - f).abs());
    }
    sup
}

/// Modulus selector for the Kloosterman-angle experiment.
#[derive(Debug, Clone, Copy)]
pub enum SatoTateModulus {
    Prime(u64),
    /// `q = r·s` with distinct primes in the window `√s ≤ r ≤ 2√s`.
    Composite { r: u64, s: u64 },
}

/// Kloosterman angles `θ(n; q) ∈ [0, π]` for `n ∈ [1, limit]`, defined by
/// `2^{ω(q)} cos θ(n; q) = Kl₂(n; q)` (verified to 1e-9 on construction).
#[derive(Debug, Clone)]
pub struct AngleSample {
    pub modulus: SatoTateModulus,
    pub limit: u64,
    pub angles: Vec<f64>,
    /// Composite case only: the per-prime angle pairs behind each sample.
    pub pairs: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone)]
pub struct SatoTateOutcome {
    pub report: ExperimentReport,
    pub sample: AngleSample,
    pub samples: usize,
    /// KS distance of the angles against `μ_ST` (prime) or `μ_{ST,2}`
    /// (composite).
    pub ks: f64,
    /// Composite case: 2-D KS distance of the angle pairs against
    /// `μ_ST × μ_ST`.
    pub joint_ks: Option<f64>,
    /// Normalized Weyl sums `|Σ sym_k(θ(n))|/N` for `k = 1..6`.
    pub weyl: Vec<f64>,
}

fn sym_k(k: u32, theta: f64) -> f64 {
    let s = theta.sin();
    if s.abs() < 1e-9 {
        // limit of sin((k+1)θ)/sin θ at θ ∈ {0, π}
        let sign = if theta < 1.0 { 1.0 } else { (-1.0f64).powi(k as i32) };
        return sign * (k as f64 + 1.0);
    }
    ((k as f64 + 1.0) * theta).sin() / s
}

pub fn run_satotate(
    cache: &HkCache,
    modulus: SatoTateModulus,
    limit: u64,
) -> Result<SatoTateOutcome> {
    let mut report = ExperimentReport::new("satotate");
    report.meta("limit", limit);
    let (mut angles, pairs) = match modulus {
        SatoTateModulus::Prime(p) => {
            if limit > p {
                return Err(precondition("limit must be ≤ q"));
            }
            report.meta("q", p);
            report.meta("form", "prime");
            let table = cache.table(2, p)?;
            let angles: Vec<f64> = (1..=limit)
                .map(|n| {
                    let v = table.at(n as i64);
                    debug_assert!(v.im.abs() < 1e-9);
                    let theta = (v.re / 2.0).clamp(-1.0, 1.0).acos();
                    assert!(
                        (2.0 * theta.cos() - v.re).abs() < 1e-9,
                        "angle reconstruction failed at n={n}"
                    );
                    theta
                })
                .collect();
            (angles, None)
        }
        SatoTateModulus::Composite { r, s } => {
            if !crate::arith::is_prime(r) || !crate::arith::is_prime(s) || r == s {
                return Err(precondition("need distinct primes r, s"));
            }
            let window = (s as f64).sqrt();
            if !(window <= r as f64 && r as f64 <= 2.0 * window) {
                return Err(precondition("need √s ≤ r ≤ 2√s"));
            }
            let q = r * s;
            if limit > q {
                return Err(precondition("limit must be ≤ q"));
            }
            report.meta("q", q);
            report.meta("r", r);
            report.meta("s", s);
            report.meta("form", "composite");
            let table_r = cache.table(2, r)?;
            let table_s = cache.table(2, s)?;
            let s_inv2 = {
                let inv = crate::arith::mod_inverse(s as i64, r)?;
                inv as i128 * inv as i128 % r as i128
            };
            let r_inv2 = {
                let inv = crate::arith::mod_inverse(r as i64, s)?;
                inv as i128 * inv as i128 % s as i128
            };
            let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(limit as usize);
            let mut angles: Vec<f64> = Vec::with_capacity(limit as usize);
            for n in 1..=limit {
                let vr = table_r.at((s_inv2 * n as i128 % r as i128) as i64);
                let vs = table_s.at((r_inv2 * n as i128 % s as i128) as i64);
                let t1 = (vr.re / 2.0).clamp(-1.0, 1.0).acos();
                let t2 = (vs.re / 2.0).clamp(-1.0, 1.0).acos();
                // 2^{ω(q)} cos θ(n; q) = Kl₂(n; q) = Kl₂ at r times Kl₂ at s
                let combined = (t1.cos() * t2.cos()).clamp(-1.0, 1.0).acos();
                assert!(
                    (4.0 * combined.cos() - vr.re * vs.re).abs() < 1e-9,
                    "angle reconstruction failed at n={n}"
                );
                pairs.push((t1, t2));
                angles.push(combined);
            }
            (angles, Some(pairs))
        }
    };

    let weyl: Vec<f64> = (1..=6)
        .map(|k| {
            let mut acc = KahanSum::default();
            for &t in &angles {
                acc.add(sym_k(k, t));
            }
            (acc.value() / angles.len() as f64).abs()
        })
        .collect();

    let sample = AngleSample {
        modulus,
        limit,
        angles: angles.clone(),
        pairs: pairs.clone(),
    };
    let (ks, joint) = match &pairs {
        None => (ks_distance(&mut angles, sato_tate_cdf), None),
        Some(pairs) => {
            let ks = ks_distance(&mut angles, sato_tate2_cdf);
            (ks, Some(joint_ks_product(pairs)))
        }
    };

    report.columns = vec!["k".into(), "weyl_normalized".into()];
    for (k, w) in weyl.iter().enumerate() {
        report.rows.push(vec![(k + 1).to_string(), format!("{w:.9}")]);
    }
    report.summary("samples", angles.len());
    report.summary("ks", format!("{ks:.9}"));
    if let Some(j) = joint {
        report.summary("joint_ks", format!("{j:.9}"));
    }
    Ok(SatoTateOutcome { report, sample, samples: angles.len(), ks, joint_ks: joint, weyl })
}

/// 2-D KS distance of paired samples against `μ_ST × μ_ST`, evaluated at
/// the sample points over all four quadrant orientations.
fn joint_ks_product(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let mut sup = 0.0f64;
    for &(a, b) in pairs {
        let f1 = sato_tate_cdf(a);
        let f2 = sato_tate_cdf(b);
        let mut counts = [0usize; 4];
        for &(x, y) in pairs {
            let le_x = x <= a;
            let le_y = y <= b;
            counts[0] += (le_x && le_y) as usize;
            counts[1] += (le_x && !le_y) as usize;
            counts[2] += (!le_x && le_y) as usize;
            counts[3] += (!le_x && !le_y) as usize;
        }
        let model = [
            f1 * f2,
            f1 * (1.0 - f2),
            (1.0 - f1) * f2,
            (1.0 - f1) * (1.0 - f2),
        ];
        for (c, m) in counts.iter().zip(model) {
            sup = sup.max((*c as f64 / n - m).abs());
        }
    }
    sup
}

// ---------------------------------------------------------------------------
// bound audits

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditFamily {
    Weil,
    Dork,
    Kls,
    Corr2,
    Lode,
    Vdc,
    InctraceQ,
}

impl AuditFamily {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "weil" => AuditFamily::Weil,
            "dork" => AuditFamily::Dork,
            "kls" => AuditFamily::Kls,
            "corr2" => AuditFamily::Corr2,
            "lode" => AuditFamily::Lode,
            "vdc" => AuditFamily::Vdc,
            "inctraceQ" => AuditFamily::InctraceQ,
            other => return Err(Error::Unknown { kind: "audit family", name: other.into() }),
        })
    }
}

pub type GridRow = BTreeMap<String, String>;

/// Parse a key-value grid file: each non-comment line holds
/// `key=value` pairs; values may be comma lists, `a..b` integer ranges
/// (end exclusive), or `primes:a..b`. Rows expand to the cartesian
/// product of their value lists.
pub fn parse_grid(text: &str) -> Result<Vec<GridRow>> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err =
            |msg: String| Error::Parse(format!("grid line {}: {}", lineno + 1, msg));
        let mut keys: Vec<String> = Vec::new();
        let mut lists: Vec<Vec<String>> = Vec::new();
        for tok in line.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{tok}`")))?;
            let values = expand_values(v).map_err(|e| err(e.to_string()))?;
            keys.push(k.to_string());
            lists.push(values);
        }
        let total: usize = lists.iter().map(|l| l.len()).product();
        if total > 100_000 {
            return Err(err("row expands to more than 100000 entries".into()));
        }
        let mut idx = vec![0usize; lists.len()];
        loop {
            let mut row = GridRow::new();
            for (k, (key, list)) in keys.iter().zip(&lists).enumerate() {
                row.insert(key.clone(), list[idx[k]].clone());
            }
            rows.push(row);
            let mut carry = 0;
            loop {
                if carry == idx.len() {
                    break;
                }
                idx[carry] += 1;
                if idx[carry] < lists[carry].len() {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
            if carry == idx.len() {
                break;
            }
        }
    }
    Ok(rows)
}

fn expand_values(v: &str) -> Result<Vec<String>> {
    if let Some(range) = v.strip_prefix("primes:") {
        let (a, b) = parse_range(range)?;
        return Ok(sieve::primes_up_to(b.saturating_sub(1))
            .into_iter()
            .filter(|&p| p >= a)
            .map(|p| p.to_string())
            .collect());
    }
    if v.contains("..") {
        let (a, b) = parse_range(v)?;
        return Ok((a..b).map(|x| x.to_string()).collect());
    }
    Ok(v.split(',').map(|s| s.to_string()).collect())
}

fn parse_range(v: &str) -> Result<(u64, u64)> {
    let (a, b) = v
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("bad range `{v}`")))?;
    let a = a.parse().map_err(|_| Error::Parse(format!("bad range `{v}`")))?;
    let b = b.parse().map_err(|_| Error::Parse(format!("bad range `{v}`")))?;
    Ok((a, b))
}

fn get_i64(row: &GridRow, key: &str) -> Result<i64> {
    row.get(key)
        .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer for `{key}`")))
}

fn get_u64(row: &GridRow, key: &str) -> Result<u64> {
    row.get(key)
        .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer for `{key}`")))
}

fn get_f64_or(row: &GridRow, key: &str, default: f64) -> Result<f64> {
    match row.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Parse(format!("bad number for `{key}`"))),
    }
}

/// Coefficient vectors use `:` separators (commas already mean lists).
fn get_coeffs(row: &GridRow, key: &str) -> Result<Vec<i64>> {
    row.get(key)
        .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))?
        .split(':')
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad coefficient in `{key}`"))))
        .collect()
}

fn default_cutoff(row: &GridRow, scale_key: &str, x0_key: &str) -> Result<SmoothCutoff> {
    let scale = get_f64_or(row, scale_key, 32.0)?;
    let x0 = get_f64_or(row, x0_key, 0.0)?;
    make_cutoff(x0, scale, CutoffShape::Bump)
}

/// One audited data point: parameter echo plus value/bound/ratio columns.
struct AuditPoint {
    params: String,
    actual: Complex64,
    bound: f64,
    formula: &'static str,
}

fn audit_row(family: AuditFamily, row: &GridRow, cache: &HkCache) -> Result<Vec<AuditPoint>> {
    let echo = |row: &GridRow| {
        row.iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    match family {
        AuditFamily::Weil => {
            let q = FactoredModulus::factor(get_u64(row, "q")?)?;
            let f = RationalPhase::from_coeffs(get_coeffs(row, "num")?, get_coeffs(row, "den")?)?;
            let c = get_f64_or(row, "c", 10.0)?;
            let rep = complete_phase_sum(&f, &q, c)?;
            Ok(vec![AuditPoint {
                params: echo(row),
                actual: rep.actual,
                bound: rep.bound,
                formula: rep.bound_formula,
            }])
        }
        AuditFamily::Dork => {
            let d1 = FactoredModulus::factor(get_u64(row, "d1")?)?;
            let d2 = FactoredModulus::factor(get_u64(row, "d2")?)?;
            for d in [&d1, &d2] {
                if !d.is_squarefree() {
                    return Err(precondition("dork moduli must be squarefree"));
                }
            }
            let (c1, c2) = (get_i64(row, "c1")?, get_i64(row, "c2")?);
            let (l1, l2) = (get_i64(row, "l1")?, get_i64(row, "l2")?);
            let lcm = crate::arith::lcm_u64(d1.value(), d2.value());
            let g = gcd_u64(d1.value(), d2.value());
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..lcm as i64 {
                acc += eq_eval_frac(c1 as i128, (n + l1) as i128, &d1)?
                    * eq_eval_frac(c2 as i128, (n + l2) as i128, &d2)?;
            }
            let delta1 = d1.value() / g;
            let delta2 = d2.value() / g;
            let bound = gcd_with_modulus(c1, delta1) as f64
                * gcd_with_modulus(c2, delta2) as f64
                * g as f64;
            Ok(vec![AuditPoint {
                params: echo(row),
                actual: acc,
                bound,
                formula: "dork: C^Ω (c1,δ1)(c2,δ2)(d1,d2)",
            }])
        }
        AuditFamily::Kls => {
            let p = get_u64(row, "p")?;
            let m = get_u64(row, "m").unwrap_or(3) as u32;
            let b = get_i64(row, "b")?;
            let form = match row.get("form").map(String::as_str) {
                Some("corr") => CorrelationForm::Correlation,
                _ => CorrelationForm::FirstMoment,
            };
            let a = if form == CorrelationForm::Correlation { get_i64(row, "a")? } else { 1 };
            let rep = kl_correlation(cache, m, a, b, p, form)?;
            Ok(vec![AuditPoint {
                params: echo(row),
                actual: rep.actual,
                bound: rep.bound,
                formula: rep.bound_formula,
            }])
        }
        AuditFamily::Corr2 => {
            let s = FactoredModulus::factor(get_u64(row, "s")?)?;
            let r1 = FactoredModulus::factor(get_u64(row, "r1")?)?;
            let r2 = FactoredModulus::factor(get_u64(row, "r2")?)?;
            let (a1, a2) = (get_i64(row, "a1")?, get_i64(row, "a2")?);
            let n = get_i64(row, "n").unwrap_or(0);
            let cutoff = if row.contains_key("h") {
                Some(default_cutoff(row, "h", "x0")?)
            } else {
                None
            };
            let rep =
                composite_correlation(cache, &s, &r1, &r2, a1, a2, n, cutoff.as_ref())?;
            Ok(vec![AuditPoint {
                params: echo(row),
                actual: rep.actual,
                bound: rep.bound,
                formula: rep.bound_formula,
            }])
        }
        AuditFamily::Lode => {
            let spec = TwoVarSumSpec {
                m: FactoredModulus::factor(get_u64(row, "m")?)?,
                alpha: get_i64(row, "alpha")?,
                beta: get_i64(row, "beta")?,
                gamma1: get_i64(row, "gamma1")?,
                gamma2: get_i64(row, "gamma2")?,
                l: get_i64(row, "l")?,
                q0: get_u64(row, "q0").unwrap_or(1),
                d0: get_i64(row, "d0").unwrap_or(0),
                n0: get_i64(row, "n0").unwrap_or(0),
                cutoff_d: default_cutoff(row, "dscale", "dx0")?,
                cutoff_n: default_cutoff(row, "nscale", "nx0")?,
            };
            let y = get_f64_or(row, "y", 2.0)?;
            let rep = two_var_sum(&spec, y)?;
            Ok(vec![
                AuditPoint {
                    params: echo(row),
                    actual: rep.lode1.actual,
                    bound: rep.lode1.bound,
                    formula: rep.lode1.bound_formula,
                },
                AuditPoint {
                    params: echo(row),
                    actual: rep.lode2.actual,
                    bound: rep.lode2.bound,
                    formula: rep.lode2.bound_formula,
                },
            ])
        }
        AuditFamily::Vdc => {
            let q = FactoredModulus::factor(get_u64(row, "q")?)?;
            let f = RationalPhase::from_coeffs(get_coeffs(row, "num")?, get_coeffs(row, "den")?)?;
            let r = get_u64(row, "r")?;
            let s = get_u64(row, "s")?;
            let depth = get_u64(row, "depth").unwrap_or(1) as u8;
            let cutoff = default_cutoff(row, "nscale", "x0")?;
            let rep = vdc_estimate_phase(&f, &q, &cutoff, r, s, depth)?;
            Ok(vec![AuditPoint {
                params: echo(row),
                actual: rep.report.actual,
                bound: rep.report.bound,
                formula: rep.report.bound_formula,
            }])
        }
        AuditFamily::InctraceQ => {
            let q = FactoredModulus::factor(get_u64(row, "q")?)?;
            let params = KfParams {
                a: get_i64(row, "a")?,
                b: get_i64(row, "b")?,
                c: get_i64(row, "c")?,
                d: get_i64(row, "d")?,
                e: get_i64(row, "e")?,
            };
            let cutoff = default_cutoff(row, "nscale", "x0")?;
            let table = kf_table(params, &q, KfNormalization::CorollaryPlus)?;
            let actual = incomplete_sum(&table, &cutoff, None)?;
            let qv = q.value() as f64;
            let n_scale = cutoff.scale;
            let (bound, formula) = match (row.get("r"), row.get("s")) {
                (Some(r), Some(s)) => {
                    let r: f64 = r.parse().map_err(|_| Error::Parse("bad r".into()))?;
                    let s: f64 = s.parse().map_err(|_| Error::Parse("bad s".into()))?;
                    (
                        n_scale.sqrt() * r.sqrt() + n_scale.sqrt() * s.powf(0.25),
                        "trace vdc: N^1/2 r^1/2 + N^1/2 s^1/4",
                    )
                }
                _ => (
                    qv.sqrt() * (1.0 + n_scale / qv),
                    "trace pv: q^1/2 (1 + N/q)",
                ),
            };
            Ok(vec![AuditPoint {
                params: echo(row),
                actual,
                bound,
                formula,
            }])
        }
    }
}

/// Sweep a parameter grid for one audit family and report
/// `(params, actual, bound, ratio)` per point. Malformed rows are counted
/// and echoed with an error status rather than aborting the sweep.
pub fn run_bound_audit(
    family: AuditFamily,
    rows: &[GridRow],
    cache: &HkCache,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("audit");
    report.meta("family", format!("{family:?}"));
    report.columns = vec![
        "params".into(),
        "status".into(),
        "formula".into(),
        "actual_re".into(),
        "actual_im".into(),
        "abs".into(),
        "bound".into(),
        "ratio".into(),
    ];
    let results = parallel_map(rows, |row| audit_row(family, row, cache));
    let mut max_ratio = f64::NEG_INFINITY;
    let mut errors = 0usize;
    for (row, result) in rows.iter().zip(results) {
        match result {
            Ok(points) => {
                for p in points {
                    let abs = p.actual.norm();
                    let ratio = if p.bound > 0.0 { abs / p.bound } else { f64::NAN };
                    if ratio.is_finite() {
                        max_ratio = max_ratio.max(ratio);
                    }
                    report.rows.push(vec![
                        p.params.clone(),
                        "ok".into(),
                        p.formula.into(),
                        format!("{:.9}", p.actual.re),
                        format!("{:.9}", p.actual.im),
                        format!("{abs:.9}"),
                        format!("{:.9}", p.bound),
                        format!("{ratio:.9}"),
                    ]);
                }
            }
            Err(e) => {
                errors += 1;
                let echo = row
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                report.rows.push(vec![
                    echo,
                    format!("error: {e}"),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
        }
    }
    if max_ratio.is_finite() {
        report.summary("max_ratio", format!("{max_ratio:.9}"));
    }
    report.summary("rows", rows.len());
    report.summary("errors", errors);
    Ok(report)
}
