//! Complete exponential sums to squarefree moduli, evaluated exactly:
//! Ramanujan sums, Kloosterman and hyper-Kloosterman sums (with their
//! Fourier-recursion tables), the trilinear sum `F`, the two-parameter
//! character sum `K_f`, hyper-Kloosterman correlations, the bilinear phase
//! `Φ_ℓ`, and the two-variable sum over shifted smooth boxes — each paired
//! with the explicit bound formula it is audited against.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::arith::{
    self, e_q, eq_eval_frac, gcd_u64, gcd_with_modulus, mod_inverse, phase_gcd, FactoredModulus,
};
use crate::completion::{PeriodicFunction, SmoothCutoff};
use crate::dft;
use crate::error::{precondition, Error, Result};
use crate::poly::RationalPhase;
use crate::report::BoundReport;

/// Ramanujan sum `c_q(b) = Σ_{n ∈ (Z/qZ)×} e_q(bn)`, computed exactly as
/// `Σ_{d | (b,q)} d·μ(q/d)`. Real-valued; `c_q(0) = φ(q)`.
pub fn ramanujan(b: i64, q: &FactoredModulus) -> Result<f64> {
    if !q.is_squarefree() {
        return Err(precondition("Ramanujan sums are taken at squarefree q"));
    }
    let g = gcd_with_modulus(b, q.value());
    let mu_q = q.mobius();
    let mut total: i64 = 0;
    for d in FactoredModulus::factor(g)?.divisors() {
        // q squarefree: μ(q/d) = μ(q)·μ(d) for d | q
        let mu_d = FactoredModulus::factor(d)?.mobius();
        total += d as i64 * mu_q * mu_d;
    }
    Ok(total as f64)
}

/// Value table of `n ↦ e_q(f(n))` on `Z/qZ` with the projective-line
/// conventions applied prime by prime (poles give local factor zero).
pub fn phase_table(f: &RationalPhase, q: &FactoredModulus) -> Result<PeriodicFunction> {
    if !q.is_squarefree() {
        return Err(precondition("phase tables need a squarefree modulus"));
    }
    let qv = q.value();
    let mut values = vec![Complex64::new(1.0, 0.0); qv as usize];
    for p in q.primes() {
        let (p1, q1) = f.reduce_mod(p)?;
        let cofactor_inv = mod_inverse((qv / p) as i64, p)?;
        let mut local = vec![Complex64::new(0.0, 0.0); p as usize];
        for (x, slot) in local.iter_mut().enumerate() {
            let den = q1.eval(x as u64);
            if den != 0 {
                let num = p1.eval(x as u64);
                let t = num as u128 * mod_inverse(den as i64, p)? as u128 % p as u128;
                let t = (t * cofactor_inv as u128) % p as u128;
                *slot = e_q(t as i64, p);
            }
        }
        for (n, v) in values.iter_mut().enumerate() {
            *v *= local[n % p as usize];
        }
    }
    PeriodicFunction::new(q.clone(), values)
}

/// Brute-force complete sum `Σ_{n ∈ Z/qZ} e_q(f(n))` audited against the
/// square-root cancellation bound `C^{Ω(q)} √q (f′,q)/(f″,q)^{1/2}`.
/// The constant `C` is a caller choice (10 by default in the CLI); the
/// report carries the measured ratio.
pub fn complete_phase_sum(
    f: &RationalPhase,
    q: &FactoredModulus,
    weil_constant: f64,
) -> Result<BoundReport> {
    let table = phase_table(f, q)?;
    let actual: Complex64 = table.values().iter().sum();
    let f1 = f.derivative()?;
    let f2 = f1.derivative()?;
    let g1 = phase_gcd(q, &f1)? as f64;
    let g2 = phase_gcd(q, &f2)? as f64;
    let bound = weil_constant.powi(q.big_omega() as i32) * (q.value() as f64).sqrt() * g1
        / g2.sqrt();
    Ok(BoundReport::new(actual, bound, "weil: C^Ω √q (f',q)/(f'',q)^1/2"))
}

/// Kloosterman sum `S(a, b; q) = Σ_{x ∈ (Z/qZ)×} e_q(ax + b·x̄)`.
pub fn kloosterman2(a: i64, b: i64, q: &FactoredModulus) -> Result<Complex64> {
    if !q.is_squarefree() {
        return Err(precondition("Kloosterman sums are taken at squarefree q"));
    }
    let qv = q.value();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 1..=qv {
        if gcd_u64(x, qv) != 1 {
            continue;
        }
        let inv = mod_inverse(x as i64, qv)?;
        let phase = (a as i128 * x as i128 + b as i128 * inv as i128).rem_euclid(qv as i128);
        acc += e_q(phase as i64, qv);
    }
    Ok(acc)
}

/// Normalized hyper-Kloosterman table at a prime: `values[x] = Kl_m(x; p)`.
///
/// Built by the Fourier recursion `Kl_m(x) = p^{−1/2} Σ_{y≠0} Kl_{m−1}(y̅)
/// e_p(xy)` starting from `Kl_1(x) = e_p(x)`; each table is checked against
/// the Deligne bound `|Kl_m(x)| ≤ m` away from zero and the closed form
/// `Kl_m(0) = (−1)^{m−1} p^{−(m−1)/2}`, and against the direct
/// `(m−1)`-fold sum for `p ≤ 31`.
#[derive(Debug, Clone)]
pub struct HKTable {
    m: u32,
    p: u64,
    values: Vec<Complex64>,
}

impl HKTable {
    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, x: i64) -> Complex64 {
        self.values[x.rem_euclid(self.p as i64) as usize]
    }
}

/// Inverse table mod a prime: `inv[x] = x̄` for `1 ≤ x < p`, `inv[0] = 0`.
fn inverse_table(p: u64) -> Vec<u64> {
    let mut inv = vec![0u64; p as usize];
    if p > 1 {
        inv[1] = 1;
    }
    for x in 2..p as usize {
        inv[x] = p - (p / x as u64) * inv[(p % x as u64) as usize] % p;
        inv[x] %= p;
    }
    inv
}

pub fn hk_table(m: u32, p: u64) -> Result<HKTable> {
    if m == 0 {
        return Err(precondition("hyper-Kloosterman order must be ≥ 1"));
    }
    if !arith::is_prime(p) {
        return Err(precondition("hyper-Kloosterman tables are per prime"));
    }
    if p > 100_000 {
        return Err(precondition("prime capped at 10⁵ for table construction"));
    }
    let inv = inverse_table(p);
    let mut values: Vec<Complex64> = (0..p).map(|x| e_q(x as i64, p)).collect();
    let scale = 1.0 / (p as f64).sqrt();
    for _ in 2..=m {
        let mut pulled = vec![Complex64::new(0.0, 0.0); p as usize];
        for y in 1..p as usize {
            pulled[y] = values[inv[y] as usize];
        }
        values = dft::transform(&pulled, 1.0)
            .into_iter()
            .map(|v| v * scale)
            .collect();
    }
    let table = HKTable { m, p, values };
    table.check_invariants();
    if p <= 31 {
        table.check_against_direct_sum();
    }
    Ok(table)
}

impl HKTable {
    fn check_invariants(&self) {
        let m = self.m as f64;
        for (x, v) in self.values.iter().enumerate().skip(1) {
            assert!(
                v.norm() <= m + 1e-9,
                "Deligne bound violated at x={x}, p={}: |Kl_{}| = {}",
                self.p,
                self.m,
                v.norm()
            );
        }
        let want = if self.m % 2 == 1 { 1.0 } else { -1.0 }
            * (self.p as f64).powf(-((self.m as f64 - 1.0) / 2.0));
        assert!(
            (self.values[0] - Complex64::new(want, 0.0)).norm() <= 1e-12,
            "Kl_{}(0; {}) = {} but the closed form gives {}",
            self.m,
            self.p,
            self.values[0],
            want
        );
    }

    /// Direct multi-fold evaluation of the defining sum (small p only).
    fn check_against_direct_sum(&self) {
        for x in 0..self.p {
            let direct = hyper_kloosterman_direct(self.m, x, self.p);
            assert!(
                (self.values[x as usize] - direct).norm() < 1e-9,
                "recursion vs direct sum mismatch at m={}, p={}, x={x}",
                self.m,
                self.p
            );
        }
    }
}

/// `Kl_m(x; p)` by the defining `(m−1)`-fold sum; exponential in `m`,
/// usable only for tiny `p` (serves as the independent oracle).
pub fn hyper_kloosterman_direct(m: u32, x: u64, p: u64) -> Complex64 {
    let x = x % p;
    let norm = (p as f64).powf(-((m as f64 - 1.0) / 2.0));
    if x == 0 {
        // Σ over tuples with zero product reduces to (−1)^{m−1}
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        return Complex64::new(sign * norm, 0.0);
    }
    let inv = inverse_table(p);
    let mut acc = Complex64::new(0.0, 0.0);
    let free = m - 1;
    let mut idx = vec![1u64; free as usize];
    loop {
        let mut prod = 1u64;
        let mut sum = 0u64;
        for &y in &idx {
            prod = prod * y % p;
            sum = (sum + y) % p;
        }
        let last = x * inv[prod as usize] % p;
        acc += e_q((sum + last) as i64 % p as i64, p);
        // odometer over (Z/pZ)^× tuples
        let mut k = 0;
        loop {
            if k == idx.len() {
                return acc * norm;
            }
            idx[k] += 1;
            if idx[k] < p {
                break;
            }
            idx[k] = 1;
            k += 1;
        }
    }
}

/// Cache of hyper-Kloosterman tables, shared across evaluators.
#[derive(Default)]
pub struct HkCache {
    tables: Mutex<HashMap<(u32, u64), Arc<HKTable>>>,
}

impl HkCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn table(&self, m: u32, p: u64) -> Result<Arc<HKTable>> {
        if let Some(t) = self.tables.lock().unwrap().get(&(m, p)) {
            return Ok(t.clone());
        }
        let t = Arc::new(hk_table(m, p)?);
        self.tables.lock().unwrap().insert((m, p), t.clone());
        Ok(t)
    }

    /// `Kl_m(x; q)` for squarefree `q` via the twisted product over primes:
    /// `Kl_m(x; q) = Π_{p|q} Kl_m(q̄_p^m x; p)` with `q_p = q/p`.
    pub fn hyper_kloosterman(&self, m: u32, x: i64, q: &FactoredModulus) -> Result<Complex64> {
        if !q.is_squarefree() {
            return Err(precondition("hyper-Kloosterman sums need squarefree q"));
        }
        if q.value() == 1 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for p in q.primes() {
            let table = self.table(m, p)?;
            let qp_inv = mod_inverse((q.value() / p) as i64, p)?;
            let twist = arith::pow_mod(qp_inv, m as u64, p);
            let arg = (twist as i128 * x as i128).rem_euclid(p as i128) as i64;
            acc *= table.at(arg);
        }
        Ok(acc)
    }
}

/// One-off `Kl_m(x; q)` without an external cache.
pub fn hyper_kloosterman(m: u32, x: i64, q: &FactoredModulus) -> Result<Complex64> {
    HkCache::new().hyper_kloosterman(m, x, q)
}

/// The trilinear sum
/// `F(h, a; q) = (1/q) Σ_{n₁n₂n₃ = a, nᵢ ∈ (Z/qZ)×} e_q(h₁n₁ + h₂n₂ + h₃n₃)`.
/// Brute force (quadratic in q) below 500, per-prime split above.
pub fn triple_sum_f(h: (i64, i64, i64), a: i64, q: &FactoredModulus) -> Result<Complex64> {
    if !q.is_squarefree() {
        return Err(precondition("F is taken at squarefree q"));
    }
    if gcd_with_modulus(a, q.value()) != 1 {
        return Err(Error::NonInvertible { a, q: q.value() });
    }
    if q.value() <= 500 {
        return Ok(triple_sum_f_brute(h, a, q.value()));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for p in q.primes() {
        let qp_inv = mod_inverse((q.value() / p) as i64, p)? as i128;
        let hp = (
            (h.0 as i128 * qp_inv).rem_euclid(p as i128) as i64,
            (h.1 as i128 * qp_inv).rem_euclid(p as i128) as i64,
            (h.2 as i128 * qp_inv).rem_euclid(p as i128) as i64,
        );
        acc *= triple_sum_f_brute(hp, a, p);
    }
    Ok(acc)
}

fn triple_sum_f_brute(h: (i64, i64, i64), a: i64, q: u64) -> Complex64 {
    if q == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let a = a.rem_euclid(q as i64) as u64;
    let mut acc = Complex64::new(0.0, 0.0);
    for n1 in 1..q {
        if gcd_u64(n1, q) != 1 {
            continue;
        }
        let h1n1 = (h.0 as i128 * n1 as i128).rem_euclid(q as i128) as u64;
        for n2 in 1..q {
            if gcd_u64(n2, q) != 1 {
                continue;
            }
            let inv12 = mod_inverse((n1 * n2 % q) as i64, q).expect("units");
            let n3 = a * inv12 % q;
            let phase = (h1n1 as i128 + h.1 as i128 * n2 as i128 + h.2 as i128 * n3 as i128)
                .rem_euclid(q as i128);
            acc += e_q(phase as i64, q);
        }
    }
    acc / q as f64
}

/// Sign convention for `K_f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KfNormalization {
    /// `−q^{−1/2} Σ_y ...` (the definition used at a single prime).
    PaperMinus,
    /// `+q^{−1/2} Σ_y ...` (the incomplete-sum corollary's normalization).
    CorollaryPlus,
}

/// Parameters `(a, b, c, d, e)` of the two-parameter phase
/// `f(x, y) = 1/((y + ax + b)(y + cx + d)) + ey`.
#[derive(Debug, Clone, Copy)]
pub struct KfParams {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub e: i64,
}

/// `K_f(x; q) = ∓q^{−1/2} Σ_y e_q(f(x, y))` with terms at non-invertible
/// denominators handled by the projective conventions (they vanish).
/// Requires `gcd(a − c, q) = 1`.
pub fn kf_sum(
    params: KfParams,
    x: i64,
    q: &FactoredModulus,
    normalization: KfNormalization,
) -> Result<Complex64> {
    if gcd_with_modulus(params.a - params.c, q.value()) != 1 {
        return Err(precondition("K_f needs gcd(a − c, q) = 1"));
    }
    if !q.is_squarefree() {
        return Err(precondition("K_f is taken at squarefree q"));
    }
    let qv = q.value() as i128;
    let x = x as i128;
    let mut acc = Complex64::new(0.0, 0.0);
    for y in 0..qv {
        let u = (y + params.a as i128 * x + params.b as i128).rem_euclid(qv);
        let v = (y + params.c as i128 * x + params.d as i128).rem_euclid(qv);
        let den = u * v % qv;
        let num = (1 + params.e as i128 * y % qv * den % qv).rem_euclid(qv);
        acc += eq_eval_frac(num, den, q)?;
    }
    let scale = 1.0 / (q.value() as f64).sqrt();
    Ok(match normalization {
        KfNormalization::PaperMinus => -acc * scale,
        KfNormalization::CorollaryPlus => acc * scale,
    })
}

/// Value table of `x ↦ K_f(x; q)` for audits and Fourier checks.
pub fn kf_table(
    params: KfParams,
    q: &FactoredModulus,
    normalization: KfNormalization,
) -> Result<PeriodicFunction> {
    let values = (0..q.value())
        .map(|x| kf_sum(params, x as i64, q, normalization))
        .collect::<Result<Vec<_>>>()?;
    PeriodicFunction::new(q.clone(), values)
}

/// Which hyper-Kloosterman moment to audit at a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationForm {
    /// `Σ_{x≠0} Kl_m(x) e_p(bx)`.
    FirstMoment,
    /// `Σ_{x≠0} Kl_m(x) conj(Kl_m(ax)) e_p(bx)`, excluding `a=1, b=0`.
    Correlation,
}

/// Audit the square-root cancellation of hyper-Kloosterman moments at a
/// prime; the bound column is `√p` and the ratio is the measured constant.
pub fn kl_correlation(
    cache: &HkCache,
    m: u32,
    a: i64,
    b: i64,
    p: u64,
    form: CorrelationForm,
) -> Result<BoundReport> {
    if !arith::is_prime(p) {
        return Err(precondition("correlation audit runs at a prime"));
    }
    let table = cache.table(m, p)?;
    let a_red = a.rem_euclid(p as i64) as u64;
    let b_red = b.rem_euclid(p as i64) as u64;
    if form == CorrelationForm::Correlation {
        if a_red == 0 {
            return Err(Error::NonInvertible { a, q: p });
        }
        if a_red == 1 && b_red == 0 {
            return Err(precondition("a = 1, b = 0 is the degenerate diagonal"));
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 1..p {
        let mut term = table.at(x as i64);
        if form == CorrelationForm::Correlation {
            term *= table.at((a_red as i128 * x as i128).rem_euclid(p as i128) as i64).conj();
        }
        acc += term * e_q((b_red * x % p) as i64, p);
    }
    let formula = match form {
        CorrelationForm::FirstMoment => "kls first moment: C √p",
        CorrelationForm::Correlation => "kls correlation: C √p",
    };
    Ok(BoundReport::new(acc, (p as f64).sqrt(), formula))
}

/// Evaluator for `Kl₃(a·h; r·s)` over varying `h`, with the per-prime
/// twists precomputed once.
struct Kl3Product {
    parts: Vec<(Arc<HKTable>, u64)>, // (table at p, twist multiplier mod p)
}

impl Kl3Product {
    fn new(cache: &HkCache, a: i64, modulus: &FactoredModulus) -> Result<Self> {
        let mv = modulus.value();
        let mut parts = Vec::new();
        for p in modulus.primes() {
            let table = cache.table(3, p)?;
            let qp_inv = mod_inverse((mv / p) as i64, p)?;
            let twist = arith::pow_mod(qp_inv, 3, p);
            let a_p = (a as i128 * twist as i128).rem_euclid(p as i128) as u64;
            parts.push((table, a_p));
        }
        Ok(Kl3Product { parts })
    }

    fn at(&self, h: i64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (table, mult) in &self.parts {
            let p = table.prime();
            let arg = (*mult as i128 * h as i128).rem_euclid(p as i128) as i64;
            acc *= table.at(arg);
        }
        acc
    }
}

fn gcd_chain(values: &[i128]) -> u64 {
    let mut g: i128 = 0;
    for &v in values {
        g = num_integer::gcd(g, v.abs());
    }
    g as u64
}

/// Correlation of hyper-Kloosterman sums to composite moduli
/// `r₁s` and `r₂s`:
/// complete form `Σ_{h ∈ (Z/s[r₁,r₂]Z)×} Kl₃(a₁h; r₁s) conj(Kl₃(a₂h; r₂s))
/// e_{[r₁,r₂]s}(nh)`, or the smoothed form `Σ_{(h, s[r₁,r₂])=1} ψ_H(h) ...`
/// when a cutoff is supplied. The bound column carries the explicit
/// right-hand side with unit constant.
#[allow(clippy::too_many_arguments)]
pub fn composite_correlation(
    cache: &HkCache,
    s: &FactoredModulus,
    r1: &FactoredModulus,
    r2: &FactoredModulus,
    a1: i64,
    a2: i64,
    n: i64,
    cutoff: Option<&SmoothCutoff>,
) -> Result<BoundReport> {
    for m in [s, r1, r2] {
        if !m.is_squarefree() {
            return Err(precondition("moduli must be squarefree"));
        }
    }
    for r in [r1, r2] {
        if gcd_u64(s.value(), r.value()) != 1 {
            return Err(Error::NonCoprime { a: s.value(), b: r.value() });
        }
    }
    let r1s = FactoredModulus::factor(r1.value() * s.value())?;
    let r2s = FactoredModulus::factor(r2.value() * s.value())?;
    if gcd_with_modulus(a1, r1s.value()) != 1 {
        return Err(Error::NonInvertible { a: a1, q: r1s.value() });
    }
    if gcd_with_modulus(a2, r2s.value()) != 1 {
        return Err(Error::NonInvertible { a: a2, q: r2s.value() });
    }
    let lcm_r = arith::lcm_u64(r1.value(), r2.value());
    let big_m = lcm_r
        .checked_mul(s.value())
        .ok_or(Error::Range("correlation modulus"))?;

    let kl1 = Kl3Product::new(cache, a1, &r1s)?;
    let kl2 = Kl3Product::new(cache, a2, &r2s)?;

    let mut acc = Complex64::new(0.0, 0.0);
    match cutoff {
        None => {
            for h in 0..big_m {
                if gcd_u64(h, big_m) != 1 {
                    continue;
                }
                let term = kl1.at(h as i64) * kl2.at(h as i64).conj();
                let phase = (n as i128 * h as i128).rem_euclid(big_m as i128) as i64;
                acc += term * e_q(phase, big_m);
            }
        }
        Some(psi) => {
            for h in psi.integer_support() {
                if gcd_u64(h.unsigned_abs() % big_m, big_m) != 1 {
                    continue;
                }
                let w = psi.eval(h as f64);
                if w != 0.0 {
                    acc += w * kl1.at(h) * kl2.at(h).conj();
                }
            }
        }
    }

    let g_r = gcd_chain(&[
        a2 as i128 - a1 as i128,
        if cutoff.is_none() { n as i128 } else { 0 },
        r1.value() as i128,
        r2.value() as i128,
    ]);
    let diff = a2 as i128 * (r1.value() as i128).pow(3) - a1 as i128 * (r2.value() as i128).pow(3);
    let g_s = gcd_u64(
        gcd_chain(&[diff, if cutoff.is_none() { n as i128 } else { 0 }]),
        s.value(),
    );
    let g_r = gcd_u64(g_r, lcm_r);
    let base = (s.value() as f64).sqrt() * (lcm_r as f64).sqrt() * (g_r as f64).sqrt()
        * (g_s as f64).sqrt();
    let (bound, formula) = match cutoff {
        None => (base, "correlation complete: s^1/2 [r1,r2]^1/2 (a2-a1,n,r1,r2)^1/2 (a2r1^3-a1r2^3,n,s)^1/2"),
        Some(psi) => (
            (psi.scale / big_m as f64 + 1.0) * base,
            "correlation smoothed: (H/s[r1,r2] + 1) s^1/2 [r1,r2]^1/2 (a2-a1,r1,r2)^1/2 (a2r1^3-a1r2^3,s)^1/2",
        ),
    };
    Ok(BoundReport::new(acc, bound, formula))
}

/// van der Corput audit of `Σ ψ_N(n) e_q(f(n))` for a rational phase:
/// builds the phase table and defers to the completion machinery.
pub fn vdc_estimate_phase(
    f: &RationalPhase,
    q: &FactoredModulus,
    cutoff: &SmoothCutoff,
    r: u64,
    s: u64,
    depth: u8,
) -> Result<crate::completion::VdcReport> {
    let table = phase_table(f, q)?;
    crate::completion::vdc_estimate(&table, cutoff, r, s, depth)
}

/// Parameter tuple of the bilinear phase `Φ_ℓ`.
#[derive(Debug, Clone, Copy)]
pub struct PhiParams {
    pub h: i64,
    pub n: i64,
    pub r: u64,
    pub q0: u64,
    pub q1: u64,
    pub q2: u64,
    pub a: i64,
    pub b1: i64,
    pub b2: i64,
    pub ell: i64,
}

/// The phase
/// `Φ_ℓ = e_r(ah/(n q₀q₁q₂)) · e_{q₀q₁}(b₁h/(n r q₂)) ·
/// e_{q₂}(b₂h/((n+ℓr) r q₀q₁))`,
/// total thanks to the degenerate-point conventions of each factor.
pub fn phi_ell_eval(params: &PhiParams) -> Result<Complex64> {
    let PhiParams { h, n, r, q0, q1, q2, a, b1, b2, ell } = *params;
    if r == 0 || q0 == 0 || q1 == 0 || q2 == 0 {
        return Err(precondition("moduli must be positive"));
    }
    let q0q1 = q0.checked_mul(q1).ok_or(Error::Range("q0·q1"))?;
    let mod_r = FactoredModulus::factor(r)?;
    let mod_q0q1 = FactoredModulus::factor(q0q1)?;
    let mod_q2 = FactoredModulus::factor(q2)?;

    let f1 = eq_eval_frac(
        a as i128 * h as i128,
        n as i128 * q0 as i128 * q1 as i128 * q2 as i128,
        &mod_r,
    )?;
    let f2 = eq_eval_frac(
        b1 as i128 * h as i128,
        n as i128 * r as i128 * q2 as i128,
        &mod_q0q1,
    )?;
    let f3 = eq_eval_frac(
        b2 as i128 * h as i128,
        (n as i128 + ell as i128 * r as i128) * r as i128 * q0 as i128 * q1 as i128,
        &mod_q2,
    )?;
    Ok(f1 * f2 * f3)
}

/// Specification of the two-variable incomplete sum over shifted smooth
/// boxes in `(d, n)` restricted to residue classes mod `q₀ | m`.
#[derive(Debug, Clone)]
pub struct TwoVarSumSpec {
    pub m: FactoredModulus,
    pub alpha: i64,
    pub beta: i64,
    pub gamma1: i64,
    pub gamma2: i64,
    pub l: i64,
    pub q0: u64,
    pub d0: i64,
    pub n0: i64,
    pub cutoff_d: SmoothCutoff,
    pub cutoff_n: SmoothCutoff,
}

/// Result of the two-variable sum audit: the exact value and both
/// right-hand sides it is compared against.
#[derive(Debug, Clone)]
pub struct TwoVarReport {
    pub actual: Complex64,
    pub gcd_prefactor: u64,
    pub lode1: BoundReport,
    pub lode2: BoundReport,
}

/// Exact evaluation of
/// `Σ_{d≡d₀(q₀)} Σ_{n≡n₀(q₀)} ψ_Δ(d) ψ'_N(n)
///  e_m(αl / ((n+βd+γ₁)(n+(β+l)d+γ₂)))`
/// with both explicit bound formulas for a caller-supplied dense
/// divisibility parameter `y`.
pub fn two_var_sum(spec: &TwoVarSumSpec, y: f64) -> Result<TwoVarReport> {
    let mv = spec.m.value();
    if mv > 100_000 {
        return Err(precondition("two-variable sums are brute-forced; m ≤ 10⁵"));
    }
    if !spec.m.is_squarefree() {
        return Err(precondition("modulus must be squarefree"));
    }
    if spec.q0 == 0 || mv % spec.q0 != 0 {
        return Err(precondition("q₀ must divide m"));
    }
    let num = (spec.alpha as i128 * spec.l as i128).rem_euclid(mv as i128);
    let mut acc = Complex64::new(0.0, 0.0);
    for d in spec.cutoff_d.integer_support() {
        if d.rem_euclid(spec.q0 as i64) != spec.d0.rem_euclid(spec.q0 as i64) {
            continue;
        }
        let wd = spec.cutoff_d.eval(d as f64);
        if wd == 0.0 {
            continue;
        }
        for n in spec.cutoff_n.integer_support() {
            if n.rem_euclid(spec.q0 as i64) != spec.n0.rem_euclid(spec.q0 as i64) {
                continue;
            }
            let wn = spec.cutoff_n.eval(n as f64);
            if wn == 0.0 {
                continue;
            }
            let u = (n as i128 + spec.beta as i128 * d as i128 + spec.gamma1 as i128)
                .rem_euclid(mv as i128);
            let v = (n as i128
                + (spec.beta as i128 + spec.l as i128) * d as i128
                + spec.gamma2 as i128)
                .rem_euclid(mv as i128);
            let den = u * v % mv as i128;
            acc += wd * wn * eq_eval_frac(num, den, &spec.m)?;
        }
    }

    let g = gcd_with_modulus(num as i64, mv) as f64;
    let m_f = mv as f64;
    let q0_f = spec.q0 as f64;
    let n_scale = spec.cutoff_n.scale;
    let d_scale = spec.cutoff_d.scale;
    let common = g * (n_scale / (q0_f * m_f.sqrt()) + m_f.sqrt());
    let lode1 = common
        * (1.0 + (d_scale / q0_f).sqrt() * m_f.powf(1.0 / 6.0) * y.powf(1.0 / 6.0)
            + (d_scale / q0_f) / m_f.sqrt());
    let lode2 = common * (m_f.sqrt() + (d_scale / q0_f) / m_f.sqrt());
    Ok(TwoVarReport {
        actual: acc,
        gcd_prefactor: g as u64,
        lode1: BoundReport::new(acc, lode1, "lode bound 1: (αl,m)(N/q₀√m + √m)(1 + (Δ/q₀)^1/2 m^1/6 y^1/6 + (Δ/q₀)m^-1/2)"),
        lode2: BoundReport::new(acc, lode2, "lode bound 2: (αl,m)(N/q₀√m + √m)(√m + (Δ/q₀)m^-1/2)"),
    })
}
