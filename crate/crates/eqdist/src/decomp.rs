//! Dirichlet convolution algebra on finitely supported sequences, the
//! signed discrepancy in arithmetic progressions, exact verification of the
//! Heath-Brown and Vaughan decompositions of the von Mangoldt function, and
//! the constructive classifier of convolution factor scales
//! (Type 0 / I/II / III, extended by IV / V below σ = 1/10).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{gcd_u64, FactoredModulus};
use crate::error::{precondition, Error, Result};
use crate::sieve;

/// A finitely supported sequence `N → C` with scale metadata.
#[derive(Debug, Clone, Default)]
pub struct CoefficientSeq {
    support: BTreeMap<u64, Complex64>,
    /// Nominal scale `N` when the sequence is located at one.
    pub scale: Option<f64>,
    /// Metadata only: shifted-smooth at its scale.
    pub smooth: bool,
    /// Metadata only: satisfies a Siegel-Walfisz-type equidistribution
    /// hypothesis. Never verified here (it is an asymptotic property).
    pub siegel_walfisz: bool,
}

impl CoefficientSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (u64, Complex64)>) -> Self {
        let mut support = BTreeMap::new();
        for (n, v) in entries {
            if n >= 1 && v != Complex64::new(0.0, 0.0) {
                *support.entry(n).or_insert(Complex64::new(0.0, 0.0)) += v;
            }
        }
        CoefficientSeq { support, ..Default::default() }
    }

    pub fn point_mass(n: u64) -> Self {
        Self::from_entries([(n, Complex64::new(1.0, 0.0))])
    }

    /// Fill `[lo, hi]` from a real-valued function.
    pub fn on_range(lo: u64, hi: u64, f: impl Fn(u64) -> f64) -> Self {
        Self::from_entries((lo..=hi).map(|n| (n, Complex64::new(f(n), 0.0))))
    }

    /// `Λ` restricted to `[lo, hi]`, via the segmented sieve.
    pub fn lambda_range(lo: u64, hi: u64) -> Self {
        let values = sieve::von_mangoldt_range(lo.max(1), hi);
        Self::from_entries(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| (lo.max(1) + i as u64, Complex64::new(v, 0.0))),
        )
    }

    pub fn support(&self) -> &BTreeMap<u64, Complex64> {
        &self.support
    }

    pub fn at(&self, n: u64) -> Complex64 {
        self.support.get(&n).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

/// Dirichlet convolution `(α ⋆ β)(n) = Σ_{d|n} α(d) β(n/d)`, supported on
/// products of the two supports, optionally truncated at `limit`.
pub fn dirichlet_convolve(
    alpha: &CoefficientSeq,
    beta: &CoefficientSeq,
    limit: Option<u64>,
) -> CoefficientSeq {
    let mut out: BTreeMap<u64, Complex64> = BTreeMap::new();
    for (&a, &va) in &alpha.support {
        for (&b, &vb) in &beta.support {
            match a.checked_mul(b) {
                Some(n) if limit.is_none_or(|l| n <= l) => {
                    *out.entry(n).or_insert(Complex64::new(0.0, 0.0)) += va * vb;
                }
                _ => {}
            }
        }
    }
    CoefficientSeq { support: out, ..Default::default() }
}

/// Signed discrepancy
/// `Δ(α; a (q)) = Σ_{n ≡ a (q)} α(n) − (1/φ(q)) Σ_{(n,q)=1} α(n)`.
/// The class `a (q)` must be primitive.
pub fn discrepancy(alpha: &CoefficientSeq, a: i64, q: &FactoredModulus) -> Result<Complex64> {
    let qv = q.value();
    if gcd_u64(a.rem_euclid(qv as i64) as u64, qv) != 1 {
        return Err(Error::NonInvertible { a, q: qv });
    }
    let a_red = a.rem_euclid(qv as i64) as u64;
    let mut in_class = Complex64::new(0.0, 0.0);
    let mut coprime = Complex64::new(0.0, 0.0);
    for (&n, &v) in &alpha.support {
        if n % qv == a_red {
            in_class += v;
        }
        if gcd_u64(n, qv) == 1 {
            coprime += v;
        }
    }
    Ok(in_class - coprime / q.euler_phi() as f64)
}

/// Largest `t` with `t^k ≤ x`.
fn integer_kth_root(x: u64, k: u32) -> u64 {
    if k == 1 {
        return x;
    }
    let mut t = (x as f64).powf(1.0 / k as f64).round() as u64 + 1;
    while t > 0 && (t as u128).pow(k) > x as u128 {
        t -= 1;
    }
    t
}

/// Evaluation record of the Heath-Brown identity at a single point.
#[derive(Debug, Clone)]
pub struct HeathBrownEval {
    /// The truncation point `(2x)^{1/K}` of the Möbius factor.
    pub truncation: u64,
    /// Per-`j` values `(−1)^{j−1} C(K,j) (μ≤^{⋆j} ⋆ 1^{⋆(j−1)} ⋆ L)(n)`.
    pub terms: Vec<f64>,
    pub total: f64,
    pub lambda: f64,
    pub residual: f64,
}

/// The Heath-Brown decomposition of `Λ(n)` for `n ∈ [x, 2x]`:
/// `Λ = Σ_{j=1}^K (−1)^{j−1} C(K,j) μ≤^{⋆j} ⋆ 1^{⋆(j−1)} ⋆ L`
/// with `μ≤ = μ·1_{·≤(2x)^{1/K}}`. Exact up to floating-point error.
pub fn heath_brown_terms(k_order: u32, x: u64, n: u64) -> Result<HeathBrownEval> {
    if k_order < 1 || k_order > 10 {
        return Err(precondition("K must lie in [1, 10]"));
    }
    if x > 1_000_000 {
        return Err(precondition("x capped at 10⁶"));
    }
    if n < x || n > 2 * x {
        return Err(precondition("n must lie in [x, 2x]"));
    }
    let truncation = integer_kth_root(2 * x, k_order);
    let fac = FactoredModulus::factor(n)?;
    let divisors = fac.divisors();
    let index: BTreeMap<u64, usize> =
        divisors.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let mu_le: Vec<f64> = divisors
        .iter()
        .map(|&d| {
            if d <= truncation {
                FactoredModulus::factor(d).unwrap().mobius() as f64
            } else {
                0.0
            }
        })
        .collect();

    // A_t = μ≤^{⋆t} and B_s = 1^{⋆s} ⋆ L on the divisor lattice of n
    let m = divisors.len();
    let mut a_t = mu_le.clone();
    let mut b_s: Vec<f64> = divisors.iter().map(|&d| (d as f64).ln()).collect();
    let conv = |f: &[f64], g: &dyn Fn(u64) -> f64| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (i, &d) in divisors.iter().enumerate() {
            let mut acc = 0.0;
            for &e in FactoredModulus::factor(d).unwrap().divisors().iter() {
                acc += f[index[&e]] * g(d / e);
            }
            out[i] = acc;
        }
        out
    };

    let mut terms = Vec::with_capacity(k_order as usize);
    let binomial = |k: u32, j: u32| -> f64 {
        let mut c = 1.0;
        for i in 0..j {
            c = c * (k - i) as f64 / (i + 1) as f64;
        }
        c
    };
    for j in 1..=k_order {
        if j > 1 {
            let mu_fn = |d: u64| {
                if d <= truncation {
                    FactoredModulus::factor(d).unwrap().mobius() as f64
                } else {
                    0.0
                }
            };
            a_t = conv(&a_t, &mu_fn);
            b_s = conv(&b_s, &|_| 1.0);
        }
        // (A_j ⋆ B_{j-1})(n)
        let mut value = 0.0;
        for (i, &d) in divisors.iter().enumerate() {
            value += a_t[i] * b_s[index[&(n / d)]];
        }
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        terms.push(sign * binomial(k_order, j) * value);
    }
    let total: f64 = terms.iter().sum();
    let lambda = crate::arith::von_mangoldt(&fac);
    Ok(HeathBrownEval {
        truncation,
        terms,
        total,
        lambda,
        residual: (total - lambda).abs(),
    })
}

/// Maximum Heath-Brown residual over all `n ∈ [x, 2x]`, computed by dense
/// array convolutions (the independent route used by the acceptance gate).
pub fn heath_brown_max_residual(k_order: u32, x: u64) -> Result<f64> {
    if k_order < 1 || k_order > 10 {
        return Err(precondition("K must lie in [1, 10]"));
    }
    if x > 1_000_000 {
        return Err(precondition("x capped at 10⁶"));
    }
    let hi = (2 * x) as usize;
    let truncation = integer_kth_root(2 * x, k_order) as usize;
    let mu = sieve::mobius_up_to(hi);
    let mut mu_le = vec![0.0f64; hi + 1];
    for n in 1..=truncation.min(hi) {
        mu_le[n] = mu[n] as f64;
    }
    let conv = |f: &[f64], g: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0f64; hi + 1];
        for d in 1..=hi {
            if f[d] == 0.0 {
                continue;
            }
            let mut n = d;
            let mut m = 1;
            while n <= hi {
                if g[m] != 0.0 {
                    out[n] += f[d] * g[m];
                }
                n += d;
                m += 1;
            }
        }
        out
    };

    let log_arr: Vec<f64> = (0..=hi).map(|n| if n > 0 { (n as f64).ln() } else { 0.0 }).collect();
    let ones: Vec<f64> = {
        let mut v = vec![1.0f64; hi + 1];
        v[0] = 0.0;
        v
    };
    let binomial = |k: u32, j: u32| -> f64 {
        let mut c = 1.0;
        for i in 0..j {
            c = c * (k - i) as f64 / (i + 1) as f64;
        }
        c
    };

    let mut total = vec![0.0f64; hi + 1];
    let mut mu_pow = mu_le.clone(); // μ≤^{⋆j}
    let mut one_log = log_arr.clone(); // 1^{⋆(j−1)} ⋆ L
    for j in 1..=k_order {
        if j > 1 {
            mu_pow = conv(&mu_pow, &mu_le);
            one_log = conv(&one_log, &ones);
        }
        let term = conv(&mu_pow, &one_log);
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        let c = sign * binomial(k_order, j);
        for n in 1..=hi {
            total[n] += c * term[n];
        }
    }

    let lambda = sieve::von_mangoldt_range(1, hi as u64);
    let mut max_residual = 0.0f64;
    for n in x as usize..=hi {
        max_residual = max_residual.max((total[n] - lambda[n - 1]).abs());
    }
    Ok(max_residual)
}

/// Evaluation record of the Vaughan identity at a single point:
/// `Λ≥ = μ< ⋆ L − μ< ⋆ Λ< ⋆ 1 + μ≥ ⋆ Λ≥ ⋆ 1` with the `<`/`≥` cuts at
/// `U` (Möbius) and `V` (von Mangoldt).
#[derive(Debug, Clone)]
pub struct VaughanEval {
    pub term_mu_log: f64,
    pub term_small: f64,
    pub term_large: f64,
    pub total: f64,
    pub lambda_ge: f64,
    pub residual: f64,
}

pub fn vaughan_terms(u_cut: f64, v_cut: f64, n: u64) -> Result<VaughanEval> {
    if !(u_cut > 1.0 && v_cut > 1.0) {
        return Err(precondition("U, V must exceed 1"));
    }
    let fac = FactoredModulus::factor(n)?;
    let divisors = fac.divisors();
    let lambda = |m: u64| -> f64 {
        if m == 1 {
            0.0
        } else {
            crate::arith::von_mangoldt(&FactoredModulus::factor(m).unwrap())
        }
    };
    let mu = |m: u64| FactoredModulus::factor(m).unwrap().mobius() as f64;

    let mut term_mu_log = 0.0;
    for &d in &divisors {
        if (d as f64) < u_cut {
            term_mu_log += mu(d) * ((n / d) as f64).ln();
        }
    }
    let mut term_small = 0.0;
    let mut term_large = 0.0;
    // Σ over factorizations n = d·e·f
    for &d in &divisors {
        let rest = n / d;
        for &e in FactoredModulus::factor(rest)?.divisors().iter() {
            let mu_d = mu(d);
            if mu_d == 0.0 {
                continue;
            }
            let lam_e = lambda(e);
            if lam_e == 0.0 {
                continue;
            }
            if (d as f64) < u_cut && (e as f64) < v_cut {
                term_small += mu_d * lam_e;
            }
            if (d as f64) >= u_cut && (e as f64) >= v_cut {
                term_large += mu_d * lam_e;
            }
        }
    }
    let total = term_mu_log - term_small + term_large;
    let lambda_ge = if (n as f64) >= v_cut { lambda(n) } else { 0.0 };
    Ok(VaughanEval {
        term_mu_log,
        term_small,
        term_large,
        total,
        lambda_ge,
        residual: (total - lambda_ge).abs(),
    })
}

/// Classification of a tuple of non-negative scales summing to 1.
/// Indices are 0-based positions into the input tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeClassification {
    /// Some `t_i ≥ 1/2 + σ`.
    Type0 { index: usize },
    /// A partition with `1/2 − σ < Σ_S ≤ Σ_T < 1/2 + σ`.
    TypeIOrII { s: Vec<usize>, t: Vec<usize> },
    /// Distinct scales in `[2σ, 1/2−σ]` with pairwise sums ≥ `1/2 + σ`.
    TypeIII { i: usize, j: usize, k: usize },
    /// Four distinct scales in the window, smallest + largest ≥ `1/2 + σ`.
    TypeIV { indices: [usize; 4] },
    /// Five distinct scales in the window containing a triple with sum
    /// ≥ `1/2 + σ`.
    TypeV { indices: [usize; 5] },
    /// No case applies (cannot happen for valid inputs in range).
    Infeasible,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn validate_tuple(t: &[BigRational]) -> Result<()> {
    if t.is_empty() || t.len() > 24 {
        return Err(precondition("tuple length must be in [1, 24]"));
    }
    if t.iter().any(|v| v.is_negative()) {
        return Err(precondition("scales must be non-negative"));
    }
    let total: BigRational = t.iter().sum();
    if !total.is_one() {
        return Err(precondition("scales must sum to exactly 1"));
    }
    Ok(())
}

/// All `2^n` subset sums, indexed by bitmask.
fn subset_sums(t: &[BigRational]) -> Vec<BigRational> {
    let n = t.len();
    let mut sums = vec![BigRational::zero(); 1 << n];
    for mask in 1..1usize << n {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = &sums[mask & (mask - 1)] + &t[low];
    }
    sums
}

/// The constructive classifier: Type 0, then Type I/II by subset scan,
/// then Type III through the powerful-element argument. Valid for
/// `1/10 < σ < 1/2`; a subset sum strictly inside `(1/2−σ, 1/2+σ)` forces
/// Type I/II.
pub fn classify(t: &[BigRational], sigma: &BigRational) -> Result<TypeClassification> {
    if !(&rat(1, 10) < sigma && sigma < &rat(1, 2)) {
        return Err(precondition("σ must lie in (1/10, 1/2)"));
    }
    validate_tuple(t)?;
    let big = rat(1, 2) + sigma;
    let small = rat(1, 2) - sigma;

    if let Some(index) = t.iter().position(|v| v >= &big) {
        return Ok(TypeClassification::Type0 { index });
    }

    let n = t.len();
    let sums = subset_sums(t);
    for (mask, s_sum) in sums.iter().enumerate().take((1 << n) - 1).skip(1) {
        if s_sum > &small && s_sum < &big {
            let t_sum = BigRational::one() - s_sum;
            let s_mask = if *s_sum <= t_sum { mask } else { (1 << n) - 1 - mask };
            let s: Vec<usize> = (0..n).filter(|i| s_mask >> i & 1 == 1).collect();
            let t_idx: Vec<usize> = (0..n).filter(|i| s_mask >> i & 1 == 0).collect();
            return Ok(TypeClassification::TypeIOrII { s, t: t_idx });
        }
    }

    // every subset is now small (≤ 1/2−σ) or large (≥ 1/2+σ); find the
    // powerful elements: i such that some small S ⊆ rest makes S ∪ {i} large
    let mut powerful = Vec::new();
    for i in 0..n {
        let mut best = BigRational::zero();
        for (mask, s) in sums.iter().enumerate() {
            if mask >> i & 1 == 1 {
                continue;
            }
            if s <= &small && s > &best {
                best = s.clone();
            }
        }
        if &best + &t[i] >= big {
            powerful.push(i);
        }
    }
    if powerful.len() != 3 {
        return Err(precondition(format!(
            "classifier invariant broken: {} powerful elements",
            powerful.len()
        )));
    }
    powerful.sort_by(|&a, &b| t[a].cmp(&t[b]).then(a.cmp(&b)));
    let (i, j, k) = (powerful[0], powerful[1], powerful[2]);
    let two_sigma = sigma + sigma;
    let ok = t[i] >= two_sigma
        && t[k] <= small
        && &t[i] + &t[j] >= big
        && &t[i] + &t[k] >= big
        && &t[j] + &t[k] >= big;
    if !ok {
        return Err(precondition("powerful-triple inequalities failed to verify"));
    }
    Ok(TypeClassification::TypeIII { i, j, k })
}

/// Which extended cases a tuple satisfies, by exhaustive search.
/// Order of the returned flags: (0, I/II, III, IV, V).
pub fn satisfiable_cases(t: &[BigRational], sigma: &BigRational) -> Result<[bool; 5]> {
    validate_tuple(t)?;
    let big = rat(1, 2) + sigma;
    let small = rat(1, 2) - sigma;
    let two_sigma = sigma + sigma;
    let n = t.len();

    let type0 = t.iter().any(|v| v >= &big);
    let sums = subset_sums(t);
    let type12 = sums[1..(1 << n) - 1].iter().any(|s| s > &small && s < &big);

    // indices inside the window [2σ, 1/2−σ], sorted by value
    let mut window: Vec<usize> = (0..n)
        .filter(|&i| t[i] >= two_sigma && t[i] <= small)
        .collect();
    window.sort_by(|&a, &b| t[a].cmp(&t[b]).then(a.cmp(&b)));

    let mut type3 = false;
    let m = window.len();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let (i, j, k) = (window[a], window[b], window[c]);
                if &t[i] + &t[j] >= big && &t[i] + &t[k] >= big && &t[j] + &t[k] >= big {
                    type3 = true;
                }
            }
        }
    }
    let mut type4 = false;
    for a in 0..m {
        for d in a + 3..m {
            // b, c can be any two strictly between a and d
            if d - a >= 3 && &t[window[a]] + &t[window[d]] >= big {
                type4 = true;
            }
        }
    }
    let mut type5 = false;
    if m >= 5 {
        // some 5-subset containing a triple with sum ≥ 1/2+σ; the best
        // candidate is the three largest window elements padded to five
        for mask in 0u32..(1 << m) {
            if mask.count_ones() != 5 {
                continue;
            }
            let chosen: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            // window is sorted: the three largest of the chosen five
            let sum3: BigRational = chosen[2..].iter().map(|&i| &t[window[i]]).sum();
            if sum3 >= big {
                type5 = true;
                break;
            }
        }
    }
    Ok([type0, type12, type3, type4, type5])
}

/// Extended classifier for `1/14 < σ < 1/2`. Exhaustive search, preferring
/// the most structured witness: Type 0, then III, IV, V, and Type I/II
/// last. (The Type V triple condition is taken over any three of the five
/// chosen scales.)
pub fn classify_extended(t: &[BigRational], sigma: &BigRational) -> Result<TypeClassification> {
    if !(&rat(1, 14) < sigma && sigma < &rat(1, 2)) {
        return Err(precondition("σ must lie in (1/14, 1/2)"));
    }
    validate_tuple(t)?;
    let big = rat(1, 2) + sigma;
    let small = rat(1, 2) - sigma;
    let two_sigma = sigma + sigma;

    if let Some(index) = t.iter().position(|v| v >= &big) {
        return Ok(TypeClassification::Type0 { index });
    }

    let n = t.len();
    let mut window: Vec<usize> = (0..n)
        .filter(|&i| t[i] >= two_sigma && t[i] <= small)
        .collect();
    window.sort_by(|&a, &b| t[a].cmp(&t[b]).then(a.cmp(&b)));
    let m = window.len();

    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let (i, j, k) = (window[a], window[b], window[c]);
                if &t[i] + &t[j] >= big && &t[i] + &t[k] >= big && &t[j] + &t[k] >= big {
                    return Ok(TypeClassification::TypeIII { i, j, k });
                }
            }
        }
    }
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for d in c + 1..m {
                    if &t[window[a]] + &t[window[d]] >= big {
                        return Ok(TypeClassification::TypeIV {
                            indices: [window[a], window[b], window[c], window[d]],
                        });
                    }
                }
            }
        }
    }
    if m >= 5 {
        for mask in 0u32..(1 << m) {
            if mask.count_ones() != 5 {
                continue;
            }
            let chosen: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let sum3: BigRational = chosen[2..].iter().map(|&i| &t[window[i]]).sum();
            if sum3 >= big {
                return Ok(TypeClassification::TypeV {
                    indices: [
                        window[chosen[0]],
                        window[chosen[1]],
                        window[chosen[2]],
                        window[chosen[3]],
                        window[chosen[4]],
                    ],
                });
            }
        }
    }
    let sums = subset_sums(t);
    for (mask, s_sum) in sums.iter().enumerate().take((1 << n) - 1).skip(1) {
        if s_sum > &small && s_sum < &big {
            let t_sum = BigRational::one() - s_sum;
            let s_mask = if *s_sum <= t_sum { mask } else { (1 << n) - 1 - mask };
            let s: Vec<usize> = (0..n).filter(|i| s_mask >> i & 1 == 1).collect();
            let t_idx: Vec<usize> = (0..n).filter(|i| s_mask >> i & 1 == 0).collect();
            return Ok(TypeClassification::TypeIOrII { s, t: t_idx });
        }
    }
    Ok(TypeClassification::Infeasible)
}
