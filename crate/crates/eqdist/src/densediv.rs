//! Multiple dense divisibility: the recursive `i`-tuply `y`-densely
//! divisible predicate, constructive factorization witnesses, and
//! enumeration of squarefree moduli with prime factors in an interval.
//!
//! `n` is `0`-tuply `y`-d.d. always; for `i ≥ 1` it is `i`-tuply `y`-d.d.
//! when for every split `j + k = i − 1` and every real `R ∈ [1, yn]` there
//! is a factorization `n = q·r` with `y⁻¹R ≤ r ≤ R`, `q` being `j`-tuply
//! and `r` being `k`-tuply `y`-d.d. A divisor `r` serves exactly the window
//! `R ∈ [r, yr]`, so the real quantifier reduces to checking that the valid
//! divisors' windows cover `[1, yn]` without gaps.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::arith::FactoredModulus;
use crate::error::{precondition, Result};
use crate::sieve::primes_up_to;

/// Arguments of the predicate: is `n` `i`-tuply `y`-densely divisible?
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseDivQuery {
    pub n: u64,
    pub i: u32,
    pub y: f64,
}

impl DenseDivQuery {
    pub fn new(n: u64, i: u32, y: f64) -> Result<Self> {
        if n == 0 {
            return Err(precondition("n must be positive"));
        }
        if !(y >= 1.0) {
            return Err(precondition("y must be ≥ 1"));
        }
        Ok(DenseDivQuery { n, i, y })
    }
}

/// Memoized predicate evaluator, keyed on `(n, i, y)` with `y` rounded to
/// 1e-9. The recursion revisits subproblems heavily. The table sits behind
/// a mutex so one cache may serve several threads.
#[derive(Default)]
pub struct DenseDivCache {
    memo: Mutex<HashMap<(u64, u32, u64), bool>>,
}

fn y_key(y: f64) -> u64 {
    (y * 1e9).round() as u64
}

impl DenseDivCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// The predicate `n ∈ D^{(i)}(y)`.
    pub fn is_dd(&self, query: DenseDivQuery) -> bool {
        let DenseDivQuery { n, i, y } = query;
        if i == 0 || n == 1 {
            return true;
        }
        let key = (n, i, y_key(y));
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            return v;
        }
        let divisors = FactoredModulus::factor(n).expect("n ≥ 1").divisors();
        let target = y * n as f64;
        let mut ok = true;
        'split: for j in 0..i {
            let k = i - 1 - j;
            // windows [r, yr] of valid divisors must cover [1, yn]
            let mut reach = 0.0f64;
            for &r in &divisors {
                let rf = r as f64;
                if rf > reach && reach > 0.0 {
                    // r exceeds what is covered; if no valid divisor bridges
                    // the gap the split fails, and smaller ones are exhausted
                    ok = false;
                    break 'split;
                }
                let valid = self.is_dd(DenseDivQuery { n: n / r, i: j, y })
                    && self.is_dd(DenseDivQuery { n: r, i: k, y });
                if !valid {
                    if reach == 0.0 && r == 1 {
                        // R = 1 needs the divisor 1 (its window is [1, y])
                        ok = false;
                        break 'split;
                    }
                    continue;
                }
                if reach == 0.0 && rf > 1.0 {
                    ok = false;
                    break 'split;
                }
                reach = reach.max(y * rf);
                if reach >= target {
                    break;
                }
            }
            if reach < target {
                ok = false;
                break 'split;
            }
        }
        self.memo.lock().unwrap().insert(key, ok);
        ok
    }

    /// Constructive witness: a factorization `n = q·r` with
    /// `y⁻¹R ≤ r ≤ R`, `q` `j`-tuply and `r` `k`-tuply `y`-densely
    /// divisible. Returns the witness with the largest admissible `r`,
    /// or `None` when no divisor in the window validates.
    pub fn dd_witness(
        &self,
        n: u64,
        i: u32,
        j: u32,
        k: u32,
        y: f64,
        r_target: f64,
    ) -> Result<Option<(u64, u64)>> {
        if j + k + 1 != i {
            return Err(precondition("witness split needs j + k = i - 1"));
        }
        if n == 0 || !(y >= 1.0) {
            return Err(precondition("need n ≥ 1 and y ≥ 1"));
        }
        if r_target < 1.0 || r_target > y * n as f64 {
            return Err(precondition("R must lie in [1, yn]"));
        }
        let divisors = FactoredModulus::factor(n)?.divisors();
        for &r in divisors.iter().rev() {
            let rf = r as f64;
            if rf > r_target || y * rf < r_target {
                continue;
            }
            let q = n / r;
            if self.is_dd(DenseDivQuery { n: q, i: j, y })
                && self.is_dd(DenseDivQuery { n: r, i: k, y })
            {
                return Ok(Some((q, r)));
            }
        }
        Ok(None)
    }
}

/// One-off predicate call with a throwaway cache.
pub fn is_dd(n: u64, i: u32, y: f64) -> bool {
    DenseDivCache::new().is_dd(DenseDivQuery { n, i, y })
}

/// Prime interval and enumeration limit for moduli sets.
#[derive(Debug, Clone, Copy)]
pub struct ModuliInterval {
    /// Exclusive lower bound on admissible primes.
    pub lo: f64,
    /// Exclusive upper bound on admissible primes (`f64::INFINITY` allowed).
    pub hi: f64,
    /// Enumerate squarefree products up to this value.
    pub limit: u64,
}

impl ModuliInterval {
    pub fn new(lo: f64, hi: f64, limit: u64) -> Result<Self> {
        if !(lo < hi) || limit == 0 {
            return Err(precondition("need lo < hi and limit ≥ 1"));
        }
        if limit > 1_000_000_000 {
            return Err(precondition("enumeration limit capped at 10⁹"));
        }
        Ok(ModuliInterval { lo, hi, limit })
    }
}

/// Filter applied to the squarefree products of interval primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuliMode {
    /// `q ∈ D^{(i)}(y)` under the dense-divisibility predicate.
    DenselyDivisible,
    /// All prime factors ≤ `y` (in addition to lying in the interval).
    Smooth,
    /// Every squarefree product of interval primes.
    AllSquarefree,
}

/// Ascending squarefree integers ≤ `limit` whose prime factors lie in the
/// open interval, filtered by the mode predicate.
pub fn enumerate_moduli(
    interval: &ModuliInterval,
    i: u32,
    y: f64,
    mode: ModuliMode,
) -> Result<Vec<FactoredModulus>> {
    let hi_prime = interval.hi.min(interval.limit as f64);
    let mut primes: Vec<u64> = primes_up_to(hi_prime.floor().max(0.0) as u64)
        .into_iter()
        .filter(|&p| (p as f64) > interval.lo && (p as f64) < interval.hi)
        .collect();
    if mode == ModuliMode::Smooth {
        primes.retain(|&p| p as f64 <= y);
    }

    fn expand(primes: &[u64], start: usize, prod: u64, limit: u64, out: &mut Vec<u64>) {
        out.push(prod);
        for (offset, &p) in primes[start..].iter().enumerate() {
            match prod.checked_mul(p) {
                Some(next) if next <= limit => {
                    expand(primes, start + offset + 1, next, limit, out)
                }
                _ => break,
            }
        }
    }

    let mut values = Vec::new();
    expand(&primes, 0, 1, interval.limit, &mut values);
    values.sort_unstable();

    let cache = DenseDivCache::new();
    let mut out = Vec::new();
    for v in values {
        let keep = match mode {
            ModuliMode::DenselyDivisible => cache.is_dd(DenseDivQuery { n: v, i, y }),
            ModuliMode::Smooth | ModuliMode::AllSquarefree => true,
        };
        if keep {
            out.push(FactoredModulus::factor(v)?);
        }
    }
    Ok(out)
}
