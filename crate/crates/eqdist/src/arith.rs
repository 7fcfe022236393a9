//! Integer, modular and projective-line arithmetic: factorization into
//! `FactoredModulus`, the standard arithmetic functions, the additive
//! character `e_q` extended to `P¹` with its degenerate-point conventions,
//! and the gcd `(q, f)` of a modulus with a rational phase.

use num_complex::Complex64;

use crate::error::{precondition, Error, Result};
use crate::poly::RationalPhase;

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn gcd_i64(a: i64, q: u64) -> u64 {
    num_integer::gcd(a.unsigned_abs(), q)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    num_integer::lcm(a, b)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64 (the standard 12-base certificate).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard's rho (Brent variant); `n` must be composite, odd, > 1.
fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// A positive integer carried with its full prime factorization,
/// `(prime, exponent)` pairs in ascending prime order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredModulus {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredModulus {
    /// Factor `n ≥ 1` by trial division plus Miller-Rabin/Pollard rho.
    /// Total on its domain; `1` gets the empty factorization.
    pub fn factor(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(precondition("factor(0) is undefined"));
        }
        let mut rest = n;
        let mut factors: Vec<(u64, u32)> = Vec::new();
        for p in [2u64, 3, 5] {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if e > 0 {
                factors.push((p, e));
            }
        }
        let mut d = 7u64;
        let mut wheel = [4u64, 2, 4, 2, 4, 6, 2, 6].iter().cycle();
        while d <= 100_000 && d * d <= rest {
            if rest % d == 0 {
                let mut e = 0;
                while rest % d == 0 {
                    rest /= d;
                    e += 1;
                }
                factors.push((d, e));
            }
            d += wheel.next().unwrap();
        }
        // whatever is left is prime, a prime square, or needs rho
        let mut stack = vec![rest];
        let mut extra: Vec<u64> = Vec::new();
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime(m) {
                extra.push(m);
            } else {
                let d = pollard_rho(m);
                stack.push(d);
                stack.push(m / d);
            }
        }
        extra.sort_unstable();
        for p in extra {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        factors.sort_unstable();
        debug_assert_eq!(
            factors.iter().fold(1u128, |acc, &(p, e)| acc * (p as u128).pow(e)),
            n as u128
        );
        Ok(FactoredModulus { value: n, factors })
    }

    /// Wrap an already-known factorization of a squarefree product.
    pub fn from_distinct_primes(primes: &[u64]) -> Result<Self> {
        let mut value: u64 = 1;
        let mut factors = Vec::with_capacity(primes.len());
        let mut sorted = primes.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(precondition("repeated prime in squarefree product"));
            }
        }
        for &p in &sorted {
            debug_assert!(is_prime(p));
            value = value.checked_mul(p).ok_or(Error::Range("modulus product"))?;
            factors.push((p, 1));
        }
        Ok(FactoredModulus { value, factors })
    }

    pub fn one() -> Self {
        FactoredModulus { value: 1, factors: Vec::new() }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Distinct primes, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn num_prime_factors(&self) -> u32 {
        self.factors.len() as u32
    }

    /// Ω(n): prime factors with multiplicity.
    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
    }

    pub fn mobius(&self) -> i64 {
        if !self.is_squarefree() {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn tau(&self) -> u64 {
        self.factors.iter().fold(1u64, |acc, &(_, e)| acc * (e as u64 + 1))
    }

    /// τ_k(n): the number of ordered k-tuples with product n.
    pub fn tau_k(&self, k: u32) -> Result<u64> {
        let mut acc: u128 = 1;
        for &(_, e) in &self.factors {
            // C(e + k - 1, k - 1)
            let mut c: u128 = 1;
            for i in 0..e as u128 {
                c = c * (k as u128 + i) / (i + 1);
            }
            acc = acc.checked_mul(c).ok_or(Error::Range("tau_k"))?;
        }
        u64::try_from(acc).map_err(|_| Error::Range("tau_k"))
    }

    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Selector for the standard arithmetic functions of the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticFunctionKind {
    Mobius,
    VonMangoldt,
    EulerPhi,
    /// τ_k with its order parameter, k ≥ 2.
    TauK(u32),
    Omega,
    /// log q at primes, 0 elsewhere.
    ThetaPrime,
}

/// Value of an arithmetic function: integer-valued ones stay exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithValue {
    Int(i64),
    Real(f64),
}

impl ArithValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            ArithValue::Int(v) => v as f64,
            ArithValue::Real(v) => v,
        }
    }
}

pub fn arith_fn(kind: ArithmeticFunctionKind, n: u64) -> Result<ArithValue> {
    let f = FactoredModulus::factor(n)?;
    Ok(match kind {
        ArithmeticFunctionKind::Mobius => ArithValue::Int(f.mobius()),
        ArithmeticFunctionKind::VonMangoldt => ArithValue::Real(von_mangoldt(&f)),
        ArithmeticFunctionKind::EulerPhi => ArithValue::Int(f.euler_phi() as i64),
        ArithmeticFunctionKind::TauK(k) => ArithValue::Int(f.tau_k(k)? as i64),
        ArithmeticFunctionKind::Omega => ArithValue::Int(f.big_omega() as i64),
        ArithmeticFunctionKind::ThetaPrime => ArithValue::Real(if f.factors.len() == 1 && f.factors[0].1 == 1 {
            (n as f64).ln()
        } else {
            0.0
        }),
    })
}

/// Λ(n) from a factorization: log p on prime powers, else 0.
pub fn von_mangoldt(f: &FactoredModulus) -> f64 {
    if f.factors.len() == 1 {
        (f.factors[0].0 as f64).ln()
    } else {
        0.0
    }
}

/// Inverse of `a` mod `q`; fails when `gcd(a, q) > 1`.
pub fn mod_inverse(a: i64, q: u64) -> Result<u64> {
    if q == 1 {
        return Ok(0);
    }
    let a_red = a.rem_euclid(q as i64) as u64;
    // extended Euclid on (a_red, q)
    let (mut old_r, mut r) = (a_red as i128, q as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NonInvertible { a, q });
    }
    Ok(old_s.rem_euclid(q as i128) as u64)
}

/// `e(x) = exp(2πi x)` for `x = a/q` with exact reduction of `a` mod `q`.
pub fn e_q(a: i64, q: u64) -> Complex64 {
    let r = a.rem_euclid(q as i64) as f64;
    let angle = std::f64::consts::TAU * r / q as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// A point of `P¹(Z/qZ)`: a pair `(a, b)` with no common zero mod any
/// prime of the modulus, up to simultaneous unit scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectivePoint {
    a: u64,
    b: u64,
}

impl ProjectivePoint {
    pub fn new(a: i64, b: i64, q: &FactoredModulus) -> Result<Self> {
        let qa = a.rem_euclid(q.value as i64) as u64;
        let qb = b.rem_euclid(q.value as i64) as u64;
        for p in q.primes() {
            if qa % p == 0 && qb % p == 0 {
                return Err(Error::MalformedPoint { p });
            }
        }
        Ok(ProjectivePoint { a: qa, b: qb })
    }

    pub fn parts(&self) -> (u64, u64) {
        (self.a, self.b)
    }

    /// Canonical representative under unit scaling: `(a·b̄, 1)` locally where
    /// `b` is invertible, `(1, 0)` locally at infinity, recombined by CRT.
    pub fn canonical(&self, q: &FactoredModulus) -> (u64, u64) {
        let mut a_res: Vec<(u64, u64)> = Vec::new();
        let mut b_res: Vec<(u64, u64)> = Vec::new();
        for &(p, e) in q.factors() {
            let pe = p.pow(e);
            if self.b % p != 0 {
                let inv = mod_inverse(self.b as i64, pe).expect("unit");
                a_res.push((mul_mod(self.a % pe, inv, pe), pe));
                b_res.push((1, pe));
            } else {
                a_res.push((1, pe));
                b_res.push((0, pe));
            }
        }
        (crt_combine(&a_res).0, crt_combine(&b_res).0)
    }

    /// Equality as projective points over the given modulus.
    pub fn same_point(&self, other: &Self, q: &FactoredModulus) -> bool {
        self.canonical(q) == other.canonical(q)
    }
}

/// CRT-combine residues `(r_i, m_i)` with pairwise coprime moduli;
/// returns `(r, m)` with `m = Π m_i`.
pub fn crt_combine(residues: &[(u64, u64)]) -> (u64, u64) {
    let mut r: u64 = 0;
    let mut m: u64 = 1;
    for &(ri, mi) in residues {
        if mi == 1 {
            continue;
        }
        debug_assert_eq!(gcd_u64(m, mi), 1);
        let inv_m = mod_inverse(m as i64, mi).expect("coprime moduli");
        let diff = (ri as i128 - (r % mi) as i128).rem_euclid(mi as i128) as u64;
        let t = mul_mod(diff, inv_m, mi);
        r += m * t;
        m *= mi;
    }
    (r, m)
}

/// `e_q((a, b))` on a validated projective point: `e_q(a·b̄)` when `b` is a
/// unit, `0` when the point meets infinity at some prime of `q`.
pub fn eq_eval_point(x: &ProjectivePoint, q: &FactoredModulus) -> Complex64 {
    if q.primes().any(|p| x.b % p == 0) {
        return Complex64::new(0.0, 0.0);
    }
    let inv = mod_inverse(x.b as i64, q.value).expect("unit checked above");
    e_q(mul_mod(x.a % q.value, inv, q.value) as i64, q.value)
}

/// `e_q(num/den)` for a squarefree modulus with the per-prime conventions:
/// at `p | q`, the local factor is `0` if only the denominator vanishes and
/// `1` if numerator and denominator both vanish.
pub fn eq_eval_frac(num: i128, den: i128, q: &FactoredModulus) -> Result<Complex64> {
    if !q.is_squarefree() {
        return Err(precondition("fraction conventions need a squarefree modulus"));
    }
    let mut result = Complex64::new(1.0, 0.0);
    for p in q.primes() {
        result *= local_factor(num, den, p, q.value / p);
        if result.norm_sqr() == 0.0 {
            break;
        }
    }
    Ok(result)
}

/// Local factor `e_p(num/(den·cofactor))` with the 0/1 conventions;
/// `cofactor` is the complementary divisor `q/p`, a unit mod p.
fn local_factor(num: i128, den: i128, p: u64, cofactor: u64) -> Complex64 {
    let np = num.rem_euclid(p as i128) as u64;
    let dp_raw = den.rem_euclid(p as i128) as u64;
    let dp = mul_mod(dp_raw, cofactor % p, p);
    if dp == 0 {
        if np == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    } else {
        let inv = mod_inverse(dp as i64, p).expect("nonzero mod prime");
        e_q(mul_mod(np, inv, p) as i64, p)
    }
}

/// `e_q(a)` for `a = num/den ∈ P¹(Q)`: the fraction is reduced to lowest
/// terms, then the value is `e_q(num·den̄)` when the reduced denominator is
/// a unit mod `q`, and `0` otherwise (the point meets infinity somewhere).
/// Works for any modulus `q ≥ 1`, squarefree or not.
pub fn eq_eval_rational(num: i128, den: i128, q: u64) -> Result<Complex64> {
    if num == 0 && den == 0 {
        return Err(precondition("0/0 is not a point of P¹(Q)"));
    }
    let g = num_integer::gcd(num, den);
    let (num, den) = if g != 0 { (num / g, den / g) } else { (num, den) };
    let dq = den.rem_euclid(q as i128) as u64;
    if gcd_u64(dq, q) != 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let nq = num.rem_euclid(q as i128) as u64;
    let inv = mod_inverse(dq as i64, q)?;
    Ok(e_q(mul_mod(nq, inv, q) as i64, q))
}

/// The Chinese-remainder split of `e_{q₁q₂}`: returns
/// `(e_{q₁q₂}(a), e_{q₁}(a/q₂), e_{q₂}(a/q₁))` for `a = num/den ∈ P¹(Q)`.
/// The first component equals the product of the other two.
pub fn crt_factor_eval(
    num: i128,
    den: i128,
    q1: &FactoredModulus,
    q2: &FactoredModulus,
) -> Result<(Complex64, Complex64, Complex64)> {
    if gcd_u64(q1.value, q2.value) != 1 {
        return Err(Error::NonCoprime { a: q1.value, b: q2.value });
    }
    let q12 = q1
        .value
        .checked_mul(q2.value)
        .ok_or(Error::Range("modulus product"))?;
    let full = eq_eval_rational(num, den, q12)?;
    let f1 = eq_eval_rational(num, den * q2.value as i128, q1.value)?;
    let f2 = eq_eval_rational(num, den * q1.value as i128, q2.value)?;
    Ok((full, f1, f2))
}

/// `(q, f)`: the product of the primes of the squarefree modulus `q` that
/// divide the rational phase `f`, with `(q, 0) = q`.
pub fn phase_gcd(q: &FactoredModulus, f: &RationalPhase) -> Result<u64> {
    if !q.is_squarefree() {
        return Err(precondition("(q, f) is defined here for squarefree q"));
    }
    if f.is_zero() {
        return Ok(q.value);
    }
    let mut out = 1u64;
    for p in q.primes() {
        let (p1, _q1) = f.reduce_mod(p)?;
        if p1.is_zero() {
            out *= p;
        }
    }
    Ok(out)
}

/// `(a, q)` for an integer `a` (possibly 0 or negative) with `(0, q) = q`.
pub fn gcd_with_modulus(a: i64, q: u64) -> u64 {
    if a == 0 {
        q
    } else {
        gcd_i64(a, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::IntPoly;

    #[test]
    fn factor_small_cases() {
        let one = FactoredModulus::factor(1).unwrap();
        assert!(one.factors().is_empty());
        assert_eq!(one.value(), 1);

        let sixty = FactoredModulus::factor(60).unwrap();
        assert_eq!(sixty.factors(), &[(2, 2), (3, 1), (5, 1)]);
        assert!(!sixty.is_squarefree());

        let primorial = FactoredModulus::factor(30030).unwrap();
        assert_eq!(
            primorial.primes().collect::<Vec<_>>(),
            vec![2, 3, 5, 7, 11, 13]
        );
        assert!(primorial.is_squarefree());
    }

    #[test]
    fn factor_matches_trial_division_oracle() {
        for n in 1..=2000u64 {
            let f = FactoredModulus::factor(n).unwrap();
            // oracle: plain trial division
            let mut m = n;
            let mut oracle = Vec::new();
            let mut d = 2;
            while d * d <= m {
                let mut e = 0;
                while m % d == 0 {
                    m /= d;
                    e += 1;
                }
                if e > 0 {
                    oracle.push((d, e));
                }
                d += 1;
            }
            if m > 1 {
                oracle.push((m, 1));
            }
            assert_eq!(f.factors(), &oracle[..], "n = {n}");
        }
    }

    #[test]
    fn factor_large_semiprime() {
        let n = 1_000_003u64 * 998_681;
        let f = FactoredModulus::factor(n).unwrap();
        assert_eq!(f.primes().collect::<Vec<_>>(), vec![998_681, 1_000_003]);
    }

    #[test]
    fn arith_function_examples() {
        assert_eq!(arith_fn(ArithmeticFunctionKind::Mobius, 30).unwrap(), ArithValue::Int(-1));
        let lam8 = arith_fn(ArithmeticFunctionKind::VonMangoldt, 8).unwrap().as_f64();
        assert!((lam8 - (2f64).ln()).abs() < 1e-15);
        assert_eq!(arith_fn(ArithmeticFunctionKind::TauK(3), 12).unwrap(), ArithValue::Int(18));
        assert_eq!(arith_fn(ArithmeticFunctionKind::EulerPhi, 30).unwrap(), ArithValue::Int(8));
        assert_eq!(arith_fn(ArithmeticFunctionKind::Omega, 60).unwrap(), ArithValue::Int(4));
    }

    #[test]
    fn tau_3_brute_force_oracle() {
        // ordered triples d1·d2·d3 = n
        for n in 1..=60u64 {
            let mut count = 0;
            for d1 in 1..=n {
                if n % d1 != 0 {
                    continue;
                }
                let m = n / d1;
                for d2 in 1..=m {
                    if m % d2 == 0 {
                        count += 1;
                    }
                }
            }
            let f = FactoredModulus::factor(n).unwrap();
            assert_eq!(f.tau_k(3).unwrap(), count, "n = {n}");
        }
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(1, 17).unwrap(), 1);
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert_eq!(mod_inverse(2, 4).unwrap_err(), Error::NonInvertible { a: 2, q: 4 });
        // exhaustive check mod 7
        for a in 1..7i64 {
            let inv = mod_inverse(a, 7).unwrap();
            assert_eq!((a as u64 * inv) % 7, 1);
        }
    }

    #[test]
    fn eq_eval_point_examples() {
        let q5 = FactoredModulus::factor(5).unwrap();
        // e_5(3/1) = e(3/5)
        let x = ProjectivePoint::new(3, 1, &q5).unwrap();
        let got = eq_eval_point(&x, &q5);
        let want = e_q(3, 5);
        assert!((got - want).norm() < 1e-15);

        // point at infinity: (1, 0) mod 5 → 0
        let inf = ProjectivePoint::new(1, 5, &q5).unwrap();
        assert_eq!(eq_eval_point(&inf, &q5), Complex64::new(0.0, 0.0));

        // (0, 0) mod 5 is malformed as a projective point...
        assert_eq!(
            ProjectivePoint::new(0, 5, &q5).unwrap_err(),
            Error::MalformedPoint { p: 5 }
        );
        // ...but the fraction conventions give local factor 1 there
        let v = eq_eval_frac(0, 5, &q5).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eq_frac_matches_plain_character_on_units() {
        let q = FactoredModulus::factor(105).unwrap();
        for a in 0..105i128 {
            for b in [1i128, 2, 4, 11, 104] {
                let inv = mod_inverse(b as i64, 105).unwrap();
                let want = e_q((a as i64) * inv as i64 % 105, 105);
                let got = eq_eval_frac(a, b, &q).unwrap();
                assert!((got - want).norm() < 1e-12, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn crt_split_examples() {
        let q3 = FactoredModulus::factor(3).unwrap();
        let q5 = FactoredModulus::factor(5).unwrap();
        let (full, f1, f2) = crt_factor_eval(1, 1, &q3, &q5).unwrap();
        assert!((full - f1 * f2).norm() < 1e-12);
        assert!((full - e_q(1, 15)).norm() < 1e-12);

        let q4 = FactoredModulus::factor(4).unwrap();
        let q9 = FactoredModulus::factor(9).unwrap();
        let (full, f1, f2) = crt_factor_eval(7, 1, &q4, &q9).unwrap();
        assert!((full - f1 * f2).norm() < 1e-12);

        // point at infinity mod q1 kills both sides
        let (full, f1, _f2) = crt_factor_eval(1, 3, &q3, &q5).unwrap();
        assert_eq!(full, Complex64::new(0.0, 0.0));
        assert_eq!(f1, Complex64::new(0.0, 0.0));

        assert!(crt_factor_eval(1, 1, &q3, &q3).is_err());
    }

    #[test]
    fn phase_gcd_examples() {
        let q = FactoredModulus::factor(15).unwrap();
        assert_eq!(phase_gcd(&q, &RationalPhase::zero()).unwrap(), 15);

        // f = 5X: vanishes mod 5, not mod 3
        let f = RationalPhase::new(IntPoly::monomial(5, 1), IntPoly::constant(1)).unwrap();
        assert_eq!(phase_gcd(&q, &f).unwrap(), 5);

        let q7 = FactoredModulus::factor(7).unwrap();
        let f = RationalPhase::from_coeffs(vec![1], vec![0, 1]).unwrap();
        assert_eq!(phase_gcd(&q7, &f).unwrap(), 1);
    }

    #[test]
    fn projective_equality_up_to_scaling() {
        let q = FactoredModulus::factor(35).unwrap();
        let x = ProjectivePoint::new(2, 3, &q).unwrap();
        let y = ProjectivePoint::new(2 * 4, 3 * 4, &q).unwrap();
        assert!(x.same_point(&y, &q));
        let z = ProjectivePoint::new(3, 2, &q).unwrap();
        assert!(!x.same_point(&z, &q));
    }

    #[test]
    fn crt_combine_reconstructs() {
        let (r, m) = crt_combine(&[(2, 3), (3, 5), (2, 7)]);
        assert_eq!(m, 105);
        assert_eq!(r % 3, 2);
        assert_eq!(r % 5, 3);
        assert_eq!(r % 7, 2);
    }
}
