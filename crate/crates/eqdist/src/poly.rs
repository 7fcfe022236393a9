//! Dense univariate polynomials over `Z`, `Q` and `F_p`, plus the reduced
//! rational phases `f = P/Q` that drive the exponential-sum evaluators.
//!
//! Degrees stay small (≤ 10 in practice), so everything is the plain
//! quadratic algorithm. Coefficients are 64-bit; constructors go through
//! exact rational arithmetic internally and fail with `Error::Range` if a
//! reduced coefficient does not fit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Polynomial over `Z` with `coeffs[i]` the coefficient of `X^i`.
/// Invariant: no trailing zero coefficient (the zero polynomial is empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<i64>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: i64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c·X^k`.
    pub fn monomial(c: i64, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `deg 0 = None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0i64; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *slot = a.checked_add(b).ok_or(Error::Range("polynomial add"))?;
        }
        Ok(Self::new(out))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0i64; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *slot = a.checked_sub(b).ok_or(Error::Range("polynomial sub"))?;
        }
        Ok(Self::new(out))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        let mut acc = vec![0i128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] += a as i128 * b as i128;
            }
        }
        let out = acc
            .into_iter()
            .map(|c| i64::try_from(c).map_err(|_| Error::Range("polynomial mul")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(out))
    }

    pub fn derivative(&self) -> Result<Self> {
        if self.coeffs.len() <= 1 {
            return Ok(Self::zero());
        }
        let out = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                c.checked_mul((i + 1) as i64)
                    .ok_or(Error::Range("polynomial derivative"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(out))
    }

    /// Reduction mod `p`, coefficients in `[0, p)`.
    pub fn reduce_mod(&self, p: u64) -> ModPoly {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| (c.rem_euclid(p as i64)) as u64)
            .collect();
        ModPoly::new(coeffs, p)
    }

    fn to_big(&self) -> Vec<BigRational> {
        self.coeffs
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect()
    }
}

/// Euclidean gcd over `Q[X]`, returned monic (or zero).
fn big_gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        v
    }
    fn rem(mut a: Vec<BigRational>, b: &[BigRational]) -> Vec<BigRational> {
        let db = b.len() - 1;
        let lead = b[db].clone();
        while a.len() > db {
            let da = a.len() - 1;
            let q = &a[da] / &lead;
            if !q.is_zero() {
                for i in 0..=db {
                    let t = &q * &b[i];
                    a[da - db + i] -= t;
                }
            }
            a.pop();
            a = trim(a);
            if a.is_empty() {
                break;
            }
        }
        a
    }
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = rem(a, &b);
        a = b;
        b = r;
    }
    if let Some(lead) = a.last().cloned() {
        for c in a.iter_mut() {
            *c /= lead.clone();
        }
    }
    a
}

/// Exact division over `Q[X]`; panics if it does not divide (internal use,
/// always called with a known factor).
fn big_divexact(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut rem: Vec<BigRational> = a.to_vec();
    while rem.last().is_some_and(|c| c.is_zero()) {
        rem.pop();
    }
    if rem.is_empty() {
        return Vec::new();
    }
    let db = b.len() - 1;
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    let lead = b[db].clone();
    for k in (0..quot.len()).rev() {
        let q = &rem[k + db] / &lead;
        quot[k] = q.clone();
        for i in 0..=db {
            let t = &q * &b[i];
            rem[k + i] -= t;
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "non-exact polynomial division");
    quot
}

/// Clear denominators and content from a rational-coefficient polynomial,
/// returning integer coefficients that fit in `i64`.
fn big_to_int(v: &[BigRational]) -> Result<(IntPoly, BigRational)> {
    if v.is_empty() {
        return Ok((IntPoly::zero(), BigRational::one()));
    }
    let mut denom = BigInt::one();
    for c in v {
        denom = num_integer::lcm(denom, c.denom().clone());
    }
    let scaled: Vec<BigInt> = v.iter().map(|c| (c * BigRational::from_integer(denom.clone())).to_integer()).collect();
    let mut content = BigInt::zero();
    for c in &scaled {
        content = num_integer::gcd(content, c.clone());
    }
    if content.is_zero() {
        content = BigInt::one();
    }
    let ints = scaled
        .iter()
        .map(|c| {
            let reduced = c / &content;
            i64::try_from(&reduced).map_err(|_| Error::Range("reduced polynomial coefficient"))
        })
        .collect::<Result<Vec<_>>>()?;
    // scale factor carrying the removed content/denominator, for sign fixing
    let factor = BigRational::new(content, denom);
    Ok((IntPoly::new(ints), factor))
}

/// Polynomial over `F_p`, dense, coefficients in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPoly {
    coeffs: Vec<u64>,
    p: u64,
}

impl ModPoly {
    pub fn new(mut coeffs: Vec<u64>, p: u64) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        ModPoly { coeffs, p }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p as u128;
        let x = (x % self.p) as u128;
        let mut acc = 0u128;
        for &c in self.coeffs.iter().rev() {
            acc = (acc * x + c as u128) % p;
        }
        acc as u64
    }

    fn make_monic(&mut self) {
        if let Some(&lead) = self.coeffs.last() {
            if lead != 1 {
                let inv = crate::arith::mod_inverse(lead as i64, self.p)
                    .expect("leading coefficient invertible mod prime");
                let p = self.p as u128;
                for c in self.coeffs.iter_mut() {
                    *c = ((*c as u128 * inv as u128) % p) as u64;
                }
            }
        }
    }

    fn rem(&self, other: &Self) -> Self {
        assert!(!other.is_zero());
        let p = self.p as u128;
        let db = other.coeffs.len() - 1;
        let lead_inv = crate::arith::mod_inverse(*other.coeffs.last().unwrap() as i64, self.p)
            .expect("prime modulus") as u128;
        let mut rem = self.coeffs.clone();
        while rem.len() > db {
            let da = rem.len() - 1;
            let q = (rem[da] as u128 * lead_inv) % p;
            if q != 0 {
                for i in 0..=db {
                    let sub = (q * other.coeffs[i] as u128) % p;
                    let idx = da - db + i;
                    rem[idx] = ((rem[idx] as u128 + p - sub) % p) as u64;
                }
            }
            rem.pop();
            while rem.last() == Some(&0) {
                rem.pop();
            }
        }
        ModPoly { coeffs: rem, p: self.p }
    }

    /// Monic gcd via the Euclidean algorithm.
    pub fn gcd(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.make_monic();
        a
    }

    /// Exact division by a known factor.
    pub fn divexact(&self, other: &Self) -> Self {
        assert!(!other.is_zero());
        let p = self.p as u128;
        let mut rem = self.coeffs.clone();
        if rem.is_empty() {
            return ModPoly { coeffs: rem, p: self.p };
        }
        let db = other.coeffs.len() - 1;
        let lead_inv = crate::arith::mod_inverse(*other.coeffs.last().unwrap() as i64, self.p)
            .expect("prime modulus") as u128;
        let mut quot = vec![0u64; rem.len() - db];
        for k in (0..quot.len()).rev() {
            let q = (rem[k + db] as u128 * lead_inv) % p;
            quot[k] = q as u64;
            for i in 0..=db {
                let sub = (q * other.coeffs[i] as u128) % p;
                rem[k + i] = ((rem[k + i] as u128 + p - sub) % p) as u64;
            }
        }
        debug_assert!(rem.iter().all(|&c| c == 0));
        ModPoly::new(quot, self.p)
    }
}

/// A rational function `f = P/Q` over `Q`, kept with `gcd(P, Q) = 1`,
/// integer coefficients of minimal content, and positive leading
/// denominator coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPhase {
    num: IntPoly,
    den: IntPoly,
}

impl RationalPhase {
    /// Build `P/Q`, cancelling any common factor over `Q`.
    pub fn new(num: IntPoly, den: IntPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Precondition("zero denominator polynomial".into()));
        }
        if num.is_zero() {
            return Ok(RationalPhase { num: IntPoly::zero(), den: IntPoly::constant(1) });
        }
        let g = big_gcd(&num.to_big(), &den.to_big());
        let (mut n, mut d) = if g.len() > 1 {
            let nb = big_divexact(&num.to_big(), &g);
            let db = big_divexact(&den.to_big(), &g);
            (big_to_int(&nb)?, big_to_int(&db)?)
        } else {
            (big_to_int(&num.to_big())?, big_to_int(&den.to_big())?)
        };
        // keep the overall fraction equal to P/Q: reapply the dropped scalar
        let scale = n.1 / d.1;
        let (sn, sd) = (scale.numer().clone(), scale.denom().clone());
        let nn = n.0.coeffs.iter().map(|&c| {
            let v = BigInt::from(c) * &sn;
            i64::try_from(&v).map_err(|_| Error::Range("phase numerator"))
        }).collect::<Result<Vec<_>>>()?;
        let dd = d.0.coeffs.iter().map(|&c| {
            let v = BigInt::from(c) * &sd;
            i64::try_from(&v).map_err(|_| Error::Range("phase denominator"))
        }).collect::<Result<Vec<_>>>()?;
        n.0 = IntPoly::new(nn);
        d.0 = IntPoly::new(dd);
        // normalize content and the denominator sign once more
        let gc = n.0.coeffs.iter().chain(d.0.coeffs.iter()).fold(0i64, |acc, &c| {
            num_integer::gcd(acc, c)
        });
        let gc = if gc == 0 { 1 } else { gc };
        let sign = if *d.0.coeffs.last().unwrap() < 0 { -1 } else { 1 };
        let num = IntPoly::new(n.0.coeffs.iter().map(|&c| c / gc * sign).collect());
        let den = IntPoly::new(d.0.coeffs.iter().map(|&c| c / gc * sign).collect());
        Ok(RationalPhase { num, den })
    }

    /// The zero phase `0/1`.
    pub fn zero() -> Self {
        RationalPhase { num: IntPoly::zero(), den: IntPoly::constant(1) }
    }

    /// Convenience: `f = (a X^2 + b X + c) / X`-style fractions from coefficient lists.
    pub fn from_coeffs(num: Vec<i64>, den: Vec<i64>) -> Result<Self> {
        Self::new(IntPoly::new(num), IntPoly::new(den))
    }

    pub fn num(&self) -> &IntPoly {
        &self.num
    }

    pub fn den(&self) -> &IntPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Quotient-rule derivative with the common factor cancelled.
    pub fn derivative(&self) -> Result<Self> {
        let n = self
            .num
            .derivative()?
            .checked_mul(&self.den)?
            .checked_sub(&self.num.checked_mul(&self.den.derivative()?)?)?;
        let d = self.den.checked_mul(&self.den)?;
        Self::new(n, d)
    }

    /// Reduce mod `p` to a coprime pair `(P₁, Q₁)` in `F_p[X]`.
    /// Fails if `Q ≡ 0 (p)`.
    pub fn reduce_mod(&self, p: u64) -> Result<(ModPoly, ModPoly)> {
        let den = self.den.reduce_mod(p);
        if den.is_zero() {
            return Err(Error::DegenerateDenominator { p });
        }
        let num = self.num.reduce_mod(p);
        if num.is_zero() {
            return Ok((ModPoly::new(vec![], p), ModPoly::new(vec![1], p)));
        }
        let g = num.gcd(&den);
        if g.degree() == Some(0) {
            Ok((num, den))
        } else {
            Ok((num.divexact(&g), den.divexact(&g)))
        }
    }
}
