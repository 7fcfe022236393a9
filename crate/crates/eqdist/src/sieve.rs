//! Eratosthenes-style sieves: plain prime sieve, smallest-prime-factor
//! tables, and a segmented sieve for `Λ` over windows `[x, 2x]` that only
//! keeps O(√x + segment) state.

/// Primes up to `n` inclusive.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    out
}

/// Smallest prime factor for every index up to `n` (`spf[0] = spf[1] = 0`).
pub fn smallest_prime_factor_up_to(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut m = i;
            while m <= n {
                if spf[m] == 0 {
                    spf[m] = i as u32;
                }
                m += i;
            }
        }
    }
    spf
}

/// Möbius values `μ(0..=n)` derived from a smallest-prime-factor table.
pub fn mobius_up_to(n: usize) -> Vec<i8> {
    let spf = smallest_prime_factor_up_to(n);
    let mut mu = vec![0i8; n + 1];
    if n >= 1 {
        mu[1] = 1;
    }
    for i in 2..=n {
        let p = spf[i] as usize;
        let m = i / p;
        mu[i] = if m % p == 0 { 0 } else { -mu[m] };
    }
    mu
}

/// `Λ(n)` for `n` in `lo..=hi`, via a segmented sieve. Prime powers `p^k`
/// get `log p`; primes detected in the window get `log n`.
pub fn von_mangoldt_range(lo: u64, hi: u64) -> Vec<f64> {
    assert!(lo >= 1 && hi >= lo);
    let len = (hi - lo + 1) as usize;
    let mut lambda = vec![0.0f64; len];
    let mut is_composite = vec![false; len];
    let root = (hi as f64).sqrt() as u64 + 1;
    let small = primes_up_to(root);
    for &p in &small {
        // mark composites
        let start = lo.div_ceil(p).max(2) * p;
        let mut m = start;
        while m <= hi {
            is_composite[(m - lo) as usize] = true;
            m += p;
        }
        // prime powers in the window
        let logp = (p as f64).ln();
        let mut pk = p as u128;
        while pk <= hi as u128 {
            if pk >= lo as u128 {
                lambda[(pk as u64 - lo) as usize] = logp;
            }
            pk *= p as u128;
        }
    }
    for i in 0..len {
        let n = lo + i as u64;
        if n >= 2 && n > root && !is_composite[i] {
            lambda[i] = (n as f64).ln();
        }
    }
    if lo == 1 {
        lambda[0] = 0.0;
    }
    lambda
}
