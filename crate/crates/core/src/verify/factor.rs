//! Integer factorization: trial division, Pollard-Brent rho and Miller-Rabin.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct FactorOptions {
    pub trial_bound: u64,
    /// Wall-clock budget for rho on each composite cofactor.
    pub rho_timebox: Duration,
    pub seed: u64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            trial_bound: 1_000_000,
            rho_timebox: Duration::from_secs(10),
            seed: 0x5eed,
        }
    }
}

impl FactorOptions {
    /// Trial division bound `max(10^6, |d1 d2| m^2)`.
    pub fn for_instance(d1: i64, d2: i64, m: u64) -> Self {
        let scale = (d1.unsigned_abs() as u128 * d2.unsigned_abs() as u128)
            .saturating_mul(m as u128 * m as u128)
            .min(u64::MAX as u128) as u64;
        FactorOptions {
            trial_bound: scale.max(1_000_000),
            ..Default::default()
        }
    }
}

/// `prod p^e * cofactor`, primes ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(BigUint, u32)>,
    /// Composite part left unfactored.
    pub cofactor: Option<BigUint>,
}

impl Factorization {
    pub fn product(&self) -> BigUint {
        let mut n = self.cofactor.clone().unwrap_or_else(BigUint::one);
        for (p, e) in &self.factors {
            n *= p.pow(*e);
        }
        n
    }

    /// The factorization of `n^k` given that of `n`.
    pub fn pow(&self, k: u32) -> Factorization {
        Factorization {
            factors: self.factors.iter().map(|(p, e)| (p.clone(), e * k)).collect(),
            cofactor: self.cofactor.as_ref().map(|c| c.pow(k)),
        }
    }

    pub fn smallest_prime(&self) -> Option<&BigUint> {
        self.factors.first().map(|(p, _)| p)
    }

    pub fn is_complete(&self) -> bool {
        self.cofactor.is_none()
    }

    fn push(&mut self, p: BigUint) {
        match self.factors.iter_mut().find(|(q, _)| *q == p) {
            Some((_, e)) => *e += 1,
            None => self.factors.push((p, 1)),
        }
    }
}

fn sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// `n mod p` for a word-sized `p` without allocating.
fn rem_small(digits: &[u32], p: u64) -> u64 {
    digits
        .iter()
        .rev()
        .fold(0u64, |r, &d| (((r as u128) << 32 | d as u128) % p as u128) as u64)
}

const SMALL_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Miller-Rabin: deterministic below `2^64` (first twelve prime bases),
/// with sixteen extra random bases above.
pub fn is_probable_prime(n: &BigUint, rng: &mut impl Rng) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &SMALL_BASES {
        if *n == BigUint::from(p) {
            return true;
        }
        if (n % p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let r = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> r;
    let witness = |a: &BigUint| -> bool {
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n1 {
            return false;
        }
        for _ in 1..r {
            x = &x * &x % n;
            if x == n1 {
                return false;
            }
        }
        true
    };
    if SMALL_BASES.iter().any(|&a| witness(&BigUint::from(a))) {
        return false;
    }
    if n.bits() <= 64 {
        return true;
    }
    (0..16).all(|_| !witness(&random_below(&n1, rng).max(two.clone())))
}

fn random_below(n: &BigUint, rng: &mut impl Rng) -> BigUint {
    let words = n.to_u32_digits().len();
    let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
    BigUint::from_slice(&digits) % n
}

/// A nontrivial factor of the odd composite `n`, or `None` past `deadline`.
fn pollard_brent(n: &BigUint, rng: &mut impl Rng, deadline: Instant) -> Option<BigUint> {
    const BATCH: u64 = 128;
    loop {
        let c = random_below(n, rng).max(BigUint::one());
        let mut y = random_below(n, rng);
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut r = 1u64;
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                if Instant::now() > deadline {
                    return None;
                }
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = q * diff % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == *n {
            // the batch overshot; step back one at a time
            loop {
                ys = f(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if g != *n {
            return Some(g);
        }
    }
}

/// Factors `|n|` for `|n| >= 2`; a zero or unit input gives an empty factorization
/// with the value as cofactor.
pub fn factor_integer(n: &BigInt, opts: &FactorOptions) -> Factorization {
    let mut out = Factorization {
        factors: Vec::new(),
        cofactor: None,
    };
    let mut rest = n.magnitude().clone();
    if rest < BigUint::from(2u32) {
        out.cofactor = Some(rest);
        return out;
    }
    for p in sieve(opts.trial_bound.min(100_000_000)) {
        if rest.is_one() {
            break;
        }
        if let Some(r) = rest.to_u64() {
            if p.saturating_mul(p) > r {
                break;
            }
        }
        let mut digits = rest.to_u32_digits();
        while rem_small(&digits, p) == 0 {
            rest /= p;
            out.push(BigUint::from(p));
            digits = rest.to_u32_digits();
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut stack = vec![rest];
    let mut leftover = BigUint::one();
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if is_probable_prime(&m, &mut rng) {
            out.push(m);
            continue;
        }
        let deadline = Instant::now() + opts.rho_timebox;
        match pollard_brent(&m, &mut rng, deadline) {
            Some(f) => {
                let g = &m / &f;
                stack.push(f);
                stack.push(g);
            }
            None => leftover *= m,
        }
    }
    out.factors.sort();
    if !leftover.is_one() {
        out.cofactor = Some(leftover);
    }
    out
}

/// Helper for reports: the value as a signed integer.
pub fn to_bigint(n: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, n.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u128) -> BigInt {
        BigInt::from(n)
    }

    fn pairs(f: &Factorization) -> Vec<(u64, u32)> {
        f.factors.iter().map(|(p, e)| (p.to_u64().unwrap(), *e)).collect()
    }

    #[test]
    fn examples() {
        let opts = FactorOptions::default();
        let f = factor_integer(&big(1728u128.pow(4)), &opts);
        assert_eq!(pairs(&f), vec![(2, 24), (3, 12)]);
        let f = factor_integer(&big(3375u128.pow(4)), &opts);
        assert_eq!(pairs(&f), vec![(3, 12), (5, 12)]);
        let p = 1_000_000_007u128;
        assert_eq!(pairs(&factor_integer(&big(p), &opts)), vec![(p as u64, 1)]);
    }

    #[test]
    fn rho_splits_products_of_large_primes() {
        let opts = FactorOptions {
            trial_bound: 1000,
            ..Default::default()
        };
        let (p, q) = (1_000_000_007u128, 998_244_353u128);
        let f = factor_integer(&big(p * q * q), &opts);
        assert_eq!(pairs(&f), vec![(q as u64, 2), (p as u64, 1)]);
        assert!(f.is_complete());
        assert_eq!(to_bigint(&f.product()), big(p * q * q));
    }

    #[test]
    fn primality() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // 2^127 - 1 is prime, 2^128 + 1 is not
        let m127 = (BigUint::one() << 127) - 1u32;
        assert!(is_probable_prime(&m127, &mut rng));
        assert!(!is_probable_prime(&((BigUint::one() << 128) + 1u32), &mut rng));
        // strong pseudoprime to bases 2 and 3
        assert!(!is_probable_prime(&BigUint::from(1_373_653u32), &mut rng));
        assert!(!is_probable_prime(&BigUint::from(1u32), &mut rng));
    }

    #[test]
    fn timebox_leaves_a_cofactor() {
        let opts = FactorOptions {
            trial_bound: 100,
            rho_timebox: Duration::from_millis(1),
            seed: 3,
        };
        // product of two 64-bit primes is out of reach in a millisecond
        let p = BigUint::from(18_446_744_073_709_551_557u64);
        let q = BigUint::from(18_446_744_073_709_551_533u64);
        let n = to_bigint(&(&p * &q));
        let f = factor_integer(&n, &opts);
        assert_eq!(to_bigint(&f.product()), n);
    }

    #[test]
    fn powers_scale_exponents() {
        let f = factor_integer(&big(12), &FactorOptions::default()).pow(4);
        assert_eq!(pairs(&f), vec![(2, 8), (3, 4)]);
    }
}
