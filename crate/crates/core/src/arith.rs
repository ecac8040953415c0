//! Elementary multiplicative functions: square tests, factorization, `r1`,
//! `r2`, the real characters mod 8 and mod 4, the twisted divisor sum and the
//! primitive point counts `A(n)` on `x^2 + y^2 = 2`.
//!
//! Everything here is exact integer arithmetic. Products that can leave the
//! 64-bit range are carried in `u128`.

use crate::error::{Error, Result};

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub type Factorization = Vec<(u64, u32)>;

const TRIAL_LIMIT: u64 = 1_000_000;
const RHO_ITERATION_BUDGET: u64 = 1 << 22;

/// Floor of the square root of `n`.
///
/// The floating-point estimate only seeds the integer Newton iteration; the
/// result is exact for every `u128`.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let seed = (n as f64).sqrt().min(u64::MAX as f64).max(1.0) as u128;
    // One Newton step from any positive seed lands on or above floor(sqrt(n)).
    let mut x = (seed + n / seed) / 2;
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    x
}

const fn residue_mask(m: u32) -> u128 {
    let mut mask = 0u128;
    let mut x = 0;
    while x < m {
        mask |= 1 << ((x * x) % m);
        x += 1;
    }
    mask
}

const SQUARES_MOD64: u128 = residue_mask(64);
const SQUARES_MOD63: u128 = residue_mask(63);
const SQUARES_MOD65: u128 = residue_mask(65);

#[inline]
fn square_residue_filter(n: u128) -> bool {
    (SQUARES_MOD64 >> (n % 64)) & 1 == 1 && (SQUARES_MOD63 >> (n % 63)) & 1 == 1 && (SQUARES_MOD65 >> (n % 65)) & 1 == 1
}

/// Returns the square root of `n` if `n` is a perfect square.
#[inline]
pub fn is_square(n: u128) -> Option<u128> {
    if !square_residue_filter(n) {
        return None;
    }
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Number of representations of `n` as a square of an integer: the `n`-th
/// coefficient of the Jacobi theta function.
pub fn r1(n: u128) -> u32 {
    match is_square(n) {
        Some(0) => 1,
        Some(_) => 2,
        None => 0,
    }
}

/// Kronecker symbol `(2/d)`, the real character mod 8.
pub fn chi8(d: i64) -> i32 {
    match d.rem_euclid(8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

/// Kronecker symbol `(-1/d)`, the non-trivial character mod 4.
pub fn chi4(d: i64) -> i32 {
    match d.rem_euclid(4) {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
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

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
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

/// Brent's variant of Pollard rho. Returns a non-trivial factor of the odd
/// composite `n`, or `None` when the iteration budget runs out.
fn pollard_rho(n: u64) -> Option<u64> {
    let mut spent = 0u64;
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let mut q = 1u64;
        let mut g = 1u64;
        let mut r = 1u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = num_integer::gcd(q, n);
                k += BATCH;
            }
            r *= 2;
            spent += r;
            if spent > RHO_ITERATION_BUDGET {
                return None;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = num_integer::gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Some(g);
        }
    }
    None
}

fn push_factor(out: &mut Factorization, p: u64) {
    match out.iter_mut().find(|(q, _)| *q == p) {
        Some((_, e)) => *e += 1,
        None => out.push((p, 1)),
    }
}

fn split_large(n: u64, out: &mut Factorization, original: u64) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        push_factor(out, n);
        return Ok(());
    }
    if let Some(r) = is_square(n as u128) {
        let r = r as u64;
        split_large(r, out, original)?;
        return split_large(r, out, original);
    }
    let d = pollard_rho(n).ok_or(Error::FactorizationBudget(original))?;
    split_large(d, out, original)?;
    split_large(n / d, out, original)
}

/// Factors `n >= 1`: trial division up to `10^6`, then Pollard rho with a
/// deterministic primality check on the cofactor.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::domain("cannot factor 0"));
    }
    let mut out = Factorization::new();
    let mut m = n;
    let twos = m.trailing_zeros();
    if twos > 0 {
        out.push((2, twos));
        m >>= twos;
    }
    let mut d = 3u64;
    while d <= TRIAL_LIMIT && d * d <= m {
        if m.is_multiple_of(d) {
            let mut e = 0;
            while m.is_multiple_of(d) {
                m /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 2;
    }
    if m > 1 {
        if d * d > m {
            out.push((m, 1));
        } else {
            let mut rest = Factorization::new();
            split_large(m, &mut rest, n)?;
            out.extend(rest);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Primes up to `bound` by the sieve of Eratosthenes.
pub fn primes_upto(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// All positive divisors from a factorization, unsorted.
pub fn divisors(f: &[(u64, u32)]) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &(p, e) in f {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs
}

/// Moebius function.
pub fn mobius(n: u64) -> Result<i32> {
    let f = factorize(n)?;
    if f.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.len() % 2 == 0 { 1 } else { -1 })
}

/// `r2` from the exponent vector: `4 * prod_{p = 1 mod 4} (e + 1)`, zero when
/// a prime `3 mod 4` appears to an odd power.
fn r2_from_exponents(f: impl Iterator<Item = (u64, u32)>) -> u64 {
    let mut acc = 4u64;
    for (p, e) in f {
        match p % 4 {
            1 => acc *= e as u64 + 1,
            3 if e % 2 == 1 => return 0,
            _ => {}
        }
    }
    acc
}

/// Number of `(x, y)` in `Z^2` with `x^2 + y^2 = n`.
pub fn r2(n: u64) -> Result<u64> {
    if n == 0 {
        return Ok(1);
    }
    Ok(r2_from_exponents(factorize(n)?.into_iter()))
}

/// Twisted divisor sum `sum_{d | h} chi8(d)`.
pub fn sigma0_chi(h: u64) -> Result<i64> {
    if h == 0 {
        return Err(Error::domain("sigma0_chi needs h >= 1"));
    }
    let mut acc = 1i64;
    for (p, e) in factorize(h)? {
        match chi8(p as i64) {
            1 => acc *= e as i64 + 1,
            -1 if e % 2 == 1 => return Ok(0),
            _ => {}
        }
    }
    Ok(acc)
}

/// `A(n)`: the number of rational points `(a/n, c/n)` in lowest terms on
/// `x^2 + y^2 = 2`, by Moebius inversion of `d -> r2(d^2)` over `d | n`.
pub fn primitive_point_count_a(n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::domain("A(n) needs n >= 1"));
    }
    let f = factorize(n)?;
    let k = f.len();
    let mut total = 0i64;
    // mu(n/d) vanishes unless n/d is squarefree, so only the 2^k choices of
    // dropping one power of each prime contribute.
    for mask in 0u32..(1 << k) {
        let exps = f.iter().enumerate().map(|(i, &(p, e))| {
            let drop = (mask >> i) & 1;
            (p, 2 * (e - drop))
        });
        let term = r2_from_exponents(exps) as i64;
        if mask.count_ones() % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

fn zeta_l_chi4_coefficient(q: u64) -> Result<i64> {
    let f = factorize(q)?;
    Ok(4 * divisors(&f).into_iter().map(|e| chi4(e as i64) as i64).sum::<i64>())
}

/// The `n`-th Dirichlet coefficient of `4 zeta(s) L(s, chi4) / ((1 + 2^-s) zeta(2s))`,
/// assembled as an explicit convolution over `n = d^2 * 2^k * q`.
pub fn a_series_coefficient(n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::domain("Dirichlet coefficients start at n = 1"));
    }
    let mut total = 0i64;
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d * d) {
            let mu = mobius(d)?;
            if mu != 0 {
                let mut rest = n / (d * d);
                let mut sign = 1i64;
                loop {
                    total += mu as i64 * sign * zeta_l_chi4_coefficient(rest)?;
                    if !rest.is_multiple_of(2) {
                        break;
                    }
                    rest /= 2;
                    sign = -sign;
                }
            }
        }
        d += 1;
    }
    Ok(total)
}

/// Coefficients `1..=n_max` of the same Dirichlet series, computed by
/// convolving the four factors' coefficient arrays. Index 0 is unused.
pub fn a_series_coefficients(n_max: usize) -> Vec<i64> {
    let len = n_max + 1;
    // 4 zeta(s) L(s, chi4)
    let mut c = vec![0i64; len];
    for e in 1..len {
        let x = chi4(e as i64) as i64;
        if x != 0 {
            for m in (e..len).step_by(e) {
                c[m] += 4 * x;
            }
        }
    }
    // (1 + 2^-s)^-1 = sum_k (-1)^k 2^-ks
    let mut c2 = vec![0i64; len];
    for (n, slot) in c2.iter_mut().enumerate().skip(1) {
        let mut acc = 0i64;
        let mut m = n;
        let mut sign = 1i64;
        loop {
            acc += sign * c[m];
            if m % 2 != 0 {
                break;
            }
            m /= 2;
            sign = -sign;
        }
        *slot = acc;
    }
    // 1 / zeta(2s) = sum_d mu(d) d^-2s
    let mut out = vec![0i64; len];
    let mut d = 1usize;
    while d * d < len {
        let mu = mobius(d as u64).expect("small argument") as i64;
        if mu != 0 {
            let sq = d * d;
            for m in (sq..len).step_by(sq) {
                out[m] += mu * c2[m / sq];
            }
        }
        d += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_r2(n: u64) -> u64 {
        let r = isqrt(n as u128) as i64;
        let mut count = 0;
        for x in -r..=r {
            let rest = n as i64 - x * x;
            if let Some(y) = is_square(rest as u128) {
                count += if y == 0 { 1 } else { 2 };
            }
        }
        count
    }

    #[test]
    fn square_examples() {
        assert_eq!(is_square(0), Some(0));
        assert_eq!(is_square(49), Some(7));
        assert_eq!(is_square(2 * 10u128.pow(16) + 1), None);
        // Near 2^63 an f64 square root cannot separate neighbouring integers.
        let big = (1u128 << 63) - 25;
        let r = isqrt(big);
        assert!(r * r <= big && (r + 1) * (r + 1) > big);
        assert_eq!(
            is_square((u64::MAX as u128) * (u64::MAX as u128)),
            Some(u64::MAX as u128)
        );
        assert_eq!(is_square((u64::MAX as u128) * (u64::MAX as u128) - 1), None);
    }

    #[test]
    fn isqrt_exhaustive_small() {
        for n in 0..100_000u128 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "n = {n}");
            assert_eq!(is_square(n).is_some(), r * r == n);
        }
    }

    #[test]
    fn r1_examples() {
        assert_eq!(r1(0), 1);
        assert_eq!(r1(4), 2);
        assert_eq!(r1(3), 0);
    }

    #[test]
    fn r2_examples() {
        assert_eq!(r2(1).unwrap(), 4);
        assert_eq!(r2(25).unwrap(), 12);
        assert_eq!(r2(50).unwrap(), 12);
        assert_eq!(r2(0).unwrap(), 1);
    }

    #[test]
    fn r2_matches_lattice_count() {
        for n in 0..=5_000u64 {
            assert_eq!(r2(n).unwrap(), lattice_r2(n), "n = {n}");
        }
    }

    #[test]
    fn characters() {
        assert_eq!(chi8(7), 1);
        assert_eq!(chi8(3), -1);
        assert_eq!(chi8(-1), 1);
        assert_eq!(chi8(6), 0);
        assert_eq!(chi4(5), 1);
        assert_eq!(chi4(-1), -1);
        assert_eq!(chi4(2), 0);
        for a in -50i64..50 {
            for b in -50i64..50 {
                assert_eq!(chi8(a * b), chi8(a) * chi8(b));
                assert_eq!(chi4(a * b), chi4(a) * chi4(b));
            }
        }
    }

    #[test]
    fn sigma0_chi_examples() {
        assert_eq!(sigma0_chi(7).unwrap(), 2);
        assert_eq!(sigma0_chi(3).unwrap(), 0);
        assert_eq!(sigma0_chi(2).unwrap(), 1);
        for h in 1..2000u64 {
            let f = factorize(h).unwrap();
            let direct: i64 = divisors(&f).iter().map(|&d| chi8(d as i64) as i64).sum();
            assert_eq!(sigma0_chi(h).unwrap(), direct);
        }
    }

    #[test]
    fn primitive_point_examples() {
        assert_eq!(primitive_point_count_a(1).unwrap(), 4);
        assert_eq!(primitive_point_count_a(5).unwrap(), 8);
        assert_eq!(primitive_point_count_a(3).unwrap(), 0);
        assert_eq!(primitive_point_count_a(2).unwrap(), 0);
        assert_eq!(a_series_coefficient(1).unwrap(), 4);
        assert_eq!(a_series_coefficient(5).unwrap(), 8);
        assert_eq!(a_series_coefficient(2).unwrap(), 0);
    }

    #[test]
    fn primitive_points_by_enumeration() {
        // Points (a/n, c/n) with a^2 + c^2 = 2n^2 and gcd(a, c, n) = 1.
        for n in 1..300i64 {
            let mut count = 0;
            for a in -2 * n..=2 * n {
                let rest = 2 * n * n - a * a;
                if rest < 0 {
                    continue;
                }
                if let Some(c) = is_square(rest as u128) {
                    let c = c as i64;
                    let g = num_integer::gcd(num_integer::gcd(a, c), n);
                    if g == 1 {
                        count += if c == 0 { 1 } else { 2 };
                    }
                }
            }
            assert_eq!(primitive_point_count_a(n as u64).unwrap(), count, "n = {n}");
        }
    }

    #[test]
    fn bulk_and_single_series_agree() {
        let bulk = a_series_coefficients(3000);
        for n in 1..=3000u64 {
            assert_eq!(bulk[n as usize], a_series_coefficient(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn r2_identity_two_b_squared() {
        for b in 1..=2000u64 {
            assert_eq!(r2(2 * b * b).unwrap(), r2(b * b).unwrap());
        }
    }

    #[test]
    fn factorization_large() {
        let p = 1_000_000_007u64;
        let q = 998_244_353u64;
        assert_eq!(factorize(p * q).unwrap(), vec![(q, 1), (p, 1)]);
        let n = 4_294_967_291u64 * 4_294_967_279u64;
        let f = factorize(n).unwrap();
        assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
        assert!(f.iter().all(|&(p, _)| is_prime(p)));
        assert_eq!(factorize(1).unwrap(), vec![]);
        assert!(factorize(0).is_err());
        let sq = 1_000_003u64 * 1_000_003;
        assert_eq!(factorize(sq).unwrap(), vec![(1_000_003, 2)]);
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..200).filter(|&n| is_prime(n)).collect();
        assert_eq!(&small[..10], &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(small.len(), 46);
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }
}
