//! Arithmetic in `Z[sqrt 2]`: norms, prime splitting, the Hecke character
//! `eta`, the dihedral Hecke eigenvalues `lambda_m(n)` and the solutions of
//! `c^2 - 2 b^2 = -h`.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::arith::{chi8, factorize, is_prime, is_square, isqrt, primes_upto};
use crate::error::{Error, Result};

/// `log(1 + sqrt 2)`, the regulator of `Q(sqrt 2)`.
pub fn regulator() -> f64 {
    SQRT_2.ln_1p()
}

/// Spectral parameter `t_m = m pi / (2 log(1 + sqrt 2))` of the dihedral form `f_m`.
pub fn spectral_t(m: i64) -> f64 {
    m as f64 * PI / (2.0 * regulator())
}

/// An element `a + b sqrt 2` of `Z[sqrt 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadInt {
    pub a: i128,
    pub b: i128,
}

impl QuadInt {
    /// The fundamental unit `1 + sqrt 2`, of norm `-1`.
    pub const EPSILON: QuadInt = QuadInt { a: 1, b: 1 };
    /// `(1 + sqrt 2)^2 = 3 + 2 sqrt 2`, the generator of the norm-one units.
    pub const EPSILON_SQ: QuadInt = QuadInt { a: 3, b: 2 };
    pub const SQRT2: QuadInt = QuadInt { a: 0, b: 1 };

    pub const fn new(a: i128, b: i128) -> Self {
        QuadInt { a, b }
    }

    pub fn checked_mul(self, rhs: QuadInt) -> Result<QuadInt> {
        let ovf = || Error::Overflow("QuadInt multiplication");
        let bb = self
            .b
            .checked_mul(rhs.b)
            .and_then(|x| x.checked_mul(2))
            .ok_or_else(ovf)?;
        let a = self
            .a
            .checked_mul(rhs.a)
            .and_then(|x| x.checked_add(bb))
            .ok_or_else(ovf)?;
        let b = self
            .a
            .checked_mul(rhs.b)
            .and_then(|x| x.checked_add(self.b.checked_mul(rhs.a)?))
            .ok_or_else(ovf)?;
        Ok(QuadInt { a, b })
    }

    pub fn norm(self) -> Result<i128> {
        let ovf = || Error::Overflow("QuadInt norm");
        let aa = self.a.checked_mul(self.a).ok_or_else(ovf)?;
        let bb = self
            .b
            .checked_mul(self.b)
            .and_then(|x| x.checked_mul(2))
            .ok_or_else(ovf)?;
        aa.checked_sub(bb).ok_or_else(ovf)
    }

    pub fn conj(self) -> QuadInt {
        QuadInt { a: self.a, b: -self.b }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// `log |a + b sqrt 2|` without cancellation: when the two terms have
    /// opposite signs the conjugate is large and `|x| = |N(x)| / |x'|`.
    fn ln_abs(self, norm: i128) -> f64 {
        let (a, b) = (self.a as f64, self.b as f64);
        if (self.a >= 0) == (self.b >= 0) {
            (a.abs() + b.abs() * SQRT_2).ln()
        } else {
            (norm.unsigned_abs() as f64).ln() - (a.abs() + b.abs() * SQRT_2).ln()
        }
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b >= 0 {
            write!(f, "{} + {}*sqrt2", self.a, self.b)
        } else {
            write!(f, "{} - {}*sqrt2", self.a, -self.b)
        }
    }
}

pub fn qmul(x: QuadInt, y: QuadInt) -> Result<QuadInt> {
    x.checked_mul(y)
}

pub fn qnorm(x: QuadInt) -> Result<i128> {
    x.norm()
}

pub fn qconj(x: QuadInt) -> QuadInt {
    x.conj()
}

/// Phase `phi(x)` with `eta((x)) = exp(i phi(x))`: `pi` for negative norm
/// (the sign character) plus `t_1 log |x / x'|`. Reduced to `[0, 2 pi)`.
pub fn eta_phase(x: QuadInt) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::domain("eta is undefined at 0"));
    }
    let norm = x.norm()?;
    // |x / x'| = x^2 / |N(x)|
    let log_ratio = 2.0 * x.ln_abs(norm) - (norm.unsigned_abs() as f64).ln();
    let sign = if norm < 0 { PI } else { 0.0 };
    Ok((spectral_t(1) * log_ratio + sign).rem_euclid(TAU))
}

/// `eta^m((x))` on the unit circle.
pub fn eta_power(x: QuadInt, m: i64) -> Result<Complex64> {
    let phase = eta_phase(x)?;
    Ok(Complex64::from_polar(1.0, (m as f64 * phase).rem_euclid(TAU)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
}

/// How a rational prime decomposes in `Z[sqrt 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeSplit {
    pub p: u64,
    pub kind: SplitKind,
    /// Split: `x + y sqrt 2` with `x, y > 0`, minimal `y` and `|norm| = p`.
    /// Ramified: `sqrt 2`. Inert: `p` itself.
    pub generator: QuadInt,
    /// Hecke angle `theta_p` with `eta(p) = exp(i theta_p)`; zero for inert primes.
    pub theta: f64,
}

fn split_cache() -> &'static RwLock<HashMap<u64, PrimeSplit>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, PrimeSplit>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn compute_split(p: u64) -> Result<PrimeSplit> {
    if p == 2 {
        let generator = QuadInt::SQRT2;
        return Ok(PrimeSplit {
            p,
            kind: SplitKind::Ramified,
            generator,
            theta: eta_phase(generator)?,
        });
    }
    if chi8(p as i64) == -1 {
        return Ok(PrimeSplit {
            p,
            kind: SplitKind::Inert,
            generator: QuadInt::new(p as i128, 0),
            theta: 0.0,
        });
    }
    let p128 = p as u128;
    let mut y = 1u128;
    loop {
        let two_y2 = 2 * y * y;
        // Prefer norm +p at the same y.
        let found = is_square(two_y2 + p128).or_else(|| two_y2.checked_sub(p128).and_then(is_square));
        if let Some(x) = found {
            let generator = QuadInt::new(x as i128, y as i128);
            return Ok(PrimeSplit {
                p,
                kind: SplitKind::Split,
                generator,
                theta: eta_phase(generator)?,
            });
        }
        y += 1;
        if y > p128 {
            unreachable!("split prime {p} has a generator with y <= p");
        }
    }
}

/// Splitting data for the prime `p`, memoized in a shared read-mostly cache.
pub fn split_prime(p: u64) -> Result<PrimeSplit> {
    if let Some(s) = split_cache().read().expect("split cache poisoned").get(&p) {
        return Ok(*s);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let s = compute_split(p)?;
    split_cache().write().expect("split cache poisoned").insert(p, s);
    Ok(s)
}

/// Splitting data for every prime up to at least `bound`, in increasing order.
/// The table only grows; callers cut it at their own bound.
pub fn prime_splits(bound: u64) -> Result<Arc<Vec<PrimeSplit>>> {
    static TABLE: OnceLock<RwLock<(u64, Arc<Vec<PrimeSplit>>)>> = OnceLock::new();
    let table = TABLE.get_or_init(|| RwLock::new((0, Arc::new(Vec::new()))));
    {
        let guard = table.read().expect("split table poisoned");
        if guard.0 >= bound {
            return Ok(Arc::clone(&guard.1));
        }
    }
    let splits = primes_upto(bound)
        .into_iter()
        .map(split_prime)
        .collect::<Result<Vec<_>>>()?;
    let mut guard = table.write().expect("split table poisoned");
    if guard.0 < bound {
        *guard = (bound, Arc::new(splits));
    }
    Ok(Arc::clone(&guard.1))
}

/// Hecke eigenvalue of `f_m` at the prime `p`.
pub fn lambda_prime(p: u64, m: i64) -> Result<f64> {
    let split = split_prime(p)?;
    Ok(lambda_from_split(&split, m))
}

pub(crate) fn lambda_from_split(split: &PrimeSplit, m: i64) -> f64 {
    let m = m.unsigned_abs();
    match split.kind {
        SplitKind::Split => 2.0 * (m as f64 * split.theta).cos(),
        SplitKind::Inert => 0.0,
        SplitKind::Ramified => {
            if m.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Hecke eigenvalue `lambda_m(n)`: multiplicative, with the prime-power recurrence
/// `lambda(p^{k+1}) = lambda(p) lambda(p^k) - chi(p) lambda(p^{k-1})`.
pub fn lambda_n(n: u64, m: i64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("lambda_m(n) needs n >= 1"));
    }
    lambda_from_factorization(factorize(n)?.into_iter(), m)
}

/// `lambda_m(h^2)`, factoring `h` rather than `h^2`.
pub fn lambda_square(h: u64, m: i64) -> Result<f64> {
    if h == 0 {
        return Err(Error::domain("lambda_m(h^2) needs h >= 1"));
    }
    lambda_from_factorization(factorize(h)?.into_iter().map(|(p, e)| (p, 2 * e)), m)
}

fn lambda_from_factorization(f: impl Iterator<Item = (u64, u32)>, m: i64) -> Result<f64> {
    let mut acc = 1.0;
    for (p, e) in f {
        let lp = lambda_prime(p, m)?;
        let chi = chi8(p as i64) as f64;
        let (mut prev, mut cur) = (1.0, lp);
        for _ in 1..e {
            let next = lp * cur - chi * prev;
            prev = cur;
            cur = next;
        }
        acc *= cur;
    }
    Ok(acc)
}

/// Solutions `(c, b)` of `c^2 - 2 b^2 = -h` with `c >= 0` and `1 <= b <= b_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PellOrbit {
    pub h: u64,
    pub b_max: u128,
    /// Class representatives `c + b sqrt 2` of norm `-h` with `b <= sqrt(h)`,
    /// both signs of `c`.
    pub fundamentals: Vec<QuadInt>,
    /// Sorted by `b`.
    pub solutions: Vec<(u128, u128)>,
}

/// Largest `b_max` accepted by the orbit generator; keeps `2 b^2` inside `u128`.
pub const PELL_B_LIMIT: u128 = 1 << 62;
const SCAN_THRESHOLD: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PellMode {
    /// Let `b_max` decide: direct scan up to `10^7`, orbit generation above.
    Auto,
    Scan,
    Orbit,
}

fn fundamental_solutions(h: u64) -> Vec<QuadInt> {
    let h128 = h as u128;
    let mut out = Vec::new();
    for b in 1..=isqrt(h128) {
        let two_b2 = 2 * b * b;
        if two_b2 < h128 {
            continue;
        }
        if let Some(c) = is_square(two_b2 - h128) {
            out.push(QuadInt::new(c as i128, b as i128));
            if c != 0 {
                out.push(QuadInt::new(-(c as i128), b as i128));
            }
        }
    }
    out
}

fn pell_scan(h: u64, b_max: u128) -> Vec<(u128, u128)> {
    let h128 = h as u128;
    let mut out = Vec::new();
    for b in 1..=b_max {
        let two_b2 = 2 * b * b;
        if two_b2 < h128 {
            continue;
        }
        if let Some(c) = is_square(two_b2 - h128) {
            out.push((c, b));
        }
    }
    out
}

fn pell_orbit(fundamentals: &[QuadInt], b_max: u128) -> Vec<(u128, u128)> {
    let mut out = Vec::new();
    for seed in fundamentals {
        let (mut c, mut b) = (seed.a, seed.b);
        if c >= 0 && (b as u128) <= b_max {
            out.push((c as u128, b as u128));
        }
        // Multiplication by 3 + 2 sqrt 2; every seed maps to c > 0.
        loop {
            let next_c = 3 * c + 4 * b;
            let next_b = 2 * c + 3 * b;
            if next_b as u128 > b_max {
                break;
            }
            c = next_c;
            b = next_b;
            out.push((c as u128, b as u128));
        }
    }
    out.sort_unstable_by_key(|&(c, b)| (b, c));
    out.dedup();
    out
}

/// All solutions of `c^2 - 2 b^2 = -h` with `c >= 0`, `1 <= b <= b_max`.
pub fn pell_solutions(h: u64, b_max: u128) -> Result<PellOrbit> {
    pell_solutions_with(h, b_max, PellMode::Auto)
}

pub fn pell_solutions_with(h: u64, b_max: u128, mode: PellMode) -> Result<PellOrbit> {
    if h == 0 {
        return Err(Error::domain("Pell right-hand side needs h >= 1"));
    }
    if b_max > PELL_B_LIMIT {
        return Err(Error::BoundTooLarge {
            what: "Pell b_max",
            bound: b_max,
            limit: PELL_B_LIMIT,
        });
    }
    let fundamentals = fundamental_solutions(h);
    let scan = match mode {
        PellMode::Auto => b_max <= SCAN_THRESHOLD,
        PellMode::Scan => true,
        PellMode::Orbit => false,
    };
    let solutions = if scan {
        pell_scan(h, b_max)
    } else {
        pell_orbit(&fundamentals, b_max)
    };
    Ok(PellOrbit {
        h,
        b_max,
        fundamentals,
        solutions,
    })
}
