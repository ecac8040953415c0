//! Primitive APs of squares `a^2, b^2, c^2` and their counts in the four
//! constraint regions.
//!
//! Every nontrivial AP comes from exactly one coprime pair `u > v >= 1` of
//! opposite parity through
//!
//! ```text
//! b = u^2 + v^2,   a = |u^2 - v^2 - 2uv|,   c = u^2 - v^2 + 2uv.
//! ```
//!
//! For fixed `u` each region admits an interval of `v`, so the enumerator walks
//! that interval with exact integer predicates and never classifies a boundary
//! point in floating point.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{is_square, isqrt, primitive_point_count_a};
use crate::error::{Error, Result};
use crate::lfun::gauss_2f1_quarterhalf;
use crate::quad::regulator;

/// Largest region bound accepted by the enumerator.
pub const MAX_REGION_BOUND: u64 = 10_000_000_000_000_000;
/// Largest grid size accepted by [`scan`].
pub const MAX_SCAN_BOUND: u64 = 100_000_000_000_000;
/// Largest `b` the brute-force oracle will scan.
pub const ORACLE_B_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ApTriple {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl ApTriple {
    /// The degenerate progression `{1, 1, 1}`.
    pub const TRIVIAL: ApTriple = ApTriple { a: 1, b: 1, c: 1 };

    /// Triple attached to a Euclid pair. `u > v >= 1`, coprime, `u + v` odd.
    pub fn from_euclid(u: u64, v: u64) -> Result<Self> {
        if !(v >= 1 && u > v && (u + v) % 2 == 1 && u.gcd(&v) == 1) {
            return Err(Error::domain(format!("({u}, {v}) is not a primitive Euclid pair")));
        }
        let (u, v) = (u as u128, v as u128);
        let b = u * u + v * v;
        let c = u * u - v * v + 2 * u * v;
        let a = (u * u).abs_diff(v * v + 2 * u * v);
        let narrow = |x: u128| u64::try_from(x).map_err(|_| Error::Overflow("Euclid pair"));
        Ok(ApTriple {
            a: narrow(a)?,
            b: narrow(b)?,
            c: narrow(c)?,
        })
    }

    pub fn is_trivial(&self) -> bool {
        *self == Self::TRIVIAL
    }

    /// Right triangle `(c - a, c + a, 2b)` attached to the progression.
    pub fn to_triangle(&self) -> (u64, u64, u64) {
        (self.c - self.a, self.c + self.a, 2 * self.b)
    }

    /// Inverse of [`ApTriple::to_triangle`].
    pub fn from_triangle(p: u64, q: u64, r: u64) -> Option<Self> {
        if p > q || !(p + q).is_multiple_of(2) || !r.is_multiple_of(2) {
            return None;
        }
        let t = ApTriple {
            a: (q - p) / 2,
            b: r / 2,
            c: (q + p) / 2,
        };
        t.is_valid().then_some(t)
    }

    /// `a^2 + c^2 = 2 b^2`, `a <= b <= c`, `gcd(a, b) = 1`, `a > 0`.
    pub fn is_valid(&self) -> bool {
        let (a, b, c) = (self.a as u128, self.b as u128, self.c as u128);
        a >= 1 && a <= b && b <= c && a * a + c * c == 2 * b * b && self.a.gcd(&self.b) == 1
    }
}

impl fmt::Display for ApTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Exact rational in `[0, 1]`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Delta {
    num: u64,
    den: u64,
}

impl Delta {
    pub const ONE: Delta = Delta { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::domain("delta has a zero denominator"));
        }
        if num > den {
            return Err(Error::domain(format!("delta = {num}/{den} exceeds 1")));
        }
        let g = num.gcd(&den);
        Ok(Delta {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for Delta {
    fn default() -> Self {
        Delta::ONE
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Delta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Accepts `p/q` or a decimal with at most six fractional digits.
impl FromStr for Delta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::domain(format!("cannot parse delta {s:?}"));
        let digits = |t: &str| -> Result<u64> {
            if t.is_empty() || !t.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        if let Some((p, q)) = s.split_once('/') {
            return Delta::new(digits(p)?, digits(q)?);
        }
        match s.split_once('.') {
            None => Delta::new(digits(s)?, 1),
            Some((int, frac)) => {
                if frac.len() > 6 || (int.is_empty() && frac.is_empty()) {
                    return Err(bad());
                }
                let int = if int.is_empty() { 0 } else { digits(int)? };
                let frac_val = if frac.is_empty() { 0 } else { digits(frac)? };
                let den = 10u64.pow(frac.len() as u32);
                let num = int
                    .checked_mul(den)
                    .and_then(|x| x.checked_add(frac_val))
                    .ok_or_else(bad)?;
                Delta::new(num, den)
            }
        }
    }
}

/// Constraint regions on `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `b^2 <= x` and `a^2 <= delta b^2`.
    RatioBound { x: u64, delta: Delta },
    /// `c^2 <= x`.
    MaxBound { x: u64 },
    /// `a^2 <= y` and `b^2 <= x`, with `y <= x`.
    Rect { x: u64, y: u64 },
    /// `a b <= x`.
    ProductBound { x: u64 },
}

impl Region {
    pub fn x(&self) -> u64 {
        match *self {
            Region::RatioBound { x, .. }
            | Region::MaxBound { x }
            | Region::Rect { x, .. }
            | Region::ProductBound { x } => x,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let x = self.x();
        if x > MAX_REGION_BOUND {
            return Err(Error::BoundTooLarge {
                what: "region",
                bound: x as u128,
                limit: MAX_REGION_BOUND as u128,
            });
        }
        if let Region::Rect { x, y } = *self {
            if y > x {
                return Err(Error::domain(format!("rectangle needs Y <= X, got Y = {y} > X = {x}")));
            }
        }
        Ok(())
    }

    pub fn admits(&self, t: &ApTriple) -> bool {
        let (a, b, c) = (t.a as u128, t.b as u128, t.c as u128);
        match *self {
            Region::RatioBound { x, delta } => {
                b * b <= x as u128 && a * a * delta.den as u128 <= delta.num as u128 * b * b
            }
            Region::MaxBound { x } => c * c <= x as u128,
            Region::Rect { x, y } => a * a <= y as u128 && b * b <= x as u128,
            Region::ProductBound { x } => a * b <= x as u128,
        }
    }

    /// Largest `u` that can contribute.
    fn u_max(&self) -> u64 {
        // b > u^2 for every pair, and c > u^2 as well.
        let bound = match *self {
            Region::RatioBound { x, .. } | Region::Rect { x, .. } | Region::MaxBound { x } => isqrt(x as u128),
            Region::ProductBound { x } => x as u128,
        };
        if bound < 2 {
            0
        } else {
            isqrt(bound - 1) as u64
        }
    }

    /// Inclusive `v` range for fixed `u`, before the coprimality and parity
    /// filters.
    fn v_window(&self, u: u64) -> Option<(u64, u64)> {
        if u < 2 {
            return None;
        }
        let uu = u as u128;
        let vcap = match *self {
            Region::RatioBound { x, .. } | Region::Rect { x, .. } => {
                let b_max = isqrt(x as u128);
                if uu * uu + 1 > b_max {
                    return None;
                }
                (isqrt(b_max - uu * uu) as u64).min(u - 1)
            }
            Region::MaxBound { x } => return max_window(u, isqrt(x as u128)),
            Region::ProductBound { .. } => u - 1,
        };
        let near = |v: u64| -> bool {
            let (a, b) = ab(u, v);
            match *self {
                Region::RatioBound { delta, .. } => a * a * delta.den as u128 <= delta.num as u128 * b * b,
                Region::Rect { y, .. } => a * a <= y as u128,
                Region::ProductBound { x } => a * b <= x as u128,
                Region::MaxBound { .. } => unreachable!(),
            }
        };
        // a vanishes at v = (sqrt 2 - 1) u and grows monotonically on both
        // sides; the same holds for a/b and a*b.
        let f = (isqrt(2 * uu * uu) - uu) as u64;
        let mut lo = None;
        let mut hi = None;
        let left = f.min(vcap);
        if left >= 1 && near(left) {
            let mut v = left;
            while v > 1 && near(v - 1) {
                v -= 1;
            }
            lo = Some(v);
            hi = Some(left);
        }
        let right = f + 1;
        if right <= vcap && near(right) {
            let mut v = right;
            while v < vcap && near(v + 1) {
                v += 1;
            }
            lo.get_or_insert(right);
            hi = Some(v);
        }
        lo.zip(hi)
    }

    fn admits_trivial(&self) -> bool {
        self.admits(&ApTriple::TRIVIAL)
    }
}

fn ab(u: u64, v: u64) -> (u128, u128) {
    let (u, v) = (u as u128, v as u128);
    ((u * u).abs_diff(v * v + 2 * u * v), u * u + v * v)
}

/// `c = u^2 + 2uv - v^2` increases in `v < u`; return `[1, v]` with `c <= c_max`.
fn max_window(u: u64, c_max: u128) -> Option<(u64, u64)> {
    let uu = u as u128;
    let c = |v: u64| uu * uu + 2 * uu * v as u128 - (v as u128) * (v as u128);
    if c(1) > c_max {
        return None;
    }
    // c <= c_max  <=>  v <= u - sqrt(2u^2 - c_max).
    let disc = (2 * uu * uu).saturating_sub(c_max);
    let guess = uu.saturating_sub(isqrt(disc)).clamp(1, uu - 1) as u64;
    let mut v = guess;
    while v > 1 && c(v) > c_max {
        v -= 1;
    }
    while v + 1 < u && c(v + 1) <= c_max {
        v += 1;
    }
    Some((1, v))
}

fn is_euclid(u: u64, v: u64) -> bool {
    (u ^ v) & 1 == 1 && u.gcd(&v) == 1
}

/// Lazy stream of the APs in a region, ordered by `u` then `v`, with the
/// trivial AP last.
pub struct ApIter {
    region: Region,
    include_trivial: bool,
    u: u64,
    u_max: u64,
    v: u64,
    v_hi: u64,
    done: bool,
}

impl Iterator for ApIter {
    type Item = ApTriple;

    fn next(&mut self) -> Option<ApTriple> {
        loop {
            if self.done {
                return None;
            }
            while self.v <= self.v_hi {
                let v = self.v;
                self.v += 1;
                if is_euclid(self.u, v) {
                    // Bounds were checked in enumerate_aps.
                    let t = ApTriple::from_euclid(self.u, v).ok()?;
                    debug_assert!(self.region.admits(&t));
                    return Some(t);
                }
            }
            if self.u >= self.u_max {
                self.done = true;
                if self.include_trivial && self.region.admits_trivial() {
                    return Some(ApTriple::TRIVIAL);
                }
                return None;
            }
            self.u += 1;
            match self.region.v_window(self.u) {
                Some((lo, hi)) => {
                    self.v = lo;
                    self.v_hi = hi;
                }
                None => {
                    self.v = 1;
                    self.v_hi = 0;
                }
            }
        }
    }
}

pub fn enumerate_aps(region: Region, include_trivial: bool) -> Result<ApIter> {
    region.validate()?;
    Ok(ApIter {
        region,
        include_trivial,
        u: 1,
        u_max: region.u_max(),
        v: 1,
        v_hi: 0,
        done: false,
    })
}

fn count_u(region: &Region, u: u64) -> u64 {
    match region.v_window(u) {
        Some((lo, hi)) => (lo..=hi).filter(|&v| is_euclid(u, v)).count() as u64,
        None => 0,
    }
}

fn count_in_pool(region: Region, include_trivial: bool, threads: usize) -> Result<u64> {
    region.validate()?;
    let u_max = region.u_max();
    let chunks = (threads as u64 * 8).max(1);
    let step = (u_max / chunks).max(1);
    let starts: Vec<u64> = (2..=u_max.max(1)).step_by(step as usize).collect();
    let work = || -> u64 {
        starts
            .par_iter()
            .map(|&s| (s..(s + step).min(u_max + 1)).map(|u| count_u(&region, u)).sum::<u64>())
            .sum()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::domain(format!("cannot build thread pool: {e}")))?;
    let nontrivial = pool.install(work);
    Ok(nontrivial + u64::from(include_trivial && region.admits_trivial()))
}

/// Exact number of APs in the region, using the global rayon pool size.
pub fn count_region(region: Region, include_trivial: bool) -> Result<u64> {
    count_in_pool(region, include_trivial, rayon::current_num_threads())
}

/// [`count_region`] on a dedicated pool of `threads` workers.
pub fn count_region_with(region: Region, include_trivial: bool, threads: usize) -> Result<u64> {
    if threads == 0 {
        return Err(Error::domain("thread count must be positive"));
    }
    count_in_pool(region, include_trivial, threads)
}

/// Independent O(b^2) scan over `b`, then `a < b`.
pub fn brute_oracle(region: Region, include_trivial: bool) -> Result<u64> {
    region.validate()?;
    let b_max = match region {
        Region::ProductBound { x } => x,
        other => isqrt(other.x() as u128) as u64,
    };
    if b_max > ORACLE_B_LIMIT {
        return Err(Error::BoundTooLarge {
            what: "brute-force oracle b",
            bound: b_max as u128,
            limit: ORACLE_B_LIMIT as u128,
        });
    }
    let mut count = 0u64;
    for b in 1..=b_max {
        for a in 1..b {
            let rest = 2 * (b as u128) * (b as u128) - (a as u128) * (a as u128);
            let Some(c) = is_square(rest) else { continue };
            if a.gcd(&b) != 1 {
                continue;
            }
            let t = ApTriple { a, b, c: c as u64 };
            if region.admits(&t) {
                count += 1;
            }
        }
    }
    if include_trivial && region.admits(&ApTriple::TRIVIAL) {
        count += 1;
    }
    Ok(count)
}

/// `sqrt 2 (1 + 3/2 log 2 - log(1 + sqrt 2)) / pi^2`.
pub fn rect_constant() -> f64 {
    SQRT_2 * (1.0 + 1.5 * 2f64.ln() - regulator()) / (PI * PI)
}

/// Closed-form leading term of the count in `region`. For `Rect` the secondary
/// terms are only small when `Y` is well below `X`.
pub fn main_term(region: Region) -> Result<f64> {
    region.validate()?;
    let pi2 = PI * PI;
    Ok(match region {
        Region::RatioBound { x, delta } => 2.0 / pi2 * (delta.to_f64() / 2.0).sqrt().asin() * (x as f64).sqrt(),
        Region::MaxBound { x } => SQRT_2 / pi2 * regulator() * (x as f64).sqrt(),
        Region::Rect { x, y } => {
            let ys = (y as f64).sqrt();
            if y == 0 {
                0.0
            } else {
                ys * (x as f64 / y as f64).ln() / (SQRT_2 * pi2) + rect_constant() * ys
            }
        }
        Region::ProductBound { x } => 2.0 * SQRT_2 / pi2 * gauss_2f1_quarterhalf() * (x as f64).sqrt(),
    })
}

/// The four counting theorems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// Ratio bound, `b^2 <= X`, `(a/b)^2 <= delta`.
    RatlPoints,
    /// Maximum bound, `c^2 <= X`.
    BoundedMax,
    /// Rectangle, `a^2 <= Y`, `b^2 <= X`.
    NaturalXy,
    /// Product bound, `ab <= X`.
    FirstTwo,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [
        Theorem::RatlPoints,
        Theorem::BoundedMax,
        Theorem::NaturalXy,
        Theorem::FirstTwo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Theorem::RatlPoints => "ratl-points",
            Theorem::BoundedMax => "bounded-max",
            Theorem::NaturalXy => "natural-xy",
            Theorem::FirstTwo => "first-two",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown theorem {s:?}")))
    }
}

impl Serialize for Theorem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// How the rectangle's `Y` follows `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YRule {
    /// `Y = floor(X^(num/den))`, computed exactly.
    Power {
        num: u32,
        den: u32,
    },
    Fixed(u64),
}

impl Default for YRule {
    fn default() -> Self {
        YRule::Power { num: 3, den: 4 }
    }
}

impl YRule {
    pub fn apply(&self, x: u64) -> Result<u64> {
        match *self {
            YRule::Fixed(y) => Ok(y),
            YRule::Power { num, den } => {
                if den == 0 || num > den {
                    return Err(Error::domain(format!("Y exponent {num}/{den} must lie in [0, 1]")));
                }
                let root = BigUint::from(x).pow(num).nth_root(den);
                u64::try_from(root).map_err(|_| Error::Overflow("Y rule"))
            }
        }
    }
}

impl fmt::Display for YRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YRule::Power { num, den } => write!(f, "X^{num}/{den}"),
            YRule::Fixed(y) => write!(f, "{y}"),
        }
    }
}

/// Accepts `X^p/q` (or just `p/q`) for a power rule, or an integer for a fixed Y.
impl FromStr for YRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::domain(format!("cannot parse Y rule {s:?}"));
        let exp = s.strip_prefix("X^").or_else(|| s.strip_prefix("x^"));
        match exp.or(s.contains('/').then_some(s)) {
            Some(e) => {
                let (p, q) = e.split_once('/').ok_or_else(bad)?;
                let rule = YRule::Power {
                    num: p.parse().map_err(|_| bad())?,
                    den: q.parse().map_err(|_| bad())?,
                };
                rule.apply(1)?;
                Ok(rule)
            }
            None => Ok(YRule::Fixed(s.parse().map_err(|_| bad())?)),
        }
    }
}

/// One row of a scan: the count against its main term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    pub theorem: Theorem,
    #[serde(skip)]
    pub region: Region,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "delta_or_Y")]
    pub delta_or_y: String,
    pub count: u64,
    #[serde(skip)]
    pub includes_trivial: bool,
    pub main_term: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    #[serde(rename = "elapsed_ms", serialize_with = "millis")]
    pub elapsed: Duration,
}

fn millis<S: Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

impl CountReport {
    pub fn new(
        theorem: Theorem,
        region: Region,
        count: u64,
        includes_trivial: bool,
        elapsed: Duration,
    ) -> Result<Self> {
        let main = main_term(region)?;
        let abs_error = (count as f64 - main).abs();
        let rel_error = if main > 0.0 { abs_error / main } else { f64::NAN };
        let delta_or_y = match region {
            Region::RatioBound { delta, .. } => delta.to_string(),
            Region::Rect { y, .. } => y.to_string(),
            _ => String::new(),
        };
        Ok(CountReport {
            theorem,
            region,
            x: region.x(),
            delta_or_y,
            count,
            includes_trivial,
            main_term: main,
            abs_error,
            rel_error,
            elapsed,
        })
    }
}

/// Everything that fixes the region of a scan row except `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub theorem: Theorem,
    pub delta: Delta,
    pub y_rule: YRule,
    pub include_trivial: bool,
}

impl ScanSpec {
    pub fn new(theorem: Theorem) -> Self {
        ScanSpec {
            theorem,
            delta: Delta::ONE,
            y_rule: YRule::default(),
            include_trivial: true,
        }
    }

    pub fn region(&self, x: u64) -> Result<Region> {
        let r = match self.theorem {
            Theorem::RatlPoints => Region::RatioBound { x, delta: self.delta },
            Theorem::BoundedMax => Region::MaxBound { x },
            Theorem::NaturalXy => Region::Rect {
                x,
                y: self.y_rule.apply(x)?,
            },
            Theorem::FirstTwo => Region::ProductBound { x },
        };
        r.validate()?;
        Ok(r)
    }
}

/// Count and compare every grid point. Counts are independent of `threads`.
pub fn scan(spec: &ScanSpec, grid: &[u64], threads: usize) -> Result<Vec<CountReport>> {
    grid.iter()
        .map(|&x| {
            if x > MAX_SCAN_BOUND {
                return Err(Error::BoundTooLarge {
                    what: "scan grid",
                    bound: x as u128,
                    limit: MAX_SCAN_BOUND as u128,
                });
            }
            let region = spec.region(x)?;
            let start = Instant::now();
            let count = count_region_with(region, spec.include_trivial, threads)?;
            CountReport::new(spec.theorem, region, count, spec.include_trivial, start.elapsed())
        })
        .collect()
}

/// Least-squares slope of `log |count - main|` against `log X`.
pub fn error_slope(reports: &[CountReport]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.abs_error > 0.0)
        .map(|r| ((r.x as f64).ln(), r.abs_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Share of the `delta = 1` count that falls in the ratio region.
pub fn equidist_ratio(x: u64, delta: Delta) -> Result<f64> {
    if x < 10_000 {
        return Err(Error::domain(format!("equidist_ratio needs X >= 10^4, got {x}")));
    }
    if delta.num() == 0 {
        return Err(Error::domain("equidist_ratio needs delta > 0"));
    }
    let num = count_region(Region::RatioBound { x, delta }, true)?;
    let den = count_region(Region::RatioBound { x, delta: Delta::ONE }, true)?;
    if den == 0 {
        return Err(Error::domain("empty reference region"));
    }
    Ok(num as f64 / den as f64)
}

/// Limit of [`equidist_ratio`].
pub fn equidist_limit(delta: Delta) -> f64 {
    (delta.to_f64() / 2.0).sqrt().asin() / (PI / 4.0)
}

/// Largest `X` accepted by [`rational_point_sum`].
pub const POINT_SUM_MAX_X: u64 = 1_000_000_000_000;

/// `sum_{b <= sqrt X} A(b)`: every nontrivial AP with `b^2 <= X` contributes the
/// eight points `(+-x, +-y)`, `(+-y, +-x)` of height `b`; `b = 1` adds four.
pub fn rational_point_sum(x: u64) -> Result<u64> {
    if x > POINT_SUM_MAX_X {
        return Err(Error::BoundTooLarge {
            what: "rational point sum X",
            bound: x as u128,
            limit: POINT_SUM_MAX_X as u128,
        });
    }
    if x == 0 {
        return Ok(0);
    }
    let aps = count_region(Region::RatioBound { x, delta: Delta::ONE }, false)?;
    Ok(8 * aps + 4)
}

/// The same sum from `A(b)` directly, for `sqrt X <= 10^4`.
pub fn rational_point_sum_direct(x: u64) -> Result<u64> {
    let b_max = isqrt(x as u128) as u64;
    if b_max > ORACLE_B_LIMIT {
        return Err(Error::BoundTooLarge {
            what: "direct point sum b",
            bound: b_max as u128,
            limit: ORACLE_B_LIMIT as u128,
        });
    }
    let mut total = 0i64;
    for b in 1..=b_max {
        total += primitive_point_count_a(b)?;
    }
    Ok(total as u64)
}

/// Largest hypotenuse bound for [`right_triangles`].
pub const TRIANGLE_MAX_X: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleReport {
    #[serde(rename = "X")]
    pub x: u64,
    pub omega: f64,
    pub count: u64,
    pub main_term: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

/// Whether the legs `p, q` make acute angles within `omega` of `pi/4`.
pub fn near_isosceles(p: u64, q: u64, omega: f64) -> bool {
    let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
    ((lo as f64 / hi as f64).atan() - PI / 4.0).abs() <= omega
}

fn euclid_legs(u: u64, v: u64) -> (u64, u64) {
    (u * u - v * v, 2 * u * v)
}

/// Primitive right triangles with hypotenuse at most `x` and acute angles
/// within `omega` of `pi/4`, against `(2 omega / pi^2) x`.
pub fn right_triangles(x: u64, omega: f64) -> Result<TriangleReport> {
    if x > TRIANGLE_MAX_X {
        return Err(Error::BoundTooLarge {
            what: "triangle hypotenuse",
            bound: x as u128,
            limit: TRIANGLE_MAX_X as u128,
        });
    }
    if !(omega > 0.0 && omega <= PI / 4.0) {
        return Err(Error::domain(format!("omega must lie in (0, pi/4], got {omega}")));
    }
    let u_max = if x < 2 { 0 } else { isqrt(x as u128 - 1) as u64 };
    let spf = smallest_prime_factors(u_max as usize);
    // The leg 2uv sits at angle 2 atan(v/u), so the admissible v/u lie near
    // [tan((pi/4 - omega)/2), tan((pi/4 + omega)/2)].
    let t_lo = ((PI / 4.0 - omega) / 2.0).tan();
    let t_hi = ((PI / 4.0 + omega) / 2.0).tan();
    let count: u64 = (2..=u_max.max(1))
        .into_par_iter()
        .map(|u| {
            let pred = |v: u64| {
                let (p, q) = euclid_legs(u, v);
                near_isosceles(p, q, omega)
            };
            let cap = (isqrt((x - u * u) as u128) as u64).min(u - 1);
            if cap == 0 {
                return 0;
            }
            let mut lo = ((u as f64 * t_lo).floor() as u64).clamp(1, cap);
            let mut hi = ((u as f64 * t_hi).ceil() as u64).clamp(1, cap);
            while lo > 1 && pred(lo - 1) {
                lo -= 1;
            }
            while lo <= hi && !pred(lo) {
                lo += 1;
            }
            while hi < cap && pred(hi + 1) {
                hi += 1;
            }
            while hi >= lo && !pred(hi) {
                hi -= 1;
            }
            if lo > hi {
                return 0;
            }
            coprime_opposite_parity(u, lo, hi, &spf)
        })
        .sum();
    let main = 2.0 * omega / (PI * PI) * x as f64;
    let abs_error = (count as f64 - main).abs();
    Ok(TriangleReport {
        x,
        omega,
        count,
        main_term: main,
        abs_error,
        rel_error: if main > 0.0 { abs_error / main } else { f64::NAN },
    })
}

fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            for j in (i..=n).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    spf
}

/// `#{v in [lo, hi] : gcd(u, v) = 1, u + v odd}` by inclusion-exclusion.
fn coprime_opposite_parity(u: u64, lo: u64, hi: u64, spf: &[u32]) -> u64 {
    let mut primes = Vec::new();
    let mut n = u as usize;
    while n > 1 {
        let p = spf[n] as usize;
        primes.push(p as u64);
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    // Odd u needs even v = 2w with gcd(u, w) = 1.
    let (lo, hi) = if u % 2 == 1 { (lo.div_ceil(2), hi / 2) } else { (lo, hi) };
    if lo > hi {
        return 0;
    }
    let upto = |m: u64, d: u64| m / d;
    let mut total = 0i64;
    for mask in 0u32..(1 << primes.len()) {
        let mut d = 1u64;
        for (i, p) in primes.iter().enumerate() {
            if mask >> i & 1 == 1 {
                d *= p;
            }
        }
        let n = (upto(hi, d) - upto(lo - 1, d)) as i64;
        total += if mask.count_ones() % 2 == 0 { n } else { -n };
    }
    total as u64
}
