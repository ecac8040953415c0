//! Two-sided evaluation of the spectral expansions of the shifted convolution
//! series
//!
//! ```text
//! D_h(s)   = sum_{m >= 1} r1(m) r1(2m - h) / m^s
//! D(s, w)  = sum_{(m, h) = 1} r1(h) r1(m) r1(2m - h) / (m^s h^w)
//! ```
//!
//! The arithmetic side walks Pell orbits of `c^2 - 2 b^2 = -h`; the spectral
//! side sums the dihedral Maass form contributions indexed by `m in Z`.

use serde::Serialize;

use crate::arith::{divisors, factorize, isqrt};
use crate::error::{Error, Result};
use crate::lfun::{gamma_pair, gamma_real, hecke_l, zeta2_factor, SeriesValue, Truncation};
use crate::quad::{lambda_n, lambda_square, pell_solutions, regulator, spectral_t, PELL_B_LIMIT};

/// Neumaier's compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Growth of `b` per orbit step, `(3 + 2 sqrt 2)`.
const ORBIT_RATIO: f64 = 5.828_427_124_746_19;

/// Orbit cutoff where the next term of `b^{-2s}` drops below `1e-22`, capped at
/// the orbit generator's limit.
pub fn pell_cutoff(s: f64) -> u128 {
    let cap = 10f64.powf(22.0 / (2.0 * s));
    if cap >= PELL_B_LIMIT as f64 {
        PELL_B_LIMIT
    } else {
        (cap.ceil() as u128).max(16)
    }
}

fn orbit_tail(classes: usize, b_cut: u128, s: f64) -> f64 {
    let ratio = ORBIT_RATIO.powf(-2.0 * s);
    classes as f64 * 4.0 * (b_cut as f64).powf(-2.0 * s) / (1.0 - ratio)
}

/// Arithmetic side of `D_h(s)`. `b_max` defaults to the `1e-22` orbit cutoff.
pub fn dh_lhs(h: u64, s: f64, b_max: Option<u128>) -> Result<SeriesValue> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("D_h(s) needs s > 0, got {s}")));
    }
    let b_cut = b_max.unwrap_or_else(|| pell_cutoff(s));
    let orbit = pell_solutions(h, b_cut)?;
    let mut acc = CompensatedSum::default();
    for &(c, b) in &orbit.solutions {
        // r1(b^2) = 2 and r1(c^2) = 2, or 1 when 2 b^2 = h.
        let weight = if c == 0 { 2.0 } else { 4.0 };
        acc.add(weight * (b as f64).powf(-2.0 * s));
    }
    Ok(SeriesValue {
        value: acc.value(),
        truncation: Truncation::PellBound { b_max: b_cut as f64 },
        tail_estimate: orbit_tail(orbit.fundamentals.len(), b_cut, s),
    })
}

/// Default spectral cutoff: the Gamma pair decays like `exp(-pi t_m)`.
pub const DEFAULT_M_MAX: u32 = 12;

/// Terms `m = 0, 1, ..., m_max` of the spectral side of `D_h(s)`, each `m > 0`
/// already paired with `-m`.
fn dh_rhs_terms(h: u64, s: f64, m_max: u32) -> Result<Vec<f64>> {
    let hs = (h as f64).powf(-s);
    let denom = (1.0 - 3.0 * s).exp2() * regulator() * gamma_real(2.0 * s)?;
    (0..=m_max as i64)
        .map(|m| {
            let lambda = lambda_n(h, m)?;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let pair = if m == 0 { 1.0 } else { 2.0 };
            Ok(pair * sign * lambda * hs * gamma_pair(s, spectral_t(m))? / denom)
        })
        .collect()
}

/// Spectral side of `D_h(s)`, truncated to `|m| <= m_max`.
pub fn dh_rhs(h: u64, s: f64, m_max: u32) -> Result<SeriesValue> {
    if h == 0 {
        return Err(Error::domain("D_h(s) needs h >= 1"));
    }
    if !(s > 0.5) {
        return Err(Error::domain(format!("spectral side of D_h(s) needs s > 1/2, got {s}")));
    }
    let terms = dh_rhs_terms(h, s, m_max)?;
    let mut acc = CompensatedSum::default();
    for t in terms.iter().rev() {
        acc.add(*t);
    }
    // First omitted pair with |lambda_m(h)| replaced by its bound tau(h).
    let tau = divisors(&factorize(h)?).len() as f64;
    let next = 2.0 * tau * (h as f64).powf(-s) * gamma_pair(s, spectral_t(m_max as i64 + 1))?
        / ((1.0 - 3.0 * s).exp2() * regulator() * gamma_real(2.0 * s)?);
    Ok(SeriesValue {
        value: acc.value(),
        truncation: Truncation::SpectralBound {
            m_max,
            prime_bound: None,
        },
        tail_estimate: next,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "identity", rename_all = "snake_case")]
pub enum IdentityParams {
    Single { h: u64, s: f64 },
    Double { s: f64, w: f64 },
}

/// Both sides of one identity evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub params: IdentityParams,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub lhs_truncation: Truncation,
    pub rhs_truncation: Truncation,
    pub lhs_tail: f64,
    pub rhs_tail: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    fn new(params: IdentityParams, lhs: SeriesValue, rhs: SeriesValue, tolerance: f64) -> Self {
        let abs_diff = (lhs.value - rhs.value).abs();
        let rel_diff = abs_diff / rhs.value.abs().max(1e-30);
        let both_vanish = lhs.value == 0.0 && rhs.value == 0.0;
        IdentityReport {
            params,
            lhs: lhs.value,
            rhs: rhs.value,
            abs_diff,
            rel_diff,
            lhs_truncation: lhs.truncation,
            rhs_truncation: rhs.truncation,
            lhs_tail: lhs.tail_estimate,
            rhs_tail: rhs.tail_estimate,
            tolerance,
            pass: both_vanish || rel_diff <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleOptions {
    pub tolerance: f64,
    pub m_max: u32,
    /// `None` uses the `1e-22` orbit cutoff.
    pub b_max: Option<u128>,
}

impl Default for SingleOptions {
    fn default() -> Self {
        SingleOptions {
            tolerance: 1e-6,
            m_max: DEFAULT_M_MAX,
            b_max: None,
        }
    }
}

/// Range of `s` on which the single identity is checked.
pub const SINGLE_S_RANGE: (f64, f64) = (0.75, 4.0);

pub fn verify_single(h: u64, s: f64, opts: &SingleOptions) -> Result<IdentityReport> {
    if h == 0 {
        return Err(Error::domain("verify_single needs h >= 1"));
    }
    if !(SINGLE_S_RANGE.0..=SINGLE_S_RANGE.1).contains(&s) {
        return Err(Error::domain(format!(
            "verify_single checks s in [{}, {}], got {s}",
            SINGLE_S_RANGE.0, SINGLE_S_RANGE.1
        )));
    }
    let lhs = dh_lhs(h, s, opts.b_max)?;
    let rhs = dh_rhs(h, s, opts.m_max)?;
    Ok(IdentityReport::new(
        IdentityParams::Single { h, s },
        lhs,
        rhs,
        opts.tolerance,
    ))
}

/// Arithmetic side of `D(s, w)`: `h = a^2 <= h_max`, all coprime Pell
/// solutions for each `a`, ascending `h` then `b`.
pub fn dds_lhs(s: f64, w: f64, h_max: u64) -> Result<SeriesValue> {
    if !(s > 0.0) || !(s + w > 1.0) {
        return Err(Error::domain(format!("D(s, w) diverges at s = {s}, w = {w}")));
    }
    let b_cut = pell_cutoff(s);
    let a_max = isqrt(h_max as u128) as u64;
    let mut acc = CompensatedSum::default();
    for a in 1..=a_max {
        let orbit = pell_solutions(a * a, b_cut)?;
        let aw = (a as f64).powf(-2.0 * w);
        for &(_, b) in &orbit.solutions {
            if num_integer::gcd(a as u128, b) == 1 {
                // 2b^2 = a^2 is impossible, so all three r1 factors are 2.
                acc.add(8.0 * (b as f64).powf(-2.0 * s) * aw);
            }
        }
    }
    // Smallest b for a given a is about a / sqrt 2.
    let exponent = 2.0 * s + 2.0 * w;
    let tail = 16.0 * (2f64).powf(s) * (a_max as f64).powf(1.0 - exponent) / (exponent - 1.0);
    Ok(SeriesValue {
        value: acc.value(),
        truncation: Truncation::DoubleSum {
            h_max,
            b_max: b_cut as f64,
        },
        tail_estimate: tail,
    })
}

fn dds_prefactor(s: f64, w: f64) -> Result<f64> {
    Ok((3.0 * s).exp2() * (1.0 - (-2.0 * s - 2.0 * w).exp2())
        / (zeta2_factor(4.0 * s + 4.0 * w)? * regulator() * gamma_real(2.0 * s)?))
}

/// Paired spectral terms `m = 0..=m_max` of `D(s, w)`, without the prefactor.
pub fn dds_rhs_terms(s: f64, w: f64, m_max: u32, prime_bound: u64) -> Result<Vec<SeriesValue>> {
    check_dds_rhs_domain(s, w)?;
    (0..=m_max as i64)
        .map(|m| {
            let l = hecke_l(2.0 * s + 2.0 * w, 2 * m, prime_bound)?;
            let g = gamma_pair(s, spectral_t(m))?;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let pair = if m == 0 { 1.0 } else { 2.0 };
            Ok(SeriesValue {
                value: pair * sign * l.value * g,
                truncation: l.truncation,
                tail_estimate: pair * l.tail_estimate * g,
            })
        })
        .collect()
}

fn check_dds_rhs_domain(s: f64, w: f64) -> Result<()> {
    if !(s >= 1.0) || !(2.0 * s + 2.0 * w >= 3.0) {
        return Err(Error::domain(format!(
            "spectral side of D(s, w) needs s >= 1 and 2s + 2w >= 3, got s = {s}, w = {w}"
        )));
    }
    Ok(())
}

pub fn dds_prefactor_value(s: f64, w: f64) -> Result<f64> {
    check_dds_rhs_domain(s, w)?;
    dds_prefactor(s, w)
}

/// Spectral side of `D(s, w)`.
pub fn dds_rhs(s: f64, w: f64, m_max: u32, prime_bound: u64) -> Result<SeriesValue> {
    let terms = dds_rhs_terms(s, w, m_max + 1, prime_bound)?;
    let pre = dds_prefactor(s, w)?;
    let mut acc = CompensatedSum::default();
    let mut tail = 0.0;
    for t in terms[..=m_max as usize].iter().rev() {
        acc.add(t.value);
        tail += t.tail_estimate;
    }
    tail += terms[m_max as usize + 1].value.abs();
    Ok(SeriesValue {
        value: pre * acc.value(),
        truncation: Truncation::SpectralBound {
            m_max,
            prime_bound: Some(prime_bound),
        },
        tail_estimate: pre * tail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleOptions {
    pub tolerance: f64,
    pub h_max: u64,
    pub m_max: u32,
    pub prime_bound: u64,
}

impl Default for DoubleOptions {
    fn default() -> Self {
        DoubleOptions {
            tolerance: 1e-5,
            h_max: 1_000_000,
            m_max: DEFAULT_M_MAX,
            prime_bound: 1_000_000,
        }
    }
}

pub fn verify_double(s: f64, w: f64, opts: &DoubleOptions) -> Result<IdentityReport> {
    let rhs = dds_rhs(s, w, opts.m_max, opts.prime_bound)?;
    let lhs = dds_lhs(s, w, opts.h_max)?;
    Ok(IdentityReport::new(
        IdentityParams::Double { s, w },
        lhs,
        rhs,
        opts.tolerance,
    ))
}

/// `sum_{h <= h_max} lambda_m(h^2) h^-s`.
pub fn hsum_lhs(s: f64, m: i64, h_max: u64) -> Result<f64> {
    let mut acc = CompensatedSum::default();
    for h in (1..=h_max).rev() {
        acc.add(lambda_square(h, m)? * (h as f64).powf(-s));
    }
    Ok(acc.value())
}

/// `zeta^{(2)}(s) L(s, eta^{2m}) / zeta^{(2)}(2s)`.
pub fn hsum_rhs(s: f64, m: i64, prime_bound: u64) -> Result<SeriesValue> {
    let l = hecke_l(s, 2 * m, prime_bound)?;
    let scale = zeta2_factor(s)? / zeta2_factor(2.0 * s)?;
    Ok(SeriesValue {
        value: scale * l.value,
        truncation: l.truncation,
        tail_estimate: scale * l.tail_estimate,
    })
}
