//! Special functions and L-series: Hurwitz zeta by Euler-Maclaurin,
//! Dirichlet L-functions of the characters mod 8 and mod 4, the 2-deprived
//! zeta function, Hecke L-functions `L(s, eta^{2m})` by truncated Euler
//! product, a Lanczos complex Gamma, and the Gauss series `2F1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{chi4, chi8};
use crate::error::{Error, Result};
use crate::quad::{prime_splits, SplitKind};

/// Truncation parameters recorded with a numerical series value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    /// Closed finite formula; only rounding error remains.
    Exact,
    PrimeBound {
        prime_bound: u64,
    },
    PellBound {
        b_max: f64,
    },
    SpectralBound {
        m_max: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        prime_bound: Option<u64>,
    },
    DoubleSum {
        h_max: u64,
        b_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub truncation: Truncation,
    /// Heuristic bound on the truncation error.
    pub tail_estimate: f64,
}

impl SeriesValue {
    pub(crate) fn exact(value: f64) -> Self {
        SeriesValue {
            value,
            truncation: Truncation::Exact,
            tail_estimate: value.abs() * 1e-15,
        }
    }
}

// B_2, B_4, ..., B_24
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Hurwitz zeta `zeta(s, x) = sum_{k >= 0} (k + x)^-s` for real `s > 0`, `s != 1`,
/// `x` in `(0, 1]`.
pub fn hurwitz_zeta(s: f64, x: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::Pole("s = 1 of the Hurwitz zeta function".into()));
    }
    if !(s > 0.0) || !(x > 0.0 && x <= 1.0) {
        return Err(Error::domain(format!("hurwitz_zeta(s = {s}, x = {x})")));
    }
    let n = 20 + s.ceil() as usize;
    let mut head = 0.0;
    // Smallest terms first.
    for k in (0..n).rev() {
        head += (k as f64 + x).powf(-s);
    }
    let nx = n as f64 + x;
    let mut tail = nx.powf(1.0 - s) / (s - 1.0) + 0.5 * nx.powf(-s);
    // B_2j / (2j)! * s (s+1) ... (s+2j-2) * nx^(-s-2j+1)
    let mut rising = s;
    let mut power = nx.powf(-s - 1.0);
    let mut factorial = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / factorial * rising * power;
        tail += term;
        let k = 2.0 * j as f64;
        rising *= (s + k + 1.0) * (s + k + 2.0);
        power /= nx * nx;
        factorial *= (k + 3.0) * (k + 4.0);
    }
    Ok(head + tail)
}

/// Riemann zeta for real `s > 0`, `s != 1`.
pub fn zeta(s: f64) -> Result<f64> {
    hurwitz_zeta(s, 1.0)
}

/// Digamma on `(0, 1]` by upward shift and the asymptotic series.
fn digamma(x: f64) -> f64 {
    let n = 20;
    let mut shift = 0.0;
    for k in 0..n {
        shift += 1.0 / (x + k as f64);
    }
    let y = x + n as f64;
    let mut asym = y.ln() - 0.5 / y;
    let y2 = y * y;
    let mut power = y2;
    for (j, b) in BERNOULLI_EVEN.iter().take(8).enumerate() {
        asym -= b / (2.0 * (j + 1) as f64 * power);
        power *= y2;
    }
    asym - shift
}

/// The characters whose L-functions are exposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirichletChar {
    /// `(2/.)`, modulus 8.
    Chi8,
    /// `(-1/.)`, modulus 4.
    Chi4,
    /// The principal character mod 8.
    Principal8,
}

impl DirichletChar {
    pub fn modulus(self) -> u32 {
        match self {
            DirichletChar::Chi8 | DirichletChar::Principal8 => 8,
            DirichletChar::Chi4 => 4,
        }
    }

    pub fn value(self, a: i64) -> i32 {
        match self {
            DirichletChar::Chi8 => chi8(a),
            DirichletChar::Chi4 => chi4(a),
            DirichletChar::Principal8 => (a % 2 != 0) as i32,
        }
    }
}

/// `L(s, chi) = q^-s sum_{a mod q} chi(a) zeta(s, a/q)`; at `s = 1` the poles of
/// the Hurwitz terms cancel and `L(1, chi) = -(1/q) sum chi(a) psi(a/q)`.
pub fn dirichlet_l(s: f64, which: DirichletChar) -> Result<SeriesValue> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("dirichlet_l needs s > 0, got {s}")));
    }
    let q = which.modulus();
    let qf = q as f64;
    if s == 1.0 {
        if which == DirichletChar::Principal8 {
            return Err(Error::Pole("s = 1 of the principal L-function".into()));
        }
        let sum: f64 = (1..=q)
            .map(|a| which.value(a as i64) as f64 * digamma(a as f64 / qf))
            .sum();
        return Ok(SeriesValue::exact(-sum / qf));
    }
    let mut sum = 0.0;
    for a in 1..=q {
        let c = which.value(a as i64);
        if c != 0 {
            sum += c as f64 * hurwitz_zeta(s, a as f64 / qf)?;
        }
    }
    Ok(SeriesValue::exact(qf.powf(-s) * sum))
}

/// `zeta^{(2)}(s) = (1 - 2^-s) zeta(s)`.
pub fn zeta2_factor(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::domain(format!("zeta2_factor needs s > 1, got {s}")));
    }
    Ok((1.0 - (-s).exp2()) * zeta(s)?)
}

/// Lowest real `s` at which the truncated Euler product is accepted.
pub const HECKE_MIN_S: f64 = 1.5;

/// `L(s, eta^{m2})` for even `m2`, as an Euler product over rational primes
/// `p <= prime_bound`.
pub fn hecke_l(s: f64, m2: i64, prime_bound: u64) -> Result<SeriesValue> {
    if !(s >= HECKE_MIN_S) {
        return Err(Error::domain(format!(
            "hecke_l is only evaluated for s >= {HECKE_MIN_S}, got {s}"
        )));
    }
    if m2 % 2 != 0 {
        return Err(Error::domain(format!("hecke_l takes even powers of eta, got {m2}")));
    }
    if prime_bound < 2 {
        return Err(Error::domain("hecke_l needs prime_bound >= 2"));
    }
    let splits = prime_splits(prime_bound)?;
    let k = m2.unsigned_abs() as f64;
    let n = splits.partition_point(|sp| sp.p <= prime_bound);
    // Smallest factors first, so they are not absorbed by the running sum.
    let mut log_sum = 0.0;
    for sp in splits[..n].iter().rev() {
        let x = (sp.p as f64).powf(-s);
        let local = match sp.kind {
            SplitKind::Split => -2.0 * (k * sp.theta).cos() * x + x * x,
            SplitKind::Inert => -x * x,
            // eta^{2m} is trivial on the ramified ideal.
            SplitKind::Ramified => -x,
        };
        log_sum -= local.ln_1p();
    }
    let value = log_sum.exp();
    let pb = prime_bound as f64;
    let tail = value * 2.0 * pb.powf(1.0 - s) / ((s - 1.0) * pb.ln());
    Ok(SeriesValue {
        value,
        truncation: Truncation::PrimeBound { prime_bound },
        tail_estimate: tail,
    })
}

const LANCZOS_G_SHIFT: f64 = 671.0 / 128.0;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

fn ln_gamma_right(z: Complex64) -> Complex64 {
    let mut ser = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (j, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        ser += c / (z + j as f64);
    }
    let t = z + LANCZOS_G_SHIFT;
    (z + 0.5) * t.ln() - t + (ser * (2.0 * PI).sqrt() / z).ln()
}

/// Complex Gamma function; reflection below `Re z = 1/2`.
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Pole(format!("Gamma at {}", z.re)));
    }
    if z.re < 0.5 {
        let reflected = ln_gamma_right(Complex64::new(1.0, 0.0) - z).exp();
        return Ok(PI / ((z * PI).sin() * reflected));
    }
    Ok(ln_gamma_right(z).exp())
}

/// `Gamma(s + it) Gamma(s - it) = |Gamma(s + it)|^2` for real `s`.
pub fn gamma_pair(s: f64, t: f64) -> Result<f64> {
    Ok(gamma_complex(Complex64::new(s, t))?.norm_sqr())
}

pub fn gamma_real(x: f64) -> Result<f64> {
    Ok(gamma_complex(Complex64::new(x, 0.0))?.re)
}

/// Power series of `2F1(a, b; c; z)` for `|z| < 1`, summed until terms drop
/// below `1e-17` relative.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(z.abs() < 1.0) {
        return Err(Error::domain(format!("2F1 series needs |z| < 1, got {z}")));
    }
    let mut sum = 0.0f64;
    let mut term = 1.0f64;
    let mut n = 0.0;
    while term.abs() > 1e-17 * sum.abs().max(1e-300) {
        sum += term;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        n += 1.0;
        if n > 10_000.0 {
            break;
        }
    }
    Ok(sum)
}

/// `2F1(1/4, 1/2; 5/4; 1/2)`, the constant in the bounded-product count.
pub fn gauss_2f1_quarterhalf() -> f64 {
    hyp2f1_series(0.25, 0.5, 1.25, 0.5).expect("z = 1/2 is inside the disc")
}

#[cfg(test)]
mod tests {
    use super::*;

    // References frozen from 25-digit mpmath evaluations.
    const ZETA3: f64 = 1.202_056_903_159_594_285;
    const CATALAN: f64 = 0.915_965_594_177_219_015;
    const F_QUARTER_HALF: f64 = 1.065_030_903_699_806_284;

    #[test]
    fn hurwitz_examples() {
        assert!((hurwitz_zeta(2.0, 1.0).unwrap() - PI * PI / 6.0).abs() < 1e-12);
        let half = hurwitz_zeta(2.0, 0.5).unwrap();
        assert!((half - (4.0 - 1.0) * zeta(2.0).unwrap()).abs() < 1e-12);
        assert!((half - PI * PI / 2.0).abs() < 1e-12);
        assert!((hurwitz_zeta(3.0, 1.0).unwrap() - ZETA3).abs() < 1e-12);
        assert!(matches!(hurwitz_zeta(1.0, 0.5), Err(Error::Pole(_))));
    }

    #[test]
    fn hurwitz_reference_points() {
        let cases = [
            (2.5, 0.3, 21.069_239_202_247_724_917),
            (0.5, 0.7, -1.010_536_559_935_124_442),
            (40.0, 0.9, 67.654_957_011_860_777_009),
        ];
        for (s, x, want) in cases {
            let got = hurwitz_zeta(s, x).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "zeta({s}, {x}) = {got}");
        }
    }

    #[test]
    fn half_shift_relation() {
        for s in [1.5, 2.0, 3.0, 5.5, 10.0] {
            let lhs = hurwitz_zeta(s, 0.5).unwrap();
            let rhs = (s.exp2() - 1.0) * zeta(s).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * rhs, "s = {s}");
        }
    }

    #[test]
    fn dirichlet_examples() {
        let l1 = dirichlet_l(1.0, DirichletChar::Chi8).unwrap().value;
        assert!((l1 - LOG_1P_SQRT2 / std::f64::consts::SQRT_2).abs() < 1e-10);
        let p2 = dirichlet_l(2.0, DirichletChar::Principal8).unwrap().value;
        assert!((p2 - PI * PI / 8.0).abs() < 1e-10);
        let c = dirichlet_l(2.0, DirichletChar::Chi4).unwrap().value;
        assert!((c - CATALAN).abs() < 1e-10);
        assert!(dirichlet_l(1.0, DirichletChar::Principal8).is_err());
        // L(1, chi4) = pi / 4
        let l14 = dirichlet_l(1.0, DirichletChar::Chi4).unwrap().value;
        assert!((l14 - PI / 4.0).abs() < 1e-12);
    }

    const LOG_1P_SQRT2: f64 = 0.881_373_587_019_543_025;

    #[test]
    fn zeta2_examples() {
        assert!((zeta2_factor(2.0).unwrap() - PI * PI / 8.0).abs() < 1e-12);
        let z16 = zeta2_factor(16.0).unwrap();
        assert!((z16 - 1.0).abs() < 1e-4 && z16 > 1.0 - 1e-4);
        assert!((z16 - 1.000_000_023_237_157_4).abs() < 1e-14);
        let z4 = zeta2_factor(4.0).unwrap();
        assert!((z4 - (15.0 / 16.0) * PI.powi(4) / 90.0).abs() < 1e-12);
        assert!(zeta2_factor(1.0).is_err());
        assert!(zeta2_factor(0.5).is_err());
    }

    #[test]
    fn hecke_examples() {
        // m = 0 is the Dedekind zeta function zeta(s) L(s, chi).
        for s in [2.0, 3.0, 4.0] {
            let h = hecke_l(s, 0, 1_000_000).unwrap();
            let dedekind = zeta(s).unwrap() * dirichlet_l(s, DirichletChar::Chi8).unwrap().value;
            assert!(
                (h.value - dedekind).abs() <= h.tail_estimate + 4.0 * f64::EPSILON,
                "s = {s}"
            );
        }
        let h8 = hecke_l(8.0, 2, 100_000).unwrap();
        assert!((h8.value - 1.00392).abs() < 1e-4, "{}", h8.value);
        let a = hecke_l(3.0, 2, 100_000).unwrap();
        let b = hecke_l(3.0, 2, 1_000_000).unwrap();
        assert!((a.value - b.value).abs() <= a.tail_estimate);
        assert!(hecke_l(1.2, 2, 1000).is_err());
        assert!(hecke_l(2.0, 3, 1000).is_err());
    }

    #[test]
    fn hecke_tail_monotone_grid() {
        for s in [1.5, 2.0, 3.0] {
            for m2 in [0i64, 2, 4, 10] {
                let mut prev = hecke_l(s, m2, 1_000).unwrap();
                for bound in [10_000u64, 100_000] {
                    let next = hecke_l(s, m2, bound).unwrap();
                    assert!(
                        (next.value - prev.value).abs() <= prev.tail_estimate,
                        "s = {s}, m2 = {m2}, bound = {bound}"
                    );
                    prev = next;
                }
            }
        }
    }

    #[test]
    fn gamma_examples() {
        let g2 = gamma_complex(Complex64::new(2.0, 0.0)).unwrap();
        assert!((g2 - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let gh = gamma_real(0.5).unwrap();
        assert!((gh - PI.sqrt()).abs() < 1e-12 * PI.sqrt());
        for t in [0.5, 1.782_2, 5.0] {
            let lhs = gamma_pair(1.0, t).unwrap();
            let rhs = PI * t / (PI * t).sinh();
            assert!(((lhs - rhs) / rhs).abs() < 1e-12, "t = {t}");
        }
        assert!(gamma_complex(Complex64::new(-3.0, 0.0)).is_err());
        assert!(gamma_complex(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn gamma_reference_points() {
        let cases = [
            (
                Complex64::new(3.3, -7.1),
                Complex64::new(-0.002_873_500_570_012_650_5, 0.008_842_058_122_019_147_1),
            ),
            (
                Complex64::new(-2.5, 1.2),
                Complex64::new(-0.011_838_571_435_379_097, -0.053_654_572_713_170_339),
            ),
        ];
        for (z, want) in cases {
            let got = gamma_complex(z).unwrap();
            assert!((got - want).norm() < 1e-12 * want.norm(), "Gamma({z}) = {got}");
        }
    }

    #[test]
    fn gamma_modulus_identity_grid() {
        let mut t = 0.1;
        while t <= 20.0 {
            let v = gamma_pair(1.0, t).unwrap() * (PI * t).sinh() / (PI * t);
            assert!((v - 1.0).abs() < 1e-11, "t = {t}: {v}");
            t += 0.1;
        }
    }

    #[test]
    fn hypergeometric_constant() {
        let f = gauss_2f1_quarterhalf();
        assert!((f - F_QUARTER_HALF).abs() < 1e-12);
        // Independent 20-term partial sum with Pochhammer products.
        let mut partial = 0.0;
        let mut sums = Vec::new();
        for n in 0..20 {
            let mut t = 0.5f64.powi(n);
            for k in 0..n {
                let k = k as f64;
                t *= (0.25 + k) * (0.5 + k) / ((1.25 + k) * (k + 1.0));
            }
            partial += t;
            sums.push(partial);
        }
        assert!((f - partial).abs() < 1e-3);
        assert!(sums.windows(2).all(|w| w[1] > w[0]));
        for n in 2..200 {
            let n = n as f64;
            let ratio = (0.25 + n) * (0.5 + n) / ((1.25 + n) * (n + 1.0)) * 0.5;
            assert!(ratio <= 0.55);
        }
    }
}
