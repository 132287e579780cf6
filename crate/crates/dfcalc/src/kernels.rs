//! Scalar-level special functions: the falling factorial `t^(a)`, the rising
//! factorial `t^{a̅}`, and the generalized-binomial kernel sequence
//! `c_m(a) = Γ(m+a) / (Γ(m+1) Γ(a))` that every fractional sum in this
//! crate reduces to.
//!
//! The kernel reductions (with integer separation `m` between grid points):
//!
//! * nabla left sum      uses `c_{t-s}(a)`
//! * nabla right sum     uses `c_{s-t}(a)`
//! * delta left sum      uses `c_{k-j}(a)` against `f(base+j)`
//! * delta right sum     uses `c_{k-m}(a)` against `f(top-m)`
//!
//! so the exact backend never needs a gamma evaluation: the recurrence
//! `c_0 = 1`, `c_m = c_{m-1} (m+a-1)/m` is exact for rational `a`. The f64
//! log-gamma here exists for the scalar-level factorial functions and as an
//! independent cross-check oracle for the recurrence.

use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

// --- gamma (f64) -----------------------------------------------------------

/// ln sqrt(2 pi)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k-1)) for the Stirling series, k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Stirling threshold: truncation error below 1e-17 from here up.
const STIRLING_MIN: f64 = 12.0;

fn is_nonpositive_integer_f64(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// ln Γ(x) for x > 0. Stirling series with Bernoulli correction, shifted
/// up by the recurrence for small arguments.
pub fn ln_gamma(x: f64) -> Option<f64> {
    if x <= 0.0 || !x.is_finite() {
        return None;
    }
    let mut shift = 0.0f64;
    let mut y = x;
    while y < STIRLING_MIN {
        shift += y.ln();
        y += 1.0;
    }
    let mut series = 0.0;
    let y2 = y * y;
    let mut pw = y;
    for c in STIRLING {
        series += c / pw;
        pw *= y2;
    }
    Some((y - 0.5) * y.ln() - y + LN_SQRT_2PI + series - shift)
}

/// (ln |Γ(x)|, sign of Γ(x)); `None` at the poles x = 0, -1, -2, ...
fn ln_gamma_signed(x: f64) -> Option<(f64, f64)> {
    if x > 0.0 {
        return ln_gamma(x).map(|l| (l, 1.0));
    }
    if is_nonpositive_integer_f64(x) {
        return None;
    }
    // Reflection: Γ(x) Γ(1-x) = π / sin(πx).
    let s = (std::f64::consts::PI * x).sin();
    let l = std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x)?;
    Some((l, s.signum()))
}

/// Γ(x); rejects the poles.
pub fn gamma(x: f64) -> Result<f64> {
    let (l, sign) = ln_gamma_signed(x)
        .ok_or_else(|| Error::UndefinedForm(format!("gamma pole at {x}")))?;
    Ok(sign * l.exp())
}

// --- factorial functions (f64) ----------------------------------------------

/// Falling factorial `t^(a) = Γ(t+1)/Γ(t+1-a)`.
///
/// For nonnegative integer `a` this is the plain product `t (t-1) ... (t-a+1)`
/// and is total. Otherwise the gamma-ratio form applies, with the convention
/// that division at a pole yields zero; a pole in the numerator (with or
/// without one below) has no defined value and is an error.
pub fn falling_factorial(t: f64, alpha: f64) -> Result<f64> {
    if alpha >= 0.0 && alpha.fract() == 0.0 && alpha <= 1e6 {
        let mut p = 1.0;
        let mut j = 0.0;
        while j < alpha {
            p *= t - j;
            j += 1.0;
        }
        return Ok(p);
    }
    let num = t + 1.0;
    let den = t + 1.0 - alpha;
    let num_pole = is_nonpositive_integer_f64(num);
    let den_pole = is_nonpositive_integer_f64(den);
    match (num_pole, den_pole) {
        (false, true) => Ok(0.0),
        (true, true) => Err(Error::UndefinedForm(format!(
            "falling_factorial({t}, {alpha}): pole over pole; use the kernel recurrence"
        ))),
        (true, false) => Err(Error::UndefinedForm(format!(
            "falling_factorial({t}, {alpha}): gamma pole in the numerator"
        ))),
        (false, false) => {
            let (ln, sn) = ln_gamma_signed(num).expect("checked non-pole");
            let (ld, sd) = ln_gamma_signed(den).expect("checked non-pole");
            Ok(sn * sd * (ln - ld).exp())
        }
    }
}

/// Rising factorial `t^{a̅} = Γ(t+a)/Γ(t)`, with `0^{a̅} = 0`.
///
/// For nonnegative integer `a` this is the product `t (t+1) ... (t+a-1)`.
/// Negative integer `t` is outside the definition's domain.
pub fn rising_factorial(t: f64, alpha: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if t < 0.0 && t.fract() == 0.0 {
        return Err(Error::UndefinedForm(format!(
            "rising_factorial({t}, {alpha}): negative integer base"
        )));
    }
    if alpha >= 0.0 && alpha.fract() == 0.0 && alpha <= 1e6 {
        let mut p = 1.0;
        let mut k = 0.0;
        while k < alpha {
            p *= t + k;
            k += 1.0;
        }
        return Ok(p);
    }
    let num = t + alpha;
    if is_nonpositive_integer_f64(num) {
        return Err(Error::UndefinedForm(format!(
            "rising_factorial({t}, {alpha}): gamma pole in the numerator"
        )));
    }
    let (ln, sn) = ln_gamma_signed(num).expect("checked non-pole");
    let (ld, sd) = ln_gamma_signed(t).expect("t is not a nonpositive integer");
    Ok(sn * sd * (ln - ld).exp())
}

// --- the kernel sequence -----------------------------------------------------

/// The weights `c_0..c_M` with `c_m(a) = Γ(m+a)/(Γ(m+1) Γ(a))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSequence<S: Scalar> {
    pub alpha: S,
    pub coeffs: Vec<S>,
}

/// Build `c_0..c_M` by the recurrence `c_0 = 1`, `c_m = c_{m-1} (m+a-1)/m`.
///
/// Exact in the rational backend. Any real order is accepted except the
/// nonpositive integers, where `1/Γ(a)` degenerates.
pub fn kernel_sequence<S: Scalar>(alpha: &S, m_max: usize) -> Result<KernelSequence<S>> {
    if alpha.is_nonpositive_integer() {
        return Err(Error::Domain(format!(
            "kernel order {alpha} is a nonpositive integer"
        )));
    }
    let mut coeffs = Vec::with_capacity(m_max + 1);
    coeffs.push(S::one());
    for m in 1..=m_max {
        let m_s = S::from_int(m as i64);
        let prev = coeffs[m - 1].clone();
        coeffs.push(prev * (m_s.clone() + alpha.clone() - S::one()) / m_s);
    }
    Ok(KernelSequence {
        alpha: alpha.clone(),
        coeffs,
    })
}

/// `c_m(a)` via log-gamma; the independent oracle for the recurrence.
pub fn kernel_coeff_gamma_oracle(alpha: f64, m: usize) -> Option<f64> {
    let l = ln_gamma(m as f64 + alpha)? - ln_gamma(m as f64 + 1.0)? - ln_gamma(alpha)?;
    Some(l.exp())
}

/// The boundary weight `m^{overline(g-1)} / Γ(g)` that appears in every
/// commutation identity, evaluated through the pole-free product form
/// `c_{m-1}(g) = Π_{i=0}^{m-2} (g+i) / (m-1)!` (zero at `m = 0`).
///
/// Unlike [`kernel_sequence`] this is defined for every real `g`, including
/// the nonpositive integers: the product form is the analytic continuation
/// the identities require there.
pub fn boundary_coeff<S: Scalar>(m: usize, g: &S) -> S {
    if m == 0 {
        return S::zero();
    }
    let mut r = S::one();
    for j in 1..m {
        let j_s = S::from_int(j as i64);
        r = r * (g.clone() + j_s.clone() - S::one()) / j_s;
    }
    r
}

// --- fractional order --------------------------------------------------------

/// A fractional order `a > 0` with its derived integer `n`, where
/// `n - 1 < a <= n` (`n = a` for integer `a`, `n = ceil(a)` otherwise).
///
/// The order is carried twice: exactly (for grid bookkeeping) and in the
/// backend scalar (for value arithmetic). Under the exact backend the two
/// coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct FracOrder<S: Scalar> {
    alpha: S,
    exact: BigRational,
    n: u32,
}

impl<S: Scalar> FracOrder<S> {
    pub fn from_exact(exact: BigRational) -> Result<Self> {
        if !exact.is_positive() {
            return Err(Error::Domain(format!(
                "fractional order must be positive, got {exact}"
            )));
        }
        let n_big = if exact.is_integer() {
            exact.to_integer()
        } else {
            exact.floor().to_integer() + 1
        };
        let n = n_big
            .to_u32()
            .ok_or_else(|| Error::Domain(format!("order {exact} too large")))?;
        Ok(FracOrder {
            alpha: S::from_exact(&exact),
            exact,
            n,
        })
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        Self::from_exact(BigRational::new(num.into(), den.into()))
    }

    pub fn alpha(&self) -> &S {
        &self.alpha
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn is_integer(&self) -> bool {
        self.exact.is_integer()
    }

    /// The inner-sum order `n - a`; `None` when `a` is an integer (the
    /// order-zero sum is the identity by convention).
    pub fn complement(&self) -> Result<Option<FracOrder<S>>> {
        if self.is_integer() {
            return Ok(None);
        }
        let c = BigRational::from_integer(self.n.into()) - &self.exact;
        Ok(Some(FracOrder::from_exact(c)?))
    }
}

impl FracOrder<f64> {
    /// Any real order under the float backend. The exact mirror is the
    /// rational value of the double itself.
    pub fn from_f64(alpha: f64) -> Result<Self> {
        let exact = BigRational::from_float(alpha)
            .ok_or_else(|| Error::Parse(format!("order {alpha} is not finite")))?;
        Self::from_exact(exact)
    }
}
