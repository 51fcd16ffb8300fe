use std::fmt;

use num::complex::Complex64;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::Serialize;

use super::gtable::{rational_to_f64, FormalScalar, GTable};
use crate::error::{Error, Result};

/// `f(R) ~ sum_j coeffs[j] R^{gamma - j}` as `R -> ∞`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticExpansion {
    #[serde(serialize_with = "crate::complex_serde::one")]
    pub gamma: Complex64,
    #[serde(serialize_with = "crate::complex_serde::many")]
    pub coeffs: Vec<Complex64>,
    /// Set when a principal branch was chosen for a non-integer power of a
    /// leading coefficient off the positive axis.
    pub principal_branch: bool,
}

impl AsymptoticExpansion {
    pub fn new(gamma: f64, coeffs: Vec<Complex64>) -> Self {
        AsymptoticExpansion {
            gamma: Complex64::new(gamma, 0.0),
            coeffs,
            principal_branch: false,
        }
    }

    pub fn real(gamma: f64, coeffs: &[f64]) -> Self {
        AsymptoticExpansion::new(gamma, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// Highest index `N` carried.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// Partial sum at `R`.
    pub fn eval(&self, r: f64) -> Complex64 {
        let lead = (self.gamma * r.ln()).exp();
        let x = 1.0 / r;
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c);
        lead * poly
    }

    /// The expansion of `f^p` (for `f` with this expansion).
    pub fn raise(&self, p: Complex64) -> Result<AsymptoticExpansion> {
        let a0 = *self.coeffs.first().ok_or(Error::ZeroLeadingCoefficient)?;
        if a0 == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let integer = p.im == 0.0 && p.re == p.re.round();
        let on_positive_axis = a0.im == 0.0 && a0.re > 0.0;
        let lead = if integer {
            a0.powi(p.re as i32)
        } else {
            (p * a0.ln()).exp()
        };
        let ratios: Vec<Complex64> = self.coeffs[1..].iter().map(|c| c / a0).collect();
        let table = GTable::shared(ratios.len());
        let g = table.g_map(&p, &ratios)?;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(lead);
        coeffs.extend(g.into_iter().map(|v| v * lead));
        Ok(AsymptoticExpansion {
            gamma: self.gamma * p,
            coeffs,
            principal_branch: self.principal_branch || (!integer && !on_positive_axis),
        })
    }
}

/// `base^exponent` kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPower {
    pub base: BigRational,
    pub exponent: BigRational,
}

impl RationalPower {
    /// Exact value when the exponent is an integer.
    pub fn exact(&self) -> Option<BigRational> {
        if !self.exponent.is_integer() {
            return None;
        }
        let k = self.exponent.to_integer();
        let k: i32 = k.try_into().ok()?;
        Some(if k >= 0 {
            num::pow::Pow::pow(&self.base, k as u32)
        } else {
            num::pow::Pow::pow(&self.base.recip(), (-k) as u32)
        })
    }

    /// Floating value; negative bases need an integer exponent.
    pub fn to_complex(&self) -> Result<Complex64> {
        if let Some(v) = self.exact() {
            return Ok(Complex64::new(rational_to_f64(&v), 0.0));
        }
        if self.base.is_negative() {
            return Err(Error::BranchAmbiguity(format!(
                "({})^({}) has no preferred real value",
                self.base, self.exponent
            )));
        }
        let b = rational_to_f64(&self.base);
        Ok(Complex64::new(b.powf(rational_to_f64(&self.exponent)), 0.0))
    }
}

impl fmt::Display for RationalPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "({})^({})", self.base, self.exponent),
        }
    }
}

/// Expansion with exact data: coefficients `lead * ratios[j]`, `ratios[0] = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactExpansion {
    pub gamma: BigRational,
    pub lead: RationalPower,
    pub ratios: Vec<BigRational>,
}

impl ExactExpansion {
    pub fn from_coeffs(gamma: BigRational, coeffs: &[BigRational]) -> Result<Self> {
        let c0 = coeffs.first().ok_or(Error::ZeroLeadingCoefficient)?;
        if c0.is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        Ok(ExactExpansion {
            gamma,
            lead: RationalPower {
                base: c0.clone(),
                exponent: BigRational::one(),
            },
            ratios: coeffs.iter().map(|c| c / c0).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.ratios.len() - 1
    }

    /// Exact coefficients, available when the leading power is rational.
    pub fn coeffs(&self) -> Option<Vec<BigRational>> {
        let lead = self.lead.exact()?;
        Some(self.ratios.iter().map(|r| r * &lead).collect())
    }

    pub fn to_float(&self) -> Result<AsymptoticExpansion> {
        let lead = self.lead.to_complex()?;
        Ok(AsymptoticExpansion {
            gamma: Complex64::new(rational_to_f64(&self.gamma), 0.0),
            coeffs: self.ratios.iter().map(|r| lead * rational_to_f64(r)).collect(),
            principal_branch: false,
        })
    }

    /// The expansion of `f^p`: exponent `gamma p`, lead `a_0^p`, ratios
    /// `g_j(p, a_1/a_0, ..., a_j/a_0)`.
    pub fn raise(&self, p: &BigRational) -> Result<ExactExpansion> {
        let t = &self.ratios[1..];
        let table = GTable::shared(t.len());
        let mut ratios = vec![BigRational::one()];
        ratios.extend(table.g_map(p, t)?);
        Ok(ExactExpansion {
            gamma: &self.gamma * p,
            lead: RationalPower {
                base: self.lead.base.clone(),
                exponent: &self.lead.exponent * p,
            },
            ratios,
        })
    }
}

fn nonzero_rational(x: &BigRational, what: &str) -> Result<()> {
    if x.is_zero() {
        return Err(Error::InvalidArgument(format!("{what} must be non-zero")));
    }
    Ok(())
}

/// Powers of an expansion, generic over exact and floating data.
pub trait Expansion: Sized {
    type Scalar: FormalScalar;
    fn raise_to(&self, p: &Self::Scalar) -> Result<Self>;
}

impl Expansion for AsymptoticExpansion {
    type Scalar = Complex64;
    fn raise_to(&self, p: &Complex64) -> Result<Self> {
        self.raise(*p)
    }
}

impl Expansion for ExactExpansion {
    type Scalar = BigRational;
    fn raise_to(&self, p: &BigRational) -> Result<Self> {
        self.raise(p)
    }
}

/// Expansion of `M(R, nu) = m(R)^nu` from the expansion of `m`.
pub fn power_expansion<E: Expansion>(m: &E, nu: &E::Scalar) -> Result<E> {
    m.raise_to(nu)
}

/// Given the expansion at parameter `from` (non-zero), the expansion at
/// `from + delta`. This is the power `(from + delta) / from`.
pub fn shift_nu<E: Expansion>(alpha: &E, from: &E::Scalar, delta: &E::Scalar) -> Result<E> {
    if from.is_zero() {
        return Err(Error::InvalidArgument("the starting parameter must be non-zero".into()));
    }
    let p = (from.clone() + delta.clone()) / from.clone();
    alpha.raise_to(&p)
}

/// Expansion of `M(R, nu)` from the magnitude expansion `M(R) = m(R)^{-1}`:
/// the power `-nu`.
pub fn magnitude_to_alpha<E: Expansion>(c: &E, nu: &E::Scalar) -> Result<E> {
    c.raise_to(&(-nu.clone()))
}

/// Magnitude expansion from the expansion of `M(R, nu)`, `nu` non-zero:
/// the power `-1/nu`.
pub fn alpha_to_magnitude<E: Expansion>(alpha: &E, nu: &E::Scalar) -> Result<E> {
    if nu.is_zero() {
        return Err(Error::InvalidArgument("nu must be non-zero".into()));
    }
    alpha.raise_to(&(-(E::Scalar::one() / nu.clone())))
}

/// Exact re-expression of coefficients given at parameter `from_nu` at `to_nu`
/// (both non-zero): the power `to_nu / from_nu`.
pub fn convert_exact(e: &ExactExpansion, from_nu: &BigRational, to_nu: &BigRational) -> Result<ExactExpansion> {
    nonzero_rational(from_nu, "from-nu")?;
    nonzero_rational(to_nu, "to-nu")?;
    e.raise(&(to_nu / from_nu))
}

/// Parses `3`, `-1/2` or a finite decimal like `0.25` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("`{s}` is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) || int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let digits = if digits == "-" || digits == "+" { return Err(bad()) } else { digits };
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * num::pow::Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(num, num::pow::Pow::pow(&ten, (-scale) as u32))
    })
}

/// `n!` as a rational.
pub fn factorial(n: u64) -> BigRational {
    BigRational::from_integer((1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k)))
}

/// Integer power of a rational.
pub fn rational_powi(base: &BigRational, k: i64) -> BigRational {
    let p = num::pow::Pow::pow(base, k.unsigned_abs() as u32);
    if k >= 0 {
        p
    } else {
        p.recip()
    }
}

/// `x.is_integer()` for rationals.
pub fn is_integer(x: &BigRational) -> bool {
    x.denom().is_one() || x.numer().is_multiple_of(x.denom())
}
