use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Scalars the formal machinery can run on: exact rationals or complex floats.
pub trait FormalScalar:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    fn from_int(i: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
}

impl FormalScalar for BigRational {
    fn from_int(i: i64) -> Self {
        BigRational::from_integer(BigInt::from(i))
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

impl FormalScalar for Complex64 {
    fn from_int(i: i64) -> Self {
        Complex64::new(i as f64, 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Polynomial in `nu` with exact coefficients, ascending degree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NuPolynomial {
    coeffs: Vec<BigRational>,
}

impl NuPolynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        NuPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// `nu (nu - 1) ... (nu - k + 1) / denominator`.
    pub fn falling_factorial(k: usize, denominator: &BigInt) -> Self {
        let mut c = vec![BigRational::one()];
        for i in 0..k {
            // multiply by (nu - i)
            let mut next = vec![BigRational::zero(); c.len() + 1];
            for (d, a) in c.iter().enumerate() {
                next[d + 1] += a;
                next[d] -= a * BigRational::from_integer(BigInt::from(i));
            }
            c = next;
        }
        let den = BigRational::from_integer(denominator.clone());
        NuPolynomial::new(c.into_iter().map(|a| a / &den).collect())
    }

    pub fn eval<S: FormalScalar>(&self, nu: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * nu.clone() + S::from_rational(c))
    }
}

impl fmt::Display for NuPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            let unit = mag.is_one();
            match d {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !unit {
                        write!(f, "{mag}*")?;
                    }
                    if d == 1 {
                        f.write_str("nu")?;
                    } else {
                        write!(f, "nu^{d}")?;
                    }
                }
            }
            first = false;
        }
        Ok(())
    }
}

/// One monomial of `g_j`: `nu(nu-1)...(nu-K+1) / prod k_l! * prod t_l^{k_l}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GTerm {
    /// `(k_1, ..., k_j)` with `sum_l l k_l = j`.
    pub partition: Vec<u32>,
    /// `K = sum_l k_l`.
    pub part_count: usize,
    /// `prod_l k_l!`.
    pub denominator: BigInt,
    pub coefficient: NuPolynomial,
}

impl GTerm {
    fn new(partition: Vec<u32>) -> Self {
        let part_count = partition.iter().map(|&k| k as usize).sum();
        let denominator = partition
            .iter()
            .map(|&k| (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i)))
            .fold(BigInt::one(), |acc, f| acc * f);
        let coefficient = NuPolynomial::falling_factorial(part_count, &denominator);
        GTerm {
            partition,
            part_count,
            denominator,
            coefficient,
        }
    }

    /// Monomial value at `(nu, t)`; `t[l - 1]` is `t_l`.
    pub fn eval<S: FormalScalar>(&self, nu: &S, t: &[S]) -> S {
        let mut v = S::one();
        for i in 0..self.part_count {
            v = v * (nu.clone() - S::from_int(i as i64));
        }
        v = v / S::from_rational(&BigRational::from_integer(self.denominator.clone()));
        for (l, &k) in self.partition.iter().enumerate() {
            for _ in 0..k {
                v = v * t[l].clone();
            }
        }
        v
    }

    /// `nu(nu-1)/2*t1^2` style rendering.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if self.part_count == 0 {
            s.push('1');
        }
        for i in 0..self.part_count {
            if i == 0 {
                s.push_str("nu");
            } else {
                s.push_str(&format!("(nu-{i})"));
            }
        }
        if !self.denominator.is_one() {
            s.push_str(&format!("/{}", self.denominator));
        }
        for (l, &k) in self.partition.iter().enumerate() {
            match k {
                0 => {}
                1 => s.push_str(&format!("*t{}", l + 1)),
                _ => s.push_str(&format!("*t{}^{k}", l + 1)),
            }
        }
        s
    }
}

/// The partition polynomials `g_0, ..., g_J` of `(1 + sum_l t_l x^l)^nu`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GTable {
    rows: Vec<Vec<GTerm>>,
}

/// Partitions of `j` as multiplicity vectors `(k_1..k_j)`, in descending
/// lexicographic order (so `t_1^j` first and `t_j` last).
pub fn partitions(j: usize) -> Vec<Vec<u32>> {
    fn fill(rest: usize, l: usize, k: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if l > k.len() {
            if rest == 0 {
                out.push(k.clone());
            }
            return;
        }
        for m in (0..=rest / l).rev() {
            k[l - 1] = m as u32;
            fill(rest - m * l, l + 1, k, out);
        }
        k[l - 1] = 0;
    }
    let mut out = Vec::new();
    fill(j, 1, &mut vec![0; j], &mut out);
    out
}

impl GTable {
    pub fn new(max_j: usize) -> Self {
        let rows = (0..=max_j)
            .map(|j| partitions(j).into_iter().map(GTerm::new).collect())
            .collect();
        GTable { rows }
    }

    /// Shared table for small orders.
    pub fn shared(max_j: usize) -> std::borrow::Cow<'static, GTable> {
        static TABLE: OnceLock<GTable> = OnceLock::new();
        const CACHED: usize = 16;
        if max_j <= CACHED {
            std::borrow::Cow::Borrowed(TABLE.get_or_init(|| GTable::new(CACHED)))
        } else {
            std::borrow::Cow::Owned(GTable::new(max_j))
        }
    }

    pub fn max_j(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, j: usize) -> Result<&[GTerm]> {
        self.rows
            .get(j)
            .map(|r| r.as_slice())
            .ok_or(Error::OrderExceeded {
                requested: j,
                available: self.max_j(),
            })
    }

    /// `g_j` as a polynomial in `t` rendered like `nu(nu-1)/2*t1^2 + nu*t2`.
    pub fn render(&self, j: usize) -> Result<String> {
        Ok(self.row(j)?.iter().map(GTerm::render).collect::<Vec<_>>().join(" + "))
    }

    /// `g_j(nu, t)`; `t` needs at least `j` entries.
    pub fn eval<S: FormalScalar>(&self, j: usize, nu: &S, t: &[S]) -> Result<S> {
        let row = self.row(j)?;
        if t.len() < j {
            return Err(Error::DimensionMismatch(format!("g_{j} needs {j} arguments, got {}", t.len())));
        }
        Ok(row.iter().fold(S::zero(), |acc, term| acc + term.eval(nu, t)))
    }

    /// `G_{j,nu}(t) = (g_1(nu, t), ..., g_j(nu, t))` for `j = t.len()`.
    pub fn g_map<S: FormalScalar>(&self, nu: &S, t: &[S]) -> Result<Vec<S>> {
        (1..=t.len()).map(|k| self.eval(k, nu, t)).collect()
    }
}

/// Free-function form of [`GTable::new`].
pub fn gj_table(max_j: usize) -> GTable {
    GTable::new(max_j)
}

/// Free-function form of [`GTable::eval`].
pub fn eval_g<S: FormalScalar>(table: &GTable, j: usize, nu: &S, t: &[S]) -> Result<S> {
    table.eval(j, nu, t)
}

/// Coefficients of `(1 + sum_l t_l x^l)^nu` up to `x^{t.len()}` by the
/// recurrence `j b_j = sum_{k=1}^{j} ((nu + 1) k - j) t_k b_{j-k}`.
/// Independent of the partition sum; used to cross-check it.
pub fn series_power<S: FormalScalar>(nu: &S, t: &[S]) -> Vec<S> {
    let mut b = vec![S::one()];
    for j in 1..=t.len() {
        let mut acc = S::zero();
        for k in 1..=j {
            let w = (nu.clone() + S::one()) * S::from_int(k as i64) - S::from_int(j as i64);
            acc = acc + w * t[k - 1].clone() * b[j - k].clone();
        }
        b.push(acc / S::from_int(j as i64));
    }
    b
}
