use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{integrate_offsets, QuadOptions, QuadratureResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SphereMetric {
    Chordal,
    Geodesic,
}

impl fmt::Display for SphereMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SphereMetric::Chordal => "chordal",
            SphereMetric::Geodesic => "geodesic",
        })
    }
}

/// `rho(t, T - t)` for custom densities.
pub type DensityFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DensityShape {
    /// `sin^{n-1}(theta)` on `[0, pi]`.
    SphereGeodesic { n: u32 },
    /// `t^{n-1} (1 - t^2/4)^{(n-2)/2}` on `[0, 2]`.
    SphereChordal { n: u32 },
    Custom(DensityFn),
}

impl fmt::Debug for DensityShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityShape::SphereGeodesic { n } => write!(f, "SphereGeodesic {{ n: {n} }}"),
            DensityShape::SphereChordal { n } => write!(f, "SphereChordal {{ n: {n} }}"),
            DensityShape::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Absolutely continuous part of a radial profile: `scale * shape(t)` on
/// `[0, support]`, behaving like `t^left_exponent` at 0 and like
/// `(support - t)^right_exponent` at the far end.
#[derive(Debug, Clone)]
pub struct Density {
    pub shape: DensityShape,
    pub scale: f64,
    pub support: f64,
    pub left_exponent: f64,
    pub right_exponent: f64,
}

impl Density {
    pub fn custom(f: DensityFn, support: f64, left_exponent: f64, right_exponent: f64) -> Result<Self> {
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::InvalidArgument(format!("support {support} must be positive and finite")));
        }
        if !(left_exponent > -1.0 && right_exponent > -1.0) {
            return Err(Error::InvalidArgument("endpoint exponents must exceed -1".into()));
        }
        Ok(Density {
            shape: DensityShape::Custom(f),
            scale: 1.0,
            support,
            left_exponent,
            right_exponent,
        })
    }

    /// Density at `t`, given also the distance `to_end = support - t`.
    pub fn value(&self, t: f64, to_end: f64) -> f64 {
        let raw = match &self.shape {
            DensityShape::SphereGeodesic { n } => {
                let s = if to_end < t { to_end.sin() } else { t.sin() };
                s.powi(*n as i32 - 1)
            }
            DensityShape::SphereChordal { n } => {
                let q = (2.0 + t) * to_end / 4.0;
                t.powi(*n as i32 - 1) * q.powf((*n as f64 - 2.0) / 2.0)
            }
            DensityShape::Custom(f) => f(t, to_end),
        };
        self.scale * raw
    }

    /// `∫ g(t) rho(t) dt`, where `g` behaves like `t^extra_left` at 0.
    pub fn integrate<G>(&self, g: G, extra_left: f64, opts: &QuadOptions) -> Result<QuadratureResult>
    where
        G: Fn(f64) -> Complex64,
    {
        self.integrate_split(g, extra_left, opts, &[])
    }

    /// As [`Density::integrate`], with interior break points. Pieces after
    /// the first are integrated to an absolute tolerance set by the first
    /// piece, so break points should follow the decay of `g`.
    pub fn integrate_split<G>(&self, g: G, extra_left: f64, opts: &QuadOptions, breaks: &[f64]) -> Result<QuadratureResult>
    where
        G: Fn(f64) -> Complex64,
    {
        let mut points = vec![0.0];
        points.extend(breaks.iter().copied().filter(|b| *b > 0.0 && *b < self.support));
        points.push(self.support);
        let alpha = self.left_exponent + extra_left;
        let f = |t: f64, to_end: f64| {
            // reached only through underflow of the endpoint substitution
            if t <= 0.0 && alpha != 0.0 {
                return Complex64::zero();
            }
            let v = g(t) * self.value(t, to_end);
            // a singular factor of g may overflow on its own next to 0
            if !(v.re.is_finite() && v.im.is_finite()) && t < 1e-100 {
                return Complex64::zero();
            }
            v
        };
        let last = points.len() - 2;
        let mut total = QuadratureResult {
            value: Complex64::zero(),
            error_estimate: 0.0,
            evaluations: 0,
        };
        let mut piece_opts = *opts;
        for (i, w) in points.windows(2).enumerate() {
            let (lo, hi) = (w[0], w[1]);
            let o = QuadOptions {
                left_exponent: (i == 0).then_some(alpha),
                right_exponent: (i == last).then_some(self.right_exponent),
                ..piece_opts
            };
            let support = self.support;
            let q = integrate_offsets(|t, _, to_hi| f(t, (support - hi) + to_hi), lo, hi, &o)?;
            if i == 0 {
                piece_opts.abs_tol = opts.abs_tol.max(0.1 * opts.rel_tol * q.value.norm());
            }
            total.value += q.value;
            total.error_estimate += q.error_estimate;
            total.evaluations += q.evaluations;
        }
        Ok(total)
    }

    /// Coefficients `c_j` with `rho(t) = sum_j c_j t^{left_exponent + j}` near 0,
    /// when known in closed form.
    pub fn series_at_zero(&self, order: usize) -> Option<Vec<f64>> {
        let mut c = match &self.shape {
            DensityShape::SphereChordal { n } => {
                // (1 - t^2/4)^{(n-2)/2} = sum_j binom((n-2)/2, j) (-1/4)^j t^{2j}
                let a = (*n as f64 - 2.0) / 2.0;
                let mut c = vec![0.0; order + 1];
                let mut term = 1.0;
                for j in 0..=order / 2 {
                    c[2 * j] = term;
                    term *= (a - j as f64) / (j as f64 + 1.0) * (-0.25);
                }
                c
            }
            DensityShape::SphereGeodesic { n } => {
                // (sin t / t)^{n-1}
                let mut base = vec![0.0; order + 1];
                let mut term = 1.0;
                for k in 0..=order / 2 {
                    base[2 * k] = term;
                    term *= -1.0 / (((2 * k + 2) * (2 * k + 3)) as f64);
                }
                let mut c = vec![0.0; order + 1];
                c[0] = 1.0;
                for _ in 1..*n {
                    c = (0..=order)
                        .map(|i| (0..=i).map(|k| c[k] * base[i - k]).sum())
                        .collect();
                }
                c
            }
            DensityShape::Custom(_) => return None,
        };
        c.iter_mut().for_each(|v| *v *= self.scale);
        Some(c)
    }
}

/// A point mass of the radial law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Infinite continuation of the atom list: atom `i >= 0` of the tail has
/// mass `first.mass * mass_ratio^i` at `first.location * location_ratio^i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricTail {
    pub first: Atom,
    pub mass_ratio: f64,
    pub location_ratio: f64,
}

impl GeometricTail {
    pub fn total_mass(&self) -> f64 {
        self.first.mass / (1.0 - self.mass_ratio)
    }

    pub fn atom(&self, i: usize) -> Atom {
        Atom {
            location: self.first.location * self.location_ratio.powi(i as i32),
            mass: self.first.mass * self.mass_ratio.powi(i as i32),
        }
    }

    /// Bound on `sum_{i >= skip} mass_i * C * location_i^beta`, if the series converges.
    pub fn power_bound(&self, skip: usize, constant: f64, beta: f64) -> Option<f64> {
        let q = self.mass_ratio * self.location_ratio.powf(beta);
        if !(q < 1.0) {
            return None;
        }
        let a = self.atom(skip);
        Some(constant * a.mass * a.location.powf(beta) / (1.0 - q))
    }
}

/// Which family a profile was built from; closed forms dispatch on this.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    Sphere { n: u32, metric: SphereMetric, normalized: bool },
    Padic { p: u64 },
    TwoPoint,
    Custom,
}

/// Law of the distance to a base point in a homogeneous space.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub density: Option<Density>,
    pub atoms: Vec<Atom>,
    pub tail: Option<GeometricTail>,
    pub total_mass: f64,
    pub dim: Option<u32>,
    pub vol: Option<f64>,
}

/// `|g(t)| <= constant * t^power` for the tail atoms of a sum.
#[derive(Debug, Clone, Copy)]
pub struct TailBound {
    pub constant: f64,
    pub power: f64,
}

/// Cap on the number of tail atoms summed explicitly.
const MAX_TAIL_ATOMS: usize = 20_000;

/// `∫_0^pi sin^{n-1} = sqrt(pi) Gamma(n/2) / Gamma((n+1)/2)`, by the
/// recursion `Z_{n+2} = Z_n n / (n + 1)` from `Z_1 = pi`, `Z_2 = 2`.
pub fn sphere_density_normalizer(n: u32) -> f64 {
    let mut z = if n % 2 == 1 { PI } else { 2.0 };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        z *= k as f64 / (k as f64 + 1.0);
        k += 2;
    }
    z
}

/// Surface area `2 pi^{(n+1)/2} / Gamma((n+1)/2)` of the unit sphere `S^n`.
pub fn sphere_area(n: u32) -> f64 {
    let mut a = if n % 2 == 1 { 2.0 * PI } else { 4.0 * PI };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        a *= 2.0 * PI / (k as f64 + 1.0);
        k += 2;
    }
    a
}

pub fn sphere_profile(n: u32, metric: SphereMetric, normalized: bool) -> Result<RadialProfile> {
    if n < 1 {
        return Err(Error::InvalidArgument("sphere dimension must be at least 1".into()));
    }
    let area = sphere_area(n);
    let total_mass = if normalized { 1.0 } else { area };
    let scale = total_mass / sphere_density_normalizer(n);
    let left = n as f64 - 1.0;
    let (shape, support, right) = match metric {
        SphereMetric::Geodesic => (DensityShape::SphereGeodesic { n }, PI, n as f64 - 1.0),
        SphereMetric::Chordal => (DensityShape::SphereChordal { n }, 2.0, (n as f64 - 2.0) / 2.0),
    };
    Ok(RadialProfile {
        kind: ProfileKind::Sphere { n, metric, normalized },
        density: Some(Density {
            shape,
            scale,
            support,
            left_exponent: left,
            right_exponent: right,
        }),
        atoms: Vec::new(),
        tail: None,
        total_mass,
        dim: Some(n),
        vol: Some(area),
    })
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Exact `(location, mass) = (p^{-k}, p^{-k} - p^{-k-1})`.
pub fn padic_atom_exact(p: u64, k: u32) -> (BigRational, BigRational) {
    let pk = BigInt::from(p).pow(k);
    let loc = BigRational::new(BigInt::one(), pk.clone());
    let mass = BigRational::new(BigInt::from(p - 1), pk * BigInt::from(p));
    (loc, mass)
}

/// Haar measure of the p-adic integers, pushed forward under `|x|_p`.
///
/// Atoms `k = 0..=kmax` are stored explicitly; `kmax` grows until the
/// remaining mass `p^{-kmax-1}` is at most `tail_tol`. The rest is kept as a
/// geometric tail.
pub fn padic_profile(p: u64, kmax: u32, tail_tol: f64) -> Result<RadialProfile> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pf = p as f64;
    let mut kmax = kmax;
    while pf.powi(-(kmax as i32) - 1) > tail_tol && kmax < 2000 {
        kmax += 1;
    }
    let atoms = (0..=kmax)
        .map(|k| {
            let loc = pf.powi(-(k as i32));
            Atom {
                location: loc,
                mass: loc * (pf - 1.0) / pf,
            }
        })
        .collect();
    let next = pf.powi(-(kmax as i32) - 1);
    Ok(RadialProfile {
        kind: ProfileKind::Padic { p },
        density: None,
        atoms,
        tail: Some(GeometricTail {
            first: Atom {
                location: next,
                mass: next * (pf - 1.0) / pf,
            },
            mass_ratio: 1.0 / pf,
            location_ratio: 1.0 / pf,
        }),
        total_mass: 1.0,
        dim: None,
        vol: None,
    })
}

/// Single unit atom at distance 1.
pub fn two_point_homogeneous_profile() -> RadialProfile {
    RadialProfile {
        kind: ProfileKind::TwoPoint,
        density: None,
        atoms: vec![Atom {
            location: 1.0,
            mass: 1.0,
        }],
        tail: None,
        total_mass: 1.0,
        dim: None,
        vol: None,
    }
}

impl RadialProfile {
    /// A profile from explicit parts; the total mass is computed.
    pub fn custom(density: Option<Density>, atoms: Vec<Atom>, opts: &QuadOptions) -> Result<Self> {
        if let Some(a) = atoms.iter().find(|a| !(a.location > 0.0 && a.mass > 0.0)) {
            return Err(Error::InvalidArgument(format!("atom {a:?} needs positive location and mass")));
        }
        let mut profile = RadialProfile {
            kind: ProfileKind::Custom,
            density,
            atoms,
            tail: None,
            total_mass: 0.0,
            dim: None,
            vol: None,
        };
        profile.total_mass = profile.mass(opts)?;
        Ok(profile)
    }

    /// `∫ rho + sum of atom masses`, recomputed from the parts.
    pub fn mass(&self, opts: &QuadOptions) -> Result<f64> {
        let dens = match &self.density {
            Some(d) => d.integrate(|_| Complex64::new(1.0, 0.0), 0.0, opts)?.value.re,
            None => 0.0,
        };
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        Ok(dens + atoms + self.tail.map(|t| t.total_mass()).unwrap_or(0.0))
    }

    pub fn is_normalized(&self) -> bool {
        (self.total_mass - 1.0).abs() <= 1e-10
    }

    /// Largest distance carrying mass.
    pub fn diameter(&self) -> f64 {
        let atoms = self.atoms.iter().map(|a| a.location).fold(0.0, f64::max);
        let tail = self.tail.map(|t| t.first.location).unwrap_or(0.0);
        let dens = self.density.as_ref().map(|d| d.support).unwrap_or(0.0);
        atoms.max(tail).max(dens)
    }

    /// Smallest distance carrying mass, zero when mass accumulates at 0.
    pub fn min_distance(&self) -> f64 {
        if self.density.is_some() || self.tail.is_some() {
            return 0.0;
        }
        self.atoms.iter().map(|a| a.location).fold(f64::INFINITY, f64::min)
    }

    /// Exponent `delta` with `∫ e^{-Rt} dmu = O(R^{-delta})` as `R -> ∞`;
    /// infinite for atoms bounded away from 0.
    pub fn decay_exponent(&self) -> f64 {
        let mut delta = f64::INFINITY;
        if let Some(d) = &self.density {
            delta = delta.min(d.left_exponent + 1.0);
        }
        if let Some(t) = &self.tail {
            // mass within distance r scales like r^{ln q / ln r}
            delta = delta.min(t.mass_ratio.ln() / t.location_ratio.ln());
        }
        delta
    }

    /// `sum_atoms mass * g(location)` with a rigorous bound for the tail.
    ///
    /// Stored atoms are summed exactly; tail atoms are added until the
    /// remaining bound from `bound` drops below `tol`. Returns the sum and
    /// the bound on what was left out.
    pub fn atom_sum<G>(&self, g: G, bound: TailBound, tol: f64) -> Result<(Complex64, f64)>
    where
        G: Fn(f64) -> Complex64,
    {
        let mut sum: Complex64 = self.atoms.iter().map(|a| g(a.location) * a.mass).sum();
        let Some(tail) = &self.tail else {
            return Ok((sum, 0.0));
        };
        for i in 0..MAX_TAIL_ATOMS {
            let rest = tail.power_bound(i, bound.constant, bound.power).ok_or_else(|| {
                Error::OutsideStrip(format!(
                    "atom series with terms of order t^{} does not converge",
                    bound.power
                ))
            })?;
            if rest <= tol || rest <= f64::EPSILON * 0.25 * sum.norm() || rest == 0.0 {
                return Ok((sum, rest));
            }
            let a = tail.atom(i);
            sum += g(a.location) * a.mass;
        }
        let rest = tail
            .power_bound(MAX_TAIL_ATOMS, bound.constant, bound.power)
            .unwrap_or(f64::INFINITY);
        Err(Error::ToleranceNotMet {
            best: QuadratureResult {
                value: sum,
                error_estimate: rest,
                evaluations: self.atoms.len() + MAX_TAIL_ATOMS,
            },
        })
    }

    /// `∫ g(t) dmu(t)` over density and atoms; `g` behaves like
    /// `t^extra_left` at 0 and is bounded by `bound` on tail atoms.
    pub fn integrate<G>(&self, g: G, extra_left: f64, bound: TailBound, opts: &QuadOptions) -> Result<QuadratureResult>
    where
        G: Fn(f64) -> Complex64,
    {
        self.integrate_split(g, extra_left, bound, opts, &[])
    }

    /// As [`RadialProfile::integrate`], with break points for the density part.
    pub fn integrate_split<G>(
        &self,
        g: G,
        extra_left: f64,
        bound: TailBound,
        opts: &QuadOptions,
        breaks: &[f64],
    ) -> Result<QuadratureResult>
    where
        G: Fn(f64) -> Complex64,
    {
        let (atoms, atom_err) = self.atom_sum(&g, bound, 0.1 * opts.abs_tol)?;
        let mut out = QuadratureResult {
            value: atoms,
            error_estimate: atom_err,
            evaluations: self.atoms.len(),
        };
        if let Some(d) = &self.density {
            let q = d.integrate_split(&g, extra_left, opts, breaks)?;
            out.value += q.value;
            out.error_estimate += q.error_estimate;
            out.evaluations += q.evaluations;
        }
        Ok(out)
    }

    /// `∫ t^j dmu(t)`.
    pub fn moment(&self, j: u32, opts: &QuadOptions) -> Result<QuadratureResult> {
        let jf = j as f64;
        self.integrate(
            |t| Complex64::new(t.powi(j as i32), 0.0),
            jf,
            TailBound {
                constant: 1.0,
                power: jf,
            },
            opts,
        )
    }
}
