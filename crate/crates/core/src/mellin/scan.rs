use std::f64::consts::PI;

use num::complex::Complex64;
use serde::Serialize;

use super::continuation::MeromorphicEvaluator;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::formal::{PoleEntry, PoleReport};
use crate::scalar::{contour_residue_with, DEFAULT_NODES};

/// Axis-parallel rectangle `re.0 <= Re z <= re.1`, `im.0 <= Im z <= im.1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl ScanRect {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Result<Self> {
        if !(re.0 < re.1 && im.0 < im.1) || ![re.0, re.1, im.0, im.1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!("degenerate scan rectangle {re:?} x {im:?}")));
        }
        Ok(ScanRect { re, im })
    }

    fn boundary_distance(&self, z: Complex64) -> f64 {
        (z.re - self.re.0)
            .min(self.re.1 - z.re)
            .min(z.im - self.im.0)
            .min(self.im.1 - z.im)
    }
}

/// Largest argument step accepted along an edge before it is split.
const MAX_ARG_STEP: f64 = PI / 4.0;
const MAX_EDGE_SPLITS: u32 = 14;
const RETILE_ATTEMPTS: usize = 4;
/// Offsets of the interior grid lines per attempt; irrational-looking values
/// keep retried grids off symmetric pole positions.
const RETILE_PHASES: [f64; RETILE_ATTEMPTS] = [0.0, 0.382, 0.236, 0.618];
const DEDUP_TOL: f64 = 1e-8;
const WINDING_SLACK: f64 = 0.05;

fn eval_nonzero(ev: &MeromorphicEvaluator, z: Complex64) -> Result<Complex64> {
    let v = ev.eval(z)?;
    if !(v.re.is_finite() && v.im.is_finite()) || v.norm() == 0.0 {
        return Err(Error::EvaluationFailure(format!("argument undefined at {z}")));
    }
    Ok(v)
}

/// Change of `arg f` from `a` to `b`, splitting the segment while steps are large.
fn edge_arg(
    ev: &MeromorphicEvaluator,
    (a, fa): (Complex64, Complex64),
    (b, fb): (Complex64, Complex64),
    splits: u32,
) -> Result<f64> {
    let d = (fb / fa).arg();
    if d.abs() <= MAX_ARG_STEP {
        return Ok(d);
    }
    if splits == 0 {
        return Err(Error::EvaluationFailure(format!("argument varies too fast between {a} and {b}")));
    }
    let mid = (a + b) * 0.5;
    let fm = eval_nonzero(ev, mid)?;
    Ok(edge_arg(ev, (a, fa), (mid, fm), splits - 1)? + edge_arg(ev, (mid, fm), (b, fb), splits - 1)?)
}

/// Winding number of `f` around the rectangle with corners `lo`, `hi`.
fn winding(ev: &MeromorphicEvaluator, lo: Complex64, hi: Complex64) -> Result<f64> {
    let corners = [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)];
    let values = corners.map(|z| eval_nonzero(ev, z));
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let fa = values[k].clone()?;
        let fb = values[(k + 1) % 4].clone()?;
        total += edge_arg(ev, (a, fa), (b, fb), MAX_EDGE_SPLITS)?;
    }
    Ok(total / (2.0 * PI))
}

fn rounded_winding(w: f64) -> Result<i64> {
    let k = w.round();
    if (w - k).abs() > WINDING_SLACK {
        return Err(Error::EvaluationFailure(format!("non-integer winding {w}")));
    }
    Ok(k as i64)
}

/// Secant iteration on `1/f` started inside the cell.
fn secant_pole(ev: &MeromorphicEvaluator, lo: Complex64, hi: Complex64) -> Option<Complex64> {
    let h = |z: Complex64| -> std::result::Result<Complex64, Complex64> {
        match ev.eval(z) {
            Ok(v) if v.re.is_finite() && v.im.is_finite() => Ok(v.inv()),
            Err(Error::PoleArgument(_)) => Err(z),
            _ => Err(Complex64::new(f64::NAN, f64::NAN)),
        }
    };
    let width = (hi - lo).norm();
    let mut z0 = (lo + hi) * 0.5;
    let mut z1 = z0 + (hi - lo) * 0.25;
    let hit = |z: Complex64| (z.re.is_finite()).then_some(z);
    let mut h0 = match h(z0) {
        Ok(v) => v,
        Err(z) => return hit(z),
    };
    let mut h1 = match h(z1) {
        Ok(v) => v,
        Err(z) => return hit(z),
    };
    for _ in 0..60 {
        let denom = h1 - h0;
        if denom.norm() == 0.0 {
            return None;
        }
        let step = -h1 * (z1 - z0) / denom;
        let z2 = z1 + step;
        if !(z2.re.is_finite() && z2.im.is_finite()) || (z2 - (lo + hi) * 0.5).norm() > width {
            return None;
        }
        if step.norm() <= 1e-14 * z2.norm().max(1.0) {
            return Some(z2);
        }
        let h2 = match h(z2) {
            Ok(v) => v,
            Err(z) => return hit(z),
        };
        (z0, h0, z1, h1) = (z1, h1, z2, h2);
    }
    None
}

/// Locates the poles in a cell whose winding is `-count`.
fn locate(ev: &MeromorphicEvaluator, lo: Complex64, hi: Complex64, count: i64, level: u32, out: &mut Vec<Complex64>) -> Result<()> {
    if count == 1 {
        if let Some(z) = secant_pole(ev, lo, hi) {
            let slack = (hi - lo) * 0.5;
            let (elo, ehi) = (lo - slack, hi + slack);
            if z.re >= elo.re && z.re <= ehi.re && z.im >= elo.im && z.im <= ehi.im {
                out.push(z);
                return Ok(());
            }
        }
    }
    if level == 0 {
        return Err(Error::EvaluationFailure(format!("pole refinement failed in cell {lo} .. {hi}")));
    }
    let mid = (lo + hi) * 0.5;
    let quarters = [
        (lo, mid),
        (Complex64::new(mid.re, lo.im), Complex64::new(hi.re, mid.im)),
        (Complex64::new(lo.re, mid.im), Complex64::new(mid.re, hi.im)),
        (mid, hi),
    ];
    for (qlo, qhi) in quarters {
        let k = rounded_winding(winding(ev, qlo, qhi)?)?;
        if k < 0 {
            locate(ev, qlo, qhi, -k, level - 1, out)?;
        }
    }
    Ok(())
}

fn retile_worthy(e: &Error) -> bool {
    matches!(e, Error::PoleArgument(_) | Error::EvaluationFailure(_) | Error::ToleranceNotMet { .. })
}

/// Poles of a meromorphic function in a rectangle, with residues.
///
/// The rectangle is tiled with cells of side about `spacing`; cells where the
/// argument of `f` winds negatively hold poles. Each pole is refined by a
/// secant iteration on `1/f` (quadrisection as fallback) and its residue is
/// taken on a circle of radius `min(0.1, spacing/4)`. Simple poles are assumed.
pub fn scan_poles(ev: &MeromorphicEvaluator, rect: ScanRect, spacing: f64, exec: Execution) -> Result<PoleReport> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument(format!("grid spacing {spacing} must be positive")));
    }
    if !(rect.re.0 > ev.strip.0 && rect.re.1 < ev.strip.1) {
        return Err(Error::OutsideStrip(format!(
            "scan rectangle Re z in [{}, {}] leaves the evaluation strip ({}, {})",
            rect.re.0, rect.re.1, ev.strip.0, ev.strip.1
        )));
    }
    let width = rect.re.1 - rect.re.0;
    let height = rect.im.1 - rect.im.0;
    let mut last_err = None;
    for attempt in 0..RETILE_ATTEMPTS {
        let nx = ((width / spacing).ceil() as usize + attempt).max(1);
        let ny = ((height / spacing).ceil() as usize + attempt).max(1);
        let phase = RETILE_PHASES[attempt];
        let xs = axis(rect.re, nx, phase);
        let ys = axis(rect.im, ny, phase * 0.7);
        match scan_tiling(ev, rect, &xs, &ys, spacing, exec) {
            Ok(report) => return Ok(report),
            Err(e) if retile_worthy(&e) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// `n + 1` nodes from `lo` to `hi`; interior nodes of the uniform grid are
/// moved back by `phase` of a cell.
fn axis((lo, hi): (f64, f64), n: usize, phase: f64) -> Vec<f64> {
    let d = (hi - lo) / n as f64;
    (0..=n)
        .map(|k| match k {
            0 => lo,
            k if k == n => hi,
            k => lo + d * (k as f64 - phase),
        })
        .collect()
}

fn scan_tiling(
    ev: &MeromorphicEvaluator,
    rect: ScanRect,
    xs: &[f64],
    ys: &[f64],
    spacing: f64,
    exec: Execution,
) -> Result<PoleReport> {
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let node = |i: usize, j: usize| Complex64::new(xs[i], ys[j]);
    let stride = ny + 1;
    let values = exec.try_map_range((nx + 1) * stride, |k| eval_nonzero(ev, node(k / stride, k % stride)))?;
    let at = |i: usize, j: usize| (node(i, j), values[i * stride + j]);

    // horizontal edges (i, j) -> (i + 1, j), then vertical edges (i, j) -> (i, j + 1)
    let n_h = nx * (ny + 1);
    let n_v = (nx + 1) * ny;
    let args = exec.try_map_range(n_h + n_v, |k| {
        if k < n_h {
            let (i, j) = (k / (ny + 1), k % (ny + 1));
            edge_arg(ev, at(i, j), at(i + 1, j), MAX_EDGE_SPLITS)
        } else {
            let k = k - n_h;
            let (i, j) = (k / ny, k % ny);
            edge_arg(ev, at(i, j), at(i, j + 1), MAX_EDGE_SPLITS)
        }
    })?;
    let h = |i: usize, j: usize| args[i * (ny + 1) + j];
    let v = |i: usize, j: usize| args[n_h + i * ny + j];

    let mut cells = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let w = (h(i, j) + v(i + 1, j) - h(i, j + 1) - v(i, j)) / (2.0 * PI);
            let k = rounded_winding(w)?;
            if k < 0 {
                cells.push((node(i, j), node(i + 1, j + 1), -k));
            }
        }
    }

    let located = exec.try_map(&cells, |&(lo, hi, count)| {
        let mut out = Vec::new();
        locate(ev, lo, hi, count, 24, &mut out)?;
        Ok(out)
    })?;
    let mut poles: Vec<Complex64> = located.into_iter().flatten().collect();
    // real parts equal up to rounding sort by imaginary part
    let key = |z: &Complex64| (z.re / DEDUP_TOL).round();
    poles.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.im.total_cmp(&b.im)));
    poles.dedup_by(|a, b| (*a - *b).norm() <= DEDUP_TOL * b.norm().max(1.0));

    let radius = (0.1f64).min(spacing / 4.0);
    let f = |z: Complex64| ev.eval(z);
    let mut entries = Vec::with_capacity(poles.len());
    for z in poles {
        if rect.boundary_distance(z) < radius.min(spacing / 8.0) {
            return Err(Error::BoundaryPole(format!("{z}")));
        }
        let residue = contour_residue_with(&f, z, radius, DEFAULT_NODES, exec)?;
        entries.push(PoleEntry { location: z, residue });
    }
    Ok(PoleReport {
        entries,
        strip: rect.re,
        omitted: Vec::new(),
    })
}
