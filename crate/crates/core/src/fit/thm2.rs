use num::complex::Complex64;
use serde::Serialize;

use super::oracle::{classify_decay, fit_expansion, DecayClass, FitGrid, FitReport};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::formal::{residues_from_expansion, taylor_coeffs, AsymptoticExpansion, PoleReport};
use crate::magnitude::little_m;
use crate::mellin::{beta_via_mellin, mellin_options, watson_expansion, MeromorphicEvaluator, MellinDepth, ScanRect};
use crate::mellin::scan_poles;
use crate::scalar::{contour_residue, recip_gamma, QuadOptions};
use crate::space::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LinkStatus {
    Passed,
    Failed,
    Skipped,
}

/// One checked implication with its largest discrepancy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkReport {
    pub name: String,
    pub status: LinkStatus,
    pub discrepancy: Option<f64>,
    pub detail: String,
}

impl LinkReport {
    fn measured(name: impl Into<String>, discrepancy: f64, tol: f64, detail: String) -> Self {
        LinkReport {
            name: name.into(),
            status: if discrepancy <= tol { LinkStatus::Passed } else { LinkStatus::Failed },
            discrepancy: Some(discrepancy),
            detail,
        }
    }

    fn verdict(name: impl Into<String>, status: LinkStatus, detail: impl Into<String>) -> Self {
        LinkReport {
            name: name.into(),
            status,
            discrepancy: None,
            detail: detail.into(),
        }
    }

    fn failed_with(name: impl Into<String>, err: &Error) -> Self {
        LinkReport::verdict(name, LinkStatus::Failed, format!("{}: {err}", err.name()))
    }

    pub fn passed(&self) -> bool {
        self.status == LinkStatus::Passed
    }
}

/// Outcome of [`verify_thm2`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm2Report {
    pub order: usize,
    pub nus: Vec<f64>,
    pub tol: f64,
    pub decay: Option<DecayClass>,
    /// Fitted expansion of `m`; all zero for super-polynomial decay.
    pub expansion: Option<AsymptoticExpansion>,
    pub fit: Option<FitReport>,
    /// Poles found by scanning the continued beta function.
    pub scanned_poles: Option<PoleReport>,
    /// Poles implied by the fitted expansion.
    pub predicted_poles: Option<PoleReport>,
    pub links: Vec<LinkReport>,
}

impl Thm2Report {
    /// No link failed.
    pub fn consistent(&self) -> bool {
        self.links.iter().all(|l| l.status != LinkStatus::Failed)
    }

    pub fn link(&self, name: &str) -> Option<&LinkReport> {
        self.links.iter().find(|l| l.name == name)
    }
}

pub const LINK_EXPANSION: &str = "expansion";
pub const LINK_PATHS: &str = "path independence";
pub const LINK_RESIDUES: &str = "residues";
pub const LINK_SCAN: &str = "pole scan";
pub const LINK_TAYLOR: &str = "taylor";

pub fn power_link_name(nu: f64) -> String {
    format!("power nu={nu}")
}

/// Orders of Taylor coefficients checked by [`verify_thm2`].
const TAYLOR_ORDER: usize = 3;
/// Lattice points whose residues are checked by contour integration.
const RESIDUE_POINTS: usize = 3;
/// Cell size of the pole scan.
const SCAN_SPACING: f64 = 0.5;

fn recoverable(err: &Error) -> bool {
    matches!(
        err,
        Error::NonPowerLaw(_) | Error::DisagreeingMethods(_) | Error::IllConditioned(_)
    )
}

fn coefficient_discrepancy(got: &[Complex64], want: &[Complex64]) -> f64 {
    let zero = Complex64::new(0.0, 0.0);
    (0..got.len().max(want.len()))
        .map(|j| {
            let g = got.get(j).copied().unwrap_or(zero);
            let w = want.get(j).copied().unwrap_or(zero);
            (g - w).norm() / w.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Runs the chain of equivalent statements on a normalized radial profile:
/// (1) `m` has an expansion on the lattice `gamma - j`; (2)/(3) `m^nu` has the
/// expansion predicted by the formal power, and the fits for different `nu`
/// agree after converting back; (4) the continued beta function has simple
/// poles at `gamma - j` with residues `a_j / Gamma(j - gamma)`.
///
/// Failures of the fit oracle are reported as failed links; other errors
/// propagate.
pub fn verify_thm2(profile: &RadialProfile, order: usize, nus: &[f64], tol: f64, exec: Execution) -> Result<Thm2Report> {
    if !profile.is_normalized() {
        return Err(Error::NotNormalized(profile.total_mass));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let mut report = Thm2Report {
        order,
        nus: nus.to_vec(),
        tol,
        decay: None,
        expansion: None,
        fit: None,
        scanned_poles: None,
        predicted_poles: None,
        links: Vec::new(),
    };
    let grid = FitGrid::for_profile(profile);
    let m = |r: f64| little_m(profile, r);

    // (1)
    let decay = match classify_decay(&m, &grid, exec) {
        Ok(d) => d,
        Err(e) if recoverable(&e) => {
            report.links.push(LinkReport::failed_with(LINK_EXPANSION, &e));
            for name in downstream_links(nus) {
                report
                    .links
                    .push(LinkReport::verdict(name, LinkStatus::Skipped, "no expansion of m"));
            }
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.decay = Some(decay);
    let expansion = match decay {
        DecayClass::PowerLaw { gamma, .. } => match fit_expansion(&m, gamma, order, &grid, exec) {
            Ok(fit) => {
                report.links.push(LinkReport::verdict(
                    LINK_EXPANSION,
                    LinkStatus::Passed,
                    format!("gamma = {gamma}, condition {:.2e}", fit.condition),
                ));
                let e = fit.expansion.clone();
                report.fit = Some(fit);
                e
            }
            Err(e) if recoverable(&e) => {
                report.links.push(LinkReport::failed_with(LINK_EXPANSION, &e));
                for name in downstream_links(nus) {
                    report
                        .links
                        .push(LinkReport::verdict(name, LinkStatus::Skipped, "no expansion of m"));
                }
                return Ok(report);
            }
            Err(e) => return Err(e),
        },
        DecayClass::SuperPolynomial => {
            report.links.push(LinkReport::verdict(
                LINK_EXPANSION,
                LinkStatus::Passed,
                "decay faster than every power: all coefficients vanish",
            ));
            AsymptoticExpansion::new(0.0, vec![Complex64::new(0.0, 0.0); order + 1])
        }
    };
    report.expansion = Some(expansion.clone());

    // (2), (3)
    let mut back_converted = Vec::new();
    for &nu in nus {
        let name = power_link_name(nu);
        let sampler = |r: f64| little_m(profile, r).map(|v| v.powf(nu));
        if expansion.is_zero() {
            if nu > 0.0 {
                let link = match classify_decay(&sampler, &grid, exec) {
                    Ok(DecayClass::SuperPolynomial) => {
                        LinkReport::verdict(name, LinkStatus::Passed, "m^nu decays faster than every power")
                    }
                    Ok(other) => LinkReport::verdict(name, LinkStatus::Failed, format!("m^nu classified as {other:?}")),
                    Err(e) if recoverable(&e) => LinkReport::failed_with(name, &e),
                    Err(e) => return Err(e),
                };
                report.links.push(link);
            } else {
                report.links.push(LinkReport::verdict(
                    name,
                    LinkStatus::Skipped,
                    "m^nu does not decay for nu <= 0",
                ));
            }
            continue;
        }
        let predicted = expansion.raise(Complex64::new(nu, 0.0))?;
        let fitted = match fit_expansion(&sampler, expansion.gamma.re * nu, order, &grid, exec) {
            Ok(f) => f,
            Err(e) if recoverable(&e) => {
                report.links.push(LinkReport::failed_with(name, &e));
                continue;
            }
            Err(e) => return Err(e),
        };
        let disc = coefficient_discrepancy(&fitted.expansion.coeffs, &predicted.coeffs);
        report.links.push(LinkReport::measured(
            name,
            disc,
            tol,
            format!("fitted m^nu against the formal power of the fit of m (exponent {})", predicted.gamma.re),
        ));
        if nu != 0.0 {
            back_converted.push((nu, fitted.expansion.raise(Complex64::new(1.0 / nu, 0.0))?));
        }
    }
    if expansion.is_zero() || back_converted.is_empty() {
        report.links.push(LinkReport::verdict(
            LINK_PATHS,
            LinkStatus::Skipped,
            "no non-zero nu with a power-law fit",
        ));
    } else {
        let disc = back_converted
            .iter()
            .map(|(_, e)| coefficient_discrepancy(&e.coeffs, &expansion.coeffs))
            .fold(0.0, f64::max);
        report.links.push(LinkReport::measured(
            LINK_PATHS,
            disc,
            tol,
            format!("{} fits of m^nu converted back to nu = 1", back_converted.len()),
        ));
    }

    // (4)
    let closed = watson_expansion(profile, order);
    let continuation_expansion = if expansion.is_zero() {
        None
    } else {
        Some(closed.clone().unwrap_or_else(|| expansion.clone()))
    };
    let asymptotic = continuation_expansion.as_ref().map_or(0, |e| e.order() + 1);
    let depth = MellinDepth::new(1, asymptotic);
    let ev = MeromorphicEvaluator::beta_continued(profile.clone(), depth, continuation_expansion, mellin_options())?;
    let gamma = expansion.gamma.re;
    let predicted = residues_from_expansion(&expansion);

    let residue_link = if expansion.is_zero() {
        LinkReport::verdict(LINK_RESIDUES, LinkStatus::Skipped, "no lattice")
    } else {
        let mut disc: f64 = 0.0;
        let mut detail = Vec::new();
        for j in 0..RESIDUE_POINTS.min(order + 1) {
            let z0 = Complex64::new(gamma - j as f64, 0.0);
            let got = contour_residue(|z| ev.eval(z), z0, 0.1, 64)?;
            let want = expansion.coeffs[j] * recip_gamma(-z0);
            disc = disc.max((got - want).norm());
            detail.push(format!("res({}) = {:.10e}", z0.re, got.re));
        }
        LinkReport::measured(LINK_RESIDUES, disc, tol, detail.join(", "))
    };
    report.links.push(residue_link);

    let (lo, hi) = if expansion.is_zero() {
        (-(order as f64) - 1.45, -0.45)
    } else {
        (gamma - order as f64 - 0.45, gamma + 0.45)
    };
    let lo = lo.max(ev.strip.0 + 0.05);
    let hi = hi.min(ev.strip.1 - 0.05);
    let rect = ScanRect::new((lo, hi), (-1.0, 1.0))?;
    let scanned = scan_poles(&ev, rect, SCAN_SPACING, exec)?;
    report.links.push(compare_poles(&scanned, &predicted, &rect, tol));
    report.scanned_poles = Some(scanned);
    report.predicted_poles = Some(predicted);

    report.links.push(taylor_link(profile, TAYLOR_ORDER.min(order.max(1)), tol)?);
    Ok(report)
}

fn downstream_links(nus: &[f64]) -> Vec<String> {
    let mut names: Vec<String> = nus.iter().map(|nu| power_link_name(*nu)).collect();
    for n in [LINK_PATHS, LINK_RESIDUES, LINK_SCAN, LINK_TAYLOR] {
        names.push(n.to_string());
    }
    names
}

/// Every predicted pole with residue above `tol` must be found, and every
/// scanned pole with residue above `tol` must be predicted.
fn compare_poles(scanned: &PoleReport, predicted: &PoleReport, rect: &ScanRect, tol: f64) -> LinkReport {
    let inside = |z: Complex64| z.re > rect.re.0 && z.re < rect.re.1 && z.im > rect.im.0 && z.im < rect.im.1;
    let expected: Vec<_> = predicted
        .entries
        .iter()
        .filter(|e| inside(e.location) && e.residue.norm() > tol)
        .collect();
    let found: Vec<_> = scanned.entries.iter().filter(|e| e.residue.norm() > tol).collect();
    let mut disc: f64 = 0.0;
    let mut missing = 0;
    for e in &expected {
        match found
            .iter()
            .min_by(|a, b| (a.location - e.location).norm().total_cmp(&(b.location - e.location).norm()))
        {
            Some(f) => {
                disc = disc
                    .max((f.location - e.location).norm())
                    .max((f.residue - e.residue).norm());
            }
            None => missing += 1,
        }
    }
    let unexpected = found
        .iter()
        .filter(|f| !expected.iter().any(|e| (f.location - e.location).norm() <= tol.max(1e-3)))
        .count();
    let detail = format!(
        "{} predicted, {} found in Re z in ({:.2}, {:.2}); {missing} missing, {unexpected} unexpected",
        expected.len(),
        found.len(),
        rect.re.0,
        rect.re.1
    );
    if missing > 0 || unexpected > 0 {
        LinkReport {
            name: LINK_SCAN.into(),
            status: LinkStatus::Failed,
            discrepancy: Some(disc),
            detail,
        }
    } else {
        LinkReport::measured(LINK_SCAN, disc, tol, detail)
    }
}

/// `B_j = (-1)^j B(j) / j!` for the Taylor coefficients `B_j` of `m` at 0,
/// with `B(j)` from the Mellin continuation.
pub fn taylor_link(profile: &RadialProfile, order: usize, tol: f64) -> Result<LinkReport> {
    let b = taylor_coeffs(profile, order, &QuadOptions::relative(1e-13, 1e-300))?;
    let depth = MellinDepth::new(order + 1, 0);
    let opts = mellin_options();
    let mut disc: f64 = 0.0;
    let mut factorial = 1.0;
    for (j, bj) in b.iter().enumerate() {
        if j > 0 {
            factorial *= j as f64;
        }
        let beta = beta_via_mellin(profile, Complex64::new(j as f64, 0.0), depth, None, &opts)?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let want = sign * beta / factorial;
        disc = disc.max((want - bj).norm() / bj.abs().max(1.0));
    }
    Ok(LinkReport::measured(
        LINK_TAYLOR,
        disc,
        tol,
        format!("moments against the continued beta function at 0..={order}"),
    ))
}
