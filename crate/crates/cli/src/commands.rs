use maglab_core::fit::{detect_gamma, fit_expansion, verify_thm2, FitGrid, FitReport, LinkStatus, Thm2Report};
use maglab_core::formal::{
    convert_exact, rational_to_f64, ExactExpansion, GTable, PoleReport,
};
use maglab_core::magnitude::{finite_mag_nu, little_m, mag_nu_radial};
use maglab_core::mellin::{
    beta_padic_closed, mellin_options, scan_poles, watson_expansion, MellinDepth, MeromorphicEvaluator, ScanRect,
};
use maglab_core::space::{RadialProfile, Selector};
use maglab_core::Execution;
use num::complex::Complex64;
use serde::Serialize;

use crate::args::{BetaArgs, ConvertArgs, ExpandArgs, GtableArgs, MagArgs, VerifyArgs};
use crate::input::{
    default_tol, parse_complex_list, parse_depth, parse_finite_file, parse_grid, parse_rat, parse_rational_list,
    parse_real_list, parse_rect, parse_selector,
};
use crate::output::{num, Artifact, ComplexOut, Table};
use crate::CliError;

const EXEC: Execution = Execution::Parallel;

#[derive(Serialize)]
struct MagRow {
    #[serde(rename = "R")]
    r: f64,
    nu: ComplexOut,
    value: ComplexOut,
}

#[derive(Serialize)]
struct MagDoc {
    space: String,
    warnings: Vec<String>,
    rows: Vec<MagRow>,
}

pub fn mag(args: &MagArgs, strict: bool) -> Result<(Artifact, Vec<String>), CliError> {
    let rs = parse_grid(&args.r, "--R")?;
    let nus = parse_complex_list(&args.nu, "--nu")?;
    let jobs: Vec<(f64, Complex64)> = rs.iter().flat_map(|&r| nus.iter().map(move |&nu| (r, nu))).collect();
    let (space, warnings, values) = match (&args.space.space, &args.space.file) {
        (Some(sel), _) => {
            let (sel, profile) = parse_selector(sel)?;
            let values = EXEC.try_map(&jobs, |&(r, nu)| mag_nu_radial(&profile, r, nu))?;
            (sel.to_string(), Vec::new(), values)
        }
        (None, Some(path)) => {
            let (space, warnings) = parse_finite_file(path, strict)?;
            let values = EXEC.try_map(&jobs, |&(r, nu)| finite_mag_nu(&space, r, nu))?;
            (path.display().to_string(), warnings, values)
        }
        (None, None) => return Err(CliError::Parse("one of --space or --file is required".into())),
    };
    let mut table = Table::new(&["R", "nu_re", "nu_im", "value_re", "value_im"]);
    let rows: Vec<MagRow> = jobs
        .iter()
        .zip(&values)
        .map(|(&(r, nu), &v)| {
            table.push(vec![num(r), num(nu.re), num(nu.im), num(v.re), num(v.im)]);
            MagRow {
                r,
                nu: nu.into(),
                value: v.into(),
            }
        })
        .collect();
    let doc = MagDoc {
        space,
        warnings: warnings.clone(),
        rows,
    };
    Ok((Artifact::new(&doc, table)?, warnings))
}

/// Closed form for p-adic spaces, Mellin continuation otherwise. Profiles
/// without a large-R series get asymptotic depth 0.
fn beta_evaluator(sel: Selector, profile: RadialProfile, (m, n): (usize, usize)) -> Result<MeromorphicEvaluator, CliError> {
    if let Selector::Padic { p } = sel {
        return Ok(MeromorphicEvaluator::new(
            move |z| beta_padic_closed(p, z),
            (f64::NEG_INFINITY, f64::INFINITY),
        ));
    }
    let expansion = n.checked_sub(1).and_then(|order| watson_expansion(&profile, order));
    let n = if expansion.is_some() { n } else { 0 };
    Ok(MeromorphicEvaluator::beta_continued(
        profile,
        MellinDepth::new(m, n),
        expansion,
        mellin_options(),
    )?)
}

#[derive(Serialize)]
struct BetaRow {
    z: ComplexOut,
    value: ComplexOut,
}

#[derive(Serialize)]
struct BetaDoc {
    space: String,
    strip: (f64, f64),
    values: Vec<BetaRow>,
}

#[derive(Serialize)]
struct PoleDoc<'a> {
    space: String,
    rect: ScanRect,
    spacing: f64,
    poles: &'a PoleReport,
}

pub fn beta(args: &BetaArgs) -> Result<Artifact, CliError> {
    let depth = parse_depth(&args.depth)?;
    let (sel, profile) = parse_selector(&args.space)?;
    if args.poles {
        let rect = args.rect.as_deref().ok_or_else(|| CliError::Parse("--poles needs --rect".into()))?;
        let (re, im) = parse_rect(rect)?;
        if !(args.spacing.is_finite() && args.spacing > 0.0) {
            return Err(CliError::Parse(format!("--spacing: {} must be positive", args.spacing)));
        }
        let rect = ScanRect::new(re, im)?;
        let ev = beta_evaluator(sel, profile, depth)?;
        let report = scan_poles(&ev, rect, args.spacing, EXEC)?;
        let mut table = Table::new(&["pole_re", "pole_im", "residue_re", "residue_im"]);
        for e in &report.entries {
            table.push(vec![num(e.location.re), num(e.location.im), num(e.residue.re), num(e.residue.im)]);
        }
        let doc = PoleDoc {
            space: sel.to_string(),
            rect,
            spacing: args.spacing,
            poles: &report,
        };
        return Artifact::new(&doc, table);
    }
    let zs = parse_complex_list(args.z.as_deref().unwrap_or_default(), "--z")?;
    let ev = beta_evaluator(sel, profile, depth)?;
    let values = EXEC.try_map(&zs, |&z| ev.eval(z))?;
    let mut table = Table::new(&["z_re", "z_im", "value_re", "value_im"]);
    let rows = zs
        .iter()
        .zip(&values)
        .map(|(&z, &v)| {
            table.push(vec![num(z.re), num(z.im), num(v.re), num(v.im)]);
            BetaRow {
                z: z.into(),
                value: v.into(),
            }
        })
        .collect();
    let doc = BetaDoc {
        space: sel.to_string(),
        strip: ev.strip,
        values: rows,
    };
    Artifact::new(&doc, table)
}

#[derive(Serialize)]
struct ExpandDoc<'a> {
    space: String,
    gamma: f64,
    gamma_detected: bool,
    ill_conditioned: bool,
    fit: &'a FitReport,
}

pub fn expand(args: &ExpandArgs) -> Result<Artifact, CliError> {
    let (sel, profile) = parse_selector(&args.space)?;
    let grid = FitGrid::for_profile(&profile);
    let m = |r: f64| little_m(&profile, r);
    let gamma = match args.gamma {
        Some(g) => g,
        None => detect_gamma(&m, &grid, EXEC)?,
    };
    let fit = fit_expansion(&m, gamma, args.order, &grid, EXEC)?;
    let mut table = Table::new(&["j", "exponent", "coeff_re", "coeff_im", "error", "least_squares", "disagreement"]);
    for (j, a) in fit.expansion.coeffs.iter().enumerate() {
        table.push(vec![
            j.to_string(),
            num(gamma - j as f64),
            num(a.re),
            num(a.im),
            num(fit.errors[j]),
            num(fit.least_squares[j]),
            num(fit.disagreement[j]),
        ]);
    }
    let doc = ExpandDoc {
        space: sel.to_string(),
        gamma,
        gamma_detected: args.gamma.is_none(),
        ill_conditioned: fit.ill_conditioned(),
        fit: &fit,
    };
    Artifact::new(&doc, table)
}

#[derive(Serialize)]
struct ConvertDoc {
    from_nu: String,
    to_nu: String,
    gamma: String,
    gamma_value: f64,
    lead: String,
    /// Exact coefficients when the leading power is rational.
    coeffs: Option<Vec<String>>,
    ratios: Vec<String>,
    values: Vec<ComplexOut>,
}

pub fn convert(args: &ConvertArgs) -> Result<Artifact, CliError> {
    let gamma = parse_rat(&args.gamma, "--gamma")?;
    let coeffs = parse_rational_list(&args.coeffs, "--coeffs")?;
    let from = parse_rat(&args.from_nu, "--from-nu")?;
    let to = parse_rat(&args.to_nu, "--to-nu")?;
    let input = ExactExpansion::from_coeffs(gamma, &coeffs)?;
    let out = convert_exact(&input, &from, &to)?;
    let exact = out.coeffs();
    let values: Vec<Complex64> = out.to_float()?.coeffs;
    let mut table = Table::new(&["j", "ratio", "coeff", "value_re", "value_im"]);
    for (j, (r, v)) in out.ratios.iter().zip(&values).enumerate() {
        let c = exact.as_ref().map(|cs| cs[j].to_string()).unwrap_or_default();
        table.push(vec![j.to_string(), r.to_string(), c, num(v.re), num(v.im)]);
    }
    let doc = ConvertDoc {
        from_nu: from.to_string(),
        to_nu: to.to_string(),
        gamma: out.gamma.to_string(),
        gamma_value: rational_to_f64(&out.gamma),
        lead: out.lead.to_string(),
        coeffs: exact.map(|cs| cs.iter().map(ToString::to_string).collect()),
        ratios: out.ratios.iter().map(ToString::to_string).collect(),
        values: values.into_iter().map(Into::into).collect(),
    };
    Artifact::new(&doc, table)
}

#[derive(Serialize)]
struct TermOut {
    partition: Vec<u32>,
    part_count: usize,
    denominator: String,
    term: String,
}

#[derive(Serialize)]
struct GRow {
    j: usize,
    polynomial: String,
    terms: Vec<TermOut>,
}

#[derive(Serialize)]
struct GDoc {
    max_j: usize,
    rows: Vec<GRow>,
}

pub fn gtable(args: &GtableArgs) -> Result<Artifact, CliError> {
    let table_g = GTable::new(args.max_j);
    let mut table = Table::new(&["j", "polynomial"]);
    let mut rows = Vec::new();
    for j in 0..=args.max_j {
        let polynomial = table_g.render(j)?;
        table.push(vec![j.to_string(), polynomial.clone()]);
        let terms = table_g
            .row(j)?
            .iter()
            .map(|t| TermOut {
                partition: t.partition.clone(),
                part_count: t.part_count,
                denominator: t.denominator.to_string(),
                term: t.render(),
            })
            .collect();
        rows.push(GRow { j, polynomial, terms });
    }
    Artifact::new(&GDoc { max_j: args.max_j, rows }, table)
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    space: String,
    consistent: bool,
    report: &'a Thm2Report,
}

pub fn verify(args: &VerifyArgs, env_tol: Option<&str>) -> Result<Artifact, CliError> {
    let (sel, profile) = parse_selector(&args.space)?;
    let nus = parse_real_list(&args.nu, "--nu")?;
    let tol = match args.tol {
        Some(t) if t.is_finite() && t > 0.0 => t,
        Some(t) => return Err(CliError::Parse(format!("--tol: {t} must be positive"))),
        None => default_tol(env_tol)?,
    };
    let report = verify_thm2(&profile, args.order, &nus, tol, EXEC)?;
    let mut table = Table::new(&["link", "status", "discrepancy", "detail"]);
    for link in &report.links {
        let status = match link.status {
            LinkStatus::Passed => "passed",
            LinkStatus::Failed => "failed",
            LinkStatus::Skipped => "skipped",
        };
        table.push(vec![
            link.name.clone(),
            status.into(),
            link.discrepancy.map(num).unwrap_or_default(),
            link.detail.clone(),
        ]);
    }
    let doc = VerifyDoc {
        space: sel.to_string(),
        consistent: report.consistent(),
        report: &report,
    };
    Artifact::new(&doc, table)
}
