//! Command-line front end: input parsing, mode selection, orchestration and
//! machine-readable output.
//!
//! Exit codes enumerate the failure classes so corpus runs can be scripted:
//! 1 usage or input error, 2 non-squarefree input, 3 unresolved rank
//! disagreement, 4 invariant violation, 5 missing Euler characteristic,
//! 6 inconsistent eigenspace dimensions.

use crate::linalg::{Arith, Confidence, LinalgError};
use crate::monodromy::{
    alexander_curve, alexander_top, euler_solve, spectrum_from_page, symmetry_report,
    topcomputability_check, CertStatus, CyclotomicPoly, ExternalData, PoleSpectrum,
    SymmetryReport, TopComputabilityCert,
};
use crate::poly::{parse_poly, restrict_reduced, squarefree_probabilistic, Poly};
use crate::spectral::{
    compute_page, generator_degree_bound, Backend, E2Page, Mode, PageConfig, SpectralError,
};
use crate::syzygy::{minimal_generators, poincare_free, saito_check, smooth_certificate, FreenessReport, SyzygyGens};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

/// Fully resolved job description; identical configs (including the seed)
/// produce byte-identical JSON output.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub poly_text: String,
    pub var_names: Vec<String>,
    pub mode: Mode,
    pub backend: Backend,
    pub arith: Arith,
    pub seed: u64,
    pub jobs: usize,
    pub chi: Option<i64>,
    pub bn: Option<usize>,
    pub delta1: Option<CyclotomicPoly>,
    pub nonresonant: Vec<usize>,
    pub json: bool,
    pub dump_dir: Option<PathBuf>,
    pub assume_reduced: bool,
    pub qmax: Option<usize>,
    pub progress: bool,
    /// Print full generators in the syzygy report.
    pub full_generators: bool,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NotReduced(String),
    RankDisagreement(String),
    Invariant(String),
    MissingChi(String),
    Galois(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::NotReduced(_) => 2,
            CliError::RankDisagreement(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::MissingChi(_) => 5,
            CliError::Galois(_) => 6,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::NotReduced(m)
            | CliError::RankDisagreement(m)
            | CliError::Invariant(m)
            | CliError::MissingChi(m)
            | CliError::Galois(m) => write!(f, "{}", m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::BackendMismatch { .. } => CliError::RankDisagreement(e.to_string()),
            SpectralError::NegativeDim { .. } => CliError::Invariant(e.to_string()),
            SpectralError::Linalg(le) => le.into(),
        }
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Disagreement | LinalgError::BadPrimes | LinalgError::LiftFailed => {
                CliError::RankDisagreement(e.to_string())
            }
        }
    }
}

/// Parse an input file of the form `vars = x,y,z,w` / `f = <expression>`
/// with `#` comments; returns (variable names, polynomial text).
pub fn parse_input_file(text: &str) -> Result<(Vec<String>, String), CliError> {
    let mut vars = None;
    let mut f = None;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vars") {
            let rest = rest.trim_start();
            let rest = rest
                .strip_prefix('=')
                .ok_or_else(|| CliError::Usage("expected 'vars = ...'".into()))?;
            vars = Some(
                rest.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect::<Vec<_>>(),
            );
        } else if let Some(rest) = line.strip_prefix("f") {
            let rest = rest.trim_start();
            let rest = rest
                .strip_prefix('=')
                .ok_or_else(|| CliError::Usage("expected 'f = ...'".into()))?;
            f = Some(rest.trim().to_string());
        } else {
            return Err(CliError::Usage(format!("unrecognized line: {}", line)));
        }
    }
    match (vars, f) {
        (Some(v), Some(f)) => Ok((v, f)),
        _ => Err(CliError::Usage(
            "input file needs both a 'vars = ...' and an 'f = ...' line".into(),
        )),
    }
}

/// Parse a cyclotomic factorization given as `order:exponent` pairs,
/// e.g. `1:9` or `1:26,2:2`. The literal `1` denotes the unit polynomial.
pub fn parse_cyclotomic(text: &str) -> Result<CyclotomicPoly, CliError> {
    let text = text.trim();
    if text == "1" {
        return Ok(CyclotomicPoly::one());
    }
    let mut factors = Vec::new();
    for part in text.split(',') {
        let (o, e) = part
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("bad cyclotomic factor '{}'", part)))?;
        let order: u64 = o
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad order '{}'", o)))?;
        let exp: u64 = e
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad exponent '{}'", e)))?;
        if order == 0 {
            return Err(CliError::Usage("cyclotomic order must be positive".into()));
        }
        factors.push((order, exp));
    }
    Ok(CyclotomicPoly::from_factors(factors))
}

/// Everything a run produced; timings stay out of the deterministic JSON.
#[derive(Debug)]
pub struct RunResult {
    pub page: Option<E2Page>,
    pub spectrum: Option<PoleSpectrum>,
    pub symmetry: Option<SymmetryReport>,
    pub deltas: BTreeMap<usize, (CyclotomicPoly, String)>,
    pub certificates: Vec<TopComputabilityCert>,
    pub gens: Option<SyzygyGens>,
    pub freeness: Option<FreenessReport>,
    pub json: Value,
    pub text: String,
}

fn load_poly(cfg: &JobConfig) -> Result<Poly, CliError> {
    let f = parse_poly(&cfg.poly_text, &cfg.var_names)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if f.is_zero() {
        return Err(CliError::Usage("the zero polynomial defines no hypersurface".into()));
    }
    if f.homogeneous_degree().is_none() {
        return Err(CliError::Usage("the polynomial is not homogeneous".into()));
    }
    Ok(f)
}

fn check_reduced(f: &Poly, cfg: &JobConfig) -> Result<(), CliError> {
    if cfg.assume_reduced {
        return Ok(());
    }
    match squarefree_probabilistic(f, cfg.seed ^ 0x5f5f) {
        Ok(true) => Ok(()),
        Ok(false) => Err(CliError::NotReduced(
            "the polynomial has a repeated factor; the hypersurface must be reduced".into(),
        )),
        Err(e) => Err(CliError::NotReduced(format!(
            "could not verify reducedness: {}",
            e
        ))),
    }
}

fn page_config(cfg: &JobConfig) -> PageConfig {
    PageConfig {
        mode: cfg.mode,
        backend: cfg.backend,
        arith: cfg.arith,
        dump_dir: cfg.dump_dir.clone(),
        progress: cfg.progress,
        qmax: cfg.qmax,
    }
}

fn cells_json(page: &E2Page) -> Value {
    let cells: Vec<Value> = page
        .cells
        .iter()
        .map(|((q, k), c)| {
            json!({
                "q": q,
                "k": k,
                "Q": q * page.d + k,
                "dim": c.dim,
                "confidence": if c.set_by_theory { "set by theory: eigenvalue-one top row is the complement cohomology".to_string() } else { c.confidence.to_string() },
            })
        })
        .collect();
    Value::Array(cells)
}

fn spectrum_json(s: &PoleSpectrum) -> Value {
    Value::Array(
        s.entries
            .iter()
            .map(|(q, m)| {
                json!({
                    "Q": q,
                    "alpha": format!("{}/{}", q, s.d),
                    "mult": m,
                })
            })
            .collect(),
    )
}

fn deltas_json(deltas: &BTreeMap<usize, (CyclotomicPoly, String)>) -> Value {
    let mut obj = serde_json::Map::new();
    for (j, (poly, _)) in deltas {
        let mut inner = serde_json::Map::new();
        for (o, e) in poly.factors() {
            inner.insert(o.to_string(), json!(e));
        }
        obj.insert(j.to_string(), Value::Object(inner));
    }
    Value::Object(obj)
}

fn certs_json(certs: &[TopComputabilityCert]) -> Value {
    Value::Array(
        certs
            .iter()
            .map(|c| {
                let (status, source) = match &c.status {
                    CertStatus::Certified(s) => ("certified", Some(s.to_string())),
                    CertStatus::Conjectural => ("conjectural", None),
                    CertStatus::StrictInequality { .. } => ("strict-inequality", None),
                };
                json!({
                    "k": c.k,
                    "m": c.m,
                    "status": status,
                    "source": source,
                    "detail": c.detail,
                })
            })
            .collect(),
    )
}

fn page_table(page: &E2Page) -> String {
    let mut out = String::new();
    let qs: Vec<usize> = page
        .cells
        .keys()
        .map(|(q, _)| *q)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    out.push_str(" q\\k |");
    for k in 1..=page.d {
        out.push_str(&format!(" {:>4}", k));
    }
    out.push('\n');
    out.push_str(&format!("-----+{}\n", "-".repeat(5 * page.d)));
    for q in qs {
        out.push_str(&format!("  {:>2} |", q));
        for k in 1..=page.d {
            match page.cells.get(&(q, k)) {
                Some(c) if c.set_by_theory => out.push_str(&format!(" {:>3}*", c.dim)),
                Some(c) => out.push_str(&format!(" {:>4}", c.dim)),
                None => out.push_str("    ."),
            }
        }
        out.push('\n');
    }
    out
}

/// The `e2` command: compute the page and the spectrum.
pub fn cmd_e2(cfg: &JobConfig) -> Result<RunResult, CliError> {
    let f = load_poly(cfg)?;
    check_reduced(&f, cfg)?;
    if cfg.mode == Mode::Curve && f.nvars() != 3 {
        return Err(CliError::Usage("curve mode requires three variables".into()));
    }
    let page = compute_page(&f, None, &page_config(cfg))?;
    let spectrum = spectrum_from_page(&page);
    let symmetry = symmetry_report(&spectrum);
    let json_out = json!({
        "d": page.d,
        "n": page.n,
        "mode": page.mode.as_str(),
        "cells": cells_json(&page),
        "spectrum": spectrum_json(&spectrum),
        "symmetric": symmetry.symmetric,
        "confidence": page.confidence().to_string(),
    });
    let mut text = String::new();
    text.push_str(&format!(
        "f of degree {} in {} variables, mode {}\n",
        page.d,
        page.n + 1,
        page.mode
    ));
    text.push_str(&page_table(&page));
    if page.mode == Mode::Curve {
        text.push_str("(curve mode: the row holds the subdiagonal dimensions feeding Delta^1)\n");
    } else {
        text.push_str(&format!("Sp^0_P(f) = {}\n", spectrum));
        text.push_str(&format!(
            "spectrum symmetric about t: {}\n",
            if symmetry.symmetric { "yes" } else { "no" }
        ));
    }
    text.push_str(&format!("confidence: {}\n", page.confidence()));
    Ok(RunResult {
        page: Some(page),
        spectrum: Some(spectrum),
        symmetry: Some(symmetry),
        deltas: BTreeMap::new(),
        certificates: Vec::new(),
        gens: None,
        freeness: None,
        json: json_out,
        text,
    })
}

/// The `alexander` command: page, spectrum, all obtainable Alexander
/// polynomials and their certificates.
pub fn cmd_alexander(cfg: &JobConfig) -> Result<RunResult, CliError> {
    let f = load_poly(cfg)?;
    check_reduced(&f, cfg)?;
    let n = f.nvars() - 1;
    let d = f.homogeneous_degree().unwrap();
    let mut deltas: BTreeMap<usize, (CyclotomicPoly, String)> = BTreeMap::new();
    deltas.insert(0, (CyclotomicPoly::from_factors([(1, 1)]), "always t - 1".into()));

    if cfg.mode == Mode::Curve {
        if n != 2 {
            return Err(CliError::Usage("curve mode requires three variables".into()));
        }
        let page = compute_page(&f, None, &page_config(cfg))?;
        let delta1 = alexander_curve(&page).map_err(|e| CliError::Galois(e.to_string()))?;
        deltas.insert(1, (delta1, "certified from the curve page".into()));
        let json_out = json!({
            "d": d,
            "n": n,
            "mode": "curve",
            "alexander": deltas_json(&deltas),
            "confidence": page.confidence().to_string(),
        });
        let mut text = String::new();
        for (j, (poly, how)) in deltas.iter().rev() {
            text.push_str(&format!("Delta^{} = {}  ({})\n", j, poly, how));
        }
        return Ok(RunResult {
            page: Some(page),
            spectrum: None,
            symmetry: None,
            deltas,
            certificates: Vec::new(),
            gens: None,
            freeness: None,
            json: json_out,
            text,
        });
    }

    // top page
    let gens = if cfg.backend != Backend::Direct {
        Some(minimal_generators(
            &f,
            generator_degree_bound(cfg.mode, n, d, cfg.qmax),
            &cfg.arith,
        )?)
    } else {
        None
    };
    let page = compute_page(&f, gens.as_ref(), &page_config(cfg))?;
    let spectrum = spectrum_from_page(&page);
    let symmetry = symmetry_report(&spectrum);
    let (delta_top, _galois) = alexander_top(&page).map_err(|e| CliError::Galois(e.to_string()))?;

    // freeness gives the Euler characteristic of arrangement complements
    let freeness = gens.as_ref().map(|g| {
        g.freeness_stop
            .clone()
            .unwrap_or_else(|| saito_check(&f, &g.gens))
    });
    let chi = cfg.chi.or_else(|| {
        freeness.as_ref().and_then(|fr| {
            if fr.is_free {
                Some(poincare_free(&fr.exponents).1)
            } else {
                None
            }
        })
    });

    // Smoothness upgrades certificates. Arrangements of two or more
    // hyperplanes and free divisors are always singular, so the Artinian
    // test only runs in general mode, and only while its slice stays small.
    let smooth = cfg.mode == Mode::General
        && crate::poly::slice_dim(((n + 1) * (d.saturating_sub(2)) + 1) as i64, n) <= 6000
        && smooth_certificate(&f, &cfg.arith)?;
    let top_note = if smooth {
        "certified: smooth hypersurface".to_string()
    } else {
        match cfg.mode {
            Mode::General => "upper bounds unless certified by external data".to_string(),
            _ => "assumes the degeneration conjecture for this class".to_string(),
        }
    };
    deltas.insert(n, (delta_top.clone(), top_note));

    // Delta^1: supplied, computed for curves, or via a generic plane section
    if n >= 2 && !deltas.contains_key(&1) {
        if let Some(d1) = &cfg.delta1 {
            deltas.insert(1, (d1.clone(), "supplied".into()));
        } else if n == 2 {
            let cfg1 = PageConfig::new(Mode::Curve, Backend::Direct, cfg.arith);
            let cpage = compute_page(&f, None, &cfg1)?;
            let d1 = alexander_curve(&cpage).map_err(|e| CliError::Galois(e.to_string()))?;
            deltas.insert(1, (d1, "certified from the curve page".into()));
        } else if n == 3 {
            let section = restrict_reduced(&f, cfg.seed ^ 0x3ec7)
                .map_err(|e| CliError::NotReduced(format!("generic section failed: {}", e)))?;
            let cfg1 = PageConfig::new(Mode::Curve, Backend::Direct, cfg.arith);
            let cpage = compute_page(&section, None, &cfg1)?;
            let d1 = alexander_curve(&cpage).map_err(|e| CliError::Galois(e.to_string()))?;
            deltas.insert(
                1,
                (d1, "from a probabilistically generic plane section".into()),
            );
        }
    }

    // middle polynomials by the alternating Euler product
    if n == 3 {
        if let Some(chi) = chi {
            let known: Vec<Option<CyclotomicPoly>> = (0..=n)
                .map(|j| {
                    if j == 2 {
                        None
                    } else {
                        deltas.get(&j).map(|(p, _)| p.clone())
                    }
                })
                .collect();
            if known.iter().filter(|x| x.is_none()).count() == 1 {
                let d2 = euler_solve(&known, chi, d)
                    .map_err(|e| CliError::Usage(format!("euler product: {}", e)))?;
                deltas.insert(
                    2,
                    (d2, format!("euler product with chi = {}", chi)),
                );
            }
        } else if deltas.contains_key(&1) {
            return Err(CliError::MissingChi(
                "chi of the complement is needed for Delta^2: pass --chi or use a free input"
                    .into(),
            ));
        }
    }

    let external = ExternalData {
        bn: cfg.bn,
        eigen: None,
        nonresonant: cfg.nonresonant.clone(),
        chi,
        smooth,
    };
    let certificates =
        topcomputability_check(&page, &external).map_err(|e| CliError::Usage(e.to_string()))?;

    let json_out = json!({
        "d": d,
        "n": n,
        "mode": page.mode.as_str(),
        "spectrum": spectrum_json(&spectrum),
        "alexander": deltas_json(&deltas),
        "certificates": certs_json(&certificates),
        "symmetric": symmetry.symmetric,
        "confidence": page.confidence().to_string(),
    });
    let mut text = String::new();
    text.push_str(&format!("Sp^0_P(f) = {}\n", spectrum));
    for (j, (poly, how)) in deltas.iter().rev() {
        text.push_str(&format!("Delta^{} = {}  ({})\n", j, poly, how));
    }
    text.push_str(&format!(
        "spectrum symmetric about t: {}\n",
        if symmetry.symmetric { "yes" } else { "no" }
    ));
    let certified = certificates
        .iter()
        .filter(|c| matches!(c.status, CertStatus::Certified(_)))
        .count();
    let strict = certificates
        .iter()
        .filter(|c| matches!(c.status, CertStatus::StrictInequality { .. }))
        .count();
    text.push_str(&format!(
        "certificates: {} certified, {} strict-inequality, {} conjectural\n",
        certified,
        strict,
        certificates.len() - certified - strict
    ));
    if strict > 0 {
        text.push_str(
            "warning: the page strictly exceeds the known dimensions; it is not the limit page\n",
        );
    }
    Ok(RunResult {
        page: Some(page),
        spectrum: Some(spectrum),
        symmetry: Some(symmetry),
        deltas,
        certificates,
        gens,
        freeness,
        json: json_out,
        text,
    })
}

/// The `syzygy` command: minimal generators and the freeness report.
pub fn cmd_syzygy(cfg: &JobConfig) -> Result<RunResult, CliError> {
    let f = load_poly(cfg)?;
    check_reduced(&f, cfg)?;
    let n = f.nvars() - 1;
    let d = f.homogeneous_degree().unwrap();
    let bound = generator_degree_bound(cfg.mode, n, d, cfg.qmax);
    let gens = minimal_generators(&f, bound, &cfg.arith)?;
    let freeness = gens
        .freeness_stop
        .clone()
        .unwrap_or_else(|| saito_check(&f, &gens.gens));
    let degrees = gens.degrees();
    let mut gens_json: Vec<Value> = Vec::new();
    for g in &gens.gens {
        let mut entry = serde_json::Map::new();
        entry.insert("degree".into(), json!(g.degree));
        if cfg.full_generators {
            entry.insert(
                "vector".into(),
                Value::Array(
                    g.vec
                        .iter()
                        .map(|p| Value::String(p.format_with(&cfg.var_names)))
                        .collect(),
                ),
            );
        }
        gens_json.push(Value::Object(entry));
    }
    let json_out = json!({
        "d": d,
        "n": n,
        "degrees": degrees,
        "scanned_to": gens.scanned_to,
        "generators": gens_json,
        "free": freeness.is_free,
        "exponents": freeness.exponents,
        "note": freeness.note,
    });
    let mut text = String::new();
    text.push_str(&format!("generator degrees: {:?}\n", degrees));
    if cfg.full_generators {
        for g in &gens.gens {
            let comps: Vec<String> = g.vec.iter().map(|p| p.format_with(&cfg.var_names)).collect();
            text.push_str(&format!("  deg {}: ({})\n", g.degree, comps.join(", ")));
        }
    }
    if freeness.is_free {
        text.push_str(&format!(
            "free with exponents {:?} (chi of the complement: {})\n",
            freeness.exponents,
            poincare_free(&freeness.exponents).1
        ));
    } else {
        text.push_str(&format!("not free: {}\n", freeness.note));
    }
    Ok(RunResult {
        page: None,
        spectrum: None,
        symmetry: None,
        deltas: BTreeMap::new(),
        certificates: Vec::new(),
        gens: Some(gens),
        freeness: Some(freeness),
        json: json_out,
        text,
    })
}

/// The `freeness` command: just the Saito report.
pub fn cmd_freeness(cfg: &JobConfig) -> Result<RunResult, CliError> {
    let f = load_poly(cfg)?;
    check_reduced(&f, cfg)?;
    let n = f.nvars() - 1;
    let d = f.homogeneous_degree().unwrap();
    let gens = minimal_generators(&f, d.saturating_sub(1), &cfg.arith)?;
    let freeness = gens
        .freeness_stop
        .clone()
        .unwrap_or_else(|| saito_check(&f, &gens.gens));
    let json_out = json!({
        "d": d,
        "n": n,
        "free": freeness.is_free,
        "exponents": freeness.exponents,
        "note": freeness.note,
    });
    let text = if freeness.is_free {
        let (pi, chi) = poincare_free(&freeness.exponents);
        format!(
            "free with exponents {:?}\nbetti polynomial coefficients: {:?}\nchi of the complement: {}\n",
            freeness.exponents, pi, chi
        )
    } else {
        format!("not free: {}\n", freeness.note)
    };
    Ok(RunResult {
        page: None,
        spectrum: None,
        symmetry: None,
        deltas: BTreeMap::new(),
        certificates: Vec::new(),
        gens: Some(gens),
        freeness: Some(freeness),
        json: json_out,
        text,
    })
}

/// Confidence of a whole run for the summary line.
pub fn run_confidence(r: &RunResult) -> Option<Confidence> {
    r.page.as_ref().map(|p| p.confidence())
}
