use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hopf_core::fibers::{auto_domain, extract_fibers, CurveFile, FiberDomain, KnotFamily};
use hopf_core::fields::{DataEncoding, Preset, SampledField, SpinorField};
use hopf_core::geometry::{BoxGrid, StereoChart, Vec3};
use hopf_core::links::{link_report, pushoff_framing, LinkReport, LinkingRule};
use hopf_core::report::{run_methods, FamilySummary, HopfReport};
use hopf_core::verify::{format_convergence, run_verification, VerifyReport, VerifySettings};

use crate::config::RunConfig;

/// Process exit status of a command that did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Methods disagree, curves are open, or a criterion failed.
    Flagged,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Flagged => 2,
        }
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, json: bool, summary: impl FnOnce() -> String) -> Result<()> {
    if let Some(p) = out {
        write_json(value, p)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", summary());
    }
    Ok(())
}

pub fn cmd_hopf(rc: &RunConfig) -> Result<Outcome> {
    let field = rc.source.load()?;
    let report = run_methods(&field, &rc.source.label(), &rc.settings)?;
    emit(&report, rc.out.as_deref(), rc.json, || {
        hopf_summary(&report, rc.settings.tol)
    })?;
    if report.has_open_curves() {
        log::warn!("open fiber curves: the field is not constant outside the domain");
    }
    Ok(
        if report.agrees() && report.all_converged && !report.has_open_curves() {
            Outcome::Ok
        } else {
            Outcome::Flagged
        },
    )
}

fn hopf_summary(r: &HopfReport, tol: f64) -> String {
    let mut s = format!("field {}\n", r.field);
    let _ = writeln!(
        s,
        "{:<16} {:>14} {:>5} {:>10} {:>10}  resolution",
        "method", "value", "H", "residual", "ms"
    );
    for m in &r.methods {
        let e = &m.estimate;
        let ms = m.elapsed_ms.map_or("-".to_string(), |t| format!("{t:.0}"));
        let _ = writeln!(
            s,
            "{:<16} {:>14.8} {:>5} {:>10.2e} {:>10}  {}",
            e.method.name(),
            e.value,
            e.rounded,
            e.residual,
            ms,
            e.resolution
        );
    }
    for f in &r.fibers {
        let _ = writeln!(s, "{}", family_line(f));
    }
    match r.agreed {
        Some(h) if r.all_converged => {
            let _ = writeln!(s, "agreed H = {h} (max discrepancy {:.2e})", r.max_discrepancy);
        }
        Some(h) => {
            let _ = writeln!(s, "converged methods give H = {h}; some did not converge");
        }
        None if r.methods.iter().any(|m| m.estimate.residual <= tol) => {
            let _ = writeln!(s, "methods DISAGREE (max discrepancy {:.2e})", r.max_discrepancy);
        }
        None => {
            let _ = writeln!(s, "no method converged to an integer");
        }
    }
    s
}

fn family_line(f: &FamilySummary) -> String {
    let lengths: Vec<String> = f.lengths.iter().map(|l| format!("{l:.4}")).collect();
    format!(
        "target ({:.4}, {:.4}, {:.4}): {} closed, {} open, windings {:?}, lengths [{}]",
        f.target.x,
        f.target.y,
        f.target.z,
        f.closed_curves,
        f.open_curves,
        f.windings,
        lengths.join(", ")
    )
}

pub fn cmd_fibers(rc: &RunConfig) -> Result<Outcome> {
    let field = rc.source.load()?;
    let s = &rc.settings;
    let (domain, families): (FiberDomain, Vec<KnotFamily>) = match FiberDomain::for_sampled(&field) {
        Some(d) => {
            let fams = s
                .targets
                .iter()
                .map(|t| extract_fibers(&field, &d, t, &s.extraction))
                .collect::<hopf_core::Result<Vec<_>>>()?;
            (d, fams)
        }
        None => auto_domain(&field, &s.targets, s.fiber_cells, &s.extraction)?,
    };
    let mut framings = Vec::with_capacity(families.len());
    for fam in &families {
        if fam.curves.is_empty() && fam.open_curves.is_empty() {
            log::warn!(
                "target ({:.4}, {:.4}, {:.4}) has no preimage in the domain",
                fam.target.x,
                fam.target.y,
                fam.target.z
            );
        }
        let fr = match pushoff_framing(&field, &domain, fam, s.pushoff_angle, &s.extraction) {
            Ok(framed) => framed.into_iter().map(|f| Some(f.framing)).collect(),
            Err(e) => {
                log::warn!("no push-off framing: {e}");
                vec![None; fam.curves.len()]
            }
        };
        framings.push(fr);
    }
    let file = CurveFile::from_families(&families, &framings);
    let path = rc.out.clone().unwrap_or_else(|| PathBuf::from("fibers.json"));
    file.save(&path)?;
    let open: usize = families.iter().map(|f| f.open_curves.len()).sum();
    if rc.json {
        println!("{}", serde_json::to_string_pretty(&file)?);
    } else {
        for f in &families {
            println!("{}", family_line(&FamilySummary::of(f)));
        }
        println!("wrote {} curve(s) to {}", file.curves.len(), path.display());
    }
    if open > 0 {
        log::warn!("{open} open curve(s): the field is not constant outside the domain");
        return Ok(Outcome::Flagged);
    }
    Ok(Outcome::Ok)
}

pub const LINK_SCHEMA: &str = "hopf-link";
pub const LINK_SCHEMA_VERSION: u32 = 1;

/// Linking sum restricted to the curves of one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSum {
    pub target: Option<Vec3>,
    pub curves: Vec<usize>,
    pub h_link_sum: Option<f64>,
    pub h_rounded: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDocument {
    pub schema: String,
    pub version: u32,
    pub files: Vec<String>,
    pub report: LinkReport,
    pub targets: Vec<TargetSum>,
}

fn target_key(t: &Option<Vec3>) -> String {
    match t {
        Some(v) => format!("{:?}", v.as_slice()),
        None => String::new(),
    }
}

pub fn cmd_link(files: &[PathBuf], rule: LinkingRule, out: Option<&Path>, json: bool) -> Result<Outcome> {
    if files.is_empty() {
        bail!("no curve files given");
    }
    let mut records = Vec::new();
    for f in files {
        let file = CurveFile::load(f).with_context(|| format!("loading curves {}", f.display()))?;
        records.extend(file.curves);
    }
    let open: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.closed)
        .map(|(i, _)| i)
        .collect();
    if !open.is_empty() {
        eprintln!("open curves {open:?}: linking numbers are undefined");
        return Ok(Outcome::Flagged);
    }
    let curves: Vec<_> = records.iter().map(|r| r.to_curve()).collect();
    let framings: Vec<_> = records.iter().map(|r| r.framing.clone()).collect();
    let report = link_report(&curves, &framings, rule)?;

    let mut groups: BTreeMap<String, (Option<Vec3>, Vec<usize>)> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        groups
            .entry(target_key(&r.target))
            .or_insert_with(|| (r.target, Vec::new()))
            .1
            .push(i);
    }
    let targets = groups
        .into_values()
        .map(|(target, idx)| {
            let mut h = Some(0.0);
            for &m in &idx {
                for &k in &idx {
                    let w = (report.windings[m] * report.windings[k]) as f64;
                    h = match (h, report.linking[m][k]) {
                        (Some(acc), Some(lk)) => Some(acc + w * lk),
                        _ => None,
                    };
                }
            }
            TargetSum {
                target,
                curves: idx,
                h_link_sum: h,
                h_rounded: h.map(|v| v.round() as i64),
            }
        })
        .collect();
    let doc = LinkDocument {
        schema: LINK_SCHEMA.into(),
        version: LINK_SCHEMA_VERSION,
        files: files.iter().map(|f| f.display().to_string()).collect(),
        report,
        targets,
    };
    emit(&doc, out, json, || link_summary(&doc))?;
    Ok(Outcome::Ok)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.6}"))
}

fn link_summary(d: &LinkDocument) -> String {
    let r = &d.report;
    let mut s = String::new();
    let _ = writeln!(s, "{} curve(s), windings {:?}", r.windings.len(), r.windings);
    let _ = writeln!(s, "linking matrix (self-linking on the diagonal):");
    for row in &r.linking {
        let cells: Vec<String> = row.iter().map(|v| format!("{:>10}", fmt_opt(*v))).collect();
        let _ = writeln!(s, "  {}", cells.join(" "));
    }
    for (i, t) in r.self_terms.iter().enumerate() {
        match t {
            Some(t) => {
                let _ = writeln!(
                    s,
                    "curve {i}: SL {} ({:.6}) Tw {:.6} Wr {:.6} |SL-Tw-Wr| {:.1e}",
                    t.sl, t.sl_value, t.twist, t.writhe, t.white_residual
                );
            }
            None => {
                let _ = writeln!(s, "curve {i}: unframed");
            }
        }
    }
    for t in &d.targets {
        let _ = writeln!(
            s,
            "curves {:?}: H_link_sum {} -> {}",
            t.curves,
            fmt_opt(t.h_link_sum),
            t.h_rounded.map_or("-".into(), |h| h.to_string())
        );
    }
    s
}

pub fn cmd_verify(settings: &VerifySettings, out: Option<&Path>, json: bool) -> Result<Outcome> {
    let report = run_verification(settings)?;
    emit(&report, out, json, || verify_summary(&report))?;
    Ok(if report.passed() { Outcome::Ok } else { Outcome::Flagged })
}

fn verify_summary(r: &VerifyReport) -> String {
    let mut s = String::new();
    for c in &r.criteria {
        let _ = writeln!(
            s,
            "[{}] {}. {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
    }
    s.push('\n');
    s.push_str(&format_convergence(
        &r.convergence,
        r.settings.coarse_grid,
        r.settings.grid,
    ));
    s
}

/// Sample a preset onto a box and save it as a field file.
pub fn cmd_sample(preset: &str, half_width: f64, cells: usize, encoding: DataEncoding, out: &Path) -> Result<Outcome> {
    let p: Preset = preset.parse()?;
    let field = SpinorField::preset(p)?;
    let grid = BoxGrid::cube(half_width, cells + 1)?;
    let sampled = SampledField::sample(&field, grid, &StereoChart::identity())?;
    sampled.save(out, encoding)?;
    println!(
        "wrote {}^3 nodes on [-{half_width}, {half_width}]^3 to {} (boundary deviation {:.2e})",
        cells + 1,
        out.display(),
        sampled.boundary_deviation()
    );
    Ok(Outcome::Ok)
}
