//! Running a set of methods on one field and collecting the results.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{HopfError, Result};
use crate::fibers::{auto_domain, extract_fibers, ExtractionOptions, FiberDomain, KnotFamily};
use crate::fields::SpinorField;
use crate::geometry::{S3Grid, Vec3, Vec4};
use crate::invariant::{
    default_regular_value, gauss_degree_integral, gauss_degree_integral_box, hopf_whitehead, hopf_whitehead_box,
    preimage_estimate, HopfEstimate, Method, PreimageCount,
};
use crate::links::{hopf_from_links, hopf_loop_integral, pushoff_framing, FramedCurve, LinkReport, LinkingRule};

pub const REPORT_SCHEMA: &str = "hopf-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    /// S³ quadrature resolution (η, ξ1, ξ2).
    pub grid: [usize; 3],
    /// Box cells per axis for fiber extraction on presets.
    pub fiber_cells: usize,
    pub targets: Vec<Vec3>,
    pub methods: Vec<Method>,
    /// Tilt angle of the push-off target on S².
    pub pushoff_angle: f64,
    pub linking_rule: LinkingRule,
    pub regular_value: Vec4,
    pub extraction: ExtractionOptions,
    /// Largest tolerated distance of an estimate from its integer.
    pub tol: f64,
    /// Omit wall-clock timings so reports are byte-reproducible.
    pub deterministic: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            grid: [64, 64, 64],
            fiber_cells: 64,
            targets: vec![default_target()],
            methods: Method::ALL.to_vec(),
            pushoff_angle: 0.1,
            linking_rule: LinkingRule::SolidAngle,
            regular_value: default_regular_value(),
            extraction: ExtractionOptions::default(),
            tol: 0.1,
            deterministic: false,
        }
    }
}

/// Generic target with no alignment to the presets' symmetry axes.
pub fn default_target() -> Vec3 {
    crate::fibers::target_from_angles(1.1, 0.7)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEntry {
    #[serde(flatten)]
    pub estimate: HopfEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec3>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub target: Vec3,
    pub requested_target: Vec3,
    pub closed_curves: usize,
    pub open_curves: usize,
    pub windings: Vec<i32>,
    pub lengths: Vec<f64>,
    pub segments: Vec<usize>,
}

impl FamilySummary {
    pub fn of(f: &KnotFamily) -> Self {
        Self {
            target: f.target,
            requested_target: f.metadata.requested_target,
            closed_curves: f.curves.len(),
            open_curves: f.open_curves.len(),
            windings: f.curves.iter().map(|c| c.winding).collect(),
            lengths: f.curves.iter().map(|c| c.length()).collect(),
            segments: f.curves.iter().map(|c| c.segment_count()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfReport {
    pub schema: String,
    pub version: u32,
    pub field: String,
    pub methods: Vec<MethodEntry>,
    /// Common integer of the converged estimates, when they agree.
    pub agreed: Option<i64>,
    pub all_converged: bool,
    /// Largest pairwise difference between estimate values.
    pub max_discrepancy: f64,
    pub fibers: Vec<FamilySummary>,
    pub links: Vec<LinkReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preimages: Option<PreimageCount>,
}

impl HopfReport {
    pub fn agrees(&self) -> bool {
        self.agreed.is_some()
    }

    pub fn has_open_curves(&self) -> bool {
        self.fibers.iter().any(|f| f.open_curves > 0)
    }
}

/// Fiber families and their push-off framings for each target.
pub struct FramedFamilies {
    pub domain: FiberDomain,
    pub families: Vec<KnotFamily>,
    pub framed: Vec<Vec<FramedCurve>>,
}

/// Extract and frame fibers for every target: in the sampled field's own
/// box, or in an automatic chart and box for fields defined on all of S³.
pub fn framed_families(field: &SpinorField, settings: &RunSettings) -> Result<FramedFamilies> {
    let (domain, families) = match FiberDomain::for_sampled(field) {
        Some(d) => {
            let fams = settings
                .targets
                .iter()
                .map(|t| extract_fibers(field, &d, t, &settings.extraction))
                .collect::<Result<Vec<_>>>()?;
            (d, fams)
        }
        None => auto_domain(field, &settings.targets, settings.fiber_cells, &settings.extraction)?,
    };
    let framed = families
        .iter()
        .map(|f| pushoff_framing(field, &domain, f, settings.pushoff_angle, &settings.extraction))
        .collect::<Result<Vec<_>>>()?;
    Ok(FramedFamilies {
        domain,
        families,
        framed,
    })
}

fn timed<T>(deterministic: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    let start = Instant::now();
    let v = f()?;
    let ms = (!deterministic).then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok((v, ms))
}

/// Run the selected methods on `field`.
pub fn run_methods(field: &SpinorField, label: &str, settings: &RunSettings) -> Result<HopfReport> {
    if settings.methods.is_empty() {
        return Err(HopfError::InvalidParameter("no methods selected".into()));
    }
    let det = settings.deterministic;
    let want = |m: Method| settings.methods.contains(&m);
    let grid = S3Grid::new(settings.grid[0], settings.grid[1], settings.grid[2])?;
    let sampled = field.as_sampled();
    let mut entries = Vec::new();
    let entry = |estimate, elapsed_ms| MethodEntry {
        estimate,
        target: None,
        elapsed_ms,
    };
    if want(Method::Whitehead) {
        let (e, ms) = timed(det, || match sampled {
            Some(s) => hopf_whitehead_box(field, s.grid(), &Default::default()),
            None => hopf_whitehead(field, &grid),
        })?;
        entries.push(entry(e, ms));
    }
    if want(Method::DegreeIntegral) {
        let (e, ms) = timed(det, || match sampled {
            Some(s) => gauss_degree_integral_box(field, s.grid(), &Default::default()),
            None => gauss_degree_integral(field, &grid),
        })?;
        entries.push(entry(e, ms));
    }
    let mut preimages = None;
    if want(Method::PreimageCount) {
        let ((e, count), ms) = timed(det, || {
            preimage_estimate(
                field,
                &settings.regular_value,
                &grid,
                settings.extraction.jitter_seed,
                8,
            )
        })?;
        entries.push(entry(e, ms));
        preimages = Some(count);
    }
    let mut fibers = Vec::new();
    let mut links = Vec::new();
    if want(Method::LinkSum) || want(Method::LoopIntegral) {
        let (ff, ms) = timed(det, || framed_families(field, settings))?;
        if let Some(ms) = ms {
            log::info!("fiber extraction and framing took {ms:.0} ms");
        }
        for (fam, framed) in ff.families.iter().zip(&ff.framed) {
            fibers.push(FamilySummary::of(fam));
            if !fam.is_complete() {
                log::warn!(
                    "target {:?}: {} open curve(s) excluded; linking estimates skipped",
                    fam.target.as_slice(),
                    fam.open_curves.len()
                );
                continue;
            }
            if want(Method::LinkSum) {
                let (rep, ms) = timed(det, || hopf_from_links(framed, settings.linking_rule))?;
                let value = rep.h_link_sum.unwrap_or(0.0);
                let segs: usize = fam.curves.iter().map(|c| c.segment_count()).sum();
                entries.push(MethodEntry {
                    estimate: HopfEstimate::new(
                        Method::LinkSum,
                        value,
                        format!("{} curves, {} segments", fam.curves.len(), segs),
                    ),
                    target: Some(fam.target),
                    elapsed_ms: ms,
                });
                links.push(rep);
            }
            if want(Method::LoopIntegral) {
                let (e, ms) = timed(det, || hopf_loop_integral(framed))?;
                entries.push(MethodEntry {
                    estimate: e,
                    target: Some(fam.target),
                    elapsed_ms: ms,
                });
            }
        }
    }
    Ok(assemble(label, entries, fibers, links, preimages, settings.tol))
}

fn assemble(
    label: &str,
    methods: Vec<MethodEntry>,
    fibers: Vec<FamilySummary>,
    links: Vec<LinkReport>,
    preimages: Option<PreimageCount>,
    tol: f64,
) -> HopfReport {
    let all_converged = methods
        .iter()
        .all(|m| m.estimate.residual <= tol && m.estimate.value.is_finite());
    let converged: Vec<&HopfEstimate> = methods
        .iter()
        .map(|m| &m.estimate)
        .filter(|e| e.residual <= tol)
        .collect();
    let agreed = match converged.first() {
        Some(first) if converged.iter().all(|e| e.rounded == first.rounded) => Some(first.rounded),
        _ => None,
    };
    let mut max_discrepancy: f64 = 0.0;
    for a in &methods {
        for b in &methods {
            max_discrepancy = max_discrepancy.max((a.estimate.value - b.estimate.value).abs());
        }
    }
    HopfReport {
        schema: REPORT_SCHEMA.into(),
        version: REPORT_VERSION,
        field: label.into(),
        methods,
        agreed,
        all_converged,
        max_discrepancy,
        fibers,
        links,
        preimages,
    }
}
