use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

use hopf_core::fibers::{target_from_angles, ExtractionOptions};
use hopf_core::fields::{OutsidePolicy, Preset, SampledField, SpinorField};
use hopf_core::geometry::Vec3;
use hopf_core::invariant::Method;
use hopf_core::links::LinkingRule;
use hopf_core::report::RunSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    SolidAngle,
    Midpoint,
}

impl From<RuleArg> for LinkingRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::SolidAngle => LinkingRule::SolidAngle,
            RuleArg::Midpoint => LinkingRule::Midpoint,
        }
    }
}

/// Where the field comes from.
#[derive(Debug, Clone, Default, Args)]
pub struct FieldArgs {
    /// Analytic preset: constant, hopf, twisted:P,Q, power:N
    #[arg(long, value_name = "NAME[:PARAMS]")]
    pub preset: Option<String>,
    /// Sampled field file
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// TOML file with defaults for any flag; flags given on the command line win
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Write the machine-readable report here
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Print the report as JSON instead of the text summary
    #[arg(long)]
    pub json: bool,
    /// Leave out timings so the report is byte-reproducible
    #[arg(long)]
    pub deterministic: bool,
}

/// Method and resolution flags shared by `hopf` and `fibers`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// S³ quadrature resolution, one value or three (η, ξ1, ξ2)
    #[arg(long, value_name = "N[,N,N]")]
    pub grid: Option<String>,
    /// Targets on S² as polar,azimuth pairs
    #[arg(long, value_name = "θ,φ;...")]
    pub targets: Option<String>,
    /// Comma-separated methods or `all`
    #[arg(long, value_name = "LIST")]
    pub methods: Option<String>,
    /// Largest accepted distance of an estimate from its integer [default: 0.1]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Box cells per axis for fiber tracing on presets [default: 64]
    #[arg(long)]
    pub fiber_cells: Option<usize>,
    /// Tilt of the push-off target in radians [default: 0.1]
    #[arg(long)]
    pub pushoff_angle: Option<f64>,
    /// Gauss linking quadrature
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    /// Fewest segments on a traced fiber [default: 256]
    #[arg(long)]
    pub min_segments: Option<usize>,
    /// Retries with a jittered target when a target is not regular [default: 8]
    #[arg(long)]
    pub jitter_budget: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridValue {
    One(usize),
    Three([usize; 3]),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    preset: Option<String>,
    input: Option<PathBuf>,
    grid: Option<GridValue>,
    targets: Option<Vec<[f64; 2]>>,
    methods: Option<Vec<String>>,
    tol: Option<f64>,
    fiber_cells: Option<usize>,
    pushoff_angle: Option<f64>,
    rule: Option<RuleArg>,
    min_segments: Option<usize>,
    jitter_budget: Option<usize>,
    deterministic: Option<bool>,
    json: Option<bool>,
    out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone)]
pub enum FieldSource {
    Preset(String),
    Input(PathBuf),
}

impl FieldSource {
    pub fn label(&self) -> String {
        match self {
            FieldSource::Preset(p) => p.clone(),
            FieldSource::Input(p) => p.display().to_string(),
        }
    }

    pub fn load(&self) -> Result<SpinorField> {
        match self {
            FieldSource::Preset(p) => {
                let preset: Preset = p.parse()?;
                Ok(SpinorField::preset(preset)?)
            }
            FieldSource::Input(path) => {
                let s = SampledField::load(path)
                    .with_context(|| format!("loading field {}", path.display()))?
                    .with_outside_policy(OutsidePolicy::BoundaryValue);
                if let Err(e) = s.check_boundary(1e-3) {
                    log::warn!("{e}; the field is not constant at infinity and fibers may leave the box");
                }
                Ok(SpinorField::Sampled(s))
            }
        }
    }
}

/// Everything a run needs once flags and config are merged.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: FieldSource,
    pub settings: RunSettings,
    pub out: Option<PathBuf>,
    pub json: bool,
}

pub fn field_source(args: &FieldArgs, cfg: &ConfigFile) -> Result<FieldSource> {
    let preset = args
        .preset
        .clone()
        .or_else(|| if args.input.is_some() { None } else { cfg.preset.clone() });
    let input = args
        .input
        .clone()
        .or_else(|| if args.preset.is_some() { None } else { cfg.input.clone() });
    match (preset, input) {
        (Some(p), None) => Ok(FieldSource::Preset(p)),
        (None, Some(i)) => Ok(FieldSource::Input(i)),
        (Some(_), Some(_)) => bail!("give either --preset or --input, not both"),
        (None, None) => bail!("no field given; use --preset or --input"),
    }
}

pub fn parse_grid(s: &str) -> Result<[usize; 3]> {
    let parts = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .with_context(|| format!("bad grid size {p:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    match parts.as_slice() {
        [n] => Ok([*n; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => bail!("--grid takes one or three sizes, got {s:?}"),
    }
}

pub fn parse_targets(s: &str) -> Result<Vec<Vec3>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(',')
                .with_context(|| format!("target {pair:?} is not a θ,φ pair"))?;
            let theta: f64 = a.trim().parse().with_context(|| format!("bad polar angle {a:?}"))?;
            let phi: f64 = b.trim().parse().with_context(|| format!("bad azimuth {b:?}"))?;
            Ok(target_from_angles(theta, phi))
        })
        .collect()
}

pub fn parse_methods<S: AsRef<str>>(items: &[S]) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for item in items {
        let item = item.as_ref().trim();
        if item == "all" {
            out.extend(Method::ALL);
            continue;
        }
        let m: Method = item.parse()?;
        out.push(m);
    }
    let mut seen = Vec::new();
    out.retain(|m| {
        let fresh = !seen.contains(m);
        seen.push(*m);
        fresh
    });
    if out.is_empty() {
        bail!("no methods selected");
    }
    Ok(out)
}

impl RunConfig {
    pub fn merge(args: &RunArgs, cfg: &ConfigFile) -> Result<Self> {
        let source = field_source(&args.field, cfg)?;
        let mut s = RunSettings::default();
        if let Some(g) = &args.grid {
            s.grid = parse_grid(g)?;
        } else if let Some(g) = &cfg.grid {
            s.grid = match g {
                GridValue::One(n) => [*n; 3],
                GridValue::Three(v) => *v,
            };
        }
        if let Some(t) = &args.targets {
            s.targets = parse_targets(t)?;
        } else if let Some(t) = &cfg.targets {
            s.targets = t.iter().map(|[a, b]| target_from_angles(*a, *b)).collect();
        }
        if s.targets.is_empty() {
            bail!("no targets given");
        }
        if let Some(m) = &args.methods {
            s.methods = parse_methods(&m.split(',').collect::<Vec<_>>())?;
        } else if let Some(m) = &cfg.methods {
            s.methods = parse_methods(m)?;
        }
        s.tol = args.tol.or(cfg.tol).unwrap_or(s.tol);
        s.fiber_cells = args.fiber_cells.or(cfg.fiber_cells).unwrap_or(s.fiber_cells);
        s.pushoff_angle = args.pushoff_angle.or(cfg.pushoff_angle).unwrap_or(s.pushoff_angle);
        if let Some(r) = args.rule.or(cfg.rule) {
            s.linking_rule = r.into();
        }
        let mut ex = ExtractionOptions::default();
        ex.min_segments = args.min_segments.or(cfg.min_segments).unwrap_or(ex.min_segments);
        ex.jitter_budget = args.jitter_budget.or(cfg.jitter_budget).unwrap_or(ex.jitter_budget);
        s.extraction = ex;
        s.deterministic = args.output.deterministic || cfg.deterministic.unwrap_or(false);
        if !(s.tol > 0.0 && s.tol < 0.5) {
            bail!("--tol must lie in (0, 0.5), got {}", s.tol);
        }
        if !(s.pushoff_angle > 0.0 && s.pushoff_angle < 1.0) {
            bail!("--pushoff-angle must lie in (0, 1), got {}", s.pushoff_angle);
        }
        Ok(Self {
            source,
            settings: s,
            out: args.output.out.clone().or_else(|| cfg.out.clone()),
            json: args.output.json || cfg.json.unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("32").unwrap(), [32; 3]);
        assert_eq!(parse_grid("16, 32,48").unwrap(), [16, 32, 48]);
        assert!(parse_grid("16,32").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn targets_and_methods() {
        let t = parse_targets("0,0; 1.5707963267948966,0").unwrap();
        assert_eq!(t.len(), 2);
        assert!((t[0] - Vec3::z()).norm() < 1e-12);
        assert!((t[1] - Vec3::x()).norm() < 1e-12);
        assert!(parse_targets("1.0").is_err());
        let m = parse_methods(&["links", "whitehead", "links"]).unwrap();
        assert_eq!(m, vec![Method::LinkSum, Method::Whitehead]);
        assert_eq!(parse_methods(&["all"]).unwrap().len(), 5);
        assert!(parse_methods(&["nope"]).is_err());
    }

    #[test]
    fn flags_override_config() {
        let cfg: ConfigFile = toml::from_str(
            "preset = \"hopf\"\ngrid = [8, 16, 24]\nmethods = [\"whitehead\"]\ntol = 0.2\nrule = \"midpoint\"\n",
        )
        .unwrap();
        let args = RunArgs {
            grid: Some("12".into()),
            ..Default::default()
        };
        let rc = RunConfig::merge(&args, &cfg).unwrap();
        assert_eq!(rc.settings.grid, [12; 3]);
        assert_eq!(rc.settings.methods, vec![Method::Whitehead]);
        assert_eq!(rc.settings.tol, 0.2);
        assert_eq!(rc.settings.linking_rule, LinkingRule::Midpoint);
        assert!(matches!(rc.source, FieldSource::Preset(ref p) if p == "hopf"));

        let args = RunArgs {
            field: FieldArgs {
                input: Some("f.json".into()),
                ..Default::default()
            },
            ..Default::default()
        };
        let rc = RunConfig::merge(&args, &cfg).unwrap();
        assert!(matches!(rc.source, FieldSource::Input(_)));
    }

    #[test]
    fn field_source_is_exclusive() {
        let cfg = ConfigFile::default();
        let both = FieldArgs {
            preset: Some("hopf".into()),
            input: Some("x".into()),
            config: None,
        };
        assert!(field_source(&both, &cfg).is_err());
        assert!(field_source(&FieldArgs::default(), &cfg).is_err());
        assert!(toml::from_str::<ConfigFile>("colour = 1").is_err());
    }
}
