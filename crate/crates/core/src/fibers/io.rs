//! JSON curve files.
//!
//! ```json
//! { "format": "hopf-curves", "version": 1,
//!   "curves": [ { "points": [[x, y, z], ...], "closed": true, "winding": 1,
//!                 "target": [0, 0, 1], "framing": [[dx, dy, dz], ...] } ],
//!   "metadata": [ ... ] }
//! ```
//!
//! `framing` is optional: one unit normal per point, pointing at the
//! push-off curve used for self-linking.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::trace::{ExtractionMetadata, FiberCurve, KnotFamily};
use crate::error::{HopfError, Result};
use crate::geometry::Vec3;

pub const CURVE_FORMAT: &str = "hopf-curves";
pub const CURVE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub points: Vec<Vec3>,
    pub closed: bool,
    #[serde(default = "default_winding")]
    pub winding: i32,
    #[serde(default)]
    pub target: Option<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub framing: Option<Vec<Vec3>>,
}

fn default_winding() -> i32 {
    1
}

impl CurveRecord {
    pub fn from_curve(curve: &FiberCurve, framing: Option<Vec<Vec3>>) -> Self {
        Self {
            points: curve.points.clone(),
            closed: curve.closed,
            winding: curve.winding,
            target: Some(curve.target),
            framing,
        }
    }

    pub fn to_curve(&self) -> FiberCurve {
        FiberCurve {
            points: self.points.clone(),
            closed: self.closed,
            winding: self.winding,
            target: self.target.unwrap_or_else(Vec3::zeros),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub format: String,
    pub version: u32,
    pub curves: Vec<CurveRecord>,
    #[serde(default)]
    pub metadata: Vec<ExtractionMetadata>,
}

impl CurveFile {
    pub fn new(curves: Vec<CurveRecord>, metadata: Vec<ExtractionMetadata>) -> Self {
        Self {
            format: CURVE_FORMAT.into(),
            version: CURVE_FORMAT_VERSION,
            curves,
            metadata,
        }
    }

    /// All curves of the families, closed ones first, framings attached
    /// where given (indexed like the closed curves of each family).
    pub fn from_families(families: &[KnotFamily], framings: &[Vec<Option<Vec<Vec3>>>]) -> Self {
        let mut curves = Vec::new();
        for (i, fam) in families.iter().enumerate() {
            for (k, c) in fam.curves.iter().enumerate() {
                let fr = framings.get(i).and_then(|f| f.get(k)).cloned().flatten();
                curves.push(CurveRecord::from_curve(c, fr));
            }
            for c in &fam.open_curves {
                curves.push(CurveRecord::from_curve(c, None));
            }
        }
        Self::new(curves, families.iter().map(|f| f.metadata.clone()).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != CURVE_FORMAT {
            return Err(HopfError::Format(format!("unexpected format tag {:?}", self.format)));
        }
        if self.version != CURVE_FORMAT_VERSION {
            return Err(HopfError::Format(format!(
                "unsupported curve file version {}",
                self.version
            )));
        }
        for (i, c) in self.curves.iter().enumerate() {
            if c.points.len() < 2 {
                return Err(HopfError::Format(format!("curve {i} has fewer than two points")));
            }
            if c.points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
                return Err(HopfError::Format(format!("curve {i} has non-finite coordinates")));
            }
            if let Some(f) = &c.framing {
                if f.len() != c.points.len() {
                    return Err(HopfError::Format(format!(
                        "curve {i}: framing has {} vectors for {} points",
                        f.len(),
                        c.points.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: CurveFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        file.validate()?;
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_rejections() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let rec = CurveRecord {
            points: vec![
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(-1.0, 0.0, 0.0),
            ],
            closed: true,
            winding: -1,
            target: Some(Vec3::z()),
            framing: None,
        };
        let file = CurveFile::new(vec![rec], Vec::new());
        file.save(&path).unwrap();
        assert_eq!(CurveFile::load(&path).unwrap(), file);

        std::fs::write(&path, r#"{"format":"other","version":1,"curves":[]}"#).unwrap();
        assert!(matches!(CurveFile::load(&path), Err(HopfError::Format(_))));
        std::fs::write(
            &path,
            r#"{"format":"hopf-curves","version":1,"curves":[{"points":[[0,0,0]],"closed":true}]}"#,
        )
        .unwrap();
        assert!(CurveFile::load(&path).is_err());
    }
}
