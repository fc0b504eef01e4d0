//! JSON configuration for the `pipeline` subcommand.
//!
//! Relative paths are resolved against the directory holding the config
//! file. A stage runs when its section is present and `enabled` is not
//! false; stages always run in the order intercalibration, saturation,
//! blooming.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::synth::SynthDocument;

fn yes() -> bool {
    true
}

fn default_threshold() -> f64 {
    crate::desat::SATURATION_DN
}

fn default_quantile() -> f64 {
    0.9
}

fn default_min_radiance() -> f64 {
    1e-3
}

fn default_pseudo_max() -> f64 {
    10.0
}

fn default_min_bg() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LightStatistic {
    #[default]
    Sum,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntercalibrationSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    pub reference: PathBuf,
    pub mask: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturationSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    pub radiance: PathBuf,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
    #[serde(default = "default_min_radiance")]
    pub min_radiance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BloomSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    pub radius: usize,
    #[serde(default)]
    pub background_max: f64,
    #[serde(default = "default_pseudo_max")]
    pub pseudo_max: f64,
    #[serde(default = "default_min_bg")]
    pub min_bg_neighbors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconometricsSection {
    /// Annual light statistic, `year,value` CSV.
    #[serde(default)]
    pub lights: Option<PathBuf>,
    /// Annual GDP, `year,value` CSV.
    pub gdp: PathBuf,
    /// Year of the processed image; its statistic is added to the lights series.
    #[serde(default)]
    pub year: Option<i32>,
    /// Fit on years up to and including this one; later years are scored.
    #[serde(default)]
    pub train_until: Option<i32>,
    #[serde(default)]
    pub base_year: Option<i32>,
    #[serde(default = "yes")]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Pending image. Exactly one of `pending` and `synth` must be set.
    #[serde(default)]
    pub pending: Option<PathBuf>,
    #[serde(default)]
    pub synth: Option<SynthDocument>,
    #[serde(default)]
    pub intercalibration: Option<IntercalibrationSection>,
    #[serde(default)]
    pub saturation: Option<SaturationSection>,
    #[serde(default)]
    pub bloom: Option<BloomSection>,
    #[serde(default)]
    pub lights_statistic: LightStatistic,
    /// Region the light statistic is taken over; whole grid when absent.
    #[serde(default)]
    pub lights_mask: Option<PathBuf>,
    #[serde(default)]
    pub econometrics: Option<EconometricsSection>,
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    /// Makes every relative path absolute with respect to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.pending.as_mut() {
            fix(p);
        }
        if let Some(s) = self.intercalibration.as_mut() {
            fix(&mut s.reference);
            fix(&mut s.mask);
        }
        if let Some(s) = self.saturation.as_mut() {
            fix(&mut s.radiance);
        }
        if let Some(p) = self.lights_mask.as_mut() {
            fix(p);
        }
        if let Some(e) = self.econometrics.as_mut() {
            if let Some(p) = e.lights.as_mut() {
                fix(p);
            }
            fix(&mut e.gdp);
        }
        fix(&mut self.output_dir);
    }

    pub fn validate(&self) -> Result<(), String> {
        match (&self.pending, &self.synth) {
            (Some(_), Some(_)) => return Err("config: set only one of 'pending' and 'synth'".into()),
            (None, None) => return Err("config: one of 'pending' or 'synth' is required".into()),
            _ => {}
        }
        if let Some(s) = &self.saturation {
            if !(s.quantile > 0.0 && s.quantile <= 1.0) {
                return Err(format!("config: saturation.quantile must be in (0, 1], got {}", s.quantile));
            }
        }
        if let Some(b) = &self.bloom {
            if b.radius == 0 {
                return Err("config: bloom.radius must be >= 1".into());
            }
        }
        if let Some(e) = &self.econometrics {
            if e.lights.is_none() && e.year.is_none() {
                return Err("config: econometrics needs 'lights', 'year', or both".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_with_defaults() {
        let c = PipelineConfig::from_json(
            r#"{"pending":"p.asc","bloom":{"radius":5},"output_dir":"out"}"#,
        )
        .unwrap();
        let b = c.bloom.as_ref().unwrap();
        assert!(b.enabled);
        assert_eq!((b.pseudo_max, b.min_bg_neighbors, b.background_max), (10.0, 5, 0.0));
        assert_eq!(c.lights_statistic, LightStatistic::Sum);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(PipelineConfig::from_json(r#"{"pending":"p","output_dir":"o","radius":3}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"pending":"p","output_dir":"o","bloom":{}}"#).is_err());
        let c = PipelineConfig::from_json(
            r#"{"pending":"p","output_dir":"o","saturation":{"radiance":"r","quantile":1.5}}"#,
        )
        .unwrap();
        assert!(c.validate().is_err());
        let c = PipelineConfig::from_json(r#"{"output_dir":"o"}"#).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn resolves_relative_paths() {
        let mut c = PipelineConfig::from_json(
            r#"{"pending":"p.asc","output_dir":"/abs/out","intercalibration":{"reference":"r.asc","mask":"m.asc"}}"#,
        )
        .unwrap();
        c.resolve_paths(Path::new("/cfg"));
        assert_eq!(c.pending.unwrap(), PathBuf::from("/cfg/p.asc"));
        assert_eq!(c.output_dir, PathBuf::from("/abs/out"));
        assert_eq!(c.intercalibration.unwrap().mask, PathBuf::from("/cfg/m.asc"));
    }
}
