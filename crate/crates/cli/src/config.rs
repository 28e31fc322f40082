//! Experiment configuration: parsing, defaults and validation.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use pointint::birman::Potential;
use pointint::gamma::PointConfig;
use pointint::geom::Vec3;
use pointint::packet::{BumpProfile, WavePacket};
use serde::{Deserialize, Serialize};

/// A configuration problem, located by its field path.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
    pub position: Option<(usize, usize)>,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into(), position: None }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() || self.path == "." { "<root>" } else { &self.path };
        write!(f, "config error at `{path}`: {}", self.message)?;
        if let Some((line, col)) = self.position {
            write!(f, " (line {line}, column {col})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Spectrum,
    GammaScan,
    Waveop,
    Threshold,
    ScalingSweep,
    Identities,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spectrum => "spectrum",
            Scenario::GammaScan => "gamma-scan",
            Scenario::Waveop => "waveop",
            Scenario::Threshold => "threshold",
            Scenario::ScalingSweep => "scaling-sweep",
            Scenario::Identities => "identities",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsSpec {
    pub centers: Vec<Vec3>,
    pub strengths: Vec<f64>,
}

impl Default for PointsSpec {
    fn default() -> Self {
        PointsSpec { centers: vec![[0.0; 3]], strengths: vec![-1.0 / (4.0 * PI)] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub inner: f64,
    pub outer: f64,
    #[serde(default)]
    pub center: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<Vec3>,
    #[serde(default = "default_sharpness")]
    pub sharpness: f64,
}

fn default_sharpness() -> f64 {
    8.0
}

impl PacketSpec {
    fn shell(center: Vec3) -> Self {
        PacketSpec { inner: 1.0, outer: 2.0, center, momentum: None, sharpness: 8.0 }
    }

    pub fn build(&self) -> Result<WavePacket, String> {
        if self.sharpness.is_nan() || self.sharpness <= 0.0 {
            return Err("sharpness must be positive".into());
        }
        let profile = BumpProfile::new(self.inner, self.outer).map_err(|e| e.to_string())?.with_sharpness(self.sharpness);
        match self.momentum {
            None => Ok(WavePacket::radial(profile, self.center)),
            Some(p) => WavePacket::modulated(profile, self.center, p).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSpec {
    pub kappa_max: f64,
    /// Expected decay rates, compared in ascending order when present.
    pub expected_kappa: Vec<f64>,
    pub tolerance: f64,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec { kappa_max: 10.0, expected_kappa: Vec::new(), tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomConfigs {
    pub count: usize,
    pub max_centers: usize,
    /// Centres are drawn from `[-half_width, half_width]^3`.
    pub half_width: f64,
    pub min_separation: f64,
    pub alpha_range: [f64; 2],
}

impl Default for RandomConfigs {
    fn default() -> Self {
        RandomConfigs { count: 20, max_centers: 4, half_width: 2.0, min_separation: 0.2, alpha_range: [-1.0, 1.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSpec {
    pub k_min: f64,
    pub k_max: f64,
    pub nodes: usize,
    /// Scan seeded random configurations instead of `points`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomConfigs>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { k_min: 0.1, k_max: 10.0, nodes: 2000, random: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionSpec {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveSpec {
    pub packets: Vec<PacketSpec>,
    /// Index pairs `(u, v)` for `<W u, v>`.
    pub pairs: Vec<[usize; 2]>,
    pub direction: DirectionSpec,
    pub isometry_tolerance: f64,
}

impl Default for WaveSpec {
    fn default() -> Self {
        WaveSpec {
            packets: vec![PacketSpec::shell([0.2, 0.0, 0.0]), PacketSpec::shell([0.0, 0.3, 0.0])],
            pairs: vec![[0, 1]],
            direction: DirectionSpec::Plus,
            isometry_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedClass {
    Regular,
    ResonanceOnly,
    EigenvalueOnly,
    Mixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSpec {
    pub potential: String,
    pub slope: f64,
    pub resolutions: Vec<usize>,
    /// Replace the depth by the critical depth of the finest grid.
    pub tune_critical: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<ExpectedClass>,
    /// Radii at which `r u(r)` of the resonance function is reported.
    pub profile_radii: Vec<f64>,
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec {
            potential: format!("well({},1)", PI * PI / 4.0),
            slope: -1.0,
            resolutions: vec![12, 16],
            tune_critical: false,
            expect: None,
            profile_radii: vec![2.0, 5.0, 10.0, 30.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Wavenumber as `[re, im]`, `im > 0`.
    pub k: [f64; 2],
    pub packet: usize,
    pub points: Vec<Vec3>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub centers: Vec<Vec3>,
    /// One label per centre, or a single label used at every centre.
    pub potentials: Vec<String>,
    /// One slope per centre, or a single slope used at every centre.
    pub slopes: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub tune_critical: bool,
    pub epsilons: Vec<f64>,
    pub packets: Vec<PacketSpec>,
    pub pairs: Vec<[usize; 2]>,
    /// `null` switches the resolvent probe off.
    pub resolvent: Option<ProbeSpec>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            centers: vec![[0.0; 3], [1.0, 0.0, 0.0]],
            potentials: vec!["well(1,0.25)".into()],
            slopes: vec![-1.0],
            resolutions: vec![8, 10],
            tune_critical: true,
            epsilons: vec![0.4, 0.2, 0.1, 0.05],
            packets: vec![PacketSpec::shell([0.0; 3])],
            pairs: vec![[0, 0]],
            resolvent: Some(ProbeSpec {
                k: [0.0, 2.0],
                packet: 0,
                points: vec![[0.5, 1.0, 0.0], [1.5, 0.5, -0.5], [-0.5, -0.5, 0.5], [3.0, 0.0, 0.0]],
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitySpec {
    pub trials: usize,
    pub tolerance: f64,
}

impl Default for IdentitySpec {
    fn default() -> Self {
        IdentitySpec { trials: 50, tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<PointsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveop: Option<WaveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitySpec>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::at("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let position = (inner.line() > 0).then(|| (inner.line(), inner.column()));
        let mut msg = inner.to_string();
        // serde_json appends its own position; it is reported separately
        if let Some(cut) = msg.rfind(" at line ") {
            msg.truncate(cut);
        }
        ConfigError { path, message: msg, position }
    })?;
    let resolved = cfg.resolve();
    resolved.validate()?;
    Ok(resolved)
}

fn check(ok: bool, path: &str, message: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::at(path, message()))
    }
}

fn check_ladder(path: &str, res: &[usize]) -> Result<(), ConfigError> {
    check(!res.is_empty(), path, || "resolution ladder is empty".into())?;
    check(res.iter().all(|r| (4..=40).contains(r)), path, || "resolutions must lie in 4..=40".into())?;
    check(res.windows(2).all(|w| w[0] < w[1]), path, || "resolutions must increase".into())
}

fn check_packets(path: &str, packets: &[PacketSpec], pairs: &[[usize; 2]]) -> Result<(), ConfigError> {
    for (i, p) in packets.iter().enumerate() {
        p.build().map_err(|m| ConfigError::at(format!("{path}.packets[{i}]"), m))?;
    }
    for (i, [u, v]) in pairs.iter().enumerate() {
        check(*u < packets.len() && *v < packets.len(), &format!("{path}.pairs[{i}]"), || {
            format!("packet index out of range (have {} packets)", packets.len())
        })?;
    }
    Ok(())
}

fn broadcast<T: Clone>(values: &[T], n: usize) -> Vec<T> {
    if values.len() == 1 {
        vec![values[0].clone(); n]
    } else {
        values.to_vec()
    }
}

impl ExperimentConfig {
    /// Fills in the section of the chosen scenario and drops the others.
    fn resolve(self) -> Self {
        let s = self.scenario;
        let needs_points = match s {
            Scenario::Spectrum | Scenario::Waveop => true,
            Scenario::GammaScan => self.gamma_scan.as_ref().is_none_or(|g| g.random.is_none()),
            _ => false,
        };
        ExperimentConfig {
            scenario: s,
            seed: self.seed,
            out: self.out,
            points: needs_points.then(|| self.points.unwrap_or_default()),
            spectrum: (s == Scenario::Spectrum).then(|| self.spectrum.unwrap_or_default()),
            gamma_scan: (s == Scenario::GammaScan).then(|| self.gamma_scan.clone().unwrap_or_default()),
            waveop: (s == Scenario::Waveop).then(|| self.waveop.unwrap_or_default()),
            threshold: (s == Scenario::Threshold).then(|| self.threshold.unwrap_or_default()),
            sweep: (s == Scenario::ScalingSweep).then(|| self.sweep.unwrap_or_default()),
            identities: (s == Scenario::Identities).then(|| self.identities.unwrap_or_default()),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if let Some(p) = &self.points {
            check(p.centers.len() == p.strengths.len(), "points.strengths", || {
                format!("{} strengths for {} centres", p.strengths.len(), p.centers.len())
            })?;
            PointConfig::new(p.centers.clone(), p.strengths.clone()).map_err(|e| ConfigError::at("points", e.to_string()))?;
        }
        if let Some(s) = &self.spectrum {
            check(s.kappa_max > 0.0 && s.kappa_max.is_finite(), "spectrum.kappa_max", || "must be positive".into())?;
            check(s.tolerance > 0.0, "spectrum.tolerance", || "must be positive".into())?;
        }
        if let Some(g) = &self.gamma_scan {
            check(g.k_min > 0.0 && g.k_max > g.k_min, "gamma_scan.k_min", || "need 0 < k_min < k_max".into())?;
            check(g.nodes >= 2, "gamma_scan.nodes", || "need at least 2 nodes".into())?;
            if let Some(r) = &g.random {
                check(r.count >= 1, "gamma_scan.random.count", || "must be at least 1".into())?;
                check((1..=16).contains(&r.max_centers), "gamma_scan.random.max_centers", || "must lie in 1..=16".into())?;
                check(r.half_width > 0.0, "gamma_scan.random.half_width", || "must be positive".into())?;
                check(
                    r.min_separation > 0.0 && r.min_separation < r.half_width,
                    "gamma_scan.random.min_separation",
                    || "must lie in (0, half_width)".into(),
                )?;
                check(r.alpha_range[0] < r.alpha_range[1], "gamma_scan.random.alpha_range", || "must be increasing".into())?;
            }
        }
        if let Some(w) = &self.waveop {
            check(!w.packets.is_empty(), "waveop.packets", || "need at least one packet".into())?;
            check_packets("waveop", &w.packets, &w.pairs)?;
            check(w.isometry_tolerance > 0.0, "waveop.isometry_tolerance", || "must be positive".into())?;
        }
        if let Some(t) = &self.threshold {
            Potential::parse(&t.potential).map_err(|e| ConfigError::at("threshold.potential", e.to_string()))?;
            check(t.slope.is_finite(), "threshold.slope", || "must be finite".into())?;
            check_ladder("threshold.resolutions", &t.resolutions)?;
            check(t.profile_radii.iter().all(|r| *r > 0.0), "threshold.profile_radii", || "radii must be positive".into())?;
        }
        if let Some(s) = &self.sweep {
            let n = s.centers.len();
            check(n >= 1, "sweep.centers", || "need at least one centre".into())?;
            check(s.potentials.len() == 1 || s.potentials.len() == n, "sweep.potentials", || {
                format!("need 1 or {n} labels, got {}", s.potentials.len())
            })?;
            check(s.slopes.len() == 1 || s.slopes.len() == n, "sweep.slopes", || {
                format!("need 1 or {n} slopes, got {}", s.slopes.len())
            })?;
            for (i, l) in s.potentials.iter().enumerate() {
                Potential::parse(l).map_err(|e| ConfigError::at(format!("sweep.potentials[{i}]"), e.to_string()))?;
            }
            check_ladder("sweep.resolutions", &s.resolutions)?;
            check(s.epsilons.len() >= 3, "sweep.epsilons", || "need at least 3 values".into())?;
            check(s.epsilons.iter().all(|e| *e > 0.0 && *e <= 1.0), "sweep.epsilons", || "values must lie in (0, 1]".into())?;
            check_packets("sweep", &s.packets, &s.pairs)?;
            check(!s.pairs.is_empty() || s.resolvent.is_some(), "sweep", || "nothing to measure: no pairs and no resolvent probe".into())?;
            if let Some(r) = &s.resolvent {
                check(r.k[1] > 0.0 && r.k[0].is_finite(), "sweep.resolvent.k", || "need Im k > 0".into())?;
                check(r.packet < s.packets.len(), "sweep.resolvent.packet", || "packet index out of range".into())?;
                check(!r.points.is_empty(), "sweep.resolvent.points", || "need at least one point".into())?;
            }
        }
        if let Some(i) = &self.identities {
            check(i.trials >= 1, "identities.trials", || "must be at least 1".into())?;
            check(i.tolerance > 0.0, "identities.tolerance", || "must be positive".into())?;
        }
        Ok(())
    }

    pub fn point_config(&self) -> Option<PointConfig> {
        self.points.as_ref().map(|p| PointConfig::new(p.centers.clone(), p.strengths.clone()).expect("validated"))
    }
}

impl SweepSpec {
    pub fn potential_labels(&self) -> Vec<String> {
        broadcast(&self.potentials, self.centers.len())
    }

    pub fn slope_list(&self) -> Vec<f64> {
        broadcast(&self.slopes, self.centers.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_the_chosen_section_only() {
        let c = parse(r#"{"scenario": "scaling-sweep"}"#).unwrap();
        assert!(c.sweep.is_some() && c.spectrum.is_none() && c.points.is_none());
        assert_eq!(c.sweep.unwrap().epsilons, vec![0.4, 0.2, 0.1, 0.05]);
    }

    #[test]
    fn unknown_field_is_located() {
        let e = parse("{\n  \"scenario\": \"spectrum\",\n  \"spectrum\": {\"kappa_maxx\": 3}\n}").unwrap_err();
        assert_eq!(e.path, "spectrum.kappa_maxx");
        assert_eq!(e.position.map(|p| p.0), Some(3));
    }

    #[test]
    fn bad_scenario_is_rejected() {
        let e = parse(r#"{"scenario": "spectra"}"#).unwrap_err();
        assert_eq!(e.path, "scenario");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let e = parse(r#"{"scenario": "scaling-sweep", "sweep": {"epsilons": [0.1, 0.05]}}"#).unwrap_err();
        assert_eq!(e.path, "sweep.epsilons");
        let e = parse(r#"{"scenario": "threshold", "threshold": {"potential": "square(1,2)"}}"#).unwrap_err();
        assert_eq!(e.path, "threshold.potential");
        let e = parse(r#"{"scenario": "waveop", "waveop": {"packets": [{"inner": 1, "outer": 2}], "pairs": [[0, 3]]}}"#)
            .unwrap_err();
        assert_eq!(e.path, "waveop.pairs[0]");
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = parse(r#"{"scenario": "waveop", "seed": 4}"#).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let again = parse(&text).unwrap();
        assert_eq!(serde_json::to_string(&again).unwrap(), text);
    }
}
