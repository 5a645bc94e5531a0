//! TOML run configuration.
//!
//! ```toml
//! [system]
//! charge = 2.0
//! energy = -1.375             # required unless the model is hydrogenic
//! prev_ground_energy = -1.0   # ground energy with one electron removed
//!
//! [model]
//! kind = "orbital-product"    # or "hydrogenic" / "hylleraas"
//! orbitals = [{ n = 1 }, { decay = 1.0, poly = [1.0] }]
//!
//! [quadrature]                # all optional
//! sphere_degree = 17
//! method = "auto"             # "grid" / "monte-carlo"
//! mc_samples = 4096
//! seed = 7                    # required whenever Monte-Carlo is used
//! ```
//!
//! The remaining sections (`radii`, `output`, `jastrow`, `converge`) are
//! optional; see the field documentation below.

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cusp_report::ReportSettings;
use crate::error::{CuspError, Result};
use crate::extrapolate::StepLadder;
use crate::jastrow::SuiteSettings;
use crate::marginal::QuadratureSettings;
use crate::quadrature::{HatGrid, HatMethod, HatSettings, McSampler, SHIPPED_DEGREES};
use crate::wavefunction::{
    hydrogenic_energy, AtomSpec, Configuration, Hylleraas, HylleraasTerm, OrbitalSpec, RadialOrbital,
    WavefunctionModel,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub radii: RadiiConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub jastrow: JastrowConfig,
    #[serde(default)]
    pub converge: ConvergeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub charge: f64,
    pub energy: Option<f64>,
    pub prev_ground_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Hydrogenic {
        n: u32,
        #[serde(default)]
        l: u32,
        #[serde(default)]
        m: i32,
    },
    OrbitalProduct {
        orbitals: Vec<OrbitalEntry>,
    },
    Hylleraas {
        alpha: f64,
        terms: Vec<HylleraasTerm>,
    },
}

/// An orbital given either as a hydrogenic state of the system's charge or
/// explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrbitalEntry {
    Hydrogenic(HydrogenicOrbital),
    Explicit(OrbitalSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydrogenicOrbital {
    pub n: u32,
    #[serde(default)]
    pub l: u32,
    #[serde(default)]
    pub m: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub sphere_degree: u32,
    /// Evaluate spherical averages of s-type models along one direction.
    pub symmetry: bool,
    pub method: HatMethod,
    pub radial_panels: usize,
    pub radial_order: usize,
    pub angular_order: usize,
    pub azimuth_points: usize,
    pub mc_samples: usize,
    pub mc_batches: usize,
    /// Defaults to the slowest orbital decay of the model.
    pub envelope_rate: Option<f64>,
    pub seed: Option<u64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let g = HatGrid::default();
        QuadratureConfig {
            sphere_degree: 17,
            symmetry: true,
            method: HatMethod::Auto,
            radial_panels: g.radial_panels,
            radial_order: g.radial_order,
            angular_order: g.angular_order,
            azimuth_points: g.azimuth_points,
            mc_samples: 4096,
            mc_batches: 32,
            envelope_rate: None,
            seed: None,
        }
    }
}

/// Finite-difference ladder and pointwise check radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiiConfig {
    /// Outermost abscissa of the coarsest stencil.
    pub reach: f64,
    pub halvings: usize,
    pub ion_radii: Vec<f64>,
}

impl Default for RadiiConfig {
    fn default() -> Self {
        RadiiConfig {
            reach: 0.1,
            halvings: 6,
            ion_radii: vec![0.25, 0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JastrowConfig {
    /// Random configurations for the identity suite.
    pub samples: usize,
    pub radius: f64,
    pub min_separation: f64,
    pub fd_step: f64,
    pub apriori_samples: usize,
    pub apriori_inner: f64,
    pub apriori_outer: f64,
    /// Center of the a priori balls; all electrons at the nucleus if absent.
    pub apriori_center: Option<Vec<[f64; 3]>>,
    pub probe_radii: Vec<f64>,
    /// Center of the smoothness probe; electron 1 at the nucleus and the
    /// others at fixed off-nucleus points if absent.
    pub probe_center: Option<Vec<[f64; 3]>>,
}

impl Default for JastrowConfig {
    fn default() -> Self {
        let s = SuiteSettings::default();
        JastrowConfig {
            samples: s.samples,
            radius: s.radius,
            min_separation: s.min_separation,
            fd_step: s.fd_step,
            apriori_samples: 10_000,
            apriori_inner: 1.0,
            apriori_outer: 2.0,
            apriori_center: None,
            probe_radii: vec![1e-1, 1e-2, 1e-3, 1e-4],
            probe_center: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergeMethod {
    #[default]
    MonteCarlo,
    Grid,
}

/// Convergence study of `ρ(x)` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    pub method: ConvergeMethod,
    pub point: [f64; 3],
    pub sample_counts: Vec<usize>,
    /// Radial and angular orders of the grid sequence.
    pub grid_orders: Vec<usize>,
    /// Sampling envelope of the study; the quadrature envelope if absent.
    /// An envelope equal to a product model's own decay gives constant
    /// importance weights and hence no visible convergence.
    pub envelope_rate: Option<f64>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            method: ConvergeMethod::MonteCarlo,
            point: [0.0; 3],
            sample_counts: vec![256, 1024, 4096, 16384, 65536],
            grid_orders: vec![4, 6, 8, 10, 12],
            envelope_rate: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CuspError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn nonzero(name: &str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(CuspError::Config(format!("{name} must be positive")))
    }
}

fn points(v: &[[f64; 3]]) -> Configuration {
    Configuration::new(v.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| CuspError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CuspError::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text).map_err(|e| match e {
            CuspError::Config(m) => CuspError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<()> {
        positive("system.charge", self.system.charge)?;
        let q = &self.quadrature;
        if !SHIPPED_DEGREES.contains(&q.sphere_degree) {
            return Err(CuspError::Config(format!(
                "quadrature.sphere_degree {} is not shipped; choose one of {SHIPPED_DEGREES:?}",
                q.sphere_degree
            )));
        }
        for (name, v) in [
            ("quadrature.radial_panels", q.radial_panels),
            ("quadrature.radial_order", q.radial_order),
            ("quadrature.angular_order", q.angular_order),
            ("quadrature.azimuth_points", q.azimuth_points),
            ("quadrature.mc_samples", q.mc_samples),
            ("quadrature.mc_batches", q.mc_batches),
            ("jastrow.samples", self.jastrow.samples),
            ("jastrow.apriori_samples", self.jastrow.apriori_samples),
        ] {
            nonzero(name, v)?;
        }
        if let Some(r) = q.envelope_rate {
            positive("quadrature.envelope_rate", r)?;
        }
        positive("radii.reach", self.radii.reach)?;
        if self.radii.halvings < 2 {
            return Err(CuspError::Config("radii.halvings must be at least 2".into()));
        }
        for &r in &self.radii.ion_radii {
            positive("radii.ion_radii", r)?;
        }
        let j = &self.jastrow;
        for (name, v) in [
            ("jastrow.radius", j.radius),
            ("jastrow.min_separation", j.min_separation),
            ("jastrow.fd_step", j.fd_step),
            ("jastrow.apriori_inner", j.apriori_inner),
            ("jastrow.apriori_outer", j.apriori_outer),
        ] {
            positive(name, v)?;
        }
        if j.apriori_outer <= j.apriori_inner {
            return Err(CuspError::Config("jastrow.apriori_outer must exceed jastrow.apriori_inner".into()));
        }
        for &r in &j.probe_radii {
            positive("jastrow.probe_radii", r)?;
        }
        if j.probe_radii.is_empty() {
            return Err(CuspError::Config("jastrow.probe_radii must not be empty".into()));
        }
        for &n in &self.converge.sample_counts {
            nonzero("converge.sample_counts", n)?;
        }
        if let Some(r) = self.converge.envelope_rate {
            positive("converge.envelope_rate", r)?;
        }
        for &n in &self.converge.grid_orders {
            nonzero("converge.grid_orders", n)?;
        }
        let n = self.n_electrons();
        for (name, c) in [("jastrow.apriori_center", &j.apriori_center), ("jastrow.probe_center", &j.probe_center)] {
            if let Some(c) = c {
                if c.len() != n {
                    return Err(CuspError::Config(format!("{name} has {} points, the model has {n} electrons", c.len())));
                }
            }
        }
        if !matches!(self.model, ModelConfig::Hydrogenic { .. })
            && (self.system.energy.is_none() || self.system.prev_ground_energy.is_none())
        {
            return Err(CuspError::Config(
                "system.energy and system.prev_ground_energy are required for non-hydrogenic models".into(),
            ));
        }
        if self.uses_monte_carlo() && self.quadrature.seed.is_none() {
            return Err(CuspError::Config(
                "quadrature.seed is required when Monte-Carlo integration is used".into(),
            ));
        }
        Ok(())
    }

    pub fn n_electrons(&self) -> usize {
        match &self.model {
            ModelConfig::Hydrogenic { .. } => 1,
            ModelConfig::OrbitalProduct { orbitals } => orbitals.len(),
            ModelConfig::Hylleraas { .. } => 2,
        }
    }

    /// The hat integrals of the report are sampled.
    pub fn uses_monte_carlo(&self) -> bool {
        match self.quadrature.method {
            HatMethod::MonteCarlo => self.n_electrons() > 1,
            HatMethod::Auto => self.n_electrons() > 2,
            HatMethod::Grid => false,
        }
    }

    pub fn seed(&self) -> u64 {
        self.quadrature.seed.unwrap_or(0)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if seed.is_some() {
            self.quadrature.seed = seed;
        }
        self
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn build_model(&self) -> Result<WavefunctionModel> {
        let z = self.system.charge;
        match &self.model {
            ModelConfig::Hydrogenic { n, l, m } => WavefunctionModel::hydrogenic(*n, *l, *m, z),
            ModelConfig::OrbitalProduct { orbitals } => {
                let orbitals = orbitals
                    .iter()
                    .map(|o| match o {
                        OrbitalEntry::Hydrogenic(h) => RadialOrbital::hydrogenic(h.n, h.l, h.m, z),
                        OrbitalEntry::Explicit(s) => RadialOrbital::from_spec(s),
                    })
                    .collect::<Result<Vec<_>>>()?;
                WavefunctionModel::orbital_product(orbitals, z)
            }
            ModelConfig::Hylleraas { alpha, terms } => {
                WavefunctionModel::hylleraas_helium(Hylleraas::new(*alpha, terms.clone())?, z)
            }
        }
    }

    pub fn build_spec(&self) -> Result<AtomSpec> {
        let z = self.system.charge;
        let (energy, prev) = match (&self.model, self.system.energy, self.system.prev_ground_energy) {
            (ModelConfig::Hydrogenic { n, .. }, e, p) => (e.unwrap_or(hydrogenic_energy(*n, z)?), p.unwrap_or(0.0)),
            (_, Some(e), Some(p)) => (e, p),
            _ => unreachable!("validated on load"),
        };
        AtomSpec::new(self.n_electrons(), z, energy, prev)
    }

    pub fn quadrature_settings(&self, model: &WavefunctionModel) -> QuadratureSettings {
        let q = &self.quadrature;
        let mut sampler = McSampler::new(
            self.seed(),
            q.mc_samples,
            q.envelope_rate.unwrap_or_else(|| model.slowest_decay()),
        );
        sampler.batches = q.mc_batches;
        QuadratureSettings {
            sphere_degree: q.sphere_degree,
            symmetry: q.symmetry,
            hat: HatSettings {
                grid: HatGrid {
                    radial_panels: q.radial_panels,
                    radial_order: q.radial_order,
                    angular_order: q.angular_order,
                    azimuth_points: q.azimuth_points,
                },
                sampler,
                method: q.method,
            },
        }
    }

    pub fn report_settings(&self, model: &WavefunctionModel) -> ReportSettings {
        ReportSettings {
            quadrature: self.quadrature_settings(model),
            ladder: StepLadder::reaching(self.radii.reach, self.radii.halvings),
            ion_radii: self.radii.ion_radii.clone(),
        }
    }

    pub fn suite_settings(&self) -> SuiteSettings {
        let j = &self.jastrow;
        SuiteSettings {
            samples: j.samples,
            seed: self.seed(),
            radius: j.radius,
            min_separation: j.min_separation,
            fd_step: j.fd_step,
        }
    }

    pub fn apriori_center(&self) -> Configuration {
        match &self.jastrow.apriori_center {
            Some(c) => points(c),
            None => points(&vec![[0.0; 3]; self.n_electrons()]),
        }
    }

    pub fn probe_center(&self) -> Configuration {
        match &self.jastrow.probe_center {
            Some(c) => points(c),
            None => {
                let others = [[0.6, 0.2, -0.3], [-0.4, 0.5, 0.7], [0.3, -0.8, 0.4], [-0.7, -0.3, -0.5]];
                let mut v = vec![[0.0; 3]];
                v.extend((1..self.n_electrons()).map(|k| {
                    let p = others[(k - 1) % others.len()];
                    let s = 1.0 + ((k - 1) / others.len()) as f64;
                    [p[0] * s, p[1] * s, p[2] * s]
                }));
                points(&v)
            }
        }
    }
}
