//! Flat `key = value` configuration with `[section]` headers.
//!
//! ```text
//! scenario = strong
//!
//! [turbulence]
//! cn2 = 1e-14, 1e-13
//!
//! [geometry]
//! theta_t = 30 deg
//! beta_t = 8 mrad
//!
//! [snr]
//! grid = 0 dB, 40 dB, 5 dB
//! ```
//!
//! `#` starts a comment. Lists are comma separated. Angles and attenuation
//! coefficients must carry a unit; other quantities default to SI (metres,
//! watts, hertz, dB for SNR). Every key is checked against the schema before
//! anything is computed.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Atmosphere, LinkGeometry};
use crate::mcsim::SimConfig;
use crate::modem::{Method, Modulation};

const SECTIONS: [(&str, &[&str]); 11] = [
    ("", &["scenario"]),
    ("atmosphere", &["k_a", "k_r", "k_m", "gamma", "g", "f", "wavelength", "aperture"]),
    ("turbulence", &["cn2", "shapes"]),
    ("geometry", &["theta_t", "beta_t", "theta_r", "beta_r", "r", "eccentricity", "theta_r_sweep"]),
    ("snr", &["grid", "fixed"]),
    ("link_budget", &["tx_power", "filter_eta", "detector_eta", "bit_rate"]),
    ("modulation", &["schemes"]),
    ("methods", &["list"]),
    ("penalty", &["pairs", "targets"]),
    ("pdf", &["grid", "series_terms"]),
    ("mc", &["samples", "streams", "seed", "bins"]),
];

fn err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

struct Entry {
    section: String,
    key: String,
    value: String,
    line: usize,
    used: Cell<bool>,
}

struct Doc {
    entries: Vec<Entry>,
    sections: Vec<String>,
}

impl Doc {
    fn parse(text: &str) -> Result<Doc> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut sections = Vec::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(name) = s.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("malformed section header '{s}'")))?
                    .trim()
                    .to_ascii_lowercase();
                if name.is_empty() || !SECTIONS.iter().any(|(n, _)| *n == name) {
                    return Err(err(line, format!("unknown section [{name}]")));
                }
                if sections.contains(&name) {
                    return Err(err(line, format!("section [{name}] appears twice")));
                }
                sections.push(name.clone());
                section = name;
                continue;
            }
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected 'key = value', got '{s}'")))?;
            let key = k.trim().to_ascii_lowercase();
            let allowed = SECTIONS.iter().find(|(n, _)| *n == section).unwrap().1;
            if !allowed.contains(&key.as_str()) {
                let place = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
                return Err(err(line, format!("unknown key '{key}' in {place}")));
            }
            if entries.iter().any(|e| e.section == section && e.key == key) {
                return Err(err(line, format!("duplicate key '{key}'")));
            }
            entries.push(Entry {
                section: section.clone(),
                key,
                value: v.trim().to_string(),
                line,
                used: Cell::new(false),
            });
        }
        Ok(Doc { entries, sections })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        let e = self.entries.iter().find(|e| e.section == section && e.key == key)?;
        e.used.set(true);
        Some(e)
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.iter().any(|s| s == section)
    }
}

#[derive(Debug, Clone, Copy)]
enum Dim {
    /// Unit required: deg, rad, mrad.
    Angle,
    Length,
    Area,
    Power,
    /// Unit required: /m, /km.
    PerLength,
    Rate,
    Db,
    Plain,
}

/// Splits `"30 deg"` or `"30deg"` into number and unit.
fn split_unit(s: &str) -> (&str, &str) {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        let exponent = (c == 'e' || c == 'E')
            && i > 0
            && b.get(i + 1).is_some_and(|n| n.is_ascii_digit() || *n == b'-' || *n == b'+');
        if c.is_ascii_digit() || c == '.' || ((c == '-' || c == '+') && (i == 0 || matches!(b[i - 1], b'e' | b'E'))) || exponent {
            i += 1;
        } else {
            break;
        }
    }
    (s[..i].trim(), s[i..].trim())
}

fn quantity(e: &Entry, raw: &str, dim: Dim) -> Result<f64> {
    let (num, unit) = split_unit(raw.trim());
    let x: f64 = num
        .parse()
        .map_err(|_| err(e.line, format!("{}: '{raw}' is not a number", e.key)))?;
    let scale = match (dim, unit) {
        (Dim::Angle, "deg" | "°") => PI / 180.0,
        (Dim::Angle, "rad") => 1.0,
        (Dim::Angle, "mrad") => 1e-3,
        (Dim::Angle, "") => return Err(err(e.line, format!("{}: angle '{raw}' needs a unit (deg, rad, mrad)", e.key))),
        (Dim::Length, "" | "m") => 1.0,
        (Dim::Length, "km") => 1e3,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Length, "mm") => 1e-3,
        (Dim::Length, "um") => 1e-6,
        (Dim::Length, "nm") => 1e-9,
        (Dim::Area, "" | "m2") => 1.0,
        (Dim::Area, "cm2") => 1e-4,
        (Dim::Area, "mm2") => 1e-6,
        (Dim::Power, "" | "W") => 1.0,
        (Dim::Power, "mW") => 1e-3,
        (Dim::Power, "uW") => 1e-6,
        (Dim::PerLength, "/m" | "1/m") => 1.0,
        (Dim::PerLength, "/km" | "1/km") => 1e-3,
        (Dim::PerLength, "") => {
            return Err(err(e.line, format!("{}: coefficient '{raw}' needs a unit (/m, /km)", e.key)))
        }
        (Dim::Rate, "" | "Hz" | "bps") => 1.0,
        (Dim::Rate, "kHz" | "kbps") => 1e3,
        (Dim::Rate, "MHz" | "Mbps") => 1e6,
        (Dim::Db, "" | "dB") => 1.0,
        (Dim::Plain, "") => 1.0,
        _ => return Err(err(e.line, format!("{}: unit '{unit}' does not fit this key", e.key))),
    };
    let v = x * scale;
    if !v.is_finite() {
        return Err(err(e.line, format!("{}: '{raw}' is not finite", e.key)));
    }
    Ok(v)
}

fn list(e: &Entry) -> Vec<&str> {
    e.value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn quantities(e: &Entry, dim: Dim) -> Result<Vec<f64>> {
    list(e).into_iter().map(|s| quantity(e, s, dim)).collect()
}

fn scalar(doc: &Doc, section: &str, key: &str, dim: Dim) -> Result<Option<f64>> {
    match doc.get(section, key) {
        None => Ok(None),
        Some(e) => {
            let v = quantities(e, dim)?;
            if v.len() != 1 {
                return Err(err(e.line, format!("{key} takes a single value")));
            }
            Ok(Some(v[0]))
        }
    }
}

fn count(doc: &Doc, section: &str, key: &str) -> Result<Option<usize>> {
    match doc.get(section, key) {
        None => Ok(None),
        Some(e) => e
            .value
            .replace('_', "")
            .parse::<f64>()
            .ok()
            .filter(|v| *v >= 0.0 && v.fract() == 0.0 && *v <= 1e15)
            .map(|v| Some(v as usize))
            .ok_or_else(|| err(e.line, format!("{key}: '{}' is not a non-negative integer", e.value))),
    }
}

/// `start, stop, step` inclusive (a single value is a one-point range, an
/// empty value an empty one).
fn range(e: &Entry, dim: Dim) -> Result<Vec<f64>> {
    let v = quantities(e, dim)?;
    match v.as_slice() {
        [] => Ok(Vec::new()),
        [x] => Ok(vec![*x]),
        [start, stop, step] => {
            if !(*step > 0.0) {
                return Err(err(e.line, format!("{}: step must be positive", e.key)));
            }
            let n = ((stop - start) / step + 1e-9).floor();
            if n < 0.0 {
                return Ok(Vec::new());
            }
            if n > 1e6 {
                return Err(err(e.line, format!("{}: more than a million points", e.key)));
            }
            Ok((0..=n as usize).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(err(e.line, format!("{}: expected 'start, stop, step'", e.key))),
    }
}

/// Source of the Gamma-Gamma shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum Turbulence {
    /// Derived from the geometry for each listed `Cn²` (m^{−2/3}).
    Cn2(Vec<f64>),
    /// `[α₁, β₁, α₂, β₂]` given directly; `Ω_v = E₂ = 1`.
    Shapes([f64; 4]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub theta_t: f64,
    pub beta_t: f64,
    pub theta_r: f64,
    pub beta_r: f64,
    pub baseline: f64,
    /// Ellipse mode when set: `θ_T` follows from `θ_R`.
    pub eccentricity: Option<f64>,
    /// Receiver elevations (rad) for the geometry sweep.
    pub theta_r_sweep: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power: f64,
    pub filter_eta: f64,
    pub detector_eta: f64,
    pub bit_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    /// Attenuation and phase-function parameters; `cn2` is filled per run.
    pub atmosphere: Atmosphere,
    pub wavelength: f64,
    pub aperture: f64,
    pub turbulence: Turbulence,
    pub geometry: GeometryConfig,
    pub snr_grid_db: Vec<f64>,
    pub fixed_snr_db: Option<f64>,
    pub link_budget: Option<LinkBudget>,
    pub schemes: Vec<Modulation>,
    pub methods: Vec<Method>,
    pub penalty_pairs: Vec<(Modulation, Modulation)>,
    pub penalty_targets: Vec<f64>,
    pub pdf_grid: Vec<f64>,
    pub pdf_series_terms: usize,
    pub sim: SimConfig,
}

fn parse_pair(e: &Entry, s: &str) -> Result<(Modulation, Modulation)> {
    let (a, b) = s
        .split_once('-')
        .ok_or_else(|| err(e.line, format!("pairs: '{s}' should look like 'bpsk-dpsk'")))?;
    let m = |x: &str| x.parse::<Modulation>().map_err(|x| err(e.line, x));
    Ok((m(a)?, m(b)?))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let doc = Doc::parse(text)?;
        let reference = Atmosphere::reference(0.0);

        let scenario = doc.get("", "scenario").map(|e| e.value.clone()).unwrap_or_else(|| "unnamed".into());

        let atm = |key, dim, default| -> Result<f64> { Ok(scalar(&doc, "atmosphere", key, dim)?.unwrap_or(default)) };
        let atmosphere = Atmosphere {
            k_a: atm("k_a", Dim::PerLength, reference.k_a)?,
            k_r: atm("k_r", Dim::PerLength, reference.k_r)?,
            k_m: atm("k_m", Dim::PerLength, reference.k_m)?,
            gamma_ray: atm("gamma", Dim::Plain, reference.gamma_ray)?,
            g_asym: atm("g", Dim::Plain, reference.g_asym)?,
            f_mie: atm("f", Dim::Plain, reference.f_mie)?,
            cn2: 0.0,
        };
        atmosphere.validate().map_err(|e| Error::Config(e.to_string()))?;
        let wavelength = atm("wavelength", Dim::Length, 260e-9)?;
        let aperture = atm("aperture", Dim::Area, 1.77e-4)?;
        if !(wavelength > 0.0 && aperture > 0.0) {
            return Err(Error::Config("wavelength and aperture must be positive".into()));
        }

        let cn2 = doc.get("turbulence", "cn2");
        let shapes = doc.get("turbulence", "shapes");
        let turbulence = match (cn2, shapes) {
            (Some(c), Some(_)) => return Err(err(c.line, "give either cn2 or shapes, not both")),
            (None, Some(e)) => {
                let v = quantities(e, Dim::Plain)?;
                let [a1, b1, a2, b2] = <[f64; 4]>::try_from(v)
                    .map_err(|_| err(e.line, "shapes needs four values: alpha1, beta1, alpha2, beta2"))?;
                if !(a1 > 0.0 && b1 > 0.0 && a2 > 0.0 && b2 > 0.0) {
                    return Err(err(e.line, "shapes must be positive"));
                }
                Turbulence::Shapes([a1, b1, a2, b2])
            }
            (Some(e), None) => {
                let v = quantities(e, Dim::Plain)?;
                if v.is_empty() || v.iter().any(|c| !(*c > 0.0)) {
                    return Err(err(e.line, "cn2 needs one or more positive values"));
                }
                Turbulence::Cn2(v)
            }
            (None, None) => Turbulence::Cn2(vec![1e-13]),
        };

        let geo = |key, dim, default| -> Result<f64> { Ok(scalar(&doc, "geometry", key, dim)?.unwrap_or(default)) };
        let eccentricity = scalar(&doc, "geometry", "eccentricity", Dim::Plain)?;
        if let Some(e) = eccentricity {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Config(format!("eccentricity must lie in (0, 1), got {e}")));
            }
        }
        let theta_r_sweep = match doc.get("geometry", "theta_r_sweep") {
            Some(e) => range(e, Dim::Angle)?,
            None => Vec::new(),
        };
        let geometry = GeometryConfig {
            theta_t: geo("theta_t", Dim::Angle, 30f64.to_radians())?,
            beta_t: geo("beta_t", Dim::Angle, 8e-3)?,
            theta_r: geo("theta_r", Dim::Angle, 80f64.to_radians())?,
            beta_r: geo("beta_r", Dim::Angle, 20f64.to_radians())?,
            baseline: geo("r", Dim::Length, 1000.0)?,
            eccentricity,
            theta_r_sweep,
        };
        let g = LinkGeometry::new(
            geometry.theta_t,
            geometry.beta_t,
            geometry.theta_r,
            geometry.beta_r,
            geometry.baseline,
            aperture,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        if eccentricity.is_none() {
            g.common_volume().map_err(|e| Error::Config(e.to_string()))?;
        }

        let snr_grid_db = match doc.get("snr", "grid") {
            Some(e) => range(e, Dim::Db)?,
            None => Vec::new(),
        };
        let fixed_snr_db = scalar(&doc, "snr", "fixed", Dim::Db)?;

        let link_budget = if doc.has_section("link_budget") {
            let lb = |key, dim, default| -> Result<f64> {
                let v = scalar(&doc, "link_budget", key, dim)?.unwrap_or(default);
                if !(v > 0.0) {
                    return Err(Error::Config(format!("link_budget.{key} must be positive, got {v}")));
                }
                Ok(v)
            };
            Some(LinkBudget {
                tx_power: lb("tx_power", Dim::Power, 0.05)?,
                filter_eta: lb("filter_eta", Dim::Plain, 0.1)?,
                detector_eta: lb("detector_eta", Dim::Plain, 0.2)?,
                bit_rate: lb("bit_rate", Dim::Rate, 5000.0)?,
            })
        } else {
            None
        };

        let schemes = match doc.get("modulation", "schemes") {
            Some(e) => list(e)
                .into_iter()
                .map(|s| s.parse().map_err(|x| err(e.line, x)))
                .collect::<Result<Vec<Modulation>>>()?,
            None => Modulation::ALL.to_vec(),
        };
        let methods = match doc.get("methods", "list") {
            Some(e) => list(e)
                .into_iter()
                .map(|s| s.parse().map_err(|x| err(e.line, x)))
                .collect::<Result<Vec<Method>>>()?,
            None => vec![Method::Meijer],
        };

        let penalty_pairs = match doc.get("penalty", "pairs") {
            Some(e) => list(e).into_iter().map(|s| parse_pair(e, s)).collect::<Result<Vec<_>>>()?,
            None => vec![(Modulation::Bpsk, Modulation::Dpsk), (Modulation::Dpsk, Modulation::Ncfsk)],
        };
        let penalty_targets = match doc.get("penalty", "targets") {
            Some(e) => {
                let v = quantities(e, Dim::Plain)?;
                if let Some(t) = v.iter().find(|t| !(**t > 0.0 && **t < 0.5)) {
                    return Err(err(e.line, format!("target error rate {t} is outside (0, 0.5)")));
                }
                v
            }
            None => vec![1e-3],
        };

        let pdf_grid = match doc.get("pdf", "grid") {
            Some(e) => {
                let v = quantities(e, Dim::Plain)?;
                match v.as_slice() {
                    [] => Vec::new(),
                    [lo, hi, n] if *lo > 0.0 && hi >= lo && *n >= 1.0 && n.fract() == 0.0 => {
                        let n = *n as usize;
                        if n == 1 {
                            vec![*lo]
                        } else {
                            let step = (hi / lo).ln() / (n - 1) as f64;
                            (0..n).map(|k| lo * (step * k as f64).exp()).collect()
                        }
                    }
                    _ => return Err(err(e.line, "pdf grid is 'lo, hi, count' with 0 < lo <= hi")),
                }
            }
            None => Vec::new(),
        };
        let pdf_series_terms = count(&doc, "pdf", "series_terms")?.unwrap_or(60);

        let defaults = SimConfig::default();
        let sim = SimConfig {
            sample_count: count(&doc, "mc", "samples")?.unwrap_or(defaults.sample_count),
            streams: count(&doc, "mc", "streams")?.unwrap_or(defaults.streams),
            seed: match doc.get("mc", "seed") {
                Some(e) => e
                    .value
                    .parse()
                    .map_err(|_| err(e.line, format!("seed: '{}' is not an unsigned 64-bit integer", e.value)))?,
                None => defaults.seed,
            },
            histogram_bins: count(&doc, "mc", "bins")?.unwrap_or(defaults.histogram_bins),
        };
        if sim.sample_count == 0 || sim.streams == 0 || sim.histogram_bins == 0 {
            return Err(Error::Config("mc samples, streams and bins must be positive".into()));
        }

        debug_assert!(doc.entries.iter().all(|e| e.used.get()), "schema key never read");
        Ok(RunConfig {
            scenario,
            atmosphere,
            wavelength,
            aperture,
            turbulence,
            geometry,
            snr_grid_db,
            fixed_snr_db,
            link_budget,
            schemes,
            methods,
            penalty_pairs,
            penalty_targets,
            pdf_grid,
            pdf_series_terms,
            sim,
        })
    }
}

impl std::str::FromStr for RunConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RunConfig::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_text() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c.turbulence, Turbulence::Cn2(vec![1e-13]));
        assert!((c.geometry.theta_r - 80f64.to_radians()).abs() < 1e-15);
        assert!(c.snr_grid_db.is_empty());
        assert_eq!(c.schemes.len(), 4);
        assert_eq!(c.methods, vec![Method::Meijer]);
    }

    #[test]
    fn units_and_ranges() {
        let c = RunConfig::parse(
            "scenario = x # trailing comment\n[atmosphere]\nk_a = 0.802 /km\nwavelength = 260nm\n\
             [geometry]\nbeta_t = 8 mrad\nr = 0.2 km\ntheta_r = 1.2 rad\n[snr]\ngrid = 0 dB, 10 dB, 2.5\n\
             [link_budget]\ntx_power = 50 mW\nbit_rate = 5 kbps\n",
        )
        .unwrap();
        assert_eq!(c.scenario, "x");
        assert!((c.atmosphere.k_a - 0.802e-3).abs() < 1e-18);
        assert!((c.wavelength - 260e-9).abs() < 1e-20);
        assert_eq!(c.geometry.beta_t, 8e-3);
        assert_eq!(c.geometry.baseline, 200.0);
        assert_eq!(c.snr_grid_db, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
        let lb = c.link_budget.unwrap();
        assert_eq!((lb.tx_power, lb.bit_rate), (0.05, 5000.0));
    }

    #[test]
    fn split_keeps_exponents() {
        assert_eq!(split_unit("1e-13"), ("1e-13", ""));
        assert_eq!(split_unit("2.5e3 m"), ("2.5e3", "m"));
        assert_eq!(split_unit("30deg"), ("30", "deg"));
        assert_eq!(split_unit("-5 dB"), ("-5", "dB"));
    }

    #[test]
    fn rejections() {
        let bad = [
            "[geometry]\ntheta_t = 30\n",
            "[geometry]\nheight = 3 m\n",
            "[weather]\n",
            "colour = red\n",
            "[modulation]\nschemes = bpsk, ook\n",
            "[methods]\nlist = series:x\n",
            "[penalty]\ntargets = 0.6\n",
            "[turbulence]\ncn2 = 1e-13\nshapes = 1, 2, 3, 4\n",
            "[snr]\ngrid = 0, 10, 0\n",
            "[geometry]\ntheta_t = 100 deg\ntheta_r = 90 deg\n",
            "[atmosphere]\nk_a = 0.8\n",
            "[snr]\nfixed = 3 W\n",
            "[mc]\nsamples = 0\n",
            "[snr]\ngrid = 1\ngrid = 2\n",
            "just words\n",
        ];
        for text in bad {
            assert!(matches!(RunConfig::parse(text), Err(Error::Config(_))), "accepted: {text:?}");
        }
    }

    #[test]
    fn empty_and_single_point_grids() {
        let c = RunConfig::parse("[snr]\ngrid =\n[geometry]\neccentricity = 0.5\ntheta_r_sweep = 45 deg\n").unwrap();
        assert!(c.snr_grid_db.is_empty());
        assert_eq!(c.geometry.theta_r_sweep.len(), 1);
        let c = RunConfig::parse("[snr]\ngrid = 10, 0, 1\n").unwrap();
        assert!(c.snr_grid_db.is_empty());
    }
}
