//! Curved waveguide-array geometry realizing a given chain.
//!
//! All lengths are carried internally in micrometres. [`Length`] and
//! [`InverseLength`] are the only way in or out, so a call can never mix units.
//! The coupling law is `kappa = A exp(-gamma d)`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::model::{coupling, JcParams};

/// Relative tolerance for the index-gradient consistency check.
pub const OMEGA_MATCH_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Length(f64);

impl Length {
    pub fn from_um(v: f64) -> Self {
        Length(v)
    }
    pub fn from_nm(v: f64) -> Self {
        Length(v * 1e-3)
    }
    pub fn from_mm(v: f64) -> Self {
        Length(v * 1e3)
    }
    pub fn from_cm(v: f64) -> Self {
        Length(v * 1e4)
    }
    pub fn from_m(v: f64) -> Self {
        Length(v * 1e6)
    }
    pub fn um(self) -> f64 {
        self.0
    }
    pub fn nm(self) -> f64 {
        self.0 * 1e3
    }
    pub fn mm(self) -> f64 {
        self.0 * 1e-3
    }
    pub fn cm(self) -> f64 {
        self.0 * 1e-4
    }

    /// Parses `"<value> <unit>"` with unit one of nm, um, mm, cm, m.
    pub fn parse(s: &str) -> Result<Self> {
        let (v, unit) = split_quantity(s)?;
        match unit {
            "nm" => Ok(Length::from_nm(v)),
            "um" | "µm" | "μm" => Ok(Length::from_um(v)),
            "mm" => Ok(Length::from_mm(v)),
            "cm" => Ok(Length::from_cm(v)),
            "m" => Ok(Length::from_m(v)),
            other => Err(Error::param("length", format!("unknown length unit `{other}` in `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InverseLength(f64);

impl InverseLength {
    pub fn per_um(v: f64) -> Self {
        InverseLength(v)
    }
    pub fn per_mm(v: f64) -> Self {
        InverseLength(v * 1e-3)
    }
    pub fn per_cm(v: f64) -> Self {
        InverseLength(v * 1e-4)
    }
    pub fn per_m(v: f64) -> Self {
        InverseLength(v * 1e-6)
    }
    pub fn in_per_um(self) -> f64 {
        self.0
    }
    pub fn in_per_mm(self) -> f64 {
        self.0 * 1e3
    }
    pub fn in_per_cm(self) -> f64 {
        self.0 * 1e4
    }

    /// Parses `"<value> /<unit>"`, `"<value> 1/<unit>"` or `"<value> <unit>^-1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (v, unit) = split_quantity(s)?;
        let base = unit
            .strip_prefix("1/")
            .or_else(|| unit.strip_prefix('/'))
            .or_else(|| unit.strip_suffix("^-1"))
            .ok_or_else(|| Error::param("inverse_length", format!("expected an inverse length unit in `{s}`")))?;
        match base {
            "um" | "µm" | "μm" => Ok(InverseLength::per_um(v)),
            "mm" => Ok(InverseLength::per_mm(v)),
            "cm" => Ok(InverseLength::per_cm(v)),
            "m" => Ok(InverseLength::per_m(v)),
            other => Err(Error::param("inverse_length", format!("unknown length unit `{other}` in `{s}`"))),
        }
    }
}

fn split_quantity(s: &str) -> Result<(f64, &str)> {
    let s = s.trim();
    let split = s
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .ok_or_else(|| Error::param("quantity", format!("missing unit in `{s}`")))?;
    let (num, unit) = s.split_at(split);
    let v: f64 = num.trim().parse().map_err(|_| Error::param("quantity", format!("bad number in `{s}`")))?;
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(Error::param("quantity", format!("missing unit in `{s}`")));
    }
    Ok((v, unit))
}

/// Material and coupling-law constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FabricationConstants {
    /// Prefactor `A` of the coupling law.
    #[serde(rename = "coupling_prefactor_per_um")]
    pub coupling_prefactor: InverseLength,
    /// Decay rate `gamma` of the coupling law.
    #[serde(rename = "coupling_decay_per_um")]
    pub coupling_decay: InverseLength,
    pub substrate_index: f64,
    #[serde(rename = "wavelength_um")]
    pub wavelength: Length,
    /// Recorded for provenance only.
    #[serde(rename = "core_diameter_um")]
    pub core_diameter: Option<Length>,
    /// Recorded for provenance only.
    pub index_contrast: Option<f64>,
}

impl Default for FabricationConstants {
    /// Femtosecond-written waveguides in fused silica at 633 nm.
    fn default() -> Self {
        FabricationConstants {
            coupling_prefactor: InverseLength::per_mm(24.6),
            coupling_decay: InverseLength::per_um(0.466),
            substrate_index: 1.45,
            wavelength: Length::from_nm(633.0),
            core_diameter: Some(Length::from_um(5.0)),
            index_contrast: Some(0.002),
        }
    }
}

impl FabricationConstants {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("coupling_prefactor", self.coupling_prefactor.0)?;
        positive("coupling_decay", self.coupling_decay.0)?;
        positive("substrate_index", self.substrate_index)?;
        positive("wavelength", self.wavelength.0)
    }
}

/// Transverse index gradient `2 pi n_s a / (R lambda)`.
pub fn index_gradient(fab: &FabricationConstants, pitch: Length, radius: Length) -> Result<InverseLength> {
    fab.validate()?;
    for (name, v) in [("pitch", pitch.0), ("radius", radius.0)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(name, format!("must be finite and > 0, got {v} um")));
        }
    }
    Ok(InverseLength(TAU * fab.substrate_index * pitch.0 / (radius.0 * fab.wavelength.0)))
}

/// Revival period `2 pi / w` along the propagation axis.
pub fn revival_period(omega: InverseLength) -> Length {
    Length(TAU / omega.0)
}

/// `d = ln(A / kappa) / gamma`
pub fn spacing_from_coupling(kappa: InverseLength, fab: &FabricationConstants) -> Result<Length> {
    fab.validate()?;
    if !(kappa.0.is_finite() && kappa.0 > 0.0) {
        return Err(Error::param("kappa", format!("must be finite and > 0, got {} /mm", kappa.in_per_mm())));
    }
    if kappa.0 >= fab.coupling_prefactor.0 {
        return Err(Error::InfeasibleSpacing {
            bond: None,
            coupling_per_mm: kappa.in_per_mm(),
            prefactor_per_mm: fab.coupling_prefactor.in_per_mm(),
        });
    }
    Ok(Length((fab.coupling_prefactor.0 / kappa.0).ln() / fab.coupling_decay.0))
}

/// `kappa = A exp(-gamma d)`
pub fn coupling_from_spacing(d: Length, fab: &FabricationConstants) -> Result<InverseLength> {
    fab.validate()?;
    if !(d.0.is_finite() && d.0 > 0.0) {
        return Err(Error::param("spacing", format!("must be finite and > 0, got {} um", d.0)));
    }
    Ok(InverseLength(fab.coupling_prefactor.0 * (-fab.coupling_decay.0 * d.0).exp()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveguideGeometry {
    #[serde(rename = "bend_radius_um")]
    pub radius: Length,
    #[serde(rename = "pitch_um")]
    pub pitch: Length,
    /// `spacings[n]` separates guides `n` and `n + 1`.
    #[serde(rename = "spacings_um")]
    pub spacings: Vec<Length>,
    pub n_guides: usize,
}

impl WaveguideGeometry {
    /// Transverse position of each guide, guide 0 at the origin.
    pub fn positions(&self) -> Vec<Length> {
        let mut acc = 0.0;
        let mut out = vec![Length(0.0)];
        for d in &self.spacings {
            acc += d.0;
            out.push(Length(acc));
        }
        out
    }

    pub fn width(&self) -> Length {
        Length(self.spacings.iter().map(|d| d.0).sum())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DesignOptions {
    /// Physical `w` the array is meant to realize. Compared against the
    /// index gradient implied by `R` and `a`.
    pub target_omega: Option<InverseLength>,
    /// Turn a mismatch into an error instead of a diagnostic.
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayDesign {
    pub geometry: WaveguideGeometry,
    #[serde(rename = "omega_per_um")]
    pub omega: InverseLength,
    #[serde(rename = "g_per_um")]
    pub g: InverseLength,
    #[serde(rename = "period_um")]
    pub period: Length,
    #[serde(rename = "couplings_per_um")]
    pub couplings: Vec<InverseLength>,
    pub diagnostics: Vec<String>,
}

/// Spacings realizing `kappa_n = g sqrt(n + 1)` with `g = (g/w) w_phys`, where
/// `w_phys` is the index gradient of the bent array.
pub fn design_array(
    params: &JcParams,
    fab: &FabricationConstants,
    radius: Length,
    pitch: Length,
    opts: &DesignOptions,
) -> Result<ArrayDesign> {
    params.validate()?;
    let omega = index_gradient(fab, pitch, radius)?;
    let mut diagnostics = Vec::new();
    if let Some(target) = opts.target_omega {
        let rel = (omega.0 - target.0).abs() / target.0;
        if rel > OMEGA_MATCH_TOL {
            if opts.strict {
                return Err(Error::OmegaMismatch {
                    from_geometry_per_mm: omega.in_per_mm(),
                    requested_per_mm: target.in_per_mm(),
                });
            }
            diagnostics.push(format!(
                "index gradient {} /mm differs from requested {} /mm by {:.3}%",
                omega.in_per_mm(),
                target.in_per_mm(),
                rel * 100.0
            ));
        }
    }
    let g = InverseLength(params.g_over_omega() * omega.0);
    let mut couplings = Vec::with_capacity(params.n_sites - 1);
    let mut spacings = Vec::with_capacity(params.n_sites - 1);
    for n in 0..params.n_sites - 1 {
        let kappa = InverseLength(coupling(n, g.0));
        let d = spacing_from_coupling(kappa, fab).map_err(|e| match e {
            Error::InfeasibleSpacing { coupling_per_mm, prefactor_per_mm, .. } => {
                Error::InfeasibleSpacing { bond: Some(n), coupling_per_mm, prefactor_per_mm }
            }
            other => other,
        })?;
        couplings.push(kappa);
        spacings.push(d);
    }
    Ok(ArrayDesign {
        geometry: WaveguideGeometry { radius, pitch, spacings, n_guides: params.n_sites },
        omega,
        g,
        period: revival_period(omega),
        couplings,
        diagnostics,
    })
}

/// CSV with columns `n,position_um,spacing_um,coupling_per_mm`. The last guide
/// has no outgoing bond and leaves the last two fields empty.
pub fn geometry_csv(design: &ArrayDesign) -> String {
    let mut out = String::from("n,position_um,spacing_um,coupling_per_mm\n");
    for (n, pos) in design.geometry.positions().iter().enumerate() {
        match (design.geometry.spacings.get(n), design.couplings.get(n)) {
            (Some(d), Some(k)) => {
                let _ = writeln!(out, "{n},{},{},{}", fmt_num(pos.um()), fmt_num(d.um()), fmt_num(k.in_per_mm()));
            }
            _ => {
                let _ = writeln!(out, "{n},{},,", fmt_num(pos.um()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_geometry() -> (FabricationConstants, Length, Length) {
        (FabricationConstants::default(), Length::from_cm(60.0), Length::from_um(6.0))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn worked_gradient() {
        let (fab, r, a) = reference_geometry();
        let w = index_gradient(&fab, a, r).unwrap();
        assert!(rel(w.in_per_mm(), 0.1439) < 5e-4, "{}", w.in_per_mm());
        assert!(rel(revival_period(w).cm(), 4.37) < 5e-3);
        assert!(rel(2.0 * w.in_per_mm(), 0.288) < 5e-3);
        let w2 = index_gradient(&fab, a, Length::from_cm(120.0)).unwrap();
        assert!(rel(w2.0, w.0 / 2.0) < 1e-15);
    }

    #[test]
    fn worked_spacings() {
        let fab = FabricationConstants::default();
        for (n, want) in [(0usize, 9.54), (1, 8.80), (2, 8.37)] {
            let kappa = InverseLength::per_mm(0.288 * ((n + 1) as f64).sqrt());
            let d = spacing_from_coupling(kappa, &fab).unwrap();
            assert!(rel(d.um(), want) < 5e-3, "d{n} = {}", d.um());
        }
        let k = coupling_from_spacing(Length::from_um(9.54), &fab).unwrap();
        assert!(rel(k.in_per_mm(), 0.288) < 5e-3);
    }

    #[test]
    fn spacing_errors() {
        let fab = FabricationConstants::default();
        assert!(matches!(
            spacing_from_coupling(InverseLength::per_mm(24.6), &fab),
            Err(Error::InfeasibleSpacing { bond: None, .. })
        ));
        assert!(spacing_from_coupling(InverseLength::per_mm(0.0), &fab).is_err());
        assert!(spacing_from_coupling(InverseLength::per_mm(-1.0), &fab).is_err());
        assert!(coupling_from_spacing(Length::from_um(0.0), &fab).is_err());
    }

    #[test]
    fn coupling_decays_with_distance() {
        let fab = FabricationConstants::default();
        let ks: Vec<f64> = [1.0, 5.0, 20.0, 80.0]
            .iter()
            .map(|&d| coupling_from_spacing(Length::from_um(d), &fab).unwrap().0)
            .collect();
        assert!(ks.windows(2).all(|w| w[1] < w[0]));
        assert!(ks[3] < 1e-15);
    }

    #[test]
    fn array_design_example() {
        let (fab, r, a) = reference_geometry();
        let p = JcParams::from_ratios(2.0, 0.0, 25).unwrap();
        let d = design_array(&p, &fab, r, a, &DesignOptions::default()).unwrap();
        assert_eq!(d.geometry.spacings.len(), 24);
        for (got, want) in d.geometry.spacings.iter().zip([9.54, 8.80, 8.37]) {
            assert!(rel(got.um(), want) < 5e-3);
        }
        assert!(d.geometry.spacings.windows(2).all(|w| w[1] < w[0]));
        assert!(d.geometry.width().um().is_finite());
        assert!(d.diagnostics.is_empty());
    }

    #[test]
    fn array_design_infeasible_names_bond() {
        let (fab, r, a) = reference_geometry();
        // g = 100 w ~ 14.4 /mm; kappa_1 = 20.4, kappa_2 = 24.9 > A.
        let p = JcParams::from_ratios(100.0, 0.0, 10).unwrap();
        let err = design_array(&p, &fab, r, a, &DesignOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InfeasibleSpacing { bond: Some(2), .. }), "{err}");
    }

    #[test]
    fn omega_mismatch() {
        let (fab, r, a) = reference_geometry();
        let p = JcParams::from_ratios(2.0, 0.0, 5).unwrap();
        let lax = DesignOptions { target_omega: Some(InverseLength::per_mm(0.15)), strict: false };
        assert_eq!(design_array(&p, &fab, r, a, &lax).unwrap().diagnostics.len(), 1);
        let strict = DesignOptions { strict: true, ..lax };
        assert!(matches!(design_array(&p, &fab, r, a, &strict), Err(Error::OmegaMismatch { .. })));
        let matched = DesignOptions { target_omega: Some(InverseLength::per_mm(0.14393)), strict: true };
        assert!(design_array(&p, &fab, r, a, &matched).is_ok());
    }

    #[test]
    fn unit_parsing() {
        assert_eq!(Length::parse("60 cm").unwrap(), Length::from_um(600_000.0));
        assert_eq!(Length::parse("633nm").unwrap().um(), 0.633);
        assert_eq!(InverseLength::parse("24.6 /mm").unwrap(), InverseLength::per_mm(24.6));
        assert_eq!(InverseLength::parse("0.466 1/um").unwrap(), InverseLength::per_um(0.466));
        assert_eq!(InverseLength::parse("0.466 um^-1").unwrap(), InverseLength::per_um(0.466));
        assert!(Length::parse("60").is_err());
        assert!(Length::parse("60 furlong").is_err());
        assert!(InverseLength::parse("24.6 mm").is_err());
        assert!(Length::parse("1e-3 m").is_ok());
    }

    #[test]
    fn csv_layout() {
        let (fab, r, a) = reference_geometry();
        let p = JcParams::from_ratios(2.0, 0.0, 3).unwrap();
        let d = design_array(&p, &fab, r, a, &DesignOptions::default()).unwrap();
        let csv = geometry_csv(&d);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,position_um,spacing_um,coupling_per_mm");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2,") && lines[3].ends_with(",,"));
        assert!(lines[1].starts_with("0,0.0000000000000000e0,"));
    }
}
