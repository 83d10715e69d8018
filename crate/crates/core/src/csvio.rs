//! CSV serialization of spectra, peaks and trajectories.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so output
//! is locale independent and identical across runs.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::{Read, Write};

use crate::dynamics::{AmplitudePair, Trajectory};
use crate::error::{Error, Result};
use crate::scan::{Model, Peak, Sample, Spectrum};
use crate::spin::DensityMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub omega_khz: f64,
    /// NaN where the point failed.
    pub signal: f64,
    pub model: Model,
    pub phi1_deg: f64,
    pub phi2_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRecord {
    pub model: Model,
    pub phi1_deg: f64,
    pub phi2_deg: f64,
    pub omega_center_khz: f64,
    pub height: f64,
    pub width_fwhm_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRecord {
    pub omega_khz: f64,
    pub phi2_deg: f64,
    pub signal_a: f64,
    pub signal_b: f64,
    pub rel_diff: f64,
}

// rounded to 1e-9 kHz so grid nodes print as the values the user configured
pub fn to_khz(w: f64) -> f64 {
    (w / TAU * 1e6).round() / 1e9
}

pub fn to_deg(phi: f64) -> f64 {
    (phi.to_degrees() * 1e9).round() / 1e9
}

// same shortest round-trip form the serde path produces
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Parse(format!("csv: {e}")),
    }
}

pub fn spectrum_records(spectra: &[Spectrum]) -> Vec<SpectrumRecord> {
    spectra
        .iter()
        .flat_map(|s| {
            s.samples.iter().map(move |x| SpectrumRecord {
                omega_khz: to_khz(x.omega),
                signal: x.signal.unwrap_or(f64::NAN),
                model: s.model,
                phi1_deg: to_deg(s.phi1()),
                phi2_deg: to_deg(s.phi2()),
            })
        })
        .collect()
}

pub fn write_records<T: Serialize, W: Write>(records: &[T], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes a header even when `records` is empty.
pub fn write_peaks<W: Write>(records: &[PeakRecord], w: W) -> Result<()> {
    if !records.is_empty() {
        return write_records(records, w);
    }
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["model", "phi1_deg", "phi2_deg", "omega_center_khz", "height", "width_fwhm_khz"])
        .map_err(csv_err)?;
    wr.flush()?;
    Ok(())
}

pub fn read_spectrum_records<R: Read>(r: R) -> Result<Vec<SpectrumRecord>> {
    csv::Reader::from_reader(r).deserialize().map(|x| x.map_err(csv_err)).collect()
}

/// Groups records by (model, φ₁, φ₂) in order of first appearance and turns
/// each group into a spectrum of angular frequencies. NaN signals become gaps.
/// (model, φ₁ in degrees, φ₂ in degrees, samples) of one spectrum read back from CSV.
pub type RecordGroup = (Model, f64, f64, Vec<Sample>);

pub fn records_to_series(records: &[SpectrumRecord]) -> Result<Vec<RecordGroup>> {
    let mut out: Vec<RecordGroup> = Vec::new();
    for r in records {
        let sample = Sample { omega: TAU * 1e3 * r.omega_khz, signal: (!r.signal.is_nan()).then_some(r.signal) };
        match out.iter_mut().find(|g| g.0 == r.model && g.1 == r.phi1_deg && g.2 == r.phi2_deg) {
            Some(g) => g.3.push(sample),
            None => out.push((r.model, r.phi1_deg, r.phi2_deg, vec![sample])),
        }
    }
    for g in &out {
        if !g.3.windows(2).all(|w| w[1].omega > w[0].omega) {
            return Err(Error::Parse(format!(
                "spectrum for model {} phi1 {} phi2 {} is not sorted by increasing omega",
                g.0, g.1, g.2
            )));
        }
    }
    Ok(out)
}

pub fn peak_records(model: Model, phi1_deg: f64, phi2_deg: f64, peaks: &[Peak]) -> Vec<PeakRecord> {
    peaks
        .iter()
        .map(|p| PeakRecord {
            model,
            phi1_deg,
            phi2_deg,
            omega_center_khz: to_khz(p.omega_center),
            height: p.height,
            width_fwhm_khz: to_khz(p.width_fwhm),
        })
        .collect()
}

const RHO_COLUMNS: [&str; 18] = [
    "rho_pp_re", "rho_pp_im", "rho_p0_re", "rho_p0_im", "rho_pm_re", "rho_pm_im",
    "rho_0p_re", "rho_0p_im", "rho_00_re", "rho_00_im", "rho_0m_re", "rho_0m_im",
    "rho_mp_re", "rho_mp_im", "rho_m0_re", "rho_m0_im", "rho_mm_re", "rho_mm_im",
];

/// `t_us` followed by the nine density-matrix entries in row-major order
/// (basis m = +1, 0, −1), each as a real/imaginary pair.
pub fn write_density_trajectory<W: Write>(tr: &Trajectory<DensityMatrix>, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["t_us"];
    header.extend(RHO_COLUMNS);
    wr.write_record(&header).map_err(csv_err)?;
    for (t, rho) in tr.times.iter().zip(&tr.states) {
        let m = rho.matrix();
        let mut row = Vec::with_capacity(19);
        row.push(num(t * 1e6));
        for i in 0..3 {
            for j in 0..3 {
                row.push(num(m[(i, j)].re));
                row.push(num(m[(i, j)].im));
            }
        }
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_amplitude_trajectory<W: Write>(tr: &Trajectory<AmplitudePair>, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t_us", "ca_re", "ca_im", "cb_re", "cb_im"]).map_err(csv_err)?;
    for (t, c) in tr.times.iter().zip(&tr.states) {
        wr.write_record([
            num(t * 1e6),
            num(c.c_a.re),
            num(c.c_a.im),
            num(c.c_b.re),
            num(c.c_b.im),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}
