//! Chemical-shift-encoded MRI forward signal model.
//!
//! Multi-echo gradient-echo signal of a water/fat voxel with R2* decay,
//! off-resonance field and a multi-peak triglyceride spectrum. All internal
//! units are seconds, Hz, s^-1, and cycles (for the echo-time-zero phase).

use crate::error::{Error, Result};
use crate::grid::{ComplexMap, RealMap};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Proton gyromagnetic ratio in MHz/T. Recorded in output metadata so a
/// dataset pins the constant it was produced with.
pub const GYROMAGNETIC_RATIO_MHZ_PER_T: f64 = 42.5774;

/// Chemical shift offsets of the six-peak liver triglyceride model, in ppm
/// relative to water.
pub const DEFAULT_FAT_PPM: [f64; 6] = [-3.80, -3.40, -2.60, -1.94, -0.39, 0.60];

/// Relative amplitudes matching [`DEFAULT_FAT_PPM`]; normalized on
/// construction.
pub const DEFAULT_FAT_AMPLITUDES: [f64; 6] = [0.087, 0.693, 0.128, 0.004, 0.039, 0.048];

/// Converts a chemical shift in ppm to Hz at the given field strength.
pub fn ppm_to_hz(ppm: f64, field_strength_t: f64) -> Result<f64> {
    if !(field_strength_t > 0.0) {
        return Err(Error::InvalidInput(format!(
            "field strength must be positive, got {field_strength_t}"
        )));
    }
    Ok(ppm * GYROMAGNETIC_RATIO_MHZ_PER_T * field_strength_t)
}

/// One resonance of the fat spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub frequency_hz: f64,
    pub amplitude: f64,
}

/// Multi-peak triglyceride spectrum. Amplitudes are strictly positive and
/// sum to one after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FatSpectrum {
    peaks: Vec<SpectralPeak>,
    field_strength_t: f64,
    source_ppm: Option<Vec<(f64, f64)>>,
}

impl FatSpectrum {
    /// Builds a spectrum from explicit (frequency Hz, amplitude) peaks.
    /// Amplitudes are normalized to sum to one.
    pub fn from_hz(peaks: &[(f64, f64)], field_strength_t: f64) -> Result<Self> {
        if peaks.is_empty() {
            return Err(Error::InvalidInput("spectrum needs at least one peak".into()));
        }
        if !(field_strength_t > 0.0) {
            return Err(Error::InvalidInput(format!(
                "field strength must be positive, got {field_strength_t}"
            )));
        }
        let total: f64 = peaks.iter().map(|&(_, a)| a).sum();
        if peaks.iter().any(|&(f, a)| !(a > 0.0) || !f.is_finite()) || !total.is_finite() {
            return Err(Error::InvalidInput(
                "spectrum amplitudes must be strictly positive and finite".into(),
            ));
        }
        let peaks = peaks
            .iter()
            .map(|&(frequency_hz, amplitude)| SpectralPeak {
                frequency_hz,
                amplitude: amplitude / total,
            })
            .collect();
        Ok(FatSpectrum {
            peaks,
            field_strength_t,
            source_ppm: None,
        })
    }

    /// Builds a spectrum from (ppm, amplitude) pairs, converting offsets to
    /// Hz at `field_strength_t`. The ppm source list is retained.
    pub fn from_ppm(pairs: &[(f64, f64)], field_strength_t: f64) -> Result<Self> {
        let hz: Vec<(f64, f64)> = pairs
            .iter()
            .map(|&(ppm, a)| Ok((ppm_to_hz(ppm, field_strength_t)?, a)))
            .collect::<Result<_>>()?;
        let mut spectrum = Self::from_hz(&hz, field_strength_t)?;
        spectrum.source_ppm = Some(pairs.to_vec());
        Ok(spectrum)
    }

    /// The standard six-peak liver model at the given field strength.
    pub fn default_six_peak(field_strength_t: f64) -> Self {
        let pairs: Vec<(f64, f64)> = DEFAULT_FAT_PPM
            .iter()
            .zip(DEFAULT_FAT_AMPLITUDES.iter())
            .map(|(&p, &a)| (p, a))
            .collect();
        Self::from_ppm(&pairs, field_strength_t).expect("default spectrum is valid")
    }

    pub fn peaks(&self) -> &[SpectralPeak] {
        &self.peaks
    }

    pub fn field_strength(&self) -> f64 {
        self.field_strength_t
    }

    pub fn source_ppm(&self) -> Option<&[(f64, f64)]> {
        self.source_ppm.as_deref()
    }

    /// Complex fat modulation `sum_p alpha_p exp(i 2 pi f_p t)` at echo time
    /// `t_s`. Equals exactly 1 at `t = 0`; magnitude never exceeds 1.
    pub fn fat_phasor(&self, t_s: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &self.peaks {
            let phase = TAU * p.frequency_hz * t_s;
            acc += Complex64::new(p.amplitude * phase.cos(), p.amplitude * phase.sin());
        }
        acc
    }
}

/// Echo times of a multi-echo acquisition, strictly increasing and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoProtocol {
    echo_times_s: Vec<f64>,
    field_strength_t: f64,
}

impl EchoProtocol {
    pub fn new(echo_times_s: Vec<f64>, field_strength_t: f64) -> Result<Self> {
        if echo_times_s.is_empty() {
            return Err(Error::InvalidInput("protocol needs at least one echo".into()));
        }
        if !(field_strength_t > 0.0) {
            return Err(Error::InvalidInput(format!(
                "field strength must be positive, got {field_strength_t}"
            )));
        }
        let increasing = echo_times_s.windows(2).all(|w| w[1] > w[0]);
        if !increasing || !(echo_times_s[0] > 0.0) || echo_times_s.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput(
                "echo times must be positive, finite and strictly increasing".into(),
            ));
        }
        Ok(EchoProtocol {
            echo_times_s,
            field_strength_t,
        })
    }

    /// Uniformly spaced protocol `TE_n = te1 + (n-1) * delta_te`.
    pub fn uniform(te1_s: f64, delta_te_s: f64, n: usize, field_strength_t: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("echo count must be at least 1".into()));
        }
        if !(delta_te_s > 0.0) && n > 1 {
            return Err(Error::InvalidInput(format!(
                "echo spacing must be positive, got {delta_te_s}"
            )));
        }
        let times = (0..n).map(|k| te1_s + k as f64 * delta_te_s).collect();
        Self::new(times, field_strength_t)
    }

    pub fn echo_times(&self) -> &[f64] {
        &self.echo_times_s
    }

    pub fn n_echoes(&self) -> usize {
        self.echo_times_s.len()
    }

    pub fn field_strength(&self) -> f64 {
        self.field_strength_t
    }

    /// Spacing between the first two echoes; `None` for single-echo protocols.
    pub fn first_spacing(&self) -> Option<f64> {
        (self.echo_times_s.len() >= 2).then(|| self.echo_times_s[1] - self.echo_times_s[0])
    }

    /// Truncates to the first `n` echoes.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_echoes() {
            return Err(Error::InvalidInput(format!(
                "cannot truncate {}-echo protocol to {n} echoes",
                self.n_echoes()
            )));
        }
        Self::new(self.echo_times_s[..n].to_vec(), self.field_strength_t)
    }
}

/// Real-valued quantitative maps of the shared-phase signal model:
/// water/fat magnitudes, R2* decay, off-resonance field and the common
/// echo-time-zero phase in cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct QMaps {
    pub rho_w: RealMap,
    pub rho_f: RealMap,
    pub r2star: RealMap,
    pub field: RealMap,
    pub phi0: RealMap,
    pub pixel_size_mm: f64,
}

impl QMaps {
    pub fn new(
        rho_w: RealMap,
        rho_f: RealMap,
        r2star: RealMap,
        field: RealMap,
        phi0: RealMap,
        pixel_size_mm: f64,
    ) -> Result<Self> {
        let q = QMaps {
            rho_w,
            rho_f,
            r2star,
            field,
            phi0,
            pixel_size_mm,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let shape_ok = self.rho_w.same_shape(&self.rho_f)
            && self.rho_w.same_shape(&self.r2star)
            && self.rho_w.same_shape(&self.field)
            && self.rho_w.same_shape(&self.phi0);
        if !shape_ok {
            return Err(Error::DimensionMismatch(
                "all five q-maps must share dimensions".into(),
            ));
        }
        if self.rho_w.iter().any(|&v| v < 0.0)
            || self.rho_f.iter().any(|&v| v < 0.0)
            || self.r2star.iter().any(|&v| v < 0.0)
        {
            return Err(Error::InvalidInput(
                "rho_w, rho_f and r2star must be non-negative everywhere".into(),
            ));
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.rho_w.height()
    }

    pub fn width(&self) -> usize {
        self.rho_w.width()
    }

    /// Proton density fat fraction `|rho_f| / (|rho_w| + |rho_f|)` in [0, 1].
    /// Voxels whose total density falls below a relative floor map to 0.
    pub fn pdff(&self) -> RealMap {
        pdff_from_magnitudes(&self.rho_w, &self.rho_f)
    }
}

/// Quantitative maps of the fully complex signal model: water and fat carry
/// independent phases, so there is no separate phi0 channel.
#[derive(Debug, Clone, PartialEq)]
pub struct QMapsComplex {
    pub rho_w: ComplexMap,
    pub rho_f: ComplexMap,
    pub r2star: RealMap,
    pub field: RealMap,
}

impl QMapsComplex {
    pub fn new(rho_w: ComplexMap, rho_f: ComplexMap, r2star: RealMap, field: RealMap) -> Result<Self> {
        let shape_ok = rho_w.same_shape(&rho_f) && rho_w.same_shape(&r2star) && rho_w.same_shape(&field);
        if !shape_ok {
            return Err(Error::DimensionMismatch(
                "all complex q-maps must share dimensions".into(),
            ));
        }
        if r2star.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("r2star must be non-negative".into()));
        }
        Ok(QMapsComplex {
            rho_w,
            rho_f,
            r2star,
            field,
        })
    }

    /// Lifts shared-phase maps into the complex model:
    /// `rho = |rho| exp(i 2 pi phi0)` for both species.
    pub fn from_shared_phase(q: &QMaps) -> Self {
        let mut rho_w = ComplexMap::filled(q.height(), q.width(), Complex64::new(0.0, 0.0));
        let mut rho_f = rho_w.clone();
        for i in 0..q.rho_w.len() {
            let phase = TAU * q.phi0.as_slice()[i];
            let rot = Complex64::new(phase.cos(), phase.sin());
            rho_w.as_mut_slice()[i] = rot * q.rho_w.as_slice()[i];
            rho_f.as_mut_slice()[i] = rot * q.rho_f.as_slice()[i];
        }
        QMapsComplex {
            rho_w,
            rho_f,
            r2star: q.r2star.clone(),
            field: q.field.clone(),
        }
    }

    pub fn height(&self) -> usize {
        self.rho_w.height()
    }

    pub fn width(&self) -> usize {
        self.rho_w.width()
    }

    pub fn pdff(&self) -> RealMap {
        let mag_w = self.rho_w.map(|c| c.norm());
        let mag_f = self.rho_f.map(|c| c.norm());
        pdff_from_magnitudes(&mag_w, &mag_f)
    }
}

fn pdff_from_magnitudes(mag_w: &RealMap, mag_f: &RealMap) -> RealMap {
    let max_total = mag_w
        .iter()
        .zip(mag_f.iter())
        .map(|(w, f)| w + f)
        .fold(0.0f64, f64::max);
    let floor = 1e-6 * max_total;
    RealMap::from_fn(mag_w.height(), mag_w.width(), |y, x| {
        let total = mag_w[(y, x)] + mag_f[(y, x)];
        if total <= floor || total == 0.0 {
            0.0
        } else {
            mag_f[(y, x)] / total
        }
    })
}

/// N-echo complex image stack tied to the protocol that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImageSeries {
    echoes: Vec<ComplexMap>,
    protocol: EchoProtocol,
}

impl ComplexImageSeries {
    pub fn new(echoes: Vec<ComplexMap>, protocol: EchoProtocol) -> Result<Self> {
        if echoes.len() != protocol.n_echoes() {
            return Err(Error::DimensionMismatch(format!(
                "{} echo images for a {}-echo protocol",
                echoes.len(),
                protocol.n_echoes()
            )));
        }
        if let Some(first) = echoes.first() {
            if !echoes.iter().all(|e| e.same_shape(first)) {
                return Err(Error::DimensionMismatch(
                    "echo images must share dimensions".into(),
                ));
            }
        }
        Ok(ComplexImageSeries { echoes, protocol })
    }

    pub fn echoes(&self) -> &[ComplexMap] {
        &self.echoes
    }

    pub fn protocol(&self) -> &EchoProtocol {
        &self.protocol
    }

    pub fn n_echoes(&self) -> usize {
        self.echoes.len()
    }

    pub fn height(&self) -> usize {
        self.echoes.first().map_or(0, |e| e.height())
    }

    pub fn width(&self) -> usize {
        self.echoes.first().map_or(0, |e| e.width())
    }

    /// Complex samples of one voxel across all echoes.
    pub fn voxel(&self, row: usize, col: usize) -> Vec<Complex64> {
        self.echoes.iter().map(|e| e[(row, col)]).collect()
    }

    /// Keeps only the first `n` echoes (echo-count augmentation).
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let protocol = self.protocol.truncated(n)?;
        Ok(ComplexImageSeries {
            echoes: self.echoes[..n].to_vec(),
            protocol,
        })
    }
}

fn check_spectrum_protocol(protocol: &EchoProtocol, spectrum: &FatSpectrum) -> Result<()> {
    if (protocol.field_strength() - spectrum.field_strength()).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "spectrum field strength {} T does not match protocol {} T",
            spectrum.field_strength(),
            protocol.field_strength()
        )));
    }
    Ok(())
}

/// Shared-phase forward model. Per voxel and echo:
/// `I_n = exp(-R2* t_n) exp(i 2 pi phi t_n) exp(i 2 pi phi0) [rho_w + rho_f * fat_phasor(t_n)]`.
pub fn forward_signal_shared_phase(
    q: &QMaps,
    protocol: &EchoProtocol,
    spectrum: &FatSpectrum,
) -> Result<ComplexImageSeries> {
    q.validate()?;
    check_spectrum_protocol(protocol, spectrum)?;
    let (h, w) = (q.height(), q.width());
    let phasors: Vec<Complex64> = protocol
        .echo_times()
        .iter()
        .map(|&t| spectrum.fat_phasor(t))
        .collect();

    let mut echoes = Vec::with_capacity(protocol.n_echoes());
    for (n, &t) in protocol.echo_times().iter().enumerate() {
        let fat = phasors[n];
        let mut img = ComplexMap::filled(h, w, Complex64::new(0.0, 0.0));
        let out = img.as_mut_slice();
        for i in 0..h * w {
            let decay = (-q.r2star.as_slice()[i] * t).exp();
            let phase = TAU * (q.field.as_slice()[i] * t + q.phi0.as_slice()[i]);
            let modulation = Complex64::new(decay * phase.cos(), decay * phase.sin());
            let species = q.rho_w.as_slice()[i] + q.rho_f.as_slice()[i] * fat;
            out[i] = modulation * species;
        }
        echoes.push(img);
    }
    ComplexImageSeries::new(echoes, protocol.clone())
}

/// Fully complex forward model: water and fat amplitudes carry their own
/// phases and no common phi0 factor is applied.
pub fn forward_signal_complex(
    q: &QMapsComplex,
    protocol: &EchoProtocol,
    spectrum: &FatSpectrum,
) -> Result<ComplexImageSeries> {
    check_spectrum_protocol(protocol, spectrum)?;
    let (h, w) = (q.height(), q.width());
    let phasors: Vec<Complex64> = protocol
        .echo_times()
        .iter()
        .map(|&t| spectrum.fat_phasor(t))
        .collect();

    let mut echoes = Vec::with_capacity(protocol.n_echoes());
    for (n, &t) in protocol.echo_times().iter().enumerate() {
        let fat = phasors[n];
        let mut img = ComplexMap::filled(h, w, Complex64::new(0.0, 0.0));
        let out = img.as_mut_slice();
        for i in 0..h * w {
            let decay = (-q.r2star.as_slice()[i] * t).exp();
            let phase = TAU * q.field.as_slice()[i] * t;
            let modulation = Complex64::new(decay * phase.cos(), decay * phase.sin());
            let species = q.rho_w.as_slice()[i] + q.rho_f.as_slice()[i] * fat;
            out[i] = modulation * species;
        }
        echoes.push(img);
    }
    ComplexImageSeries::new(echoes, protocol.clone())
}

/// Adds i.i.d. Gaussian noise to real and imaginary channels of every echo.
///
/// The noise standard deviation is `mean(first-echo magnitude over
/// foreground) / snr`; the foreground is every voxel whose first-echo
/// magnitude exceeds 1e-9 of the maximum. `snr = inf` returns the series
/// unchanged. Deterministic given `seed`.
pub fn add_complex_noise(series: &ComplexImageSeries, snr: f64, seed: u64) -> Result<ComplexImageSeries> {
    if !(snr > 0.0) {
        return Err(Error::InvalidInput(format!("snr must be positive, got {snr}")));
    }
    if snr.is_infinite() {
        return Ok(series.clone());
    }
    let first = series
        .echoes()
        .first()
        .ok_or_else(|| Error::InvalidInput("series has no echoes".into()))?;
    let mags: Vec<f64> = first.iter().map(|c| c.norm()).collect();
    let max = mags.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(Error::EmptyForeground);
    }
    let thresh = 1e-9 * max;
    let (sum, count) = mags
        .iter()
        .filter(|&&m| m > thresh)
        .fold((0.0, 0usize), |(s, c), &m| (s + m, c + 1));
    if count == 0 {
        return Err(Error::EmptyForeground);
    }
    let sigma = (sum / count as f64) / snr;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let echoes = series
        .echoes()
        .iter()
        .map(|img| {
            img.map(|&c| {
                let re: f64 = normal.sample(&mut rng);
                let im: f64 = normal.sample(&mut rng);
                c + Complex64::new(sigma * re, sigma * im)
            })
        })
        .collect();
    ComplexImageSeries::new(echoes, series.protocol().clone())
}
