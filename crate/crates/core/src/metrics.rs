//! Gauge alignment, error measures and spectral diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{CartesianGrid2, ScalarSamples};
use crate::fourier::{fft2, signed_mode};

/// Shift `recon` by the mean of `truth - recon` over points valid in both.
/// Invalid reconstruction values stay invalid.
pub fn align_gauge(recon: &ScalarSamples, truth: &ScalarSamples) -> Result<(ScalarSamples, f64)> {
    check_len(recon, truth)?;
    let (mut sum, mut n) = (0.0, 0usize);
    for (r, t) in recon.values.iter().zip(&truth.values) {
        if r.is_finite() && t.is_finite() {
            sum += t - r;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoOverlap);
    }
    let offset = sum / n as f64;
    Ok((ScalarSamples::new(recon.values.iter().map(|r| r + offset).collect()), offset))
}

/// Shift to zero mean over the valid entries; used when no truth exists.
pub fn zero_mean(values: &ScalarSamples) -> (ScalarSamples, f64) {
    let valid: Vec<f64> = values.values.iter().copied().filter(|v| v.is_finite()).collect();
    let offset = if valid.is_empty() { 0.0 } else { -valid.iter().sum::<f64>() / valid.len() as f64 };
    (ScalarSamples::new(values.values.iter().map(|v| v + offset).collect()), offset)
}

/// Mean absolute error over points valid in both, divided by `max |truth|`.
pub fn relative_mae(recon: &ScalarSamples, truth: &ScalarSamples) -> Result<f64> {
    check_len(recon, truth)?;
    let scale = truth.values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) {
        return Err(Error::DegenerateNormalization);
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for (r, t) in recon.values.iter().zip(&truth.values) {
        if r.is_finite() && t.is_finite() {
            sum += (r - t).abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(sum / n as f64 / scale)
}

/// Pointwise `|recon - truth|`, NaN where either is invalid.
pub fn error_map(recon: &ScalarSamples, truth: &ScalarSamples) -> Result<ScalarSamples> {
    check_len(recon, truth)?;
    Ok(ScalarSamples::new(recon.values.iter().zip(&truth.values).map(|(r, t)| (r - t).abs()).collect()))
}

fn check_len(a: &ScalarSamples, b: &ScalarSamples) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("{} reconstruction values vs {} truth values", a.len(), b.len())));
    }
    Ok(())
}

/// Per-bin power of a periodic field. Bin `m` collects modes with
/// `|kappa| / dk` rounding to `m`, `dk = 2 pi / max(Lx, Ly)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    pub bins: Vec<usize>,
    /// Bin centres in radians per unit length.
    pub wavenumber: Vec<f64>,
    /// `|F|^2 / N^2` summed per bin; the total equals the mean square.
    pub power: Vec<f64>,
}

impl RadialSpectrum {
    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }
}

pub fn radial_spectrum(grid: &CartesianGrid2, field: &ScalarSamples) -> Result<RadialSpectrum> {
    grid.validate()?;
    if !grid.periodic {
        return Err(Error::Unsupported("radial spectrum needs a periodic grid".into()));
    }
    if field.len() != grid.len() {
        return Err(Error::Shape(format!("field has {} values, grid has {} nodes", field.len(), grid.len())));
    }
    if field.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Unsupported("radial spectrum needs a fully valid field".into()));
    }
    let [lx, ly] = grid.extents();
    let dk = std::f64::consts::TAU / lx.max(ly);
    let (kx0, ky0) = (std::f64::consts::TAU / lx, std::f64::consts::TAU / ly);
    let spec = fft2(grid, &field.values);
    let norm = (grid.len() as f64).powi(2);
    let mut power: Vec<f64> = Vec::new();
    for j in 0..grid.ny {
        let ky = signed_mode(j, grid.ny) as f64 * ky0;
        for i in 0..grid.nx {
            let kx = signed_mode(i, grid.nx) as f64 * kx0;
            let m = ((kx * kx + ky * ky).sqrt() / dk).round() as usize;
            if m >= power.len() {
                power.resize(m + 1, 0.0);
            }
            power[m] += spec[grid.index(i, j)].norm_sqr() / norm;
        }
    }
    let bins: Vec<usize> = (0..power.len()).collect();
    let wavenumber = bins.iter().map(|&m| m as f64 * dk).collect();
    Ok(RadialSpectrum { bins, wavenumber, power })
}

/// Reconstruction-over-truth spectrum per radial bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub bins: Vec<usize>,
    pub wavenumber: Vec<f64>,
    pub truth_power: Vec<f64>,
    pub recon_power: Vec<f64>,
    /// Power ratio; `None` where the truth carries (numerically) no power.
    pub ratio: Vec<Option<f64>>,
    pub amplitude_ratio: Vec<Option<f64>>,
}

impl SpectrumTable {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"));
        let mut s = String::from("bin,wavenumber,truth_power,recon_power,power_ratio,amplitude_ratio\n");
        for b in 0..self.bins.len() {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{},{}\n",
                self.bins[b],
                self.wavenumber[b],
                self.truth_power[b],
                self.recon_power[b],
                opt(self.ratio[b]),
                opt(self.amplitude_ratio[b])
            ));
        }
        s
    }
}

pub fn transfer_function(grid: &CartesianGrid2, recon: &ScalarSamples, truth: &ScalarSamples) -> Result<SpectrumTable> {
    let t = radial_spectrum(grid, truth)?;
    let r = radial_spectrum(grid, recon)?;
    let n = t.bins.len().max(r.bins.len());
    let pad = |mut v: Vec<f64>| {
        v.resize(n, 0.0);
        v
    };
    let (tp, rp) = (pad(t.power), pad(r.power));
    let floor = 1e-14 * tp.iter().sum::<f64>();
    let ratio: Vec<Option<f64>> = (0..n).map(|b| (tp[b] > floor).then(|| rp[b] / tp[b])).collect();
    let amplitude_ratio = ratio.iter().map(|r| r.map(f64::sqrt)).collect();
    let [lx, ly] = grid.extents();
    let dk = std::f64::consts::TAU / lx.max(ly);
    Ok(SpectrumTable {
        bins: (0..n).collect(),
        wavenumber: (0..n).map(|m| m as f64 * dk).collect(),
        truth_power: tp,
        recon_power: rp,
        ratio,
        amplitude_ratio,
    })
}

/// Average ranks, ties sharing the mean of their positions.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation; `None` when either input is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for k in 0..rx.len() {
        let (a, b) = (rx[k] - mx, ry[k] - my);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}
