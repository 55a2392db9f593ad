//! Locating spectral lines and classifying their shape.

use super::langevin::LinearizedDynamics;
use super::lyapunov::ComplexSchur;
use super::spectrum::analytic_point;

/// Normal-mode resonance of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    /// Position among the retained modes.
    pub mode: usize,
    /// Bare frequency `omega_n`.
    pub bare_frequency: f64,
    /// `|Im lambda|` of the matching drift eigenvalue.
    pub frequency: f64,
    /// `-Re lambda` of the matching drift eigenvalue.
    pub linewidth: f64,
}

/// Matches each retained mode with the drift eigenvalue whose oscillation
/// frequency is closest to `omega_n`.
pub fn resonances(dynamics: &LinearizedDynamics) -> Vec<Resonance> {
    let mut eig = ComplexSchur::new(&dynamics.drift).eigenvalues();
    let mut out = Vec::with_capacity(dynamics.mode_count());
    for (m, &w) in dynamics.frequencies.iter().enumerate() {
        let Some((i, lambda)) = eig
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.im.abs() - w).abs().total_cmp(&(b.1.im.abs() - w).abs()))
            .map(|(i, z)| (i, *z))
        else {
            break;
        };
        // each oscillator owns a conjugate pair
        eig.remove(i);
        if let Some(j) = eig.iter().position(|z| (z - lambda.conj()).norm() <= 1e-9 * lambda.norm().max(1.0)) {
            eig.remove(j);
        }
        out.push(Resonance { mode: m, bare_frequency: w, frequency: lambda.im.abs(), linewidth: -lambda.re });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineShape {
    pub mode: usize,
    /// Sideband centre (negative for the Stokes side).
    pub centre: f64,
    pub half_window: f64,
    /// Sign changes of `dS/dnu` inside the window.
    pub extrema: usize,
    /// `(S_right - S_left) / max S` across the window edges.
    pub asymmetry: f64,
    pub peak: f64,
    /// `(peak - dip) / peak` for the deepest interior minimum, zero without one.
    pub contrast: f64,
    /// Peak at least [`VISIBILITY`] times the tallest line of the spectrum.
    pub visible: bool,
}

impl LineShape {
    /// A peak accompanied by a dip of at least [`FANO_CONTRAST`] inside the window.
    pub fn is_fano(&self) -> bool {
        self.extrema >= 2 && self.contrast >= FANO_CONTRAST
    }
}

/// Minimum relative depth of the dip next to a Fano peak.
pub const FANO_CONTRAST: f64 = 0.1;
/// Lines weaker than this fraction of the tallest one are ignored.
pub const VISIBILITY: f64 = 1e-2;

/// Samples accepted per window.
pub const WINDOW_SAMPLES: usize = 601;
/// Differences below this fraction of the window's spectral range count as flat.
pub const FLAT_FRACTION: f64 = 1e-6;

/// Counts extrema of `s` on `[centre - half, centre + half]`.
pub fn line_shape<F: Fn(f64) -> f64>(s: F, mode: usize, centre: f64, half: f64) -> LineShape {
    let xs: Vec<f64> =
        (0..WINDOW_SAMPLES).map(|i| centre - half + 2.0 * half * i as f64 / (WINDOW_SAMPLES - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| s(x)).collect();
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let floor = FLAT_FRACTION * (hi - lo).max(f64::MIN_POSITIVE);
    let mut last = 0.0f64;
    let mut extrema = 0;
    let mut dip = f64::INFINITY;
    for w in ys.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= floor {
            continue;
        }
        if last != 0.0 && d.signum() != last {
            extrema += 1;
            if last < 0.0 {
                dip = dip.min(w[0]);
            }
        }
        last = d.signum();
    }
    let contrast = if dip.is_finite() && hi > 0.0 { (hi - dip) / hi } else { 0.0 };
    LineShape {
        mode,
        centre,
        half_window: half,
        extrema,
        asymmetry: (ys[ys.len() - 1] - ys[0]) / hi.max(f64::MIN_POSITIVE),
        peak: hi,
        contrast,
        visible: true,
    }
}

/// Line shapes of both sidebands of every resonance, within three
/// linewidths of the resonance frequency.
pub fn sideband_shapes(dynamics: &LinearizedDynamics) -> Vec<LineShape> {
    let s = |nu: f64| analytic_point(dynamics, nu);
    let mut shapes: Vec<LineShape> = resonances(dynamics)
        .into_iter()
        .flat_map(|r| {
            let half = 3.0 * r.linewidth;
            [line_shape(s, r.mode, -r.frequency, half), line_shape(s, r.mode, r.frequency, half)]
        })
        .collect();
    let tallest = shapes.iter().map(|l| l.peak).fold(0.0, f64::max);
    for l in &mut shapes {
        l.visible = l.peak >= VISIBILITY * tallest;
    }
    shapes
}

/// Whether any visible sideband has a Fano profile.
pub fn has_fano_line(shapes: &[LineShape]) -> bool {
    shapes.iter().any(|l| l.visible && l.is_fano())
}
