//! Closed-form lower bounds and log-log scaling fits.
//!
//! Bounds known only up to an unspecified constant carry
//! `has_constant = false`; [`BoundReport::admits`] refuses to compare them
//! against measurements.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// `1.5 · μ` for the finite-length scaling exponent `μ = 3.55`.
pub const CHI_LOWER_EXPONENT: f64 = 5.325;
/// `1.5 · μ` for `μ = 4.7`.
pub const CHI_UPPER_EXPONENT: f64 = 7.05;
/// Floor for general capacity-approaching schemes.
pub const CHI_GENERAL_EXPONENT: f64 = 2.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    pub inputs: Vec<(&'static str, f64)>,
    pub value: f64,
    pub has_constant: bool,
}

impl BoundReport {
    fn exact(name: &'static str, inputs: Vec<(&'static str, f64)>, value: f64) -> Self {
        BoundReport {
            name,
            inputs,
            value,
            has_constant: true,
        }
    }

    fn scaling(name: &'static str, inputs: Vec<(&'static str, f64)>, value: f64) -> Self {
        BoundReport {
            name,
            inputs,
            value,
            has_constant: false,
        }
    }

    /// Whether `measured` respects the bound; `None` when the bound has no constant.
    pub fn admits(&self, measured: f64) -> Option<bool> {
        self.has_constant.then_some(measured >= self.value)
    }
}

fn out_of_regime<T>(msg: String) -> Result<T> {
    Err(Error::OutOfRegime(msg))
}

fn check_length(n: f64) -> Result<()> {
    if !(n.is_finite() && n >= 1.0) {
        return invalid(format!("block length must be at least 1, got {n}"));
    }
    Ok(())
}

fn check_rate(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return invalid(format!("rate must lie in [0, 1], got {r}"));
    }
    Ok(())
}

/// Minimum area of a grid circuit whose output bisection width is `ω`.
pub fn thompson_area(omega: f64) -> Result<BoundReport> {
    if !(omega.is_finite() && omega >= 0.0) {
        return invalid(format!("bisection width must be nonnegative, got {omega}"));
    }
    Ok(BoundReport::exact("thompson_area", vec![("omega", omega)], omega * omega / 4.0))
}

/// `A·T² ≥ N²(2R−1)²/64` for encoders of rate `R > 1/2`.
pub fn encoder_at2(n: f64, r: f64) -> Result<BoundReport> {
    check_length(n)?;
    check_rate(r)?;
    if r <= 0.5 {
        return out_of_regime(format!("encoder AT^2 bound needs R > 1/2, got {r}"));
    }
    let g = 2.0 * r - 1.0;
    Ok(BoundReport::exact("encoder_at2", vec![("N", n), ("R", r)], n * n * g * g / 64.0))
}

/// `E ≥ q·N^{3/2}(2R−1)/8` for encoders of rate `R > 1/2`.
pub fn encoder_energy(n: f64, r: f64, q: f64) -> Result<BoundReport> {
    check_length(n)?;
    check_rate(r)?;
    if !(q > 0.0 && q <= 1.0) {
        return invalid(format!("activity fraction must lie in (0, 1], got {q}"));
    }
    if r <= 0.5 {
        return out_of_regime(format!("encoder energy bound needs R > 1/2, got {r}"));
    }
    Ok(BoundReport::exact(
        "encoder_energy",
        vec![("N", n), ("R", r), ("q", q)],
        q * n.powf(1.5) * (2.0 * r - 1.0) / 8.0,
    ))
}

/// Minimum bisection width `N(3R−2)` of the unfrozen outputs, `R > 2/3`.
pub fn decoder_mbw_bound(n: f64, r: f64) -> Result<BoundReport> {
    check_length(n)?;
    check_rate(r)?;
    if r <= 2.0 / 3.0 {
        return out_of_regime(format!("decoder width bound needs R > 2/3, got {r}"));
    }
    Ok(BoundReport::exact("decoder_mbw", vec![("N", n), ("R", r)], n * (3.0 * r - 2.0)))
}

/// Decoder energy scales at least as `ω√N` with `ω = N(3R−2)`; no constant.
pub fn decoder_energy_scale(n: f64, r: f64) -> Result<BoundReport> {
    let omega = decoder_mbw_bound(n, r)?.value;
    Ok(BoundReport::scaling(
        "decoder_energy_scale",
        vec![("N", n), ("R", r), ("omega", omega)],
        omega * n.sqrt(),
    ))
}

/// Clock cycles of a mesh SC decoder scale at least as `√N`; no constant.
pub fn decoder_time_scale(n: f64) -> Result<BoundReport> {
    check_length(n)?;
    Ok(BoundReport::scaling("decoder_time_scale", vec![("N", n)], n.sqrt()))
}

/// Reciprocal gap to capacity `1/(1 − R/C)`.
pub fn chi(r: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) || r < 0.0 {
        return invalid(format!("need 0 <= R and 0 < C <= 1, got R={r}, C={c}"));
    }
    if r >= c {
        return out_of_regime(format!("rate {r} is not below capacity {c}"));
    }
    Ok(1.0 / (1.0 - r / c))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiWindow {
    pub lower: BoundReport,
    pub upper: BoundReport,
    pub general_floor: BoundReport,
}

impl ChiWindow {
    pub fn exponents() -> (f64, f64) {
        (CHI_LOWER_EXPONENT, CHI_UPPER_EXPONENT)
    }
}

/// Polar decoding-energy window `(χ^{5.325}, χ^{7.05}·log⁴χ)` plus the general `χ^{2.5}` floor.
pub fn chi_energy_window(chi: f64) -> Result<ChiWindow> {
    if !(chi.is_finite() && chi > 1.0) {
        return invalid(format!("chi must exceed 1, got {chi}"));
    }
    let inputs = vec![("chi", chi)];
    Ok(ChiWindow {
        lower: BoundReport::scaling("chi_energy_lower", inputs.clone(), chi.powf(CHI_LOWER_EXPONENT)),
        upper: BoundReport::scaling(
            "chi_energy_upper",
            inputs.clone(),
            chi.powf(CHI_UPPER_EXPONENT) * chi.log2().powi(4),
        ),
        general_floor: BoundReport::scaling("chi_energy_general", inputs, chi.powf(CHI_GENERAL_EXPONENT)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in natural-log units.
    pub residual: f64,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }
}

/// Least-squares line through `(ln N, ln value)`.
pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return invalid(format!("a scaling fit needs at least 3 points, got {}", points.len()));
    }
    if let Some(&(n, v)) = points.iter().find(|&&(n, v)| !(n > 0.0 && v > 0.0 && n.is_finite() && v.is_finite())) {
        return invalid(format!("scaling fit needs positive finite points, got ({n}, {v})"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return invalid("scaling fit needs at least two distinct N");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        points: points.to_vec(),
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn closed_forms() {
        assert_eq!(thompson_area(0.0).unwrap().value, 0.0);
        assert_eq!(thompson_area(4.0).unwrap().value, 4.0);
        assert_eq!(encoder_at2(256.0, 0.75).unwrap().value, 256.0);
        assert_eq!(encoder_at2(1024.0, 0.75).unwrap().value, 4096.0);
        assert_eq!(encoder_energy(256.0, 0.75, 1.0).unwrap().value, 256.0);
        assert_eq!(encoder_energy(1024.0, 0.75, 1.0).unwrap().value, 2048.0);
        assert_eq!(encoder_energy(1024.0, 0.75, 0.5).unwrap().value, 1024.0);
        assert!(close(decoder_mbw_bound(8.0, 0.75).unwrap().value, 2.0));
        assert!(close(decoder_mbw_bound(1024.0, 0.9).unwrap().value, 716.8));
        assert!(close(decoder_energy_scale(8.0, 0.75).unwrap().value, 2.0 * 8f64.sqrt()));
        assert!(close(decoder_energy_scale(1024.0, 0.9).unwrap().value, 716.8 * 32.0));
    }

    #[test]
    fn regimes() {
        assert!(matches!(encoder_at2(64.0, 0.5), Err(Error::OutOfRegime(_))));
        assert!(matches!(encoder_energy(64.0, 0.4, 1.0), Err(Error::OutOfRegime(_))));
        assert!(matches!(decoder_mbw_bound(64.0, 2.0 / 3.0), Err(Error::OutOfRegime(_))));
        assert!(matches!(chi(0.5, 0.5), Err(Error::OutOfRegime(_))));
        assert!(encoder_at2(256.0, 0.5 + 1e-9).unwrap().value < 1e-9);
        assert!(decoder_mbw_bound(256.0, 2.0 / 3.0 + 1e-12).unwrap().value < 1e-6);
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi(0.25, 0.5).unwrap(), 2.0);
        assert_eq!(chi(0.0, 0.7).unwrap(), 1.0);
        assert!(close(chi(0.45, 0.5).unwrap(), 10.0));
        let w = chi_energy_window(2.0).unwrap();
        assert_eq!(ChiWindow::exponents(), (5.325, 7.05));
        assert_eq!(w.lower.value, 2f64.powf(5.325));
        assert_eq!(w.general_floor.value, 2f64.powf(2.5));
        assert!(!w.lower.has_constant && !w.upper.has_constant);
        assert!(chi_energy_window(1.0).is_err());
    }

    #[test]
    fn unscaled_bounds_are_not_comparable() {
        assert_eq!(decoder_energy_scale(64.0, 0.9).unwrap().admits(1e12), None);
        assert_eq!(encoder_energy(64.0, 0.9, 1.0).unwrap().admits(1e12), Some(true));
        assert_eq!(encoder_energy(64.0, 0.9, 1.0).unwrap().admits(0.0), Some(false));
    }

    #[test]
    fn fits() {
        let pts: Vec<(f64, f64)> = [16.0, 64.0, 256.0].iter().map(|&n: &f64| (n, n.powf(1.5))).collect();
        let f = fit_scaling_exponent(&pts).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-9);
        assert!(f.residual < 1e-9);
        let flat = fit_scaling_exponent(&[(2.0, 7.0), (4.0, 7.0), (8.0, 7.0)]).unwrap();
        assert!(flat.slope.abs() < 1e-9);
        assert!(fit_scaling_exponent(&[(2.0, 1.0), (4.0, 0.0), (8.0, 1.0)]).is_err());
        assert!(fit_scaling_exponent(&[(2.0, 1.0), (4.0, 2.0)]).is_err());
    }
}
