//! Multicolor ionizing field: Gaussian-envelope frequency components with
//! polarization, relative phase, and center time, plus their analytic
//! spectral amplitudes.
//!
//! Convention: `fwhm` is the *intensity* full width at half maximum, the
//! usual quoted pulse duration. `envelope` is therefore the intensity
//! profile (peak 1, half maximum at +/- fwhm/2) and the field amplitude is
//! its square root. The Fourier data below follow from that choice:
//! sigma_E * sigma_t = hbar with sigma_t = fwhm / (2 sqrt(ln 2)), and the
//! spectral *intensity* FWHM is 4 ln(2) hbar / fwhm (0.0912 eV at 20 fs).

use crate::units::HBAR_EV_FS;
use crate::{Error, Result};
use nalgebra::Vector3;
use num_complex::Complex64;

/// Photon polarization, encoded as the spherical tensor component q of the
/// unit polarization vector: left-circular q=+1, right-circular q=-1,
/// linear along the quantization axis q=0. Dipole selection rules then read
/// directly as m -> m + q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Polarization {
    LeftCircular,
    RightCircular,
    LinearZ,
}

impl Polarization {
    pub fn spherical_component(self) -> i32 {
        match self {
            Polarization::LeftCircular => 1,
            Polarization::RightCircular => -1,
            Polarization::LinearZ => 0,
        }
    }

    /// Unit polarization vector (the covariant basis vector e-hat_q).
    pub fn unit_vector(self) -> Vector3<Complex64> {
        crate::angular::spherical_basis_vector(self.spherical_component())
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "left-circular" => Ok(Polarization::LeftCircular),
            "right-circular" => Ok(Polarization::RightCircular),
            "linear-z" => Ok(Polarization::LinearZ),
            other => Err(Error::ConfigInvalid(format!(
                "unknown polarization {other:?} (expected left-circular, right-circular, or linear-z)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Polarization::LeftCircular => "left-circular",
            Polarization::RightCircular => "right-circular",
            Polarization::LinearZ => "linear-z",
        }
    }
}

/// One Gaussian pulse of the multicolor field.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FrequencyComponent {
    pub label: String,
    /// Photon energy (eV).
    pub omega: f64,
    /// Peak field strength, relative units.
    pub amplitude: f64,
    pub polarization: Polarization,
    /// Carrier-envelope / relative phase (rad).
    pub phase: f64,
    /// Envelope center (fs).
    pub center_time: f64,
    /// Intensity FWHM (fs).
    pub fwhm: f64,
}

impl FrequencyComponent {
    pub fn new(
        label: impl Into<String>,
        omega: f64,
        amplitude: f64,
        polarization: Polarization,
        phase: f64,
        center_time: f64,
        fwhm: f64,
    ) -> Result<Self> {
        let label = label.into();
        if !(omega > 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "component {label}: photon energy must be positive, got {omega}"
            )));
        }
        if !(fwhm > 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "component {label}: fwhm must be positive, got {fwhm}"
            )));
        }
        if !amplitude.is_finite() || !phase.is_finite() || !center_time.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "component {label}: non-finite parameter"
            )));
        }
        Ok(Self {
            label,
            omega,
            amplitude,
            polarization,
            phase,
            center_time,
            fwhm,
        })
    }

    /// Intensity envelope exp(-4 ln2 (t - t0)^2 / fwhm^2); peak 1, FWHM as configured.
    pub fn envelope(&self, t: f64) -> f64 {
        let u = (t - self.center_time) / self.fwhm;
        (-4.0 * std::f64::consts::LN_2 * u * u).exp()
    }

    /// Field amplitude at time t: amplitude * sqrt(intensity envelope).
    pub fn field_amplitude(&self, t: f64) -> f64 {
        self.amplitude * self.envelope(t).sqrt()
    }

    /// Gaussian width of the spectral amplitude, sigma_E = 2 sqrt(ln2) hbar / fwhm (eV).
    pub fn spectral_sigma(&self) -> f64 {
        2.0 * std::f64::consts::LN_2.sqrt() * HBAR_EV_FS / self.fwhm
    }

    /// FWHM of the spectral intensity |s|^2: 4 ln2 hbar / fwhm (eV).
    pub fn spectral_intensity_fwhm(&self) -> f64 {
        4.0 * std::f64::consts::LN_2 * HBAR_EV_FS / self.fwhm
    }

    /// Analytic Fourier transform of the pulse at photon energy `e_eval` (eV):
    ///
    /// s(E) = A sqrt(2 pi) sigma_t exp(-(E-omega)^2 / (2 sigma_E^2))
    ///        * exp(i phase) * exp(i E t0 / hbar)
    ///
    /// The carrier is phase-locked to the envelope center, so shifting
    /// `center_time` by tau multiplies this by exp(i E tau / hbar) exactly.
    pub fn spectral_amplitude(&self, e_eval: f64) -> Complex64 {
        let sigma_e = self.spectral_sigma();
        let sigma_t = HBAR_EV_FS / sigma_e;
        let d = (e_eval - self.omega) / sigma_e;
        let mag = self.amplitude * (2.0 * std::f64::consts::PI).sqrt() * sigma_t
            * (-0.5 * d * d).exp();
        mag * Complex64::from_polar(1.0, self.phase + e_eval * self.center_time / HBAR_EV_FS)
    }

    /// Phase wrapped to [0, 2 pi), for comparing physically equivalent pulses.
    pub fn reduced_phase(&self) -> f64 {
        self.phase.rem_euclid(2.0 * std::f64::consts::PI)
    }

    /// Copy with the envelope center shifted by `tau` (fs).
    pub fn delayed(&self, tau: f64) -> Self {
        let mut c = self.clone();
        c.center_time += tau;
        c
    }
}

/// The full multicolor field: an ordered, uniquely labeled set of components.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FieldSpec {
    components: Vec<FrequencyComponent>,
}

impl FieldSpec {
    pub fn new(components: Vec<FrequencyComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::ConfigInvalid("field has no components".into()));
        }
        for (i, a) in components.iter().enumerate() {
            for b in &components[i + 1..] {
                if a.label == b.label {
                    return Err(Error::ConfigInvalid(format!(
                        "duplicate component label {:?}",
                        a.label
                    )));
                }
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[FrequencyComponent] {
        &self.components
    }

    pub fn get(&self, label: &str) -> Option<&FrequencyComponent> {
        self.components.iter().find(|c| c.label == label)
    }
}

/// The four reference components of the two-pathway ionization scheme:
/// two left-circular pumps resonant with the source atom's 4p levels
/// (see `atoms::SourceAtom`) and two linear-z probes lifting each
/// intermediate into the same continuum window near 15.76 eV.
pub fn reference_components() -> Vec<FrequencyComponent> {
    vec![
        FrequencyComponent::new("omega1", 4.554, 1.0, Polarization::LeftCircular, 0.0, 0.0, 20.0)
            .unwrap(),
        FrequencyComponent::new("omega2", 17.324, 1.0, Polarization::LinearZ, 0.0, 0.0, 20.0)
            .unwrap(),
        FrequencyComponent::new("omega3", 5.167, 1.0, Polarization::LeftCircular, 0.0, 0.0, 20.0)
            .unwrap(),
        FrequencyComponent::new("omega4", 16.701, 1.0, Polarization::LinearZ, 0.0, 0.0, 20.0)
            .unwrap(),
    ]
}

/// Direct one-photon component for the parity-mixing scheme: energy equal to
/// the omega3 + omega4 pathway sum, so the odd packet lands on the same
/// final energy as the even one. The source material gives no number for
/// this component; equality of final energies is a consistency choice.
pub fn one_photon_reference() -> FrequencyComponent {
    FrequencyComponent::new("omega0", 21.868, 1.0, Polarization::LinearZ, 0.0, 0.0, 20.0).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn comp(phase: f64, t0: f64) -> FrequencyComponent {
        FrequencyComponent::new("c", 5.0, 1.3, Polarization::LinearZ, phase, t0, 20.0).unwrap()
    }

    #[test]
    fn envelope_peak_and_half_points() {
        let c = comp(0.0, 3.0);
        assert_abs_diff_eq!(c.envelope(3.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.envelope(3.0 + 10.0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.envelope(3.0 - 10.0), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.envelope(3.0 + 20.0), 0.0625, epsilon = 1e-14);
    }

    #[test]
    fn spectral_peak_is_real_positive_on_resonance() {
        let c = comp(0.0, 0.0);
        let s = c.spectral_amplitude(5.0);
        assert!(s.re > 0.0);
        assert_abs_diff_eq!(s.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn spectral_intensity_fwhm_at_20_fs() {
        let c = comp(0.4, 1.0);
        assert_abs_diff_eq!(c.spectral_intensity_fwhm(), 0.0912475, epsilon = 5e-7);
        // verify against the actual |s|^2 profile
        let peak = c.spectral_amplitude(5.0).norm_sqr();
        let half = c.spectral_amplitude(5.0 + 0.5 * c.spectral_intensity_fwhm()).norm_sqr();
        assert_relative_eq!(half, 0.5 * peak, max_relative = 1e-12);
    }

    #[test]
    fn phase_factorizes_exactly() {
        let a = comp(0.0, 0.7);
        let b = comp(1.234, 0.7);
        for e in [4.8, 5.0, 5.3] {
            let want = a.spectral_amplitude(e) * Complex64::from_polar(1.0, 1.234);
            let got = b.spectral_amplitude(e);
            assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-14);
            assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn delay_theorem_exact() {
        let c = comp(0.3, 0.0);
        let tau = 7.7;
        let d = c.delayed(tau);
        for e in [4.6, 5.0, 5.4] {
            let want = c.spectral_amplitude(e)
                * Complex64::from_polar(1.0, e * tau / HBAR_EV_FS);
            let got = d.spectral_amplitude(e);
            assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn parseval() {
        let c = comp(0.9, 2.0);
        // time domain: |A|^2 integral of the intensity envelope
        let time = crate::numeric::integrate_panels(
            |t| c.field_amplitude(t).powi(2),
            -120.0,
            120.0,
            64,
            12,
        );
        // frequency domain: integral |s(E)|^2 dE / (2 pi hbar)
        let sigma = c.spectral_sigma();
        let freq = crate::numeric::integrate_panels(
            |e| c.spectral_amplitude(e).norm_sqr(),
            5.0 - 10.0 * sigma,
            5.0 + 10.0 * sigma,
            64,
            12,
        ) / (2.0 * std::f64::consts::PI * HBAR_EV_FS);
        assert_relative_eq!(time, freq, max_relative = 1e-6);
    }

    #[test]
    fn sigma_product_is_hbar() {
        let c = comp(0.0, 0.0);
        let sigma_t = c.fwhm / (2.0 * std::f64::consts::LN_2.sqrt());
        assert_relative_eq!(c.spectral_sigma() * sigma_t, HBAR_EV_FS, max_relative = 1e-14);
    }

    #[test]
    fn validation_and_labels() {
        assert!(FrequencyComponent::new("x", -1.0, 1.0, Polarization::LinearZ, 0.0, 0.0, 20.0)
            .is_err());
        assert!(FrequencyComponent::new("x", 1.0, 1.0, Polarization::LinearZ, 0.0, 0.0, 0.0)
            .is_err());
        assert!(FieldSpec::new(vec![]).is_err());
        let two_same = vec![comp(0.0, 0.0), comp(1.0, 0.0)];
        assert!(FieldSpec::new(two_same).is_err());
        let spec = FieldSpec::new(reference_components()).unwrap();
        assert_eq!(spec.components().len(), 4);
        assert_abs_diff_eq!(spec.get("omega3").unwrap().omega, 5.167);
        assert!(spec.get("nope").is_none());
    }

    #[test]
    fn polarization_round_trip_and_vectors() {
        for p in [
            Polarization::LeftCircular,
            Polarization::RightCircular,
            Polarization::LinearZ,
        ] {
            assert_eq!(Polarization::parse(p.name()).unwrap(), p);
            let v = p.unit_vector();
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-15);
        }
        assert!(Polarization::parse("circular").is_err());
    }

    #[test]
    fn reduced_phase_wraps() {
        let c = comp(-0.5, 0.0);
        assert_abs_diff_eq!(
            c.reduced_phase(),
            2.0 * std::f64::consts::PI - 0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn reference_set_reaches_common_final_window() {
        let cs = reference_components();
        let sum_a = cs[0].omega + cs[1].omega;
        let sum_b = cs[2].omega + cs[3].omega;
        assert_abs_diff_eq!(sum_a, 21.878, epsilon = 1e-12);
        assert_abs_diff_eq!(sum_b, 21.868, epsilon = 1e-12);
        assert_abs_diff_eq!(one_photon_reference().omega, sum_b, epsilon = 1e-12);
    }
}
