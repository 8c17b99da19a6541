//! Two-step spontaneous-emission cascade from an excited sublevel manifold:
//! emission polarization geometry, single-photon E1 amplitudes, and the
//! photon-pair coincidence probability, bilinear in the sublevel density
//! matrix with a coherent sum over the intermediate sublevels.
//!
//! The photon pair is evaluated on resonance: each detected mode sits at
//! its transition energy and the (Weisskopf-Wigner) Lorentzian line factors
//! cancel in the normalized angular distribution. What remains is pure
//! geometry and angular momentum:
//!
//! ```text
//! P(1, 2) ∝ Σ_mg Σ_{m m'} ρ(m, m') A(m -> mg) conj(A(m' -> mg))
//! A(m -> mg) = Σ_{m1} amp1(m -> m1; e1) amp2(m1 -> mg; e2)
//! ```
//!
//! where `amp = coupling(|k|) * R * Σ_q conj(eps_q) <l' m'|C^1_q|l m>`
//! decomposes each real analyzer vector on the covariant spherical basis.
//! The normalization constant is chosen so that the polarization-summed
//! double integral over both emission spheres equals the trace of ρ.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::angular::{c1_matrix_element, clebsch_gordan, spherical_basis_decompose};
use crate::atoms::BoundState;
use crate::collision::SublevelDensityMatrix;
use crate::units::photon_k_au;
use crate::{Error, Result};

/// Half-width (eV) of the energy window that associates a photon mode with
/// a cascade transition; the two hydrogen channels sit 11.4 eV apart, so
/// the window is generous for line shapes yet unambiguous.
pub const CHANNEL_WINDOW_EV: f64 = 0.3;

/// Per-mode coupling amplitude in density-of-states form, `A_0(k) =
/// k^{3/2}` (atomic units): the product of the per-mode field amplitude
/// (∝ sqrt(k)) and the square root of the mode density (∝ k), so that
/// continuum sums over modes reduce to plain solid-angle integrals. Any
/// fixed prefactor cancels in normalized coincidence distributions.
pub fn mode_coupling(k_au: f64) -> Result<f64> {
    if !(k_au.is_finite() && k_au > 0.0) {
        return Err(Error::ConfigInvalid(format!(
            "mode coupling needs a positive photon momentum, got {k_au}"
        )));
    }
    Ok(k_au.powf(1.5))
}

/// A single photon mode: propagation direction, which member of the
/// emission polarization basis it carries, and its energy. `occupation`
/// exists for the truncated-propagator oracle, which labels its basis by
/// photon numbers per mode; it plays no role in the factorized cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonMode {
    pub theta: f64,
    pub phi: f64,
    /// 1 selects e_sigma (azimuthal member), 2 selects e_sigma_prime
    /// (meridian member) of the emission basis.
    pub sigma: u8,
    pub energy: f64,
    pub occupation: u32,
}

impl PhotonMode {
    pub fn new(theta: f64, phi: f64, sigma: u8, energy: f64) -> Result<Self> {
        if !(sigma == 1 || sigma == 2) {
            return Err(Error::ConfigInvalid(format!(
                "polarization index must be 1 or 2, got {sigma}"
            )));
        }
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "photon energy must be positive, got {energy}"
            )));
        }
        Ok(Self { theta, phi, sigma, energy, occupation: 0 })
    }

    pub fn with_occupation(mut self, occupation: u32) -> Self {
        self.occupation = occupation;
        self
    }

    /// Unit propagation direction.
    pub fn direction(&self) -> Vector3<f64> {
        Vector3::new(
            self.theta.sin() * self.phi.cos(),
            self.theta.sin() * self.phi.sin(),
            self.theta.cos(),
        )
    }

    /// The analyzer vector selected by this mode's polarization index, in
    /// the meridian-continuous emission basis.
    pub fn polarization_vector(&self) -> Vector3<f64> {
        let (e_sigma, e_sigma_prime) = meridian_polarization_basis(self.theta, self.phi);
        if self.sigma == 1 {
            e_sigma
        } else {
            e_sigma_prime
        }
    }
}

/// Emission polarization basis from an explicit reference axis:
/// `e_sigma = k x e0 / |k x e0|`, `e_sigma_prime = k x e_sigma`.
///
/// Errors with [`Error::SingularBasis`] when the direction is parallel to
/// the reference; the caller chooses the fallback reference (the detector
/// presets use the meridian-continuous closed form instead, which is the
/// limit of this construction with e0 = z away from the poles).
pub fn emission_polarization_basis(
    direction: &Vector3<f64>,
    reference_e0: &Vector3<f64>,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let k = direction.normalize();
    let cross = k.cross(reference_e0);
    let norm = cross.norm();
    if norm < 1e-12 {
        return Err(Error::SingularBasis);
    }
    let e_sigma = cross / norm;
    let e_sigma_prime = k.cross(&e_sigma);
    Ok((e_sigma, e_sigma_prime))
}

/// Closed-form emission basis for reference e0 = z, parameterized by the
/// direction angles and continuous through the poles at fixed azimuth:
///
/// `e_sigma = (sin phi, -cos phi, 0)` (azimuthal, = -phi_hat),
/// `e_sigma_prime = (cos theta cos phi, cos theta sin phi, -sin theta)`
/// (meridian, = theta_hat).
pub fn meridian_polarization_basis(theta: f64, phi: f64) -> (Vector3<f64>, Vector3<f64>) {
    let e_sigma = Vector3::new(phi.sin(), -phi.cos(), 0.0);
    let e_sigma_prime = Vector3::new(
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        -theta.sin(),
    );
    (e_sigma, e_sigma_prime)
}

/// Which polarization information a detector records.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizationSelection {
    /// Analyze the azimuthal basis member e_sigma.
    Sigma,
    /// Analyze the meridian basis member e_sigma_prime.
    SigmaPrime,
    /// No analyzer: sum both basis members.
    Unresolved,
    /// Analyze the component along a fixed laboratory axis (projected onto
    /// the transverse plane of the detected direction).
    Axis(Vector3<f64>),
}

/// A photon detector: direction, polarization analysis, implicitly tied to
/// one cascade arm by its position in the coincidence call.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec {
    pub theta: f64,
    pub phi: f64,
    pub polarization: PolarizationSelection,
}

impl DetectorSpec {
    pub fn new(theta: f64, phi: f64, polarization: PolarizationSelection) -> Self {
        Self { theta, phi, polarization }
    }

    /// The analyzer vectors this detector sums over.
    fn analyzers(&self) -> Result<Vec<Vector3<f64>>> {
        let (e_sigma, e_sigma_prime) = meridian_polarization_basis(self.theta, self.phi);
        Ok(match &self.polarization {
            PolarizationSelection::Sigma => vec![e_sigma],
            PolarizationSelection::SigmaPrime => vec![e_sigma_prime],
            PolarizationSelection::Unresolved => vec![e_sigma, e_sigma_prime],
            PolarizationSelection::Axis(axis) => {
                let k = Vector3::new(
                    self.theta.sin() * self.phi.cos(),
                    self.theta.sin() * self.phi.sin(),
                    self.theta.cos(),
                );
                let transverse = axis - k * axis.dot(&k);
                let norm = transverse.norm();
                if norm < 1e-10 {
                    return Err(Error::SingularBasis);
                }
                vec![transverse / norm]
            }
        })
    }
}

/// Single-photon E1 amplitude for `upper -> lower` emission into `mode`,
/// with `radial` the radial dipole integral of the transition:
///
/// `amp = coupling(|k|) * radial * Σ_q conj(eps_q) <lower|C^1_q|upper>`
///
/// where eps_q decomposes the mode's analyzer vector on the covariant
/// spherical basis. Selection-rule-violating pairs give zero; a mode
/// energy outside the transition's channel window is an error.
pub fn e1_amplitude(
    upper: &BoundState,
    lower: &BoundState,
    mode: &PhotonMode,
    radial: f64,
) -> Result<Complex64> {
    let transition = upper.energy - lower.energy;
    if (mode.energy - transition).abs() > CHANNEL_WINDOW_EV {
        return Err(Error::ChannelMismatch(format!(
            "mode at {:.4} eV cannot detect the {:.4} eV {} -> {} transition",
            mode.energy, transition, upper.label, lower.label
        )));
    }
    e1_amplitude_with_polarization(upper, lower, &mode.polarization_vector(), mode.energy, radial)
}

/// [`e1_amplitude`] with an explicit real analyzer vector (must be unit
/// length; the caller guarantees transversality to the propagation
/// direction when one is meaningful).
pub fn e1_amplitude_with_polarization(
    upper: &BoundState,
    lower: &BoundState,
    polarization: &Vector3<f64>,
    energy_ev: f64,
    radial: f64,
) -> Result<Complex64> {
    if (polarization.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::ConfigInvalid(
            "analyzer vector must be unit length".into(),
        ));
    }
    let coupling = mode_coupling(photon_k_au(energy_ev))?;
    let eps = spherical_basis_decompose(polarization);
    let mut amp = Complex64::new(0.0, 0.0);
    for (idx, q) in [(0usize, -1i32), (1, 0), (2, 1)] {
        let angular = c1_matrix_element(lower.l, lower.m, q, upper.l, upper.m)?;
        if angular != 0.0 {
            amp += eps[idx].conj() * angular;
        }
    }
    Ok(amp * coupling * radial)
}

/// A two-step cascade `upper -> intermediate -> ground`, with the radial
/// dipole integrals of the two arms. The `m` fields of the level templates
/// are ignored; sublevels are enumerated internally.
#[derive(Debug, Clone)]
pub struct CascadeModel {
    pub upper: BoundState,
    pub intermediate: BoundState,
    pub ground: BoundState,
    /// <intermediate | r | upper> (atomic units).
    pub radial_upper: f64,
    /// <ground | r | intermediate> (atomic units).
    pub radial_lower: f64,
}

impl CascadeModel {
    pub fn new(
        upper: BoundState,
        intermediate: BoundState,
        ground: BoundState,
        radial_upper: f64,
        radial_lower: f64,
    ) -> Result<Self> {
        let model = Self { upper, intermediate, ground, radial_upper, radial_lower };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let dl1 = self.upper.l as i64 - self.intermediate.l as i64;
        let dl2 = self.intermediate.l as i64 - self.ground.l as i64;
        if dl1.abs() != 1 || dl2.abs() != 1 {
            return Err(Error::AngularMomentum(
                "cascade arms must each change l by exactly 1".into(),
            ));
        }
        if !(self.upper.energy > self.intermediate.energy
            && self.intermediate.energy > self.ground.energy)
        {
            return Err(Error::ConfigInvalid(
                "cascade levels must be strictly ordered in energy".into(),
            ));
        }
        if self.radial_upper == 0.0 || self.radial_lower == 0.0 {
            return Err(Error::ConfigInvalid(
                "cascade radial integrals must be nonzero".into(),
            ));
        }
        Ok(())
    }

    /// The hydrogen 4d -> 3p -> 1s cascade with analytic radial integrals.
    pub fn hydrogen_4d_3p_1s() -> Result<Self> {
        let e4 = crate::atoms::hydrogen_energy(4)? - crate::atoms::hydrogen_energy(1)?;
        let e3 = crate::atoms::hydrogen_energy(3)? - crate::atoms::hydrogen_energy(1)?;
        Self::new(
            BoundState::new("4d", 4, 2, 0, e4)?,
            BoundState::new("3p", 3, 1, 0, e3)?,
            BoundState::new("1s", 1, 0, 0, 0.0)?,
            crate::atoms::hydrogen_radial_dipole(4, 2, 3, 1)?,
            crate::atoms::hydrogen_radial_dipole(3, 1, 1, 0)?,
        )
    }

    /// Synthetic l: 0 -> 1 -> 0 cascade with unit radial integrals — the
    /// textbook configuration whose polarization-summed coincidence
    /// pattern is 1 + cos^2(theta_12).
    pub fn synthetic_0_1_0() -> Result<Self> {
        Self::new(
            BoundState::new("upper", 2, 0, 0, 3.0)?,
            BoundState::new("middle", 2, 1, 0, 1.0)?,
            BoundState::new("ground", 1, 0, 0, 0.0)?,
            1.0,
            1.0,
        )
    }

    /// Photon energy of the upper arm (upper -> intermediate), eV.
    pub fn upper_photon_energy(&self) -> f64 {
        self.upper.energy - self.intermediate.energy
    }

    /// Photon energy of the lower arm (intermediate -> ground), eV.
    pub fn lower_photon_energy(&self) -> f64 {
        self.intermediate.energy - self.ground.energy
    }

    fn sublevel(state: &BoundState, m: i32) -> BoundState {
        BoundState {
            label: state.label.clone(),
            n: state.n,
            l: state.l,
            m,
            energy: state.energy,
        }
    }

    /// Normalization constant: the polarization-summed double integral of
    /// the unnormalized bilinear form over both emission spheres equals
    /// this times Tr(rho). Closed form: each complete photon sum gives
    /// (8 pi / 3) coupling^2 R^2 CG(l 0, 1 0 | l' 0)^2 by completeness of
    /// the Clebsch-Gordan series.
    pub fn normalization(&self) -> Result<f64> {
        let cg1 = clebsch_gordan(
            self.upper.l as f64,
            0.0,
            1.0,
            0.0,
            self.intermediate.l as f64,
            0.0,
        )?;
        let cg2 = clebsch_gordan(
            self.intermediate.l as f64,
            0.0,
            1.0,
            0.0,
            self.ground.l as f64,
            0.0,
        )?;
        let c1 = mode_coupling(photon_k_au(self.upper_photon_energy()))?;
        let c2 = mode_coupling(photon_k_au(self.lower_photon_energy()))?;
        let per_photon = 8.0 * PI / 3.0;
        Ok((per_photon * per_photon)
            * (c1 * self.radial_upper * cg1 * c2 * self.radial_lower * cg2).powi(2))
    }

    /// Coincidence probability density with explicit real analyzer
    /// vectors for the two photons (upper arm first). Normalized so the
    /// polarization-summed double sphere integral is Tr(rho) = 1.
    pub fn coincidence_with_polarizations(
        &self,
        rho: &SublevelDensityMatrix,
        polarization_1: &Vector3<f64>,
        polarization_2: &Vector3<f64>,
    ) -> Result<f64> {
        if rho.manifold().l != self.upper.l {
            return Err(Error::ConfigInvalid(format!(
                "density matrix manifold l = {} does not match cascade upper level l = {}",
                rho.manifold().l,
                self.upper.l
            )));
        }
        let l_u = self.upper.l as i32;
        let l_i = self.intermediate.l as i32;
        let l_g = self.ground.l as i32;
        let e1 = self.upper_photon_energy();
        let e2 = self.lower_photon_energy();

        // Path amplitudes A(m -> mg) = sum_{m1} amp1 amp2, coherent over
        // the intermediate sublevels.
        let dim_u = (2 * l_u + 1) as usize;
        let dim_g = (2 * l_g + 1) as usize;
        let mut paths = vec![vec![Complex64::new(0.0, 0.0); dim_g]; dim_u];
        for m in -l_u..=l_u {
            for mg in -l_g..=l_g {
                let mut acc = Complex64::new(0.0, 0.0);
                for m1 in -l_i..=l_i {
                    let amp1 = e1_amplitude_with_polarization(
                        &Self::sublevel(&self.upper, m),
                        &Self::sublevel(&self.intermediate, m1),
                        polarization_1,
                        e1,
                        self.radial_upper,
                    )?;
                    if amp1.norm_sqr() == 0.0 {
                        continue;
                    }
                    let amp2 = e1_amplitude_with_polarization(
                        &Self::sublevel(&self.intermediate, m1),
                        &Self::sublevel(&self.ground, mg),
                        polarization_2,
                        e2,
                        self.radial_lower,
                    )?;
                    acc += amp1 * amp2;
                }
                paths[(m + l_u) as usize][(mg + l_g) as usize] = acc;
            }
        }

        let mut p = Complex64::new(0.0, 0.0);
        for mg_idx in 0..dim_g {
            for m in -l_u..=l_u {
                for m_prime in -l_u..=l_u {
                    let coeff = rho.element(m, m_prime)?;
                    if coeff.norm_sqr() == 0.0 {
                        continue;
                    }
                    p += coeff
                        * paths[(m + l_u) as usize][mg_idx]
                        * paths[(m_prime + l_u) as usize][mg_idx].conj();
                }
            }
        }
        if p.im.abs() > 1e-12 * p.re.abs().max(1e-30) {
            return Err(Error::Numerical {
                stage: "cascade coincidence",
                message: format!("bilinear form not real: {p}"),
            });
        }
        Ok(p.re / self.normalization()?)
    }

    /// Coincidence probability density for two polarization-resolved
    /// photon modes (mode 1 on the upper arm, mode 2 on the lower arm).
    /// Mode energies must sit inside their channel windows.
    pub fn coincidence_probability(
        &self,
        rho: &SublevelDensityMatrix,
        mode1: &PhotonMode,
        mode2: &PhotonMode,
    ) -> Result<f64> {
        if (mode1.energy - self.upper_photon_energy()).abs() > CHANNEL_WINDOW_EV {
            return Err(Error::ChannelMismatch(format!(
                "mode 1 at {:.4} eV is outside the {:.4} eV upper-arm window",
                mode1.energy,
                self.upper_photon_energy()
            )));
        }
        if (mode2.energy - self.lower_photon_energy()).abs() > CHANNEL_WINDOW_EV {
            return Err(Error::ChannelMismatch(format!(
                "mode 2 at {:.4} eV is outside the {:.4} eV lower-arm window",
                mode2.energy,
                self.lower_photon_energy()
            )));
        }
        self.coincidence_with_polarizations(
            rho,
            &mode1.polarization_vector(),
            &mode2.polarization_vector(),
        )
    }

    /// Coincidence for two detectors, summing whatever polarizations each
    /// detector leaves unresolved. Detector 1 watches the upper arm,
    /// detector 2 the lower arm.
    pub fn coincidence_detectors(
        &self,
        rho: &SublevelDensityMatrix,
        detector_1: &DetectorSpec,
        detector_2: &DetectorSpec,
    ) -> Result<f64> {
        let mut total = 0.0;
        for pol1 in detector_1.analyzers()? {
            for pol2 in detector_2.analyzers()? {
                total += self.coincidence_with_polarizations(rho, &pol1, &pol2)?;
            }
        }
        Ok(total)
    }
}

/// The detection geometry used throughout the scans: detector 2 fixed on
/// the lower arm at theta = pi/2, phi = -pi/2 (the -y axis), analyzing the
/// z polarization component — which pins the intermediate sublevel path to
/// m1 = 0 — and detector 1 scanning its polar angle on the phi = pi/2
/// meridian, analyzing the meridian basis member.
pub fn reference_detector_2() -> DetectorSpec {
    DetectorSpec::new(
        PI / 2.0,
        -PI / 2.0,
        PolarizationSelection::Axis(Vector3::new(0.0, 0.0, 1.0)),
    )
}

/// Detector 1 of the reference geometry at polar angle `theta` on the
/// phi = pi/2 meridian, analyzing the meridian polarization.
pub fn reference_detector_1(theta: f64) -> DetectorSpec {
    DetectorSpec::new(theta, PI / 2.0, PolarizationSelection::SigmaPrime)
}
