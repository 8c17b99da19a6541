//! First-order (plane-wave Born) electron-impact excitation of a hydrogen
//! target, carrying the coherence of the incident photoelectron wave packet
//! into the magnetic-sublevel density matrix of the excited manifold.
//!
//! The incident electron arrives as a coherent superposition of partial
//! waves `a_{lm}(eps) Y_{lm}(k_i)` around a mean direction `+z` (the shared
//! quantization axis). For each incident direction the first-order
//! scattering amplitude into the sublevel `m` of the target manifold is
//!
//! ```text
//! F_m(q) = rho_l(q) / q^2 * sqrt(4 pi) i^l conj(Y_{lm}(q_hat)) e^{i q . d}
//! ```
//!
//! with momentum transfer `q = k_i - k_f`, the radial transition density
//! `rho_l(q) = \int R_{nl}(r) j_l(qr) R_{10}(r) r^2 dr`, and `d` the offset
//! of the collision centre from the photoionization centre (phase factor
//! of a displaced target; `d = 0` by default). Overall constants of the
//! Born amplitude are dropped throughout: the returned density matrix is
//! trace-normalized and carries the raw trace separately as a relative
//! excitation weight.
//!
//! The sublevel density matrix follows by coherently integrating over the
//! incident directions, tracing over the undetected scattered electron
//! (all `k_f` directions) and integrating over the packet's energy
//! distribution:
//!
//! ```text
//! rho(m, m') ∝ Σ_e w_e Σ_{cc'} a_c(e) conj(a_{c'}(e)) G_e[(c,m),(c',m')]
//! G_e[(c,m),(c',m')] = ∫ dk_f  K_{c,m}(k_f) conj(K_{c',m'}(k_f))
//! K_{c,m}(k_f)       = ∫ dk_i  Y_c(k_i) F_m(q)
//! ```
//!
//! `G_e` is a Gram matrix, so the result is Hermitian and positive
//! semidefinite by construction. Precomputing `G_e` once per energy grid
//! (`CollisionKernel`) makes repeated evaluations for different packet
//! amplitudes (phase/delay scans) cheap.

use std::f64::consts::PI;

use nalgebra::Vector3;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::angular::{sph_harm, AngularQuantumNumbers, SphereQuadrature};
use crate::atoms::hydrogen_radial;
use crate::ionization::PhotoelectronWavePacket;
use crate::numeric::{integrate_panels, spherical_bessel, UniformTable};
use crate::units::momentum_au;
use crate::{Error, Result};

/// Radial integration range (bohr) for transition densities out of the 1s
/// ground state; the integrand decays at least as e^{-r} so the truncation
/// error is far below double precision.
const RADIAL_R_MAX: f64 = 60.0;

/// Excited target manifold `(n, l)` reached by the collision, with its
/// excitation energy out of the ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetManifold {
    pub n: u32,
    pub l: u32,
    /// Excitation energy above the ground state in eV; doubles as the
    /// kinetic-energy threshold of the incident electron.
    pub excitation_energy: f64,
}

impl TargetManifold {
    pub fn new(n: u32, l: u32, excitation_energy: f64) -> Result<Self> {
        if l >= n {
            return Err(Error::AngularMomentum(format!(
                "manifold l = {l} must be below n = {n}"
            )));
        }
        if excitation_energy <= 0.0 {
            return Err(Error::ConfigInvalid(
                "excitation energy must be positive".into(),
            ));
        }
        Ok(Self { n, l, excitation_energy })
    }

    /// The hydrogen 4d manifold (excitation 12.755... eV above 1s).
    pub fn hydrogen_4d() -> Self {
        Self {
            n: 4,
            l: 2,
            excitation_energy: crate::units::RYDBERG_EV * (1.0 - 1.0 / 16.0),
        }
    }

    /// Number of magnetic sublevels, `2l + 1`.
    pub fn dim(&self) -> usize {
        (2 * self.l + 1) as usize
    }

    /// Row/column index of sublevel `m` in the density matrix (m = -l..l).
    pub fn index_of(&self, m: i32) -> Option<usize> {
        if m.unsigned_abs() > self.l {
            None
        } else {
            Some((m + self.l as i32) as usize)
        }
    }
}

/// Geometry of the collision relative to the photoionization source.
///
/// The mean incident direction defines the `+z` axis shared with the
/// optical setup. `target_offset` is the displacement (in bohr) of the
/// collision target from the photoelectron source; a nonzero offset adds
/// the displaced-target phase `e^{i q . d}` to the excitation amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionGeometry {
    pub target_offset: Vector3<f64>,
}

impl Default for CollisionGeometry {
    fn default() -> Self {
        Self { target_offset: Vector3::zeros() }
    }
}

/// Radial transition density `rho_l(q) = \int R_{nl}(r) j_l(qr) R_{10}(r)
/// r^2 dr` (atomic units) between the hydrogen ground state and the
/// `(n, l)` excited state, evaluated by panelled Gauss-Legendre quadrature.
pub fn radial_transition_density(n: u32, l: u32, q: f64) -> Result<f64> {
    if l >= n {
        return Err(Error::AngularMomentum(format!(
            "radial density needs l = {l} < n = {n}"
        )));
    }
    if l > 2 {
        return Err(Error::AngularMomentum(
            "spherical Bessel order above 2 not supported".into(),
        ));
    }
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::Numerical {
            stage: "born radial quadrature",
            message: format!("momentum transfer q = {q} out of range"),
        });
    }
    // Resolve the j_l(qr) oscillation: a few radians per panel keeps the
    // 24-point rule at machine precision.
    let panels = 32.max((q * RADIAL_R_MAX / 3.0).ceil() as usize);
    let integrand =
        |r: f64| hydrogen_radial(n, l, r) * spherical_bessel(l, q * r) * hydrogen_radial(1, 0, r) * r * r;
    let value = integrate_panels(&integrand, 0.0, RADIAL_R_MAX, panels, 24);
    let refined = integrate_panels(&integrand, 0.0, RADIAL_R_MAX, panels + 13, 28);
    let scale = value.abs().max(refined.abs()).max(1e-12);
    if (value - refined).abs() > 1e-9 * scale {
        return Err(Error::Numerical {
            stage: "born radial quadrature",
            message: format!(
                "transition density at q = {q} not converged: {value:e} vs {refined:e}"
            ),
        });
    }
    Ok(refined)
}

/// Inelastic form factor of the 1s -> (n, l, m) transition density for
/// momentum transfer `q`:
///
/// `FF_m(q) = <n l m| e^{i q . r} |1s> = sqrt(4 pi) i^l rho_l(|q|) conj(Y_{lm}(q_hat))`.
///
/// The Coulomb propagator `1/q^2` of the first-order scattering amplitude
/// is *not* included here; it is applied where amplitudes are assembled.
/// Returns zero at vanishing |q| (the density falls as q^l for l >= 1 and
/// the direction of q is undefined there).
pub fn born_form_factor(q: &Vector3<f64>, n: u32, l: u32, m: i32) -> Result<Complex64> {
    if m.unsigned_abs() > l {
        return Err(Error::AngularMomentum(format!(
            "form factor sublevel |m| = {} exceeds l = {l}",
            m.abs()
        )));
    }
    let qn = q.norm();
    if qn < 1e-12 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let density = radial_transition_density(n, l, qn)?;
    let theta = (q.z / qn).clamp(-1.0, 1.0).acos();
    let phi = q.y.atan2(q.x);
    let ylm = sph_harm(l, m, theta, phi)?;
    let il = Complex64::i().powu(l);
    Ok((4.0 * PI).sqrt() * il * density * ylm.conj())
}

/// Trace-normalized magnetic-sublevel density matrix of an excited target
/// manifold, together with the raw (unnormalized) excitation weight.
#[derive(Debug, Clone)]
pub struct SublevelDensityMatrix {
    manifold: TargetManifold,
    rho: Array2<Complex64>,
    weight: f64,
}

impl SublevelDensityMatrix {
    /// Validate and wrap a trace-normalized density matrix: Hermitian to
    /// 1e-12, eigenvalues above -1e-10, unit trace to 1e-10.
    pub fn new(manifold: TargetManifold, rho: Array2<Complex64>, weight: f64) -> Result<Self> {
        let dim = manifold.dim();
        if rho.shape() != [dim, dim] {
            return Err(Error::ConfigInvalid(format!(
                "density matrix shape {:?} does not match manifold dimension {dim}",
                rho.shape()
            )));
        }
        let mut herm_err: f64 = 0.0;
        let mut trace = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            trace += rho[(i, i)];
            for j in 0..dim {
                herm_err = herm_err.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        if herm_err > 1e-12 {
            return Err(Error::Numerical {
                stage: "sublevel density matrix",
                message: format!("hermiticity violated by {herm_err:e}"),
            });
        }
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-12 {
            return Err(Error::Numerical {
                stage: "sublevel density matrix",
                message: format!("trace {trace} differs from 1"),
            });
        }
        let (eigenvalues, _) = crate::numeric::hermitian_eigen(&rho);
        if eigenvalues.iter().any(|&e| e < -1e-10) {
            return Err(Error::Numerical {
                stage: "sublevel density matrix",
                message: format!("negative population: eigenvalues {eigenvalues:?}"),
            });
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::Numerical {
                stage: "sublevel density matrix",
                message: format!("invalid excitation weight {weight}"),
            });
        }
        Ok(Self { manifold, rho, weight })
    }

    /// Diagonal (incoherent) state from sublevel populations, normalized to
    /// unit trace; the population sum becomes the weight.
    pub fn from_populations(manifold: TargetManifold, populations: &[f64]) -> Result<Self> {
        if populations.len() != manifold.dim() {
            return Err(Error::ConfigInvalid(format!(
                "{} populations given for a {}-dimensional manifold",
                populations.len(),
                manifold.dim()
            )));
        }
        if populations.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::ConfigInvalid("populations must be nonnegative".into()));
        }
        let total: f64 = populations.iter().sum();
        if total <= 0.0 {
            return Err(Error::ConfigInvalid("populations sum to zero".into()));
        }
        let dim = manifold.dim();
        let mut rho = Array2::zeros((dim, dim));
        for (i, &p) in populations.iter().enumerate() {
            rho[(i, i)] = Complex64::new(p / total, 0.0);
        }
        Self::new(manifold, rho, total)
    }

    pub fn manifold(&self) -> &TargetManifold {
        &self.manifold
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.rho
    }

    /// Matrix element `<l m | rho | l m'>`.
    pub fn element(&self, m: i32, m_prime: i32) -> Result<Complex64> {
        let (i, j) = match (self.manifold.index_of(m), self.manifold.index_of(m_prime)) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                return Err(Error::AngularMomentum(format!(
                    "sublevel ({m}, {m_prime}) outside manifold l = {}",
                    self.manifold.l
                )))
            }
        };
        Ok(self.rho[(i, j)])
    }

    /// Relative excitation weight: the raw trace of the unnormalized
    /// matrix. Comparable between packets evaluated on the same kernel.
    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Precomputed collision response on a fixed energy grid and channel list.
///
/// Holds, per energy, the Gram tensor `G[(c,m),(c',m')]` of scattering
/// kernels, so density matrices for any packet amplitudes on the same grid
/// cost only the channel contraction. Energies at or below the excitation
/// threshold contribute zero.
#[derive(Debug)]
pub struct CollisionKernel {
    manifold: TargetManifold,
    geometry: CollisionGeometry,
    channels: Vec<AngularQuantumNumbers>,
    energies: Vec<f64>,
    /// One `(n_channels * dim) x (n_channels * dim)` Gram matrix per energy.
    gram: Vec<Array2<Complex64>>,
    open: Vec<bool>,
}

impl CollisionKernel {
    /// Build with the default angular resolution: 16x32 (theta x phi) for
    /// incident directions and 32x64 for the scattered-electron trace.
    pub fn build(
        manifold: TargetManifold,
        geometry: CollisionGeometry,
        channels: &[AngularQuantumNumbers],
        energies: &[f64],
    ) -> Result<Self> {
        Self::build_with_resolution(manifold, geometry, channels, energies, (16, 32), (32, 64))
    }

    /// Build with explicit `(n_theta, n_phi)` quadratures for the incident
    /// and scattered directions. The uniform phi grids keep azimuthal
    /// selection rules exact as long as `n_phi` exceeds the largest
    /// azimuthal order in play (`2 l + 2 max|m_c|`); below that the grids
    /// alias and rotational covariance degrades.
    pub fn build_with_resolution(
        manifold: TargetManifold,
        geometry: CollisionGeometry,
        channels: &[AngularQuantumNumbers],
        energies: &[f64],
        incident_resolution: (usize, usize),
        scattered_resolution: (usize, usize),
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::ConfigInvalid("no incident channels given".into()));
        }
        if energies.len() < 2 {
            return Err(Error::ConfigInvalid(
                "energy grid needs at least 2 points".into(),
            ));
        }
        let open: Vec<bool> = energies
            .iter()
            .map(|&e| e > manifold.excitation_energy)
            .collect();
        if !open.iter().any(|&o| o) {
            return Err(Error::Numerical {
                stage: "collision kernel",
                message: format!(
                    "all packet energies lie at or below the {:.6} eV excitation threshold; \
                     no open channel",
                    manifold.excitation_energy
                ),
            });
        }

        // Tabulate the radial transition density over the full range of
        // momentum transfers (|q| <= k_i + k_f), with a direct-quadrature
        // convergence check at a few sample points.
        let q_max = energies
            .iter()
            .filter(|&&e| e > manifold.excitation_energy)
            .map(|&e| momentum_au(e) + momentum_au(e - manifold.excitation_energy))
            .fold(0.0_f64, f64::max)
            * 1.0001
            + 1e-6;
        let n_table = 1024;
        // Surface non-convergence from inside the tabulation closure.
        let mut density_error: Option<Error> = None;
        let density_table = UniformTable::tabulate(
            |q| match radial_transition_density(manifold.n, manifold.l, q) {
                Ok(v) => v,
                Err(e) => {
                    density_error.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            q_max,
            n_table,
        );
        if let Some(e) = density_error {
            return Err(e);
        }

        let quad_in = SphereQuadrature::new(incident_resolution.0, incident_resolution.1);
        let quad_out = SphereQuadrature::new(scattered_resolution.0, scattered_resolution.1);

        // Channel harmonics on the incident grid are energy independent.
        let mut channel_harmonics = vec![Vec::with_capacity(quad_in.nodes().len()); channels.len()];
        for (c, ch) in channels.iter().enumerate() {
            for &(theta, phi, _) in quad_in.nodes() {
                channel_harmonics[c].push(sph_harm(ch.l, ch.m, theta, phi)?);
            }
        }

        let dim = manifold.dim();
        let rows = channels.len() * dim;
        let offset = geometry.target_offset;
        let has_offset = offset.norm() > 0.0;
        let l_t = manifold.l;
        let il = Complex64::i().powu(l_t);
        let prefactor = (4.0 * PI).sqrt();

        let gram: Vec<Array2<Complex64>> = energies
            .par_iter()
            .zip(open.par_iter())
            .map(|(&energy, &is_open)| -> Result<Array2<Complex64>> {
                if !is_open {
                    return Ok(Array2::zeros((rows, rows)));
                }
                let k_in = momentum_au(energy);
                let k_out = momentum_au(energy - manifold.excitation_energy);

                let in_nodes = quad_in.nodes();
                let incident: Vec<Vector3<f64>> = in_nodes
                    .iter()
                    .map(|&(th, ph, _)| {
                        Vector3::new(
                            k_in * th.sin() * ph.cos(),
                            k_in * th.sin() * ph.sin(),
                            k_in * th.cos(),
                        )
                    })
                    .collect();

                // K[(c,m), f] for this energy.
                let mut kernel = Array2::<Complex64>::zeros((rows, quad_out.nodes().len()));
                let mut ylm = vec![Complex64::new(0.0, 0.0); dim];
                for (f_idx, &(th_f, ph_f, _)) in quad_out.nodes().iter().enumerate() {
                    let k_f = Vector3::new(
                        k_out * th_f.sin() * ph_f.cos(),
                        k_out * th_f.sin() * ph_f.sin(),
                        k_out * th_f.cos(),
                    );
                    for (i_idx, &(_, _, w_i)) in in_nodes.iter().enumerate() {
                        let q = incident[i_idx] - k_f;
                        let qn = q.norm();
                        if qn < 1e-12 {
                            continue; // rho_l / q^2 * q^l -> 0 for l >= 1
                        }
                        let theta_q = (q.z / qn).clamp(-1.0, 1.0).acos();
                        let phi_q = q.y.atan2(q.x);
                        // conj(Y_{l m}) for all m via the m >= 0 values:
                        // Y_{l,-m} = (-1)^m conj(Y_{l m}).
                        for m in 0..=l_t as i32 {
                            let y = sph_harm(l_t, m, theta_q, phi_q)?;
                            ylm[(m + l_t as i32) as usize] = y.conj();
                            if m > 0 {
                                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                                ylm[(l_t as i32 - m) as usize] = sign * y;
                            }
                        }
                        let mut factor = Complex64::new(
                            prefactor * density_table.eval(qn) / (qn * qn) * w_i,
                            0.0,
                        ) * il;
                        if has_offset {
                            factor *= Complex64::new(0.0, q.dot(&offset)).exp();
                        }
                        for (c, harmonics) in channel_harmonics.iter().enumerate() {
                            let channel_term = factor * harmonics[i_idx];
                            for (m_idx, y_conj) in ylm.iter().enumerate() {
                                kernel[(c * dim + m_idx, f_idx)] += channel_term * y_conj;
                            }
                        }
                    }
                }

                // G = K diag(w_f) K^dagger, accumulated in fixed order.
                let mut gram_e = Array2::<Complex64>::zeros((rows, rows));
                for (f_idx, &(_, _, w_f)) in quad_out.nodes().iter().enumerate() {
                    for r in 0..rows {
                        let kr = kernel[(r, f_idx)] * w_f;
                        for s in 0..rows {
                            gram_e[(r, s)] += kr * kernel[(s, f_idx)].conj();
                        }
                    }
                }
                Ok(gram_e)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            manifold,
            geometry,
            channels: channels.to_vec(),
            energies: energies.to_vec(),
            gram,
            open,
        })
    }

    pub fn manifold(&self) -> &TargetManifold {
        &self.manifold
    }

    pub fn geometry(&self) -> &CollisionGeometry {
        &self.geometry
    }

    pub fn channels(&self) -> &[AngularQuantumNumbers] {
        &self.channels
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Sublevel density matrix for a packet on this kernel's energy grid
    /// and channel list. Cheap: one channel contraction per energy.
    pub fn density_matrix(&self, packet: &PhotoelectronWavePacket) -> Result<SublevelDensityMatrix> {
        if packet.channels() != self.channels.as_slice() {
            return Err(Error::ConfigInvalid(
                "packet channels do not match the collision kernel".into(),
            ));
        }
        if packet.energies() != self.energies.as_slice() {
            return Err(Error::ConfigInvalid(
                "packet energy grid does not match the collision kernel".into(),
            ));
        }
        let dim = self.manifold.dim();
        let n_ch = self.channels.len();
        let mut raw = Array2::<Complex64>::zeros((dim, dim));
        for (e_idx, _) in self.energies.iter().enumerate() {
            if !self.open[e_idx] {
                continue;
            }
            let w_e = trapezoid_weight(&self.energies, e_idx);
            let gram_e = &self.gram[e_idx];
            for c in 0..n_ch {
                let a_c = packet.channel_amplitudes(c)[e_idx];
                for c_p in 0..n_ch {
                    let coeff = a_c * packet.channel_amplitudes(c_p)[e_idx].conj() * w_e;
                    if coeff.norm_sqr() == 0.0 {
                        continue;
                    }
                    for mi in 0..dim {
                        for mj in 0..dim {
                            raw[(mi, mj)] += coeff * gram_e[(c * dim + mi, c_p * dim + mj)];
                        }
                    }
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| raw[(i, i)].re).sum();
        if !(trace.is_finite() && trace > 0.0) {
            return Err(Error::Numerical {
                stage: "collision density matrix",
                message: format!("total excitation weight {trace:e} is not positive"),
            });
        }
        // Enforce exact hermiticity against rounding drift before wrapping.
        let mut rho = Array2::<Complex64>::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] = (raw[(i, j)] + raw[(j, i)].conj()) / (2.0 * trace);
            }
        }
        SublevelDensityMatrix::new(self.manifold.clone(), rho, trace)
    }
}

/// One-shot convenience: build a default-resolution kernel for the packet's
/// grid and contract it. For scans over many packets on the same grid,
/// build a [`CollisionKernel`] once and reuse it.
pub fn excited_density_matrix(
    packet: &PhotoelectronWavePacket,
    geometry: &CollisionGeometry,
    manifold: &TargetManifold,
) -> Result<SublevelDensityMatrix> {
    let kernel = CollisionKernel::build(
        manifold.clone(),
        geometry.clone(),
        packet.channels(),
        packet.energies(),
    )?;
    kernel.density_matrix(packet)
}

/// Trapezoid weight of grid point `idx` on a (possibly non-uniform) grid.
fn trapezoid_weight(grid: &[f64], idx: usize) -> f64 {
    let left = if idx == 0 { grid[0] } else { grid[idx - 1] };
    let right = if idx + 1 == grid.len() { grid[idx] } else { grid[idx + 1] };
    0.5 * (right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Reference values for rho_2(q) between hydrogen 1s and 4d, computed
    /// with 40-digit arithmetic from the closed-form radial functions.
    #[test]
    fn radial_transition_density_frozen_values() {
        let reference = [
            (0.01, 7.50155866766576e-6),
            (0.1, 0.0007360468288303656),
            (0.5, 0.01178850922033443),
            (0.7, 0.01529523699026097),
            (1.0, 0.01441950993280937),
            (1.5406, 0.007089827383131437),
            (2.0, 0.003212153696243245),
            (3.0, 0.0005988916422273136),
        ];
        for (q, expected) in reference {
            let got = radial_transition_density(4, 2, q).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn radial_transition_density_rejects_bad_quantum_numbers() {
        assert!(radial_transition_density(4, 4, 0.5).is_err());
        assert!(radial_transition_density(2, 3, 0.5).is_err());
        assert!(radial_transition_density(4, 2, f64::NAN).is_err());
    }

    /// Frozen 40-digit reference for the full form factor at q = 0.5 z_hat,
    /// m = 0: sqrt(4 pi) i^2 rho_2(0.5) Y_20(0, 0) (real and negative).
    #[test]
    fn born_form_factor_frozen_value() {
        let ff = born_form_factor(&Vector3::new(0.0, 0.0, 0.5), 4, 2, 0).unwrap();
        assert_relative_eq!(ff.re, -0.02635990797005082, max_relative = 1e-9);
        assert!(ff.im.abs() < 1e-18);

        // Same |q| along x: Y_20(pi/2) = -Y_20(0)/2, so the value halves
        // and flips sign.
        let ff_x = born_form_factor(&Vector3::new(0.5, 0.0, 0.0), 4, 2, 0).unwrap();
        assert_relative_eq!(ff_x.re, -ff.re / 2.0, max_relative = 1e-12);
        assert!(ff_x.im.abs() < 1e-18);
    }

    #[test]
    fn born_form_factor_selection_and_edge_cases() {
        // q along z reaches only m = 0.
        for m in [-2, -1, 1, 2] {
            let ff = born_form_factor(&Vector3::new(0.0, 0.0, 0.8), 4, 2, m).unwrap();
            assert!(ff.norm() < 1e-16, "m = {m} should vanish for q || z");
        }
        // Vanishing momentum transfer.
        let ff0 = born_form_factor(&Vector3::zeros(), 4, 2, 0).unwrap();
        assert_eq!(ff0, c(0.0, 0.0));
        // Tiny q: the l = 2 density falls as q^2.
        let ff_small = born_form_factor(&Vector3::new(0.0, 0.0, 1e-4), 4, 2, 0).unwrap();
        assert!(ff_small.norm() < 1e-8);
        // Invalid sublevels error.
        assert!(born_form_factor(&Vector3::new(0.0, 0.0, 0.5), 4, 2, 3).is_err());
    }

    #[test]
    fn manifold_threshold_matches_hydrogen_level_difference() {
        let manifold = TargetManifold::hydrogen_4d();
        assert_eq!(manifold.dim(), 5);
        assert_relative_eq!(manifold.excitation_energy, 12.75534375, max_relative = 1e-12);
        // Consistency with the bound-state energies.
        let diff =
            crate::atoms::hydrogen_energy(4).unwrap() - crate::atoms::hydrogen_energy(1).unwrap();
        assert_relative_eq!(manifold.excitation_energy, diff, max_relative = 1e-12);
    }

    fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn packet_with(
        channels: &[(u32, i32)],
        amplitudes: Vec<Vec<Complex64>>,
        energies: Vec<f64>,
    ) -> PhotoelectronWavePacket {
        let channels: Vec<_> = channels
            .iter()
            .map(|&(l, m)| AngularQuantumNumbers::new(l, m).unwrap())
            .collect();
        PhotoelectronWavePacket::from_parts(energies, channels, amplitudes).unwrap()
    }

    /// An isotropic (s-wave) incident packet leaves no preferred azimuth:
    /// the excited matrix must be diagonal with mirror-symmetric
    /// populations rho(m, m) = rho(-m, -m).
    #[test]
    fn isotropic_packet_gives_diagonal_mirror_symmetric_matrix() {
        let energies = uniform_grid(14.0, 17.0, 4);
        let amps = vec![vec![c(1.0, 0.3); 4]];
        let packet = packet_with(&[(0, 0)], amps, energies.clone());
        let kernel = CollisionKernel::build_with_resolution(
            TargetManifold::hydrogen_4d(),
            CollisionGeometry::default(),
            packet.channels(),
            &energies,
            (6, 16),
            (8, 16),
        )
        .unwrap();
        let rho = kernel.density_matrix(&packet).unwrap();
        assert!(rho.weight() > 0.0);
        for m in -2..=2 {
            for mp in -2..=2 {
                let v = rho.element(m, mp).unwrap();
                if m == mp {
                    assert!(v.re > 0.0);
                    assert!(v.im.abs() < 1e-15);
                } else {
                    assert!(
                        v.norm() < 1e-14,
                        "off-diagonal ({m},{mp}) = {v} should vanish"
                    );
                }
            }
        }
        let trace: f64 = (-2..=2).map(|m| rho.element(m, m).unwrap().re).sum();
        assert_relative_eq!(trace, 1.0, max_relative = 1e-12);
        for m in 1..=2 {
            assert_relative_eq!(
                rho.element(m, m).unwrap().re,
                rho.element(-m, -m).unwrap().re,
                max_relative = 1e-11
            );
        }
    }

    /// A packet built only from m = 0 partial waves is axially symmetric,
    /// so coherences between different target sublevels vanish even though
    /// the channel amplitudes interfere.
    #[test]
    fn axial_packet_gives_diagonal_matrix() {
        let energies = uniform_grid(14.0, 17.0, 3);
        let amps = vec![
            vec![c(1.0, 0.0); 3],
            vec![c(0.0, 0.7); 3],
            vec![c(0.3, -0.2); 3],
        ];
        let packet = packet_with(&[(0, 0), (1, 0), (2, 0)], amps, energies.clone());
        let kernel = CollisionKernel::build_with_resolution(
            TargetManifold::hydrogen_4d(),
            CollisionGeometry::default(),
            packet.channels(),
            &energies,
            (6, 16),
            (8, 16),
        )
        .unwrap();
        let rho = kernel.density_matrix(&packet).unwrap();
        for m in -2..=2 {
            for mp in -2..=2 {
                if m != mp {
                    assert!(rho.element(m, mp).unwrap().norm() < 1e-14);
                }
            }
        }
        for m in 1..=2 {
            assert_relative_eq!(
                rho.element(m, m).unwrap().re,
                rho.element(-m, -m).unwrap().re,
                max_relative = 1e-11
            );
        }
    }

    /// With the target at the photoelectron source (no displacement), the
    /// combined inversion (k_i, k_f) -> (-k_i, -k_f) maps q -> -q and
    /// leaves F_m invariant (even target manifold), so the full trace over
    /// scattered directions kills every coherence between even- and odd-l
    /// incident channels exactly. A displaced target breaks the inversion
    /// center (the electron arrives *from* the source) and the cross-parity
    /// coherence appears, with its phase tracking the relative channel
    /// phase one-to-one.
    #[test]
    fn mixed_channel_coherence_needs_displaced_target_and_tracks_phase() {
        let energies = uniform_grid(14.5, 16.5, 3);
        let manifold = TargetManifold::hydrogen_4d();
        let channels = [(2, 1), (1, 0)];
        let build = |chi: f64| {
            let amps = vec![
                vec![c(1.0, 0.0); 3],
                vec![Complex64::from_polar(0.8, chi); 3],
            ];
            packet_with(&channels, amps, energies.clone())
        };

        // Centered target: exact parity zero.
        let kernel_centered = CollisionKernel::build_with_resolution(
            manifold.clone(),
            CollisionGeometry::default(),
            build(0.0).channels(),
            &energies,
            (8, 16),
            (8, 32),
        )
        .unwrap();
        let rho_centered = kernel_centered.density_matrix(&build(0.0)).unwrap();
        for m in -2i32..=2 {
            for mp in -2i32..=2 {
                if (m - mp).rem_euclid(2) == 1 {
                    let v = rho_centered.element(m, mp).unwrap();
                    assert!(
                        v.norm() < 1e-14,
                        "cross-parity coherence ({m},{mp}) = {v} must vanish for a centered target"
                    );
                }
            }
        }

        // Displaced target (collision centre downstream of the source).
        let geometry = CollisionGeometry {
            target_offset: Vector3::new(0.0, 0.0, 10.0),
        };
        let kernel = CollisionKernel::build_with_resolution(
            manifold,
            geometry,
            build(0.0).channels(),
            &energies,
            (8, 16),
            (8, 32),
        )
        .unwrap();

        let rho_0 = kernel.density_matrix(&build(0.0)).unwrap();
        let base = rho_0.element(1, 0).unwrap();
        assert!(
            base.norm() > 1e-6,
            "cross-parity coherence should be present for a displaced target, got {base}"
        );

        let delta = 0.9;
        let rho_1 = kernel.density_matrix(&build(delta)).unwrap();
        let shifted = rho_1.element(1, 0).unwrap();
        // Compare raw (weight-restored) coherences: the chi-independent
        // diagonal blocks enter the trace, so normalized elements shift in
        // magnitude while the raw cross term rotates rigidly.
        let raw_base = base * rho_0.weight();
        let raw_shifted = shifted * rho_1.weight();
        assert_relative_eq!(raw_shifted.norm(), raw_base.norm(), max_relative = 1e-10);
        let mut arg_diff = raw_shifted.arg() - raw_base.arg();
        while arg_diff > std::f64::consts::PI {
            arg_diff -= 2.0 * std::f64::consts::PI;
        }
        while arg_diff < -std::f64::consts::PI {
            arg_diff += 2.0 * std::f64::consts::PI;
        }
        // The phase lands on -delta: the coherence carries a_even conj(a_odd).
        assert_relative_eq!(arg_diff, -delta, max_relative = 1e-9);
    }

    /// Multiplying every channel amplitude by a common phase must leave the
    /// density matrix and the excitation weight untouched.
    #[test]
    fn global_phase_invariance() {
        let energies = uniform_grid(14.5, 16.5, 3);
        let amps = vec![
            vec![c(1.0, 0.2); 3],
            vec![c(-0.3, 0.5); 3],
        ];
        let packet = packet_with(&[(2, 1), (1, 0)], amps.clone(), energies.clone());
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated: Vec<Vec<Complex64>> = amps
            .iter()
            .map(|row| row.iter().map(|a| a * phase).collect())
            .collect();
        let packet_rot = packet_with(&[(2, 1), (1, 0)], rotated, energies.clone());

        let kernel = CollisionKernel::build_with_resolution(
            TargetManifold::hydrogen_4d(),
            CollisionGeometry::default(),
            packet.channels(),
            &energies,
            (6, 16),
            (6, 32),
        )
        .unwrap();
        let rho_a = kernel.density_matrix(&packet).unwrap();
        let rho_b = kernel.density_matrix(&packet_rot).unwrap();
        assert_relative_eq!(rho_a.weight(), rho_b.weight(), max_relative = 1e-12);
        for m in -2..=2 {
            for mp in -2..=2 {
                let diff = (rho_a.element(m, mp).unwrap() - rho_b.element(m, mp).unwrap()).norm();
                assert!(diff < 1e-13, "({m},{mp}) differs by {diff}");
            }
        }
    }

    /// Rotating the incident packet about the beam axis by beta multiplies
    /// each channel amplitude by e^{-i m_c beta}; the excited coherences
    /// must co-rotate as e^{-i (m - m') beta}. Exact on the discrete grids
    /// because the azimuthal selection rule is exact below the aliasing
    /// order.
    #[test]
    fn rotational_covariance_about_beam_axis() {
        let energies = uniform_grid(14.5, 16.5, 3);
        let channels = [(2, 1), (1, 0), (2, -1)];
        let base_amps = vec![
            vec![c(0.9, 0.1); 3],
            vec![c(0.2, 0.6); 3],
            vec![c(-0.4, 0.35); 3],
        ];
        let beta = 0.7;
        let rotated: Vec<Vec<Complex64>> = base_amps
            .iter()
            .zip(channels.iter())
            .map(|(row, &(_, m_c))| {
                let ph = Complex64::from_polar(1.0, -(m_c as f64) * beta);
                row.iter().map(|a| a * ph).collect()
            })
            .collect();
        let packet = packet_with(&channels, base_amps, energies.clone());
        let packet_rot = packet_with(&channels, rotated, energies.clone());

        let kernel = CollisionKernel::build_with_resolution(
            TargetManifold::hydrogen_4d(),
            CollisionGeometry::default(),
            packet.channels(),
            &energies,
            (8, 16),
            (8, 32),
        )
        .unwrap();
        let rho = kernel.density_matrix(&packet).unwrap();
        let rho_rot = kernel.density_matrix(&packet_rot).unwrap();
        assert_relative_eq!(rho.weight(), rho_rot.weight(), max_relative = 1e-10);
        for m in -2..=2 {
            for mp in -2..=2 {
                let expected = rho.element(m, mp).unwrap()
                    * Complex64::from_polar(1.0, -((m - mp) as f64) * beta);
                let got = rho_rot.element(m, mp).unwrap();
                assert!(
                    (expected - got).norm() < 1e-10,
                    "covariance broken at ({m},{mp}): {expected} vs {got}"
                );
            }
        }
    }

    /// Below threshold nothing can be excited: an all-closed grid is an
    /// error, a partially open grid quietly drops the closed points.
    #[test]
    fn threshold_handling() {
        let manifold = TargetManifold::hydrogen_4d();
        let closed = uniform_grid(5.0, 9.0, 3);
        let err = CollisionKernel::build_with_resolution(
            manifold.clone(),
            CollisionGeometry::default(),
            &[AngularQuantumNumbers::new(0, 0).unwrap()],
            &closed,
            (4, 8),
            (4, 8),
        )
        .unwrap_err();
        match err {
            Error::Numerical { stage, message } => {
                assert_eq!(stage, "collision kernel");
                assert!(message.contains("threshold"));
            }
            other => panic!("expected threshold error, got {other:?}"),
        }

        // Straddling grid: the closed energies contribute zero weight but
        // the result is still a valid state.
        let straddle = uniform_grid(11.0, 16.0, 4);
        let amps = vec![vec![c(1.0, 0.0); 4]];
        let packet = packet_with(&[(0, 0)], amps, straddle.clone());
        let kernel = CollisionKernel::build_with_resolution(
            manifold,
            CollisionGeometry::default(),
            packet.channels(),
            &straddle,
            (6, 16),
            (6, 16),
        )
        .unwrap();
        let rho = kernel.density_matrix(&packet).unwrap();
        assert!(rho.weight() > 0.0);
        let trace: f64 = (-2..=2).map(|m| rho.element(m, m).unwrap().re).sum();
        assert_relative_eq!(trace, 1.0, max_relative = 1e-12);
    }

    /// The one-shot helper must agree with an explicitly built kernel, and
    /// grid mismatches must be rejected.
    #[test]
    fn one_shot_matches_kernel_and_validates_grids() {
        let energies = uniform_grid(14.0, 17.0, 3);
        let amps = vec![vec![c(1.0, 0.0); 3], vec![c(0.5, 0.5); 3]];
        let packet = packet_with(&[(2, 1), (1, 0)], amps, energies.clone());
        let manifold = TargetManifold::hydrogen_4d();
        let geometry = CollisionGeometry::default();

        let one_shot = excited_density_matrix(&packet, &geometry, &manifold).unwrap();
        let kernel = CollisionKernel::build(
            manifold.clone(),
            geometry.clone(),
            packet.channels(),
            &energies,
        )
        .unwrap();
        let reused = kernel.density_matrix(&packet).unwrap();
        assert_relative_eq!(one_shot.weight(), reused.weight(), max_relative = 1e-13);
        for m in -2..=2 {
            for mp in -2..=2 {
                let d = (one_shot.element(m, mp).unwrap() - reused.element(m, mp).unwrap()).norm();
                assert!(d < 1e-14);
            }
        }

        // Mismatched grid.
        let other = uniform_grid(14.0, 17.5, 3);
        let amps = vec![vec![c(1.0, 0.0); 3], vec![c(0.5, 0.5); 3]];
        let wrong = packet_with(&[(2, 1), (1, 0)], amps, other);
        assert!(matches!(
            kernel.density_matrix(&wrong),
            Err(Error::ConfigInvalid(_))
        ));
        // Mismatched channels.
        let amps = vec![vec![c(1.0, 0.0); 3]];
        let wrong_ch = packet_with(&[(1, 0)], amps, energies);
        assert!(matches!(
            kernel.density_matrix(&wrong_ch),
            Err(Error::ConfigInvalid(_))
        ));
    }

    /// Displacing the target along the beam keeps the axial symmetry (the
    /// coherence structure) but changes the excitation weight distribution.
    #[test]
    fn axial_target_offset_preserves_selection_rules() {
        let energies = uniform_grid(14.5, 16.5, 3);
        let amps = vec![vec![c(1.0, 0.0); 3], vec![c(0.4, 0.4); 3]];
        let channels = [(2, 1), (1, 0)];
        let packet = packet_with(&channels, amps, energies.clone());
        let offset_geometry = CollisionGeometry {
            target_offset: Vector3::new(0.0, 0.0, 2.0),
        };
        let kernel_offset = CollisionKernel::build_with_resolution(
            TargetManifold::hydrogen_4d(),
            offset_geometry,
            packet.channels(),
            &energies,
            (8, 16),
            (8, 32),
        )
        .unwrap();
        let kernel_centered = CollisionKernel::build_with_resolution(
            TargetManifold::hydrogen_4d(),
            CollisionGeometry::default(),
            packet.channels(),
            &energies,
            (8, 16),
            (8, 32),
        )
        .unwrap();
        let rho_off = kernel_offset.density_matrix(&packet).unwrap();
        let rho_cen = kernel_centered.density_matrix(&packet).unwrap();
        // Selection rule (coherences only between m and m' with
        // m - m' = m_c - m_c') survives an axial displacement...
        for m in -2i32..=2 {
            for mp in -2i32..=2 {
                if ![0, 1, -1].contains(&(m - mp)) {
                    assert!(rho_off.element(m, mp).unwrap().norm() < 1e-14);
                }
            }
        }
        // ...but the matrix itself changes.
        let mut max_diff: f64 = 0.0;
        for m in -2..=2 {
            for mp in -2..=2 {
                max_diff = max_diff.max(
                    (rho_off.element(m, mp).unwrap() - rho_cen.element(m, mp).unwrap()).norm(),
                );
            }
        }
        assert!(max_diff > 1e-6, "offset should change the state, diff {max_diff}");
    }

    /// Constructor invariants: bad shapes, non-Hermitian input, negative
    /// populations and bad traces are rejected; from_populations builds a
    /// valid diagonal state.
    #[test]
    fn density_matrix_constructor_validation() {
        let manifold = TargetManifold::hydrogen_4d();
        // Shape mismatch.
        assert!(SublevelDensityMatrix::new(manifold.clone(), Array2::zeros((3, 3)), 1.0).is_err());
        // Valid diagonal state.
        let rho = SublevelDensityMatrix::from_populations(manifold.clone(), &[0.0, 1.0, 2.0, 1.0, 0.0])
            .unwrap();
        assert_relative_eq!(rho.element(0, 0).unwrap().re, 0.5, max_relative = 1e-14);
        assert_relative_eq!(rho.weight(), 4.0, max_relative = 1e-14);
        assert!(rho.element(0, 0).is_ok());
        assert!(rho.element(3, 0).is_err());
        // Non-Hermitian rejected.
        let mut bad = Array2::<Complex64>::zeros((5, 5));
        bad[(0, 0)] = c(1.0, 0.0);
        bad[(0, 1)] = c(0.1, 0.0);
        assert!(SublevelDensityMatrix::new(manifold.clone(), bad, 1.0).is_err());
        // Wrong trace rejected.
        let mut off = Array2::<Complex64>::zeros((5, 5));
        off[(0, 0)] = c(0.5, 0.0);
        assert!(SublevelDensityMatrix::new(manifold.clone(), off, 1.0).is_err());
        // Negative population rejected.
        let mut neg = Array2::<Complex64>::zeros((5, 5));
        neg[(0, 0)] = c(1.5, 0.0);
        neg[(1, 1)] = c(-0.5, 0.0);
        assert!(SublevelDensityMatrix::new(manifold, neg, 1.0).is_err());
    }
}
