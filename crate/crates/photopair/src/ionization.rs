//! Photoelectron wave-packet synthesis: perturbative one- and two-photon
//! ionization amplitudes per pathway, coherent pathway combination with a
//! control phase, and pump-probe delay bookkeeping.
//!
//! Amplitudes are relative (continuum normalized per unit energy, overall
//! cross-section scale dropped); all downstream observables are normalized.

use crate::angular::{c1_matrix_element, sph_harm, AngularQuantumNumbers};
use crate::atoms::AtomModel;
use crate::field::FrequencyComponent;
use crate::units::HBAR_EV_FS;
use crate::{Error, Result};
use num_complex::Complex64;

/// One ionization pathway: an ordered chain of photon absorptions taking the
/// ground state into the continuum. Two-photon pathways name their resonant
/// intermediate by label.
#[derive(Debug, Clone)]
pub struct PathwaySpec {
    steps: Vec<FrequencyComponent>,
    intermediate: Option<String>,
}

impl PathwaySpec {
    /// Direct one-photon pathway.
    pub fn one_photon(step: FrequencyComponent) -> Self {
        Self { steps: vec![step], intermediate: None }
    }

    /// Resonance-enhanced two-photon pathway through the named intermediate.
    pub fn two_photon(
        pump: FrequencyComponent,
        probe: FrequencyComponent,
        intermediate: impl Into<String>,
    ) -> Self {
        Self {
            steps: vec![pump, probe],
            intermediate: Some(intermediate.into()),
        }
    }

    pub fn steps(&self) -> &[FrequencyComponent] {
        &self.steps
    }

    pub fn intermediate_label(&self) -> Option<&str> {
        self.intermediate.as_deref()
    }

    /// Photon count mod 2: the parity of the continuum partial waves this
    /// pathway can reach from an s ground state.
    pub fn parity(&self) -> u32 {
        (self.steps.len() % 2) as u32
    }

    /// Total photon energy at the component centers (eV).
    pub fn center_sum(&self) -> f64 {
        self.steps.iter().map(|s| s.omega).sum()
    }

    fn validate(&self, atom: &AtomModel) -> Result<()> {
        match self.steps.len() {
            1 => Ok(()),
            2 => {
                let label = self.intermediate.as_deref().ok_or_else(|| {
                    Error::ConfigInvalid("two-photon pathway needs an intermediate".into())
                })?;
                let st = atom.intermediate(label).ok_or_else(|| {
                    Error::ConfigInvalid(format!("unknown intermediate {label:?}"))
                })?;
                // the intermediate must be E1-reachable from the ground state
                // with this pump polarization
                let q = self.steps[0].polarization.spherical_component();
                let m_int = atom.ground.m + q;
                if (st.l as i32 - atom.ground.l as i32).abs() != 1
                    || m_int.unsigned_abs() > st.l
                {
                    return Err(Error::AngularMomentum(format!(
                        "intermediate {label:?} not E1-reachable from the ground state"
                    )));
                }
                Ok(())
            }
            n => Err(Error::ConfigInvalid(format!(
                "pathways support 1 or 2 photon steps, got {n}"
            ))),
        }
    }
}

/// First-order amplitude into continuum channel (l, m) at photoelectron
/// energy `epsilon` (eV above threshold). Zero for channels the single E1
/// step cannot reach and for closed channels (epsilon <= 0).
pub fn one_photon_amplitude(
    atom: &AtomModel,
    pathway: &PathwaySpec,
    epsilon: f64,
    l: u32,
    m: i32,
) -> Result<Complex64> {
    if pathway.steps.len() != 1 {
        return Err(Error::ConfigInvalid(
            "one_photon_amplitude expects a single-step pathway".into(),
        ));
    }
    if epsilon <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let step = &pathway.steps[0];
    let q = step.polarization.spherical_component();
    let g = &atom.ground;
    let ang = c1_matrix_element(l, m, q, g.l, g.m)?;
    if ang == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let spectral = step.spectral_amplitude(epsilon + atom.ionization_potential);
    let radial = atom.radial_continuum(epsilon, l, g.n, g.l)?;
    Ok(spectral * ang * radial)
}

/// Second-order resonant amplitude into (l, m) at `epsilon`: the product of
/// the pump spectrum at the intermediate excitation energy, the probe
/// spectrum at epsilon + IP - E_int, both angular factors, and both radial
/// elements. The intermediate is treated as exactly resonant (pole-free
/// rotating-wave form), so no principal-value term appears.
pub fn two_photon_amplitude(
    atom: &AtomModel,
    pathway: &PathwaySpec,
    epsilon: f64,
    l: u32,
    m: i32,
) -> Result<Complex64> {
    if pathway.steps.len() != 2 {
        return Err(Error::ConfigInvalid(
            "two_photon_amplitude expects a two-step pathway".into(),
        ));
    }
    pathway.validate(atom)?;
    if epsilon <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let label = pathway.intermediate.as_deref().unwrap();
    let st = atom.intermediate(label).unwrap();
    let (pump, probe) = (&pathway.steps[0], &pathway.steps[1]);
    let q1 = pump.polarization.spherical_component();
    let q2 = probe.polarization.spherical_component();
    let g = &atom.ground;
    let m_int = g.m + q1;
    let ang1 = c1_matrix_element(st.l, m_int, q1, g.l, g.m)?;
    let ang2 = c1_matrix_element(l, m, q2, st.l, m_int)?;
    if ang1 == 0.0 || ang2 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let s_pump = pump.spectral_amplitude(st.energy);
    let s_probe = probe.spectral_amplitude(epsilon + atom.ionization_potential - st.energy);
    let r_pump = atom.radial_bound(g.n, g.l, st.n, st.l)?;
    let r_probe = atom.radial_continuum(epsilon, l, st.n, st.l)?;
    Ok(s_pump * s_probe * ang1 * ang2 * r_pump * r_probe)
}

/// Amplitude of an arbitrary (1- or 2-step) pathway into channel (l, m).
pub fn pathway_amplitude(
    atom: &AtomModel,
    pathway: &PathwaySpec,
    epsilon: f64,
    l: u32,
    m: i32,
) -> Result<Complex64> {
    match pathway.steps.len() {
        1 => one_photon_amplitude(atom, pathway, epsilon, l, m),
        _ => two_photon_amplitude(atom, pathway, epsilon, l, m),
    }
}

/// Continuum channels a pathway can populate from the ground state
/// (nonzero angular chain), in (l, m)-sorted order.
pub fn reachable_channels(atom: &AtomModel, pathway: &PathwaySpec) -> Result<Vec<AngularQuantumNumbers>> {
    pathway.validate(atom)?;
    let g = &atom.ground;
    let mut out = Vec::new();
    match pathway.steps.len() {
        1 => {
            let q = pathway.steps[0].polarization.spherical_component();
            for l in [g.l as i32 - 1, g.l as i32 + 1] {
                if l < 0 {
                    continue;
                }
                let (l, m) = (l as u32, g.m + q);
                if m.unsigned_abs() <= l && c1_matrix_element(l, m, q, g.l, g.m)? != 0.0 {
                    out.push(AngularQuantumNumbers { l, m });
                }
            }
        }
        _ => {
            let st = atom
                .intermediate(pathway.intermediate.as_deref().unwrap())
                .unwrap();
            let q1 = pathway.steps[0].polarization.spherical_component();
            let q2 = pathway.steps[1].polarization.spherical_component();
            let m_int = g.m + q1;
            for l in [st.l as i32 - 1, st.l as i32 + 1] {
                if l < 0 {
                    continue;
                }
                let (l, m) = (l as u32, m_int + q2);
                if m.unsigned_abs() <= l
                    && c1_matrix_element(st.l, m_int, q1, g.l, g.m)? != 0.0
                    && c1_matrix_element(l, m, q2, st.l, m_int)? != 0.0
                {
                    out.push(AngularQuantumNumbers { l, m });
                }
            }
        }
    }
    out.sort_by_key(|c| (c.l, c.m));
    out.dedup();
    Ok(out)
}

/// A sculpted photoelectron wave packet: complex amplitudes a(epsilon; l, m)
/// on a shared energy grid, one row per populated partial-wave channel.
#[derive(Debug, Clone)]
pub struct PhotoelectronWavePacket {
    energies: Vec<f64>,
    channels: Vec<AngularQuantumNumbers>,
    /// amplitudes[ch][i] = a(energies[i]; channels[ch])
    amplitudes: Vec<Vec<Complex64>>,
}

impl PhotoelectronWavePacket {
    /// Assemble a packet from explicit parts (mainly for tests and synthetic
    /// inputs); channels must be unique and amplitudes match the grid.
    pub fn from_parts(
        energies: Vec<f64>,
        channels: Vec<AngularQuantumNumbers>,
        amplitudes: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::ConfigInvalid("energy grid needs at least 2 points".into()));
        }
        if channels.len() != amplitudes.len() {
            return Err(Error::ConfigInvalid(
                "one amplitude row per channel required".into(),
            ));
        }
        for (i, c) in channels.iter().enumerate() {
            if c.m.unsigned_abs() > c.l {
                return Err(Error::AngularMomentum(format!("|m| > l in channel {i}")));
            }
            if channels[..i].contains(c) {
                return Err(Error::ConfigInvalid(format!("duplicate channel (l={}, m={})", c.l, c.m)));
            }
        }
        if amplitudes.iter().any(|row| row.len() != energies.len()) {
            return Err(Error::ConfigInvalid(
                "amplitude rows must match the energy grid length".into(),
            ));
        }
        Ok(Self { energies, channels, amplitudes })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn channels(&self) -> &[AngularQuantumNumbers] {
        &self.channels
    }

    pub fn amplitude(&self, channel: usize, idx: usize) -> Complex64 {
        self.amplitudes[channel][idx]
    }

    pub fn channel_amplitudes(&self, channel: usize) -> &[Complex64] {
        &self.amplitudes[channel]
    }

    /// Trapezoidal energy-integrated norm, sum over channels (relative units).
    pub fn norm(&self) -> f64 {
        let mut total = 0.0;
        for amps in &self.amplitudes {
            total += trapezoid(&self.energies, |i| amps[i].norm_sqr());
        }
        total
    }

    /// Coherent pointwise sum of two packets on the same grid.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.energies.len() != other.energies.len()
            || self
                .energies
                .iter()
                .zip(&other.energies)
                .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(Error::ConfigInvalid(
                "wave packets live on different energy grids".into(),
            ));
        }
        let mut channels = self.channels.clone();
        let mut amplitudes = self.amplitudes.clone();
        for (ch, amps) in other.channels.iter().zip(&other.amplitudes) {
            if let Some(k) = channels.iter().position(|c| c == ch) {
                for (a, b) in amplitudes[k].iter_mut().zip(amps) {
                    *a += b;
                }
            } else {
                channels.push(*ch);
                amplitudes.push(amps.clone());
            }
        }
        let mut order: Vec<usize> = (0..channels.len()).collect();
        order.sort_by_key(|&i| (channels[i].l, channels[i].m));
        Ok(Self {
            energies: self.energies.clone(),
            channels: order.iter().map(|&i| channels[i]).collect(),
            amplitudes: order.iter().map(|&i| amplitudes[i].clone()).collect(),
        })
    }

    /// Angle-resolved detection probability along a direction (theta, phi):
    /// |sum_lm a(eps; l, m) Y_lm|^2 integrated over the energy grid.
    pub fn momentum_distribution(&self, theta: f64, phi: f64) -> f64 {
        let ylm: Vec<Complex64> = self
            .channels
            .iter()
            .map(|c| sph_harm(c.l, c.m, theta, phi).expect("|m| <= l by construction"))
            .collect();
        trapezoid(&self.energies, |i| {
            self.channels
                .iter()
                .enumerate()
                .map(|(ch, _)| self.amplitudes[ch][i] * ylm[ch])
                .sum::<Complex64>()
                .norm_sqr()
        })
    }
}

fn trapezoid(x: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..x.len() - 1 {
        acc += 0.5 * (x[i + 1] - x[i]) * (f(i) + f(i + 1));
    }
    acc
}

/// Inclusive linear energy grid of n points on [center - half, center + half].
pub fn energy_grid(center: f64, half_width: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| center - half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
        .collect()
}

/// Default grid: 64 points over +/- 3 spectral widths (sigma_E of a 20 fs
/// pulse, 0.0548 eV) around the 15.755 eV reference photoelectron energy.
pub fn default_energy_grid() -> Vec<f64> {
    let sigma = 2.0 * std::f64::consts::LN_2.sqrt() * HBAR_EV_FS / 20.0;
    energy_grid(15.755, 3.0 * sigma, 64)
}

/// Coherently combine pathway amplitudes on a shared energy grid. Control
/// phases enter exclusively through each component's `phase` field.
pub fn combine_pathways(
    atom: &AtomModel,
    pathways: &[PathwaySpec],
    grid: &[f64],
) -> Result<PhotoelectronWavePacket> {
    if pathways.is_empty() {
        return Err(Error::ConfigInvalid("no ionization pathways given".into()));
    }
    if grid.len() < 2 {
        return Err(Error::ConfigInvalid("energy grid needs at least 2 points".into()));
    }
    let mut channels: Vec<AngularQuantumNumbers> = Vec::new();
    for p in pathways {
        for c in reachable_channels(atom, p)? {
            if !channels.contains(&c) {
                channels.push(c);
            }
        }
    }
    channels.sort_by_key(|c| (c.l, c.m));
    let mut amplitudes = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; channels.len()];
    for p in pathways {
        for (k, c) in channels.iter().enumerate() {
            for (i, &eps) in grid.iter().enumerate() {
                amplitudes[k][i] += pathway_amplitude(atom, p, eps, c.l, c.m)?;
            }
        }
    }
    Ok(PhotoelectronWavePacket {
        energies: grid.to_vec(),
        channels,
        amplitudes,
    })
}

/// Delay every two-photon pathway's probe step (its last component) by tau
/// (fs). One-photon pathways are left untouched: the delay scan probes the
/// intermediate coherence, which a direct pathway does not carry.
pub fn apply_pump_probe_delay(pathways: &[PathwaySpec], tau: f64) -> Vec<PathwaySpec> {
    pathways
        .iter()
        .map(|p| {
            let mut p = p.clone();
            if p.steps.len() == 2 {
                p.steps[1] = p.steps[1].delayed(tau);
            }
            p
        })
        .collect()
}

/// The two reference two-photon pathways (pump omega1/omega3, probe
/// omega2/omega4), with the pathway-B relative control phase applied to its
/// probe component.
pub fn reference_pathways(control_phase: f64) -> Vec<PathwaySpec> {
    let c = crate::field::reference_components();
    let mut probe_b = c[3].clone();
    probe_b.phase += control_phase;
    vec![
        PathwaySpec::two_photon(c[0].clone(), c[1].clone(), "5p"),
        PathwaySpec::two_photon(c[2].clone(), probe_b, "6p"),
    ]
}

/// The parity-mixing pathway set: the even two-photon omega3/omega4 pathway
/// plus the odd one-photon omega0 pathway carrying the control phase.
pub fn parity_pathways(control_phase: f64) -> Vec<PathwaySpec> {
    let c = crate::field::reference_components();
    let mut odd = crate::field::one_photon_reference();
    odd.phase += control_phase;
    vec![
        PathwaySpec::two_photon(c[2].clone(), c[3].clone(), "6p"),
        PathwaySpec::one_photon(odd),
    ]
}
