//! Truncated-basis validation propagator.
//!
//! The emission dynamics are re-derived from first principles on an
//! explicit finite photon-mode grid: basis configurations are atom levels
//! tensored with photon occupations (at most one photon per mode, at most
//! two photons total), and the order-resolved coefficient hierarchy
//!
//! ```text
//! d/dt S_p = -i V(t) S_{p-1},   S_0 = initial state,   S = Σ_p S_p
//! ```
//!
//! is marched in time with the fast interaction-picture phases integrated
//! exactly within each step. This is an independent check of the
//! factorized cascade module: at leading order (p = 2) the two-photon
//! sector reproduces the closed-form coincidence pattern, while higher
//! orders quantify photon-feedback corrections that the factorized model
//! ignores by construction. None of the cascade module's closed-form
//! angular algebra is reused here beyond the per-edge dipole amplitudes.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cascade::{e1_amplitude_with_polarization, CascadeModel, PhotonMode};
use crate::collision::SublevelDensityMatrix;
use crate::numeric::hermitian_eigen;
use crate::units::HARTREE_EV;
use crate::{Error, Result};

/// Default cap on the configuration-basis size.
pub const DEFAULT_BASIS_CAP: usize = 100_000;

/// Stability bound: the time step must satisfy `dt <= STABILITY_FRACTION /
/// omega_max`, with `omega_max` the fastest interaction-picture phase
/// frequency among the retained couplings.
pub const STABILITY_FRACTION: f64 = 0.1;

/// Maximum perturbative order of the coefficient hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationOrder {
    k: u32,
}

impl IterationOrder {
    pub fn new(k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::ConfigInvalid(
                "iteration order must be at least 1".into(),
            ));
        }
        if k > 64 {
            return Err(Error::ConfigInvalid(format!(
                "iteration order {k} is beyond any sensible truncation (max 64)"
            )));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

impl Default for IterationOrder {
    /// Order 6: the lowest order that carries the two-photon cascade
    /// together with its first photon-feedback corrections.
    fn default() -> Self {
        Self { k: 6 }
    }
}

/// One directed coupling: `target <- coupling * exp(i delta t) * source`.
#[derive(Debug, Clone, Copy)]
struct DirectedEdge {
    coupling: Complex64,
    src: u32,
    delta_idx: u32,
}

/// A three-level emitter tensored with photon occupations of an explicit
/// mode grid, with every electric-dipole coupling tabulated.
///
/// Sector layout of the coefficient vector:
/// upper sublevels (no photons), then intermediate sublevels x one photon
/// per mode, then ground sublevels x unordered mode pairs.
#[derive(Debug, Clone)]
pub struct TruncatedSystem {
    model: CascadeModel,
    modes: Vec<PhotonMode>,
    dim_u: usize,
    dim_i: usize,
    dim_g: usize,
    offset_one: usize,
    offset_two: usize,
    size: usize,
    /// CSR adjacency: edges grouped by target state.
    target_offsets: Vec<u32>,
    edges: Vec<DirectedEdge>,
    /// Distinct signed interaction-picture detunings (atomic units).
    deltas: Vec<f64>,
    omega_max: f64,
    coupling_scale: f64,
}

/// Time-resolved sector norms plus the order-resolved coefficients at the
/// final time of a propagation.
#[derive(Debug, Clone)]
pub struct CoefficientHistory {
    times: Vec<f64>,
    sector_norms: Vec<[f64; 3]>,
    orders: Vec<Vec<Complex64>>,
}

impl CoefficientHistory {
    /// Recording times (atomic units), ending at the final time.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Squared norms per sector (upper / one-photon / two-photon) of the
    /// summed coefficient vector at each recorded time.
    pub fn sector_norms(&self) -> &[[f64; 3]] {
        &self.sector_norms
    }

    /// Final coefficient vectors per order, `p = 0..=k`.
    pub fn final_orders(&self) -> &[Vec<Complex64>] {
        &self.orders
    }

    /// Final summed coefficient vector over orders `p <= k_max`.
    pub fn total_up_to(&self, k_max: u32) -> Vec<Complex64> {
        let mut total = vec![Complex64::new(0.0, 0.0); self.orders[0].len()];
        for order in self.orders.iter().take(k_max as usize + 1) {
            for (t, s) in total.iter_mut().zip(order) {
                *t += s;
            }
        }
        total
    }

    /// Final summed coefficient vector over all computed orders.
    pub fn total(&self) -> Vec<Complex64> {
        self.total_up_to(self.orders.len() as u32 - 1)
    }

    /// First recorded time at which the given sector's norm exceeds the
    /// threshold (sectors: 0 upper, 1 one-photon, 2 two-photon).
    pub fn first_crossing(&self, sector: usize, threshold: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.sector_norms)
            .find(|(_, norms)| norms[sector] > threshold)
            .map(|(t, _)| *t)
    }
}

impl TruncatedSystem {
    /// Build the configuration basis and coupling table for `model` over
    /// the given photon modes, with every dipole amplitude multiplied by
    /// `coupling_scale` (the weak-coupling dial).
    pub fn new(
        model: &CascadeModel,
        modes: &[PhotonMode],
        coupling_scale: f64,
    ) -> Result<Self> {
        Self::with_basis_cap(model, modes, coupling_scale, DEFAULT_BASIS_CAP)
    }

    /// [`TruncatedSystem::new`] with an explicit basis-size cap.
    pub fn with_basis_cap(
        model: &CascadeModel,
        modes: &[PhotonMode],
        coupling_scale: f64,
        cap: usize,
    ) -> Result<Self> {
        if !(coupling_scale.is_finite() && coupling_scale >= 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "coupling scale must be finite and nonnegative, got {coupling_scale}"
            )));
        }
        if modes.is_empty() {
            return Err(Error::ConfigInvalid("mode grid is empty".into()));
        }
        for (i, a) in modes.iter().enumerate() {
            for b in modes.iter().skip(i + 1) {
                if modes_match(a, b) {
                    return Err(Error::ConfigInvalid(format!(
                        "duplicate photon mode at theta = {}, phi = {}, sigma = {}, energy = {}",
                        a.theta, a.phi, a.sigma, a.energy
                    )));
                }
            }
        }

        let n_modes = modes.len();
        let dim_u = (2 * model.upper.l + 1) as usize;
        let dim_i = (2 * model.intermediate.l + 1) as usize;
        let dim_g = (2 * model.ground.l + 1) as usize;
        let n_pairs = n_modes * (n_modes - 1) / 2;
        let offset_one = dim_u;
        let offset_two = offset_one + n_modes * dim_i;
        let size = offset_two + n_pairs * dim_g;
        if size > cap {
            return Err(Error::OracleBasisOverflow { size, cap });
        }

        let mut system = Self {
            model: model.clone(),
            modes: modes.to_vec(),
            dim_u,
            dim_i,
            dim_g,
            offset_one,
            offset_two,
            size,
            target_offsets: Vec::new(),
            edges: Vec::new(),
            deltas: Vec::new(),
            omega_max: 0.0,
            coupling_scale,
        };
        system.build_edges()?;
        Ok(system)
    }

    fn build_edges(&mut self) -> Result<()> {
        let l_u = self.model.upper.l as i32;
        let l_i = self.model.intermediate.l as i32;
        let l_g = self.model.ground.l as i32;
        let e_u = self.model.upper.energy / HARTREE_EV;
        let e_i = self.model.intermediate.energy / HARTREE_EV;
        let e_g = self.model.ground.energy / HARTREE_EV;

        let mut delta_lookup: HashMap<u64, u32> = HashMap::new();
        let mut deltas: Vec<f64> = Vec::new();
        let mut intern = |delta: f64| -> u32 {
            *delta_lookup.entry(delta.to_bits()).or_insert_with(|| {
                deltas.push(delta);
                (deltas.len() - 1) as u32
            })
        };

        // (target, edge) pairs, resorted into CSR at the end.
        let mut raw: Vec<(u32, DirectedEdge)> = Vec::new();
        let mut push_pair =
            |raw: &mut Vec<(u32, DirectedEdge)>,
             lower_state: u32,
             upper_state: u32,
             g: Complex64,
             delta: f64,
             intern: &mut dyn FnMut(f64) -> u32| {
                // Emission: the photon-richer state accumulates from the
                // photon-poorer one with phase exp(+i delta t) ...
                raw.push((
                    lower_state,
                    DirectedEdge { coupling: g, src: upper_state, delta_idx: intern(delta) },
                ));
                // ... and absorption is the Hermitian conjugate.
                raw.push((
                    upper_state,
                    DirectedEdge {
                        coupling: g.conj(),
                        src: lower_state,
                        delta_idx: intern(-delta),
                    },
                ));
            };

        // Upper <-> intermediate arm: |u, m; vac> <-> |i, m1; 1_mode>.
        for (mode_idx, mode) in self.modes.iter().enumerate() {
            let pol = mode.polarization_vector();
            let omega = mode.energy / HARTREE_EV;
            let delta = e_i + omega - e_u;
            for m in -l_u..=l_u {
                for m1 in -l_i..=l_i {
                    let g = e1_amplitude_with_polarization(
                        &sublevel(&self.model.upper, m),
                        &sublevel(&self.model.intermediate, m1),
                        &pol,
                        mode.energy,
                        self.model.radial_upper,
                    )? * self.coupling_scale;
                    if g == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let target = self.one_photon_index(mode_idx, m1) as u32;
                    let source = (m + l_u) as u32;
                    push_pair(&mut raw, target, source, g, delta, &mut intern);
                }
            }
        }

        // Intermediate <-> ground arm: |i, m1; 1_a> <-> |g, mg; 1_a 1_b>.
        // The dipole amplitude depends only on the emitted mode, so cache
        // it per (mode, m1, mg) before sweeping the occupied-mode index.
        let mut lower_amp =
            vec![Complex64::new(0.0, 0.0); self.modes.len() * self.dim_i * self.dim_g];
        for (mode_idx, mode) in self.modes.iter().enumerate() {
            let pol = mode.polarization_vector();
            for m1 in -l_i..=l_i {
                for mg in -l_g..=l_g {
                    let g = e1_amplitude_with_polarization(
                        &sublevel(&self.model.intermediate, m1),
                        &sublevel(&self.model.ground, mg),
                        &pol,
                        mode.energy,
                        self.model.radial_lower,
                    )? * self.coupling_scale;
                    lower_amp[(mode_idx * self.dim_i + (m1 + l_i) as usize) * self.dim_g
                        + (mg + l_g) as usize] = g;
                }
            }
        }
        for occupied in 0..self.modes.len() {
            for emitted in 0..self.modes.len() {
                if emitted == occupied {
                    continue;
                }
                let omega = self.modes[emitted].energy / HARTREE_EV;
                let delta = e_g + omega - e_i;
                for m1 in -l_i..=l_i {
                    for mg in -l_g..=l_g {
                        let g = lower_amp[(emitted * self.dim_i + (m1 + l_i) as usize)
                            * self.dim_g
                            + (mg + l_g) as usize];
                        if g == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let target = self.pair_state_index(occupied, emitted, mg) as u32;
                        let source = self.one_photon_index(occupied, m1) as u32;
                        push_pair(&mut raw, target, source, g, delta, &mut intern);
                    }
                }
            }
        }

        // CSR by target, deterministic order.
        raw.sort_by_key(|(target, edge)| (*target, edge.src, edge.delta_idx));
        let mut offsets = vec![0u32; self.size + 1];
        for (target, _) in &raw {
            offsets[*target as usize + 1] += 1;
        }
        for i in 0..self.size {
            offsets[i + 1] += offsets[i];
        }
        self.edges = raw.into_iter().map(|(_, e)| e).collect();
        self.target_offsets = offsets;
        self.omega_max = deltas.iter().fold(0.0, |acc, d| acc.max(d.abs()));
        self.deltas = deltas;
        Ok(())
    }

    pub fn basis_size(&self) -> usize {
        self.size
    }

    pub fn modes(&self) -> &[PhotonMode] {
        &self.modes
    }

    pub fn model(&self) -> &CascadeModel {
        &self.model
    }

    /// Fastest interaction-picture phase frequency among the couplings.
    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// Basis index of the upper sublevel `m` in the no-photon sector.
    pub fn upper_state_index(&self, m: i32) -> Result<usize> {
        let l = self.model.upper.l as i32;
        if m.abs() > l {
            return Err(Error::AngularMomentum(format!(
                "upper sublevel m = {m} outside |m| <= {l}"
            )));
        }
        Ok((m + l) as usize)
    }

    fn one_photon_index(&self, mode_idx: usize, m1: i32) -> usize {
        let l = self.model.intermediate.l as i32;
        self.offset_one + mode_idx * self.dim_i + (m1 + l) as usize
    }

    /// Triangular index of the unordered mode pair, `a != b`.
    fn pair_index(&self, a: usize, b: usize) -> usize {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let n = self.modes.len();
        lo * (2 * n - lo - 1) / 2 + (hi - lo - 1)
    }

    fn pair_state_index(&self, a: usize, b: usize, mg: i32) -> usize {
        let l = self.model.ground.l as i32;
        self.offset_two + self.pair_index(a, b) * self.dim_g + (mg + l) as usize
    }

    /// Grid index of a photon mode; [`Error::OracleModeOffGrid`] when the
    /// mode is not on the grid.
    pub fn mode_index(&self, mode: &PhotonMode) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| modes_match(m, mode))
            .ok_or_else(|| {
                Error::OracleModeOffGrid(format!(
                    "no grid mode at theta = {}, phi = {}, sigma = {}, energy = {} eV",
                    mode.theta, mode.phi, mode.sigma, mode.energy
                ))
            })
    }

    fn sector_of(&self, idx: usize) -> usize {
        if idx < self.offset_one {
            0
        } else if idx < self.offset_two {
            1
        } else {
            2
        }
    }

    /// March the order-resolved hierarchy from `initial` (a coefficient
    /// vector over the full basis, unit norm) to `t_final` with step `dt`
    /// (both in atomic units).
    pub fn propagate(
        &self,
        initial: &[Complex64],
        order: IterationOrder,
        t_final: f64,
        dt: f64,
    ) -> Result<CoefficientHistory> {
        if initial.len() != self.size {
            return Err(Error::ConfigInvalid(format!(
                "initial vector length {} does not match basis size {}",
                initial.len(),
                self.size
            )));
        }
        let norm: f64 = initial.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::ConfigInvalid(format!(
                "initial coefficient vector must have unit norm, got {norm}"
            )));
        }
        if !(t_final.is_finite() && t_final > 0.0 && dt.is_finite() && dt > 0.0) {
            return Err(Error::ConfigInvalid(
                "propagation needs positive finite t_final and dt".into(),
            ));
        }
        if self.omega_max > 0.0 && dt > STABILITY_FRACTION / self.omega_max {
            return Err(Error::OracleStepUnstable {
                dt,
                omega_max: self.omega_max,
            });
        }

        let steps = (t_final / dt).ceil().max(1.0) as usize;
        let dt_eff = t_final / steps as f64;
        let k = order.k() as usize;

        // Per-step phase integrals: for each distinct detuning,
        // int_t^{t+dt} exp(i delta t') dt' = exp(i delta t) * c(delta)
        // with the step factor c precomputed once.
        let step_factor: Vec<Complex64> = self
            .deltas
            .iter()
            .map(|&d| {
                if d.abs() < 1e-14 {
                    Complex64::new(dt_eff, 0.0)
                } else {
                    (Complex64::from_polar(1.0, d * dt_eff) - 1.0)
                        / Complex64::new(0.0, d)
                }
            })
            .collect();

        let mut orders: Vec<Vec<Complex64>> = Vec::with_capacity(k + 1);
        orders.push(initial.to_vec());
        for _ in 0..k {
            orders.push(vec![Complex64::new(0.0, 0.0); self.size]);
        }

        let record_stride = (steps / 256).max(1);
        let mut times = Vec::new();
        let mut sector_norms = Vec::new();
        let mut record = |orders: &[Vec<Complex64>], t: f64, times: &mut Vec<f64>, sector_norms: &mut Vec<[f64; 3]>| {
            let mut norms = [0.0f64; 3];
            for idx in 0..self.size {
                let mut total = Complex64::new(0.0, 0.0);
                for order_vec in orders {
                    total += order_vec[idx];
                }
                norms[self.sector_of(idx)] += total.norm_sqr();
            }
            times.push(t);
            sector_norms.push(norms);
        };
        record(&orders, 0.0, &mut times, &mut sector_norms);

        let mut phases = vec![Complex64::new(0.0, 0.0); self.deltas.len()];
        let mut saved_lower = vec![Complex64::new(0.0, 0.0); self.size];
        let mut saved_current = vec![Complex64::new(0.0, 0.0); self.size];

        for step in 0..steps {
            let t = step as f64 * dt_eff;
            for (phase, (&delta, &factor)) in phases
                .iter_mut()
                .zip(self.deltas.iter().zip(&step_factor))
            {
                *phase = Complex64::from_polar(1.0, delta * t) * factor;
            }

            // S_{p-1} at the start of this step; S_0 never changes.
            saved_lower.copy_from_slice(&orders[0]);
            for p in 1..=k {
                saved_current.copy_from_slice(&orders[p]);
                // Split borrows: source order p-1 (already advanced to
                // t + dt) and destination order p.
                let (lowers, uppers) = orders.split_at_mut(p);
                let source_new = &lowers[p - 1];
                let dest = &mut uppers[0];
                let source_old = &saved_lower;
                let offsets = &self.target_offsets;
                let edges = &self.edges;
                let phases_ref = &phases;
                dest.par_chunks_mut(512).enumerate().for_each(|(chunk, block)| {
                    let base = chunk * 512;
                    for (local, value) in block.iter_mut().enumerate() {
                        let target = base + local;
                        let start = offsets[target] as usize;
                        let end = offsets[target + 1] as usize;
                        if start == end {
                            continue;
                        }
                        let mut acc = Complex64::new(0.0, 0.0);
                        for edge in &edges[start..end] {
                            let src = edge.src as usize;
                            // Trapezoid in the slow envelope, exact in
                            // the fast phase.
                            let avg = (source_old[src] + source_new[src]) * 0.5;
                            acc += edge.coupling * phases_ref[edge.delta_idx as usize] * avg;
                        }
                        *value += Complex64::new(0.0, -1.0) * acc;
                    }
                });
                std::mem::swap(&mut saved_lower, &mut saved_current);
            }

            if (step + 1) % record_stride == 0 || step + 1 == steps {
                record(
                    &orders,
                    (step + 1) as f64 * dt_eff,
                    &mut times,
                    &mut sector_norms,
                );
            }
        }

        Ok(CoefficientHistory {
            times,
            sector_norms,
            orders,
        })
    }

    /// Joint-detection probability of the two modes at the final time,
    /// normalized over the two-photon sector. Zero when the two-photon
    /// sector is empty (e.g. zero coupling).
    pub fn extract_coincidence(
        &self,
        history: &CoefficientHistory,
        mode1: &PhotonMode,
        mode2: &PhotonMode,
    ) -> Result<f64> {
        let idx1 = self.mode_index(mode1)?;
        let idx2 = self.mode_index(mode2)?;
        if idx1 == idx2 {
            return Err(Error::ConfigInvalid(
                "coincidence extraction needs two distinct grid modes".into(),
            ));
        }
        let total = history.total();
        let mut numerator = 0.0;
        for mg in 0..self.dim_g {
            numerator +=
                total[self.offset_two + self.pair_index(idx1, idx2) * self.dim_g + mg].norm_sqr();
        }
        let denominator: f64 = total[self.offset_two..].iter().map(|c| c.norm_sqr()).sum();
        if denominator == 0.0 {
            return Ok(0.0);
        }
        Ok(numerator / denominator)
    }

    /// Two-photon coincidence pattern for a (generally mixed) upper-level
    /// state: the density matrix is eigendecomposed, each eigenvector is
    /// propagated as a pure state, and the sector probabilities are
    /// weight-summed and normalized over the two-photon sector. Returns
    /// one probability per unordered mode pair (triangular indexing, see
    /// [`TruncatedSystem::pair_probability`]).
    pub fn coincidence_pattern(
        &self,
        rho: &SublevelDensityMatrix,
        order: IterationOrder,
        t_final: f64,
        dt: f64,
    ) -> Result<Vec<f64>> {
        if rho.manifold().l != self.model.upper.l {
            return Err(Error::ConfigInvalid(format!(
                "density matrix manifold l = {} does not match the upper level l = {}",
                rho.manifold().l,
                self.model.upper.l
            )));
        }
        let n_pairs = self.modes.len() * (self.modes.len() - 1) / 2;
        let mut pattern = vec![0.0f64; n_pairs];
        let (eigenvalues, eigenvectors) = hermitian_eigen(rho.matrix());
        for (weight, vector) in eigenvalues.iter().zip(&eigenvectors) {
            if *weight < 1e-14 {
                continue;
            }
            let mut initial = vec![Complex64::new(0.0, 0.0); self.size];
            let norm: f64 = vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for (slot, component) in initial[..self.dim_u].iter_mut().zip(vector) {
                *slot = component / norm;
            }
            let history = self.propagate(&initial, order, t_final, dt)?;
            let total = history.total();
            for pair in 0..n_pairs {
                let mut p = 0.0;
                for mg in 0..self.dim_g {
                    p += total[self.offset_two + pair * self.dim_g + mg].norm_sqr();
                }
                pattern[pair] += weight * p;
            }
        }
        let sum: f64 = pattern.iter().sum();
        if sum > 0.0 {
            for p in pattern.iter_mut() {
                *p /= sum;
            }
        }
        Ok(pattern)
    }

    /// Look up a mode pair's probability in a [`coincidence_pattern`]
    /// result.
    ///
    /// [`coincidence_pattern`]: TruncatedSystem::coincidence_pattern
    pub fn pair_probability(
        &self,
        pattern: &[f64],
        mode1: &PhotonMode,
        mode2: &PhotonMode,
    ) -> Result<f64> {
        let idx1 = self.mode_index(mode1)?;
        let idx2 = self.mode_index(mode2)?;
        if idx1 == idx2 {
            return Err(Error::ConfigInvalid(
                "pair lookup needs two distinct grid modes".into(),
            ));
        }
        pattern
            .get(self.pair_index(idx1, idx2))
            .copied()
            .ok_or_else(|| {
                Error::ConfigInvalid("pattern length does not match the mode grid".into())
            })
    }
}

fn sublevel(state: &crate::atoms::BoundState, m: i32) -> crate::atoms::BoundState {
    crate::atoms::BoundState {
        label: state.label.clone(),
        n: state.n,
        l: state.l,
        m,
        energy: state.energy,
    }
}

fn modes_match(a: &PhotonMode, b: &PhotonMode) -> bool {
    a.sigma == b.sigma
        && (a.theta - b.theta).abs() < 1e-12
        && (a.phi - b.phi).abs() < 1e-12
        && (a.energy - b.energy).abs() < 1e-12
}

/// The default validation mode grid: 12 directions (three polar rings of
/// four azimuths), both polarizations, three energies per transition
/// channel (the channel center and +/- 0.05 eV).
pub fn default_mode_grid(model: &CascadeModel) -> Result<Vec<PhotonMode>> {
    mode_grid(model, &ring_directions(3, 4), &[-0.05, 0.0, 0.05])
}

/// A reduced grid for quick validation runs: 4 directions, both
/// polarizations, only the channel-center energy of each transition.
pub fn quick_mode_grid(model: &CascadeModel) -> Result<Vec<PhotonMode>> {
    mode_grid(model, &ring_directions(2, 2), &[0.0])
}

/// Polar rings of directions: `n_rings` polar angles excluding the poles,
/// `n_azimuths` equally spaced azimuths. The set is closed under the
/// z-mirror (theta -> pi - theta) and under inversion when `n_azimuths`
/// is even.
pub fn ring_directions(n_rings: usize, n_azimuths: usize) -> Vec<(f64, f64)> {
    let mut directions = Vec::with_capacity(n_rings * n_azimuths);
    for ring in 0..n_rings {
        let theta = std::f64::consts::PI * (ring + 1) as f64 / (n_rings + 1) as f64;
        for az in 0..n_azimuths {
            let phi = 2.0 * std::f64::consts::PI * az as f64 / n_azimuths as f64;
            directions.push((theta, phi));
        }
    }
    directions
}

/// Build a mode grid over explicit directions and per-channel energy
/// offsets (eV) for both transition channels of `model`.
pub fn mode_grid(
    model: &CascadeModel,
    directions: &[(f64, f64)],
    energy_offsets: &[f64],
) -> Result<Vec<PhotonMode>> {
    let mut modes = Vec::new();
    for center in [model.upper_photon_energy(), model.lower_photon_energy()] {
        for offset in energy_offsets {
            for &(theta, phi) in directions {
                for sigma in [1u8, 2u8] {
                    modes.push(PhotonMode::new(theta, phi, sigma, center + offset)?);
                }
            }
        }
    }
    Ok(modes)
}

/// Result of the oracle-vs-cascade pattern comparison.
#[derive(Debug, Clone)]
pub struct CascadeCrossCheck {
    /// Mode pairs compared (channel-center modes on each arm).
    pub pair_count: usize,
    /// Max pointwise deviation between the two max-normalized patterns.
    pub max_deviation: f64,
    /// Oracle pattern, normalized to max = 1, in pair enumeration order.
    pub oracle_pattern: Vec<f64>,
    /// Factorized-cascade pattern, normalized to max = 1, same order.
    pub cascade_pattern: Vec<f64>,
}

/// Propagate the truncated system from `rho` and compare the two-photon
/// coincidence pattern on channel-center mode pairs (upper-arm photon
/// first) against the factorized cascade model, both normalized to unit
/// maximum. The returned deviation is the infinity-norm difference.
pub fn validate_against_cascade(
    system: &TruncatedSystem,
    rho: &SublevelDensityMatrix,
    order: IterationOrder,
    t_final: f64,
    dt: f64,
) -> Result<CascadeCrossCheck> {
    let model = system.model();
    let pattern = system.coincidence_pattern(rho, order, t_final, dt)?;
    let upper_center = model.upper_photon_energy();
    let lower_center = model.lower_photon_energy();
    let upper_modes: Vec<&PhotonMode> = system
        .modes()
        .iter()
        .filter(|m| (m.energy - upper_center).abs() < 1e-9)
        .collect();
    let lower_modes: Vec<&PhotonMode> = system
        .modes()
        .iter()
        .filter(|m| (m.energy - lower_center).abs() < 1e-9)
        .collect();
    if upper_modes.is_empty() || lower_modes.is_empty() {
        return Err(Error::ConfigInvalid(
            "mode grid lacks channel-center modes for the comparison".into(),
        ));
    }
    let mut oracle_pattern = Vec::with_capacity(upper_modes.len() * lower_modes.len());
    let mut cascade_pattern = Vec::with_capacity(oracle_pattern.capacity());
    for mode1 in &upper_modes {
        for mode2 in &lower_modes {
            oracle_pattern.push(system.pair_probability(&pattern, mode1, mode2)?);
            cascade_pattern.push(model.coincidence_with_polarizations(
                rho,
                &mode1.polarization_vector(),
                &mode2.polarization_vector(),
            )?);
        }
    }
    let o_max = oracle_pattern.iter().cloned().fold(0.0f64, f64::max);
    let c_max = cascade_pattern.iter().cloned().fold(0.0f64, f64::max);
    if o_max <= 0.0 || c_max <= 0.0 {
        return Err(Error::Numerical {
            stage: "oracle cross-check",
            message: "coincidence pattern vanished on both arms".into(),
        });
    }
    for p in oracle_pattern.iter_mut() {
        *p /= o_max;
    }
    for p in cascade_pattern.iter_mut() {
        *p /= c_max;
    }
    let max_deviation = oracle_pattern
        .iter()
        .zip(&cascade_pattern)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(CascadeCrossCheck {
        pair_count: oracle_pattern.len(),
        max_deviation,
        oracle_pattern,
        cascade_pattern,
    })
}
