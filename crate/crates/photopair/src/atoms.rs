//! Atomic structure: the effective one-electron source atom whose
//! photoionization produces the electron packet, and the hydrogen target
//! whose 4d -> 3p -> 1s cascade emits the photon pair. Radial dipole data
//! come from a pluggable plain-text table with hydrogenic defaults.

use crate::units::{AU_TIME_FS, FINE_STRUCTURE, HARTREE_EV, RYDBERG_EV};
use crate::{Error, Result};
use std::collections::HashMap;

/// A bound eigenstate, energy in eV relative to the atom's ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub label: String,
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub energy: f64,
}

impl BoundState {
    pub fn new(label: impl Into<String>, n: u32, l: u32, m: i32, energy: f64) -> Result<Self> {
        if l >= n {
            return Err(Error::AngularMomentum(format!("l = {l} >= n = {n}")));
        }
        if m.unsigned_abs() > l {
            return Err(Error::AngularMomentum(format!("|m| = {} > l = {l}", m.abs())));
        }
        Ok(Self { label: label.into(), n, l, m, energy })
    }
}

/// Hydrogen level energy, eV: -13.6057 / n^2.
pub fn hydrogen_energy(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::AngularMomentum("principal quantum number must be >= 1".into()));
    }
    Ok(-RYDBERG_EV / (n * n) as f64)
}

/// Normalized hydrogenic radial function R_{nl}(r), r in Bohr radii.
pub fn hydrogen_radial(n: u32, l: u32, r: f64) -> f64 {
    assert!(l < n, "radial function requires l < n");
    let nf = n as f64;
    let rho = 2.0 * r / nf;
    // norm^2 = (2/n)^3 (n-l-1)! / (2n (n+l)!)
    let mut ln_ratio = 0.0; // ln[(n-l-1)!/(n+l)!]
    for k in (n - l)..=(n + l) {
        ln_ratio -= (k as f64).ln();
    }
    let norm = ((2.0 / nf).powi(3) / (2.0 * nf) * ln_ratio.exp()).sqrt();
    norm * (-r / nf).exp() * rho.powi(l as i32) * laguerre(n - l - 1, (2 * l + 1) as f64, rho)
}

/// Generalized Laguerre polynomial L^alpha_k(x) by upward recurrence.
fn laguerre(k: u32, alpha: f64, x: f64) -> f64 {
    let mut lm1 = 1.0;
    if k == 0 {
        return lm1;
    }
    let mut l = 1.0 + alpha - x;
    for i in 2..=k {
        let i = i as f64;
        let next = ((2.0 * i - 1.0 + alpha - x) * l - (i - 1.0 + alpha) * lm1) / i;
        lm1 = l;
        l = next;
    }
    l
}

/// Radial dipole integral between hydrogen bound states, atomic units:
/// int R_{n1 l1} r R_{n2 l2} r^2 dr. Requires the E1 rule delta-l = +/-1.
pub fn hydrogen_radial_dipole(n1: u32, l1: u32, n2: u32, l2: u32) -> Result<f64> {
    if (l1 as i32 - l2 as i32).abs() != 1 {
        return Err(Error::AngularMomentum(format!(
            "dipole selection rule needs |l1 - l2| = 1, got l1={l1}, l2={l2}"
        )));
    }
    if l1 >= n1 || l2 >= n2 {
        return Err(Error::AngularMomentum("invalid bound state (l >= n)".into()));
    }
    // exp(-r/n) tails: r_max = 150 covers n <= 6 far past double precision
    let val = crate::numeric::integrate_panels(
        |r| hydrogen_radial(n1, l1, r) * r * hydrogen_radial(n2, l2, r) * r * r,
        0.0,
        150.0,
        96,
        12,
    );
    Ok(val)
}

/// E1 spontaneous decay rate of the upper *level* (m-averaged), in 1/fs:
/// A = (4/3) alpha^3 omega_au^3 (l_max / (2 l_up + 1)) R^2, with R the
/// radial dipole integral in atomic units and omega from this crate's
/// hydrogen spectrum.
pub fn einstein_a(upper: (u32, u32), lower: (u32, u32)) -> Result<f64> {
    let (nu, lu) = upper;
    let (nl, ll) = lower;
    if (lu as i32 - ll as i32).abs() != 1 {
        return Err(Error::AngularMomentum(format!(
            "E1-forbidden pair ({nu},{lu}) -> ({nl},{ll})"
        )));
    }
    let omega_ev = hydrogen_energy(nl)? - hydrogen_energy(nu)?;
    if omega_ev >= 0.0 {
        return Err(Error::AngularMomentum(
            "einstein_a expects upper state above lower state".into(),
        ));
    }
    let omega_au = -omega_ev / HARTREE_EV;
    let r = hydrogen_radial_dipole(nu, lu, nl, ll)?;
    let l_max = lu.max(ll) as f64;
    let a_au = (4.0 / 3.0)
        * FINE_STRUCTURE.powi(3)
        * omega_au.powi(3)
        * (l_max / (2.0 * lu as f64 + 1.0))
        * r
        * r;
    Ok(a_au / AU_TIME_FS)
}

/// Key for one side of a radial matrix element.
#[derive(Debug, Clone, Copy, PartialEq)]
enum StateKey {
    Bound { n: u32, l: u32 },
    /// Continuum energy in eV.
    Continuum { eps: f64, l: u32 },
}

/// Pluggable radial dipole integrals (atomic units), loaded from plain text:
/// one entry per line, `n1 l1 n2 l2 value`, or `eps l n2 l2 value` with a
/// decimal `eps` in eV for continuum entries; `#` starts a comment.
/// Only delta-l = +/-1 entries are accepted.
#[derive(Debug, Clone, Default)]
pub struct RadialMatrixElementTable {
    bound: HashMap<(u32, u32, u32, u32), f64>,
    /// (l, n2, l2) -> sorted (eps, value) samples.
    continuum: HashMap<(u32, u32, u32), Vec<(f64, f64)>>,
}

impl RadialMatrixElementTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let tok: Vec<&str> = body.split_whitespace().collect();
            if tok.len() != 5 {
                return Err(Error::TableParse {
                    line,
                    message: format!("expected 5 fields, got {}", tok.len()),
                });
            }
            let parse_u32 = |s: &str, what: &str| -> Result<u32> {
                s.parse().map_err(|_| Error::TableParse {
                    line,
                    message: format!("bad {what}: {s:?}"),
                })
            };
            let parse_f64 = |s: &str, what: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::TableParse {
                    line,
                    message: format!("bad {what}: {s:?}"),
                })
            };
            let l1 = parse_u32(tok[1], "l")?;
            let n2 = parse_u32(tok[2], "n2")?;
            let l2 = parse_u32(tok[3], "l2")?;
            let value = parse_f64(tok[4], "value")?;
            if (l1 as i32 - l2 as i32).abs() != 1 {
                return Err(Error::TableParse {
                    line,
                    message: format!("delta-l must be +/-1, got l={l1} -> l'={l2}"),
                });
            }
            // a decimal point (or exponent) marks a continuum energy
            let continuum_like = tok[0].contains(['.', 'e', 'E']);
            if continuum_like {
                let eps = parse_f64(tok[0], "continuum energy")?;
                table
                    .continuum
                    .entry((l1, n2, l2))
                    .or_default()
                    .push((eps, value));
            } else {
                let n1 = parse_u32(tok[0], "n1")?;
                if l1 >= n1 {
                    return Err(Error::TableParse {
                        line,
                        message: format!("bound state needs l < n, got n={n1}, l={l1}"),
                    });
                }
                table.bound.insert((n1, l1, n2, l2), value);
            }
        }
        for samples in table.continuum.values_mut() {
            samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        }
        Ok(table)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn insert_bound(&mut self, n1: u32, l1: u32, n2: u32, l2: u32, value: f64) -> Result<()> {
        if (l1 as i32 - l2 as i32).abs() != 1 {
            return Err(Error::AngularMomentum(format!(
                "delta-l must be +/-1, got l={l1} -> l'={l2}"
            )));
        }
        self.bound.insert((n1, l1, n2, l2), value);
        Ok(())
    }

    /// Bound-bound element, symmetric in its arguments.
    pub fn bound(&self, n1: u32, l1: u32, n2: u32, l2: u32) -> Option<f64> {
        self.bound
            .get(&(n1, l1, n2, l2))
            .or_else(|| self.bound.get(&(n2, l2, n1, l1)))
            .copied()
    }

    /// Continuum element at energy `eps` (eV); linear interpolation over the
    /// tabulated samples of the (l, n2, l2) channel, clamped at the ends.
    pub fn continuum(&self, eps: f64, l: u32, n2: u32, l2: u32) -> Option<f64> {
        let samples = self.continuum.get(&(l, n2, l2))?;
        match samples.len() {
            0 => None,
            1 => Some(samples[0].1),
            _ => {
                let i = samples
                    .partition_point(|&(e, _)| e < eps)
                    .clamp(1, samples.len() - 1);
                let (e0, v0) = samples[i - 1];
                let (e1, v1) = samples[i];
                let t = ((eps - e0) / (e1 - e0)).clamp(0.0, 1.0);
                Some(v0 + t * (v1 - v0))
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bound.is_empty() && self.continuum.is_empty()
    }
}

/// Effective one-electron atom: ground state, resonant intermediates,
/// ionization potential, per-l continuum phases, and radial dipole data.
#[derive(Debug, Clone)]
pub struct AtomModel {
    pub ground: BoundState,
    pub intermediates: Vec<BoundState>,
    /// eV above the ground state.
    pub ionization_potential: f64,
    /// Scattering phase per continuum l (radians); zero beyond the list.
    pub continuum_phase: Vec<f64>,
    pub radial_table: RadialMatrixElementTable,
    /// Fallback magnitude for bound-continuum elements absent from the table.
    pub continuum_default_magnitude: f64,
    /// When set, bound-bound elements absent from the table are computed
    /// from hydrogenic wavefunctions instead of erroring.
    pub hydrogenic: bool,
}

impl AtomModel {
    /// The photoionized source atom: Ca-like single-active-electron model.
    /// Ground 4s; the two resonant singlet-P intermediates at 4.554 and
    /// 5.167 eV; ionization potential 6.113 eV. Pump transition dipoles
    /// default to unit strength (relative units); continuum elements default
    /// to constant magnitude with zero phases.
    pub fn source_default() -> Self {
        let ground = BoundState::new("4s", 4, 0, 0, 0.0).unwrap();
        let intermediates = vec![
            BoundState::new("5p", 5, 1, 0, 4.554).unwrap(),
            BoundState::new("6p", 6, 1, 0, 5.167).unwrap(),
        ];
        let mut radial_table = RadialMatrixElementTable::default();
        radial_table.insert_bound(4, 0, 5, 1, 1.0).unwrap();
        radial_table.insert_bound(4, 0, 6, 1, 1.0).unwrap();
        Self {
            ground,
            intermediates,
            ionization_potential: 6.113,
            continuum_phase: vec![0.0; 4],
            radial_table,
            continuum_default_magnitude: 1.0,
            hydrogenic: false,
        }
    }

    /// The hydrogen target atom, bound basis capped at n <= 4 (the cascade
    /// in scope is 4d -> 3p -> 1s); dipoles computed hydrogenically.
    pub fn hydrogen_target() -> Self {
        let e = |n: u32| hydrogen_energy(n).unwrap() - hydrogen_energy(1).unwrap();
        let ground = BoundState::new("1s", 1, 0, 0, 0.0).unwrap();
        let intermediates = vec![
            BoundState::new("3p", 3, 1, 0, e(3)).unwrap(),
            BoundState::new("4d", 4, 2, 0, e(4)).unwrap(),
        ];
        Self {
            ground,
            intermediates,
            ionization_potential: -hydrogen_energy(1).unwrap(),
            continuum_phase: vec![0.0; 4],
            radial_table: RadialMatrixElementTable::default(),
            continuum_default_magnitude: 1.0,
            hydrogenic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ionization_potential > 0.0) {
            return Err(Error::ConfigInvalid("ionization potential must be positive".into()));
        }
        let mut last = f64::NEG_INFINITY;
        for s in &self.intermediates {
            if s.energy <= last {
                return Err(Error::ConfigInvalid(
                    "intermediate energies must be strictly increasing".into(),
                ));
            }
            last = s.energy;
        }
        Ok(())
    }

    pub fn intermediate(&self, label: &str) -> Option<&BoundState> {
        self.intermediates.iter().find(|s| s.label == label)
    }

    /// Bound-bound radial dipole element (atomic units).
    pub fn radial_bound(&self, n1: u32, l1: u32, n2: u32, l2: u32) -> Result<f64> {
        if let Some(v) = self.radial_table.bound(n1, l1, n2, l2) {
            return Ok(v);
        }
        if self.hydrogenic {
            return hydrogen_radial_dipole(n1, l1, n2, l2);
        }
        Err(Error::MissingMatrixElement(format!(
            "bound pair ({n1},{l1}) <-> ({n2},{l2})"
        )))
    }

    /// Bound-continuum radial element at photoelectron energy `eps` (eV),
    /// as a complex number carrying the per-l continuum phase.
    pub fn radial_continuum(
        &self,
        eps: f64,
        l_cont: u32,
        n_bound: u32,
        l_bound: u32,
    ) -> Result<num_complex::Complex64> {
        if (l_cont as i32 - l_bound as i32).abs() != 1 {
            return Err(Error::AngularMomentum(format!(
                "continuum dipole needs delta-l = +/-1, got {l_bound} -> {l_cont}"
            )));
        }
        let mag = self
            .radial_table
            .continuum(eps, l_cont, n_bound, l_bound)
            .unwrap_or(self.continuum_default_magnitude);
        let phase = self
            .continuum_phase
            .get(l_cont as usize)
            .copied()
            .unwrap_or(0.0);
        Ok(num_complex::Complex64::from_polar(mag, phase))
    }
}
