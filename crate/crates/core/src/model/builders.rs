//! Lattice model Hamiltonians as Pauli sums.

use serde::{Deserialize, Serialize};

use super::pauli::{ObservableSum, Pauli, PauliTerm};
use crate::error::{ItqdeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Site adjacency. `Edges` is taken verbatim and ignores the boundary flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Lattice {
    Chain { sites: usize },
    Rect { rows: usize, cols: usize },
    Edges { sites: usize, edges: Vec<(usize, usize)> },
}

impl Lattice {
    pub fn site_count(&self) -> usize {
        match self {
            Lattice::Chain { sites } | Lattice::Edges { sites, .. } => *sites,
            Lattice::Rect { rows, cols } => rows * cols,
        }
    }

    /// Unique undirected bonds `(i, j)` with `i < j`, in a deterministic order.
    ///
    /// A wrap bond is only added along a dimension longer than two sites; for
    /// two sites it would coincide with the existing bond.
    pub fn bonds(&self, boundary: Boundary) -> Result<Vec<(usize, usize)>> {
        let mut bonds = Vec::new();
        let push = |a: usize, b: usize, bonds: &mut Vec<(usize, usize)>| {
            let e = (a.min(b), a.max(b));
            if !bonds.contains(&e) {
                bonds.push(e);
            }
        };
        match self {
            Lattice::Chain { sites } => {
                let l = *sites;
                for i in 0..l.saturating_sub(1) {
                    push(i, i + 1, &mut bonds);
                }
                if boundary == Boundary::Periodic && l > 2 {
                    push(l - 1, 0, &mut bonds);
                }
            }
            Lattice::Rect { rows, cols } => {
                let (r, c) = (*rows, *cols);
                if r == 0 || c == 0 {
                    return Err(ItqdeError::InvalidModel(format!(
                        "rectangular lattice {r}x{c} has no sites"
                    )));
                }
                let idx = |i: usize, j: usize| i * c + j;
                for i in 0..r {
                    for j in 0..c {
                        if j + 1 < c {
                            push(idx(i, j), idx(i, j + 1), &mut bonds);
                        } else if boundary == Boundary::Periodic && c > 2 {
                            push(idx(i, j), idx(i, 0), &mut bonds);
                        }
                        if i + 1 < r {
                            push(idx(i, j), idx(i + 1, j), &mut bonds);
                        } else if boundary == Boundary::Periodic && r > 2 {
                            push(idx(i, j), idx(0, j), &mut bonds);
                        }
                    }
                }
            }
            Lattice::Edges { sites, edges } => {
                for &(a, b) in edges {
                    if a >= *sites || b >= *sites {
                        return Err(ItqdeError::InvalidModel(format!(
                            "edge ({a}, {b}) references a site outside 0..{sites}"
                        )));
                    }
                    if a == b {
                        return Err(ItqdeError::InvalidModel(format!("self-loop at site {a}")));
                    }
                    push(a, b, &mut bonds);
                }
            }
        }
        Ok(bonds)
    }
}

/// `-J Σ Z_l Z_{l+1} - h Σ X_l` on a chain of `l` sites.
pub fn build_tfim(j: f64, h: f64, l: usize, boundary: Boundary) -> Result<ObservableSum> {
    if l < 2 {
        return Err(ItqdeError::InvalidModel(format!(
            "transverse-field Ising chain needs at least 2 sites, got {l}"
        )));
    }
    let mut terms = Vec::new();
    for (a, b) in (Lattice::Chain { sites: l }).bonds(boundary)? {
        terms.push(PauliTerm::on_sites(-j, l, &[(a, Pauli::Z), (b, Pauli::Z)])?);
    }
    for site in 0..l {
        terms.push(PauliTerm::on_sites(-h, l, &[(site, Pauli::X)])?);
    }
    ObservableSum::new(l, terms)
}

/// `t Σ_<ij>σ (c†_iσ c_jσ + h.c.) + U Σ n_i↑ n_i↓ - μ Σ n_iσ` under Jordan–Wigner.
///
/// Mode `p` is qubit `p`; spin-up modes are `0..L`, spin-down `L..2L`.
/// Occupation is `|1>`, so `n_p = (I - Z_p)/2` and a hop between modes
/// `p < q` becomes `t/2 (X_p Z..Z X_q + Y_p Z..Z Y_q)`.
pub fn build_fermi_hubbard(
    t: f64,
    u: f64,
    mu: f64,
    lattice: &Lattice,
    boundary: Boundary,
) -> Result<ObservableSum> {
    let l = lattice.site_count();
    if l < 2 {
        return Err(ItqdeError::InvalidModel(format!(
            "Fermi-Hubbard lattice needs at least 2 sites, got {l}"
        )));
    }
    let n = 2 * l;
    let bonds = lattice.bonds(boundary)?;
    let mut terms = Vec::new();

    for spin in 0..2 {
        for &(a, b) in &bonds {
            let (p, q) = (a + spin * l, b + spin * l);
            for letter in [Pauli::X, Pauli::Y] {
                let mut sites = vec![(p, letter), (q, letter)];
                sites.extend((p + 1..q).map(|k| (k, Pauli::Z)));
                terms.push(PauliTerm::on_sites(0.5 * t, n, &sites)?);
            }
        }
    }

    // U n_up n_dn = U/4 (I - Z_up - Z_dn + Z_up Z_dn)
    // -mu (n_up + n_dn) = -mu (I - (Z_up + Z_dn)/2)
    for site in 0..l {
        let (up, dn) = (site, site + l);
        terms.push(PauliTerm::identity(0.25 * u - mu, n)?);
        for q in [up, dn] {
            terms.push(PauliTerm::on_sites(-0.25 * u + 0.5 * mu, n, &[(q, Pauli::Z)])?);
        }
        terms.push(PauliTerm::on_sites(0.25 * u, n, &[(up, Pauli::Z), (dn, Pauli::Z)])?);
    }
    ObservableSum::new(n, terms)
}

/// `H + λ I`.
pub fn shift_spectrum(obs: &ObservableSum, lambda: f64) -> Result<ObservableSum> {
    let n = obs.qubit_count();
    ObservableSum::new(
        n,
        obs.terms()
            .iter()
            .cloned()
            .chain(std::iter::once(PauliTerm::identity(lambda, n)?)),
    )
}
