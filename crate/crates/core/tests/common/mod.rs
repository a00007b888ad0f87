//! Reference computations that share no code with the library.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub fn zeros(d: usize) -> Mat {
    vec![vec![C::new(0.0, 0.0); d]; d]
}

pub fn identity(d: usize) -> Mat {
    let mut m = zeros(d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C::new(1.0, 0.0);
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut c = zeros(d);
    for i in 0..d {
        for k in 0..d {
            let aik = a[i][k];
            if aik == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn add(a: &Mat, b: &Mat, s: C) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + s * y).collect())
        .collect()
}

pub fn scale(a: &Mat, s: C) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn adjoint(a: &Mat) -> Mat {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn trace(a: &Mat) -> C {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

pub fn from_nalgebra(m: &nalgebra::DMatrix<C>) -> Mat {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// `e^{-iθA}` by Taylor series with scaling and squaring.
pub fn expm_i(a: &Mat, theta: f64) -> Mat {
    let d = a.len();
    let norm = a
        .iter()
        .map(|r| r.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * theta.abs();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let x = scale(a, C::new(0.0, -theta / 2f64.powi(s)));
    let mut term = identity(d);
    let mut sum = identity(d);
    for k in 1..=30 {
        term = scale(&matmul(&term, &x), C::new(1.0 / k as f64, 0.0));
        sum = add(&sum, &term, C::new(1.0, 0.0));
    }
    for _ in 0..s {
        sum = matmul(&sum, &sum);
    }
    sum
}

/// Cyclic Jacobi on a real symmetric matrix; ascending eigenvalues.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigenvalues of a Hermitian `H = A + iB` from the real embedding
/// `[[A, -B], [B, A]]`, whose spectrum is that of `H` twice over.
pub fn hermitian_eigenvalues(h: &Mat) -> Vec<f64> {
    let d = h.len();
    let mut r = vec![vec![0.0; 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            r[i][j] = h[i][j].re;
            r[i + d][j + d] = h[i][j].re;
            r[i][j + d] = -h[i][j].im;
            r[i + d][j] = h[i][j].im;
        }
    }
    jacobi_eigenvalues(r).into_iter().step_by(2).collect()
}

/// `t Σ (c†_iσ c_jσ + h.c.) + U Σ n_i↑ n_i↓ - μ Σ n_iσ` on the Fock space,
/// modes ordered `(0↑, 0↓, 1↑, 1↓, …)`, signs from the occupied modes in between.
pub fn fock_fermi_hubbard(t: f64, u: f64, mu: f64, sites: usize, bonds: &[(usize, usize)]) -> Mat {
    let modes = 2 * sites;
    let d = 1usize << modes;
    let mut h = zeros(d);
    let occ = |s: usize, p: usize| (s >> p) & 1 == 1;
    for s in 0..d {
        let mut diag = 0.0;
        for i in 0..sites {
            let (up, dn) = (occ(s, 2 * i), occ(s, 2 * i + 1));
            if up && dn {
                diag += u;
            }
            diag -= mu * (up as u8 + dn as u8) as f64;
        }
        h[s][s] += C::new(diag, 0.0);
        for &(i, j) in bonds {
            for spin in 0..2 {
                for (p, q) in [(2 * i + spin, 2 * j + spin), (2 * j + spin, 2 * i + spin)] {
                    // c†_p c_q |s>
                    if !occ(s, q) || (occ(s, p) && p != q) {
                        continue;
                    }
                    let after_c = s & !(1 << q);
                    let sign_c = (after_c & ((1 << q) - 1)).count_ones();
                    let out = after_c | (1 << p);
                    let sign_cd = (after_c & ((1 << p) - 1)).count_ones();
                    let sign = if (sign_c + sign_cd) % 2 == 0 { 1.0 } else { -1.0 };
                    h[out][s] += C::new(t * sign, 0.0);
                }
            }
        }
    }
    h
}

/// `Tr(O L^m[ρ]) / Tr(L^m[ρ])`, `L[ρ] = (UρU + U†ρU†)/2`.
pub fn superoperator_expectation(u: &Mat, rho0: &Mat, o: &Mat, m: usize) -> f64 {
    let ud = adjoint(u);
    let mut rho = rho0.clone();
    for _ in 0..m {
        let a = matmul(&matmul(u, &rho), u);
        let b = matmul(&matmul(&ud, &rho), &ud);
        rho = scale(&add(&a, &b, C::new(1.0, 0.0)), C::new(0.5, 0.0));
    }
    (trace(&matmul(o, &rho)) / trace(&rho)).re
}

/// `⟨H⟩` under `e^{-τ(H+λ)²}` from `ρ ∝ I`, given the spectrum.
pub fn gaussian_mixed_energy(energies: &[f64], tau: f64, lambda: f64) -> f64 {
    let w: Vec<f64> = energies.iter().map(|e| (-tau * (e + lambda).powi(2)).exp()).collect();
    energies.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / w.iter().sum::<f64>()
}

/// Single-linkage clusters of sorted values split at gaps wider than `gap`.
pub fn bands(sorted: &[f64], gap: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for &e in sorted {
        match out.last_mut() {
            Some(b) if e - b[b.len() - 1] <= gap => b.push(e),
            _ => out.push(vec![e]),
        }
    }
    out
}

fn single(letter: char) -> [[C; 2]; 2] {
    let (o, l, i) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
    match letter {
        'I' => [[l, o], [o, l]],
        'X' => [[o, l], [l, o]],
        'Y' => [[o, -i], [i, o]],
        'Z' => [[l, o], [o, -l]],
        other => panic!("bad Pauli letter {other}"),
    }
}

/// Kronecker product of the letters, leftmost letter on the most significant bit.
pub fn pauli_matrix(coefficient: f64, letters: &str) -> Mat {
    let mut m = vec![vec![C::new(coefficient, 0.0)]];
    for ch in letters.chars() {
        let p = single(ch);
        let d = m.len();
        let mut next = zeros(2 * d);
        for (r, row) in m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        next[2 * r + a][2 * c + b] = v * p[a][b];
                    }
                }
            }
        }
        m = next;
    }
    m
}

pub fn pauli_sum_matrix(terms: &[(f64, String)]) -> Mat {
    let d = 1usize << terms[0].1.len();
    terms
        .iter()
        .fold(zeros(d), |acc, (c, l)| add(&acc, &pauli_matrix(*c, l), C::new(1.0, 0.0)))
}

/// `-J Σ Z_l Z_{l+1} - h Σ X_l` on an open chain, assembled from bit operations.
pub fn tfim_matrix(j: f64, h: f64, sites: usize) -> Mat {
    let d = 1usize << sites;
    let mut m = zeros(d);
    let bit = |s: usize, l: usize| (s >> l) & 1;
    for s in 0..d {
        let zz: f64 = (0..sites - 1)
            .map(|l| if bit(s, l) == bit(s, l + 1) { 1.0 } else { -1.0 })
            .sum();
        m[s][s] += C::new(-j * zz, 0.0);
        for l in 0..sites {
            m[s ^ (1 << l)][s] += C::new(-h, 0.0);
        }
    }
    m
}

pub fn pure_density(psi: &[C]) -> Mat {
    psi.iter()
        .map(|a| psi.iter().map(|b| a * b.conj()).collect())
        .collect()
}
