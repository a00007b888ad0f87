//! Weighted Pauli strings and their sums.
//!
//! Qubit `q` of an `n`-qubit string acts on bit `n - 1 - q` of a computational
//! basis index, so the leftmost letter is the most significant tensor factor
//! and `to_dense` of `"XZ"` is `X ⊗ Z`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ItqdeError, Result};

/// Coefficients below this magnitude are dropped during canonicalization.
pub const COEFFICIENT_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Bit masks describing how a Pauli string acts on computational basis states:
/// `P|x> = i^y_count (-1)^popcount(x & sign) |x ^ flip>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub flip: usize,
    pub sign: usize,
    pub y_count: u32,
}

impl PauliMasks {
    /// Phase picked up by basis state `x`.
    #[inline]
    pub fn phase(&self, x: usize) -> Complex64 {
        let quarter = (self.y_count + 2 * ((x & self.sign).count_ones() & 1)) % 4;
        match quarter {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// A real coefficient times a tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    letters: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, letters: Vec<Pauli>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(ItqdeError::InvalidModel(format!(
                "non-finite Pauli coefficient {coefficient}"
            )));
        }
        if letters.is_empty() {
            return Err(ItqdeError::InvalidModel("empty Pauli string".into()));
        }
        Ok(Self {
            coefficient,
            letters,
        })
    }

    /// Parses a letter string such as `"ZZI"`.
    pub fn parse(coefficient: f64, letters: &str) -> Result<Self> {
        let parsed = letters
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| {
                    ItqdeError::InvalidModel(format!("unknown Pauli letter {c:?} in {letters:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coefficient, parsed)
    }

    /// `coefficient` times the identity on `n` qubits.
    pub fn identity(coefficient: f64, n: usize) -> Result<Self> {
        Self::new(coefficient, vec![Pauli::I; n])
    }

    /// `coefficient` times the given letters placed on `sites`, identity elsewhere.
    pub fn on_sites(coefficient: f64, n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n];
        for &(q, p) in sites {
            if q >= n {
                return Err(ItqdeError::InvalidModel(format!(
                    "site {q} out of range for {n} qubits"
                )));
            }
            letters[q] = p;
        }
        Self::new(coefficient, letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn qubit_count(&self) -> usize {
        self.letters.len()
    }

    pub fn letter_string(&self) -> String {
        self.letters.iter().map(|p| p.as_char()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn masks(&self) -> PauliMasks {
        let n = self.letters.len();
        let mut masks = PauliMasks {
            flip: 0,
            sign: 0,
            y_count: 0,
        };
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => masks.flip |= bit,
                Pauli::Z => masks.sign |= bit,
                Pauli::Y => {
                    masks.flip |= bit;
                    masks.sign |= bit;
                    masks.y_count += 1;
                }
            }
        }
        masks
    }

    /// Accumulates `scale * coefficient * P |ket>` into `out`.
    pub fn apply_into(&self, scale: Complex64, ket: &[Complex64], out: &mut [Complex64]) {
        let masks = self.masks();
        let c = scale * self.coefficient;
        for (x, &amp) in ket.iter().enumerate() {
            out[x ^ masks.flip] += c * masks.phase(x) * amp;
        }
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.coefficient, self.letter_string())
    }
}

/// One line of the JSON-lines export format.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermRecord {
    coeff: f64,
    letters: String,
}

/// A canonical (merged) sum of Pauli terms on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSum {
    qubit_count: usize,
    terms: Vec<PauliTerm>,
}

impl ObservableSum {
    /// Builds a canonical sum: duplicate letter strings are merged in order of
    /// first appearance and near-zero coefficients are dropped.
    pub fn new(qubit_count: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        if qubit_count == 0 {
            return Err(ItqdeError::InvalidModel("qubit count must be at least 1".into()));
        }
        let mut index: HashMap<Vec<Pauli>, usize> = HashMap::new();
        let mut merged: Vec<PauliTerm> = Vec::new();
        for term in terms {
            if term.qubit_count() != qubit_count {
                return Err(ItqdeError::InvalidModel(format!(
                    "term {} acts on {} qubits, expected {}",
                    term,
                    term.qubit_count(),
                    qubit_count
                )));
            }
            match index.get(&term.letters) {
                Some(&k) => merged[k].coefficient += term.coefficient,
                None => {
                    index.insert(term.letters.clone(), merged.len());
                    merged.push(term);
                }
            }
        }
        merged.retain(|t| t.coefficient.abs() >= COEFFICIENT_CUTOFF);
        Ok(Self {
            qubit_count,
            terms: merged,
        })
    }

    pub fn zero(qubit_count: usize) -> Result<Self> {
        Self::new(qubit_count, std::iter::empty())
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dimension(&self) -> usize {
        1usize << self.qubit_count
    }

    /// Sum of two observables on the same register.
    pub fn plus(&self, other: &ObservableSum) -> Result<Self> {
        if other.qubit_count != self.qubit_count {
            return Err(ItqdeError::Validation(format!(
                "cannot add observables on {} and {} qubits",
                self.qubit_count, other.qubit_count
            )));
        }
        Self::new(
            self.qubit_count,
            self.terms.iter().chain(other.terms.iter()).cloned(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.qubit_count,
            self.terms.iter().map(|t| PauliTerm {
                coefficient: t.coefficient * factor,
                letters: t.letters.clone(),
            }),
        )
    }

    /// Sum of absolute coefficients, an upper bound on the operator norm.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// `O|ket>` computed term by term.
    pub fn apply(&self, ket: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(ket.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); ket.len()];
        for term in &self.terms {
            term.apply_into(Complex64::new(1.0, 0.0), ket, &mut out);
        }
        Ok(out)
    }

    /// `<bra|O|ket>` without forming the matrix.
    pub fn matrix_element(&self, bra: &[Complex64], ket: &[Complex64]) -> Result<Complex64> {
        self.check_len(bra.len())?;
        self.check_len(ket.len())?;
        let mut total = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let masks = term.masks();
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &amp) in ket.iter().enumerate() {
                acc += bra[x ^ masks.flip].conj() * masks.phase(x) * amp;
            }
            total += acc * term.coefficient;
        }
        Ok(total)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if self.qubit_count >= usize::BITS as usize || len != self.dimension() {
            return Err(ItqdeError::Validation(format!(
                "state of length {len} does not match a {}-qubit observable",
                self.qubit_count
            )));
        }
        Ok(())
    }

    /// One `{"coeff": .., "letters": ".."}` object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            let rec = TermRecord {
                coeff: t.coefficient,
                letters: t.letter_string(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("term record serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses the JSON-lines export. Blank lines are ignored; an empty input
    /// needs `qubit_count` to know the register size.
    pub fn from_jsonl(text: &str, qubit_count: Option<usize>) -> Result<Self> {
        let mut terms = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let rec: TermRecord = serde_json::from_str(line)?;
            terms.push(PauliTerm::parse(rec.coeff, &rec.letters)?);
        }
        let n = match (qubit_count, terms.first()) {
            (Some(n), _) => n,
            (None, Some(t)) => t.qubit_count(),
            (None, None) => {
                return Err(ItqdeError::InvalidModel(
                    "cannot infer qubit count from an empty term list".into(),
                ))
            }
        };
        Self::new(n, terms)
    }
}

impl FromStr for PauliTerm {
    type Err = ItqdeError;

    /// Accepts `"1.5*XZ"` or a bare letter string (coefficient 1).
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('*') {
            Some((c, letters)) => {
                let coeff: f64 = c.trim().parse().map_err(|_| {
                    ItqdeError::InvalidModel(format!("bad coefficient in Pauli term {s:?}"))
                })?;
                PauliTerm::parse(coeff, letters.trim())
            }
            None => PauliTerm::parse(1.0, s.trim()),
        }
    }
}
