//! Pauli strings, real-weighted Pauli sums and the line-oriented text format
//! used for Hamiltonians and circuit descriptions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QadError, Result};
use crate::scalar::Real;

/// Largest register a [`PauliString`] can describe (bit masks are `u64`).
pub const MAX_STRING_QUBITS: usize = 64;

/// Coefficients below this magnitude are dropped when a sum is canonicalised.
pub const MERGE_DROP_TOLERANCE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
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

/// Tensor product of single-qubit Paulis; letter `i` acts on qubit `i`, which
/// is bit `i` of a computational-basis index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() || letters.len() > MAX_STRING_QUBITS {
            return Err(QadError::InvalidArgument(format!(
                "Pauli string length {} outside 1..={MAX_STRING_QUBITS}",
                letters.len()
            )));
        }
        Ok(Self { letters })
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        Self::new(vec![Pauli::I; num_qubits])
    }

    /// String with `letter` on each listed qubit and identity elsewhere.
    pub fn on_qubits(num_qubits: usize, qubits: &[usize], letter: Pauli) -> Result<Self> {
        let mut letters = vec![Pauli::I; num_qubits];
        for &q in qubits {
            if q >= num_qubits {
                return Err(QadError::InvalidArgument(format!(
                    "qubit {q} out of range for {num_qubits} qubits"
                )));
            }
            letters[q] = letter;
        }
        Self::new(letters)
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Qubits carrying X or Y (the bit-flip part).
    pub fn x_mask(&self) -> u64 {
        self.mask(|p| matches!(p, Pauli::X | Pauli::Y))
    }

    /// Qubits carrying Z or Y (the phase part).
    pub fn z_mask(&self) -> u64 {
        self.mask(|p| matches!(p, Pauli::Z | Pauli::Y))
    }

    pub fn y_count(&self) -> usize {
        self.letters.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// True if the string is a product of I and Z only.
    pub fn is_diagonal(&self) -> bool {
        self.x_mask() == 0
    }

    fn mask(&self, pred: impl Fn(Pauli) -> bool) -> u64 {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| pred(p))
            .fold(0u64, |m, (i, _)| m | (1u64 << i))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = QadError;

    fn from_str(s: &str) -> Result<Self> {
        parse_letters(s, 0)
    }
}

impl TryFrom<String> for PauliString {
    type Error = QadError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.to_string()
    }
}

fn parse_letters(s: &str, line: usize) -> Result<PauliString> {
    let letters = s
        .chars()
        .map(|c| Pauli::from_char(c).ok_or(QadError::BadPauliLetter { line, letter: c }))
        .collect::<Result<Vec<_>>>()?;
    PauliString::new(letters)
}

/// Real linear combination of Pauli strings, i.e. a Hermitian operator.
///
/// Terms are kept in canonical order (lexicographic by letters, `I < X < Y <
/// Z`) and duplicate strings are merged on construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PauliSum<T> {
    num_qubits: usize,
    terms: Vec<(T, PauliString)>,
}

impl<T: Real> PauliSum<T> {
    pub fn new(num_qubits: usize, terms: impl IntoIterator<Item = (T, PauliString)>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_STRING_QUBITS {
            return Err(QadError::QubitRange(num_qubits));
        }
        let mut merged: BTreeMap<PauliString, T> = BTreeMap::new();
        for (c, p) in terms {
            if !c.is_finite() {
                return Err(QadError::NonFiniteCoefficient(c.as_f64()));
            }
            if p.num_qubits() != num_qubits {
                return Err(QadError::DimensionMismatch {
                    expected: num_qubits,
                    found: p.num_qubits(),
                });
            }
            *merged.entry(p).or_insert_with(T::zero) += c;
        }
        let drop = T::lit(MERGE_DROP_TOLERANCE);
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() >= drop)
            .map(|(p, c)| (c, p))
            .collect();
        Ok(Self { num_qubits, terms })
    }

    pub fn empty(num_qubits: usize) -> Result<Self> {
        Self::new(num_qubits, std::iter::empty())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(T, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `<b|H|b>` for the computational basis state with index `b`.
    pub fn diagonal_entry(&self, basis_index: usize) -> T {
        let b = basis_index as u64;
        self.terms
            .iter()
            .filter(|(_, p)| p.is_diagonal())
            .map(|(c, p)| {
                if (b & p.z_mask()).count_ones().is_multiple_of(2) {
                    *c
                } else {
                    -*c
                }
            })
            .sum()
    }

    /// Lowest-energy computational basis state and its energy. Ties resolve to
    /// the smallest index.
    pub fn lowest_basis_state(&self) -> (usize, T) {
        (0..1usize << self.num_qubits)
            .map(|b| (b, self.diagonal_entry(b)))
            .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best })
    }
}

/// Parses the one-term-per-line text format.
///
/// Each non-blank line is `<coefficient> <letters>`. Lines starting with `#`
/// are comments, except that `# qubits: N` fixes the register size (and is
/// the only way to describe a sum with no terms).
pub fn parse_pauli_sum<T: Real>(text: &str) -> Result<PauliSum<T>> {
    let mut declared: Option<(usize, usize)> = None;
    let mut width: Option<usize> = None;
    let mut terms = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = parse_qubit_header(comment) {
                let n = n.map_err(|_| QadError::MalformedLine {
                    line,
                    text: trimmed.to_string(),
                })?;
                declared = Some((n, line));
            }
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(coef), Some(letters), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(QadError::MalformedLine {
                line,
                text: trimmed.to_string(),
            });
        };
        let c: f64 = coef.parse().map_err(|_| QadError::BadCoefficient {
            line,
            text: coef.to_string(),
        })?;
        if !c.is_finite() {
            return Err(QadError::BadCoefficient {
                line,
                text: coef.to_string(),
            });
        }
        let p = parse_letters(letters, line)?;
        match width {
            None => width = Some(p.num_qubits()),
            Some(w) if w != p.num_qubits() => {
                return Err(QadError::InconsistentLength {
                    line,
                    expected: w,
                    found: p.num_qubits(),
                })
            }
            _ => {}
        }
        terms.push((T::lit(c), p));
    }

    let num_qubits = match (declared, width) {
        (Some((d, line)), Some(w)) if d != w => {
            return Err(QadError::HeaderMismatch {
                line,
                declared: d,
                found: w,
            })
        }
        (_, Some(w)) => w,
        (Some((d, _)), None) => d,
        (None, None) => return Err(QadError::EmptyInput),
    };
    PauliSum::new(num_qubits, terms)
}

/// `Some(Ok(n))` for a well-formed `qubits: n` header, `Some(Err)` when the
/// key is present but the value is bad, `None` for any other comment.
pub(crate) fn parse_qubit_header(comment: &str) -> Option<std::result::Result<usize, ()>> {
    let rest = comment.trim().strip_prefix("qubits:")?;
    Some(rest.trim().parse::<usize>().map_err(|_| ()))
}

/// Inverse of [`parse_pauli_sum`]: a `# qubits: N` header followed by one
/// term per line in canonical order.
pub fn format_pauli_sum<T: Real>(h: &PauliSum<T>) -> String {
    let mut out = format!("# qubits: {}\n", h.num_qubits());
    for (c, p) in h.terms() {
        out.push_str(&format!("{c} {p}\n"));
    }
    out
}

/// Periodic Heisenberg ring with longitudinal fields:
/// `sum_i J (X_i X_{i+1} + Y_i Y_{i+1} + Z_i Z_{i+1}) + sum_i omega_i Z_i`,
/// with site `N` wrapping to site `0`.
pub fn spin_ring_hamiltonian<T: Real>(num_qubits: usize, coupling: T, omega: &[T]) -> Result<PauliSum<T>> {
    if num_qubits < 2 {
        return Err(QadError::InvalidArgument(format!(
            "spin ring needs at least 2 sites, got {num_qubits}"
        )));
    }
    if omega.len() != num_qubits {
        return Err(QadError::DimensionMismatch {
            expected: num_qubits,
            found: omega.len(),
        });
    }
    let mut terms = Vec::with_capacity(4 * num_qubits);
    for i in 0..num_qubits {
        let j = (i + 1) % num_qubits;
        for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push((coupling, PauliString::on_qubits(num_qubits, &[i, j], letter)?));
        }
    }
    for (i, &w) in omega.iter().enumerate() {
        if w != T::zero() {
            terms.push((w, PauliString::on_qubits(num_qubits, &[i], Pauli::Z)?));
        }
    }
    PauliSum::new(num_qubits, terms)
}

/// Longitudinal fields for [`spin_ring_hamiltonian`], uniform in `(-1, 1)`.
pub fn spin_ring_fields<T: Real>(num_qubits: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_qubits).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect()
}

/// Uniformly random non-identity Pauli string.
pub fn random_pauli_string<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> PauliString {
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    loop {
        let letters: Vec<Pauli> = (0..num_qubits).map(|_| LETTERS[rng.random_range(0..4)]).collect();
        if letters.iter().any(|&l| l != Pauli::I) {
            return PauliString { letters };
        }
    }
}

/// Random Hamiltonian with up to `terms` distinct strings and coefficients
/// uniform in `(-1, 1)`.
pub fn random_pauli_sum<T: Real, R: Rng + ?Sized>(num_qubits: usize, terms: usize, rng: &mut R) -> PauliSum<T> {
    let list: Vec<(T, PauliString)> = (0..terms)
        .map(|_| (T::lit(rng.random_range(-1.0..1.0)), random_pauli_string(num_qubits, rng)))
        .collect();
    PauliSum::new(num_qubits, list).expect("finite coefficients on matching qubit counts")
}
