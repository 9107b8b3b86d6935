use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli word. Letter 0 (leftmost) acts on the most significant
/// bit of the computational-basis index, matching `σ_1 ⊗ σ_2 ⊗ … ⊗ σ_n`.
///
/// Stored in symplectic form: bit `q` of `x`/`z` marks an X/Z component on
/// the qubit whose basis bit is `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    x: u32,
    z: u32,
}

pub const MAX_QUBITS: usize = 15;

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS);
        PauliString { n: n as u8, x: 0, z: 0 }
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        let n = letters.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::invalid(format!("Pauli string length {n} outside [1, {MAX_QUBITS}]")));
        }
        let mut p = PauliString::identity(n);
        for (i, l) in letters.iter().enumerate() {
            let bit = 1u32 << (n - 1 - i);
            let (x, z) = l.bits();
            if x {
                p.x |= bit;
            }
            if z {
                p.z |= bit;
            }
        }
        Ok(p)
    }

    /// Base-4 enumeration with I=0, X=1, Y=2, Z=3 and the leftmost letter most
    /// significant.
    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS || index >= 1usize << (2 * n) {
            return Err(Error::invalid(format!("Pauli index {index} out of range for n={n}")));
        }
        let letters: Vec<Pauli> = (0..n)
            .map(|i| Pauli::ALL[(index >> (2 * (n - 1 - i))) & 3])
            .collect();
        Self::from_letters(&letters)
    }

    pub fn index(&self) -> usize {
        self.letters()
            .iter()
            .fold(0, |acc, l| acc * 4 + Pauli::ALL.iter().position(|p| p == l).unwrap())
    }

    pub fn num_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn letters(&self) -> Vec<Pauli> {
        let n = self.num_qubits();
        (0..n)
            .map(|i| {
                let bit = 1u32 << (n - 1 - i);
                Pauli::from_bits(self.x & bit != 0, self.z & bit != 0)
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn x_mask(&self) -> usize {
        self.x as usize
    }

    pub fn z_mask(&self) -> usize {
        self.z as usize
    }

    /// `i^{#Y}`: the operator is `phase · X^x Z^z`.
    pub fn phase(&self) -> Complex64 {
        match (self.x & self.z).count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Dense `⊗ σ_i`. Each column `l` has its single nonzero at row `l ^ x`.
    pub fn matrix(&self) -> CMatrix {
        let d = self.dim();
        let phase = self.phase();
        let mut m = CMatrix::zeros(d, d);
        for l in 0..d {
            m[(l ^ self.x_mask(), l)] = phase * sign(l & self.z_mask());
        }
        m
    }
}

#[inline]
pub(crate) fn sign(bits: usize) -> f64 {
    if bits.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::invalid(format!("invalid Pauli letter `{other}` in `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_letters(&letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
