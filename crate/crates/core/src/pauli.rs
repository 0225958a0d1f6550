use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Largest register size supported by the packed representation.
pub const MAX_QUBITS: usize = 64;

/// Phaseless n-qubit Pauli operator packed into two words.
///
/// Bit `i` of `x` (resp. `z`) is set when qubit `i` carries an X (resp. Z)
/// component, so Y is both bits set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOp {
    n: u8,
    x: u64,
    z: u64,
}

#[inline]
fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        PauliOp { n: n as u8, x: 0, z: 0 }
    }

    pub fn from_bits(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS, "at most {MAX_QUBITS} qubits supported");
        let m = mask(n);
        assert!(x & !m == 0 && z & !m == 0, "bits set outside the register");
        PauliOp { n: n as u8, x, z }
    }

    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        Self::from_bits(n, support_mask(qubits), 0)
    }

    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        Self::from_bits(n, 0, support_mask(qubits))
    }

    pub fn y_on(n: usize, qubits: &[usize]) -> Self {
        let m = support_mask(qubits);
        Self::from_bits(n, m, m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn x_bits(&self) -> u64 {
        self.x
    }

    #[inline]
    pub fn z_bits(&self) -> u64 {
        self.z
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp, Error> {
        self.check_len(other)?;
        Ok(self.mul_unchecked(other))
    }

    #[inline]
    pub fn mul_unchecked(&self, other: &PauliOp) -> PauliOp {
        PauliOp { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z }
    }

    /// Returns true when the two operators anticommute.
    pub fn anticommutes(&self, other: &PauliOp) -> Result<bool, Error> {
        self.check_len(other)?;
        Ok(self.anticommutes_unchecked(other))
    }

    #[inline]
    pub fn anticommutes_unchecked(&self, other: &PauliOp) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) & 1 == 1
    }

    /// Symplectic parity bit: 0 when the operators commute, 1 otherwise.
    pub fn commutes(&self, other: &PauliOp) -> Result<u8, Error> {
        Ok(self.anticommutes(other)? as u8)
    }

    #[inline]
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn support(&self) -> Vec<usize> {
        bits_of(self.x | self.z)
    }

    #[inline]
    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn restrict(&self, set: &[usize]) -> Result<PauliOp, Error> {
        let mut m = 0u64;
        for &q in set {
            if q >= self.n() {
                return Err(Error::QubitOutOfRange { qubit: q, n: self.n() });
            }
            m |= 1 << q;
        }
        Ok(PauliOp { n: self.n, x: self.x & m, z: self.z & m })
    }

    pub fn restrict_mask(&self, m: u64) -> PauliOp {
        PauliOp { n: self.n, x: self.x & m, z: self.z & m }
    }

    /// X part only (drops Z components).
    pub fn x_part(&self) -> PauliOp {
        PauliOp { n: self.n, x: self.x, z: 0 }
    }

    pub fn z_part(&self) -> PauliOp {
        PauliOp { n: self.n, x: 0, z: self.z }
    }

    pub fn get(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    fn check_len(&self, other: &PauliOp) -> Result<(), Error> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n(), got: other.n() });
        }
        Ok(())
    }
}

pub fn support_mask(qubits: &[usize]) -> u64 {
    qubits.iter().fold(0u64, |m, &q| {
        assert!(q < MAX_QUBITS, "qubit index {q} out of range");
        m | (1u64 << q)
    })
}

pub fn bits_of(mut m: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n() {
            write!(f, "{}", self.get(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOp({self})")
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = s.chars().count();
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, c) in s.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x |= 1 << q,
                'Z' => z |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                other => return Err(Error::Parse(format!("bad Pauli letter {other:?}"))),
            }
        }
        Ok(PauliOp { n: n as u8, x, z })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn letters() {
        let x0 = PauliOp::x_on(3, &[0]);
        let z0 = PauliOp::z_on(3, &[0]);
        assert!(x0.multiply(&x0).unwrap().is_identity());
        assert_eq!(x0.multiply(&z0).unwrap().to_string(), "YII");
        assert_eq!(x0.commutes(&z0).unwrap(), 1);
        assert_eq!(x0.commutes(&PauliOp::z_on(3, &[1])).unwrap(), 0);
        assert_eq!(PauliOp::y_on(5, &[3]).weight(), 1);
        assert_eq!(PauliOp::identity(4).weight(), 0);
    }

    #[test]
    fn steane_rows() {
        let g1: PauliOp = "XIIXIXX".parse().unwrap();
        let g2: PauliOp = "IXIXXIX".parse().unwrap();
        assert_eq!(g1.multiply(&g2).unwrap().to_string(), "XXIIXXI");
        let all_x: PauliOp = "XXXXXXX".parse().unwrap();
        let gz1: PauliOp = "ZIIZIZZ".parse().unwrap();
        assert_eq!(all_x.commutes(&gz1).unwrap(), 0);
    }

    #[test]
    fn restrict_example() {
        let p = PauliOp::x_on(10, &[1, 2, 3]);
        let r = p.restrict(&[2, 3, 9]).unwrap();
        assert_eq!(r, PauliOp::x_on(10, &[2, 3]));
        assert!(p.restrict(&[10]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let a = PauliOp::identity(3);
        let b = PauliOp::identity(4);
        assert!(a.multiply(&b).is_err());
        assert!(a.commutes(&b).is_err());
    }

    #[test]
    fn text_round_trip() {
        let p: PauliOp = "IXYZ".parse().unwrap();
        assert_eq!(p.to_string(), "IXYZ");
        assert!("IXA".parse::<PauliOp>().is_err());
    }

    fn pauli(n: usize) -> impl Strategy<Value = PauliOp> {
        let m = mask(n);
        (any::<u64>(), any::<u64>()).prop_map(move |(x, z)| PauliOp::from_bits(n, x & m, z & m))
    }

    proptest! {
        #[test]
        fn group_laws(a in pauli(49), b in pauli(49)) {
            prop_assert_eq!(a.multiply(&b).unwrap(), b.multiply(&a).unwrap());
            prop_assert!(a.multiply(&a).unwrap().is_identity());
        }

        #[test]
        fn symplectic_bilinear(a in pauli(61), b in pauli(61), c in pauli(61)) {
            let bc = b.multiply(&c).unwrap();
            prop_assert_eq!(a.commutes(&bc).unwrap(), a.commutes(&b).unwrap() ^ a.commutes(&c).unwrap());
        }

        #[test]
        fn restrict_splits_weight(a in pauli(20), s in any::<u32>()) {
            let set: Vec<usize> = (0..20).filter(|q| s >> q & 1 == 1).collect();
            let rest: Vec<usize> = (0..20).filter(|q| s >> q & 1 == 0).collect();
            let w = a.restrict(&set).unwrap().weight() + a.restrict(&rest).unwrap().weight();
            prop_assert_eq!(w, a.weight());
        }

        #[test]
        fn display_parse(a in pauli(33)) {
            prop_assert_eq!(a.to_string().parse::<PauliOp>().unwrap(), a);
        }
    }
}
