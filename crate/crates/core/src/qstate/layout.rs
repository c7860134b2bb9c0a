use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Ordered named registers of qubits. Qubit 0 is the leftmost tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, usize)>", into = "Vec<(String, usize)>")]
pub struct RegisterLayout {
    registers: Vec<(String, usize)>,
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(registers: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let registers: Vec<(String, usize)> =
            registers.into_iter().map(|(n, c)| (n.into(), c)).collect();
        if registers.is_empty() {
            return Err(Error::LayoutMismatch("a layout needs at least one register".into()));
        }
        for (i, (name, count)) in registers.iter().enumerate() {
            if *count == 0 {
                return Err(Error::EmptyRegister(name.clone()));
            }
            if registers[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::NameCollision(name.clone()));
            }
        }
        Ok(Self { registers })
    }

    pub fn single(name: &str, qubits: usize) -> Result<Self> {
        Self::new([(name, qubits)])
    }

    pub fn registers(&self) -> &[(String, usize)] {
        &self.registers
    }

    pub fn names(&self) -> Vec<&str> {
        self.registers.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn total_qubits(&self) -> usize {
        self.registers.iter().map(|(_, c)| c).sum()
    }

    pub fn dim(&self) -> usize {
        1usize << self.total_qubits()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|(n, _)| n == name)
    }

    pub fn qubit_count(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| *c)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    /// Global qubit indices of one register.
    pub fn range(&self, name: &str) -> Result<Range<usize>> {
        let mut start = 0;
        for (n, c) in &self.registers {
            if n == name {
                return Ok(start..start + c);
            }
            start += c;
        }
        Err(Error::UnknownRegister(name.to_string()))
    }

    /// Qubits of the named registers, in layout order regardless of the order of `names`.
    pub fn qubits_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        for n in names {
            if !self.contains(n.as_ref()) {
                return Err(Error::UnknownRegister(n.as_ref().to_string()));
            }
        }
        let mut out = Vec::new();
        let mut start = 0;
        for (n, c) in &self.registers {
            if names.iter().any(|k| k.as_ref() == n) {
                out.extend(start..start + c);
            }
            start += c;
        }
        Ok(out)
    }

    /// Sub-layout of the named registers, in layout order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        for n in names {
            if !self.contains(n.as_ref()) {
                return Err(Error::UnknownRegister(n.as_ref().to_string()));
            }
        }
        let kept: Vec<(String, usize)> = self
            .registers
            .iter()
            .filter(|(n, _)| names.iter().any(|k| k.as_ref() == n))
            .cloned()
            .collect();
        Self::new(kept)
    }

    /// Names not in `names`, in layout order.
    pub fn complement_names<S: AsRef<str>>(&self, names: &[S]) -> Vec<String> {
        self.registers
            .iter()
            .filter(|(n, _)| !names.iter().any(|k| k.as_ref() == n))
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        Self::new(regs)
    }

    /// Same register sizes under new names.
    pub fn renamed<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        if names.len() != self.registers.len() {
            return Err(Error::LayoutMismatch("rename needs one name per register".into()));
        }
        Self::new(names.iter().zip(&self.registers).map(|(n, (_, c))| (n.as_ref().to_string(), *c)))
    }

    /// Checks that `cut` is a nonempty proper subset of the registers.
    pub fn check_cut<S: AsRef<str>>(&self, cut: &[S]) -> Result<()> {
        let qubits = self.qubits_of(cut)?;
        if qubits.is_empty() || qubits.len() == self.total_qubits() {
            return Err(Error::TrivialCut);
        }
        Ok(())
    }
}

impl TryFrom<Vec<(String, usize)>> for RegisterLayout {
    type Error = Error;
    fn try_from(v: Vec<(String, usize)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RegisterLayout> for Vec<(String, usize)> {
    fn from(l: RegisterLayout) -> Self {
        l.registers
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_follow_order() {
        let l = RegisterLayout::new([("A", 2), ("B", 1), ("E", 3)]).unwrap();
        assert_eq!(l.total_qubits(), 6);
        assert_eq!(l.range("E").unwrap(), 3..6);
        assert_eq!(l.qubits_of(&["E", "A"]).unwrap(), vec![0, 1, 3, 4, 5]);
        assert_eq!(l.complement_names(&["B"]), vec!["A".to_string(), "E".to_string()]);
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(matches!(RegisterLayout::new([("A", 1), ("A", 1)]), Err(Error::NameCollision(_))));
        assert!(matches!(RegisterLayout::new([("A", 0)]), Err(Error::EmptyRegister(_))));
    }

    #[test]
    fn cut_must_be_proper() {
        let l = RegisterLayout::new([("A", 1), ("B", 1)]).unwrap();
        assert!(l.check_cut(&["A"]).is_ok());
        assert!(matches!(l.check_cut(&["A", "B"]), Err(Error::TrivialCut)));
        assert!(matches!(l.check_cut::<&str>(&[]), Err(Error::TrivialCut)));
    }
}
