//! Irreducible tube-type factors and their finite products.
//!
//! Factors are written with their Cartan label and size parameter: `I2`,
//! `II4`, `III3`, `IV5`. Products join labels with `x`, `×` or `,`
//! (`I2xIV3`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One irreducible classical tube-type domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DomainFactor {
    /// Square `n x n` complex matrices.
    TypeI(usize),
    /// Antisymmetric `m x m` matrices, `m` even.
    TypeII(usize),
    /// Symmetric `n x n` matrices.
    TypeIII(usize),
    /// The Lie ball in `C^n`, `n >= 3`.
    TypeIV(usize),
}

impl DomainFactor {
    /// Checked constructor enforcing the size constraints of each type.
    pub fn validate(self) -> Result<Self> {
        match self {
            DomainFactor::TypeI(n) | DomainFactor::TypeIII(n) if n >= 1 => Ok(self),
            DomainFactor::TypeII(m) if m >= 2 && m % 2 == 0 => Ok(self),
            DomainFactor::TypeIV(n) if n >= 3 => Ok(self),
            other => Err(Error::InvalidDomain(format!(
                "{other}: size violates the constraints of its type"
            ))),
        }
    }

    pub fn rank(&self) -> usize {
        match *self {
            DomainFactor::TypeI(n) | DomainFactor::TypeIII(n) => n,
            DomainFactor::TypeII(m) => m / 2,
            DomainFactor::TypeIV(_) => 2,
        }
    }

    /// Complex dimension of the ambient space `Z`.
    pub fn dim(&self) -> usize {
        match *self {
            DomainFactor::TypeI(n) => n * n,
            DomainFactor::TypeII(m) => m * (m - 1) / 2,
            DomainFactor::TypeIII(n) => n * (n + 1) / 2,
            DomainFactor::TypeIV(n) => n,
        }
    }

    /// Storage shape `(rows, cols)` of an element. Type IV is a column vector.
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            DomainFactor::TypeI(n) | DomainFactor::TypeII(n) | DomainFactor::TypeIII(n) => (n, n),
            DomainFactor::TypeIV(n) => (n, 1),
        }
    }

    pub fn is_matrix_type(&self) -> bool {
        !matches!(self, DomainFactor::TypeIV(_))
    }
}

impl fmt::Display for DomainFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainFactor::TypeI(n) => write!(f, "I{n}"),
            DomainFactor::TypeII(n) => write!(f, "II{n}"),
            DomainFactor::TypeIII(n) => write!(f, "III{n}"),
            DomainFactor::TypeIV(n) => write!(f, "IV{n}"),
        }
    }
}

impl FromStr for DomainFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| Error::InvalidDomain(format!("missing size in {s:?}")))?;
        let (label, size) = s.split_at(split);
        let n: usize = size
            .parse()
            .map_err(|_| Error::InvalidDomain(format!("bad size in {s:?}")))?;
        let factor = match label.to_ascii_uppercase().as_str() {
            "I" => DomainFactor::TypeI(n),
            "II" => DomainFactor::TypeII(n),
            "III" => DomainFactor::TypeIII(n),
            "IV" => DomainFactor::TypeIV(n),
            _ => return Err(Error::InvalidDomain(format!("unknown type {label:?}"))),
        };
        factor.validate()
    }
}

impl TryFrom<String> for DomainFactor {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DomainFactor> for String {
    fn from(f: DomainFactor) -> String {
        f.to_string()
    }
}

/// Ordered, nonempty product of irreducible factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<DomainFactor>", into = "Vec<DomainFactor>")]
pub struct ProductDomain {
    factors: Vec<DomainFactor>,
}

impl ProductDomain {
    pub fn new(factors: Vec<DomainFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidDomain("empty product".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Self { factors })
    }

    pub fn single(factor: DomainFactor) -> Result<Self> {
        Self::new(vec![factor])
    }

    /// The unit circle, realized as the Shilov boundary of `I1`.
    pub fn circle() -> Self {
        Self { factors: vec![DomainFactor::TypeI(1)] }
    }

    pub fn factors(&self) -> &[DomainFactor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.factors.iter().map(DomainFactor::rank).collect()
    }

    pub fn total_rank(&self) -> usize {
        self.factors.iter().map(DomainFactor::rank).sum()
    }
}

impl fmt::Display for ProductDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", labels.join("x"))
    }
}

impl FromStr for ProductDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split(['x', 'X', '×', ',', '*'])
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }
}

impl TryFrom<Vec<DomainFactor>> for ProductDomain {
    type Error = Error;
    fn try_from(v: Vec<DomainFactor>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProductDomain> for Vec<DomainFactor> {
    fn from(d: ProductDomain) -> Self {
        d.factors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_and_dimensions() {
        assert_eq!(DomainFactor::TypeI(3).rank(), 3);
        assert_eq!(DomainFactor::TypeII(6).rank(), 3);
        assert_eq!(DomainFactor::TypeIII(4).rank(), 4);
        assert_eq!(DomainFactor::TypeIV(7).rank(), 2);
        assert_eq!(DomainFactor::TypeI(3).dim(), 9);
        assert_eq!(DomainFactor::TypeII(4).dim(), 6);
        assert_eq!(DomainFactor::TypeIII(3).dim(), 6);
        assert_eq!(DomainFactor::TypeIV(5).dim(), 5);
    }

    #[test]
    fn size_constraints() {
        assert!(DomainFactor::TypeII(3).validate().is_err());
        assert!(DomainFactor::TypeII(0).validate().is_err());
        assert!(DomainFactor::TypeIV(2).validate().is_err());
        assert!(DomainFactor::TypeI(0).validate().is_err());
        assert!(ProductDomain::new(vec![]).is_err());
    }

    #[test]
    fn parse_products() {
        let d: ProductDomain = "I2xIV3".parse().unwrap();
        assert_eq!(d.factors(), &[DomainFactor::TypeI(2), DomainFactor::TypeIV(3)]);
        assert_eq!(d.total_rank(), 4);
        let d: ProductDomain = "III2×II4".parse().unwrap();
        assert_eq!(d.ranks(), vec![2, 2]);
        assert_eq!(d.to_string(), "III2xII4");
        assert!("V3".parse::<ProductDomain>().is_err());
        assert!("II5".parse::<ProductDomain>().is_err());
    }

    #[test]
    fn json_form() {
        let d: ProductDomain = "I1xIV4".parse().unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"["I1","IV4"]"#);
        let back: ProductDomain = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<ProductDomain>("[]").is_err());
    }
}
