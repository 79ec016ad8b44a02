use std::cmp::Ordering;
use std::fmt;

/// The partial derivative f_ij = d^(i+j) f / dx^i dy^j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DerivSymbol {
    pub i: u8,
    pub j: u8,
}

/// Number of symbols with 1 <= i+j <= 4.
pub const JET_LEN: usize = 14;

impl DerivSymbol {
    pub const fn new(i: u8, j: u8) -> Self {
        DerivSymbol { i, j }
    }

    pub fn order(self) -> u8 {
        self.i + self.j
    }

    /// Position in the jet layout: grouped by total order, x-order descending
    /// inside a group (f10, f01, f20, f11, f02, f30, ...).
    pub fn index(self) -> usize {
        let m = self.order() as usize;
        debug_assert!(m >= 1);
        (m - 1) * (m + 2) / 2 + (m - self.i as usize)
    }

    pub fn from_index(idx: usize) -> Self {
        let mut m = 1usize;
        while (m) * (m + 3) / 2 <= idx {
            m += 1;
        }
        let off = idx - (m - 1) * (m + 2) / 2;
        DerivSymbol::new((m - off) as u8, off as u8)
    }

    /// All symbols with 1 <= i+j <= max_order in jet layout order.
    pub fn all(max_order: u8) -> Vec<DerivSymbol> {
        let mut v = Vec::new();
        for m in 1..=max_order {
            for j in 0..=m {
                v.push(DerivSymbol::new(m - j, j));
            }
        }
        v
    }

    /// Two-digit label such as "20".
    pub fn label(self) -> String {
        format!("{}{}", self.i, self.j)
    }
}

impl Ord for DerivSymbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then(other.i.cmp(&self.i))
    }
}

impl PartialOrd for DerivSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DerivSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}{}", self.i, self.j)
    }
}
