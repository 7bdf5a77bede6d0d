use serde::{Deserialize, Serialize};

use super::RPair;
use crate::error::{Error, Result};

/// An element of S₃ acting on index labels, s: i ↦ perm[i−1] (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylElement {
    pub perm: [usize; 3],
    pub parity: i8,
}

fn sign(perm: &[usize; 3]) -> i8 {
    let mut inv = 0;
    for i in 0..3 {
        for j in i + 1..3 {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

impl WeylElement {
    pub fn from_perm(perm: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &p in &perm {
            if !(1..=3).contains(&p) || seen[p - 1] {
                return Err(Error::Domain(format!("{perm:?} is not a permutation of (1,2,3)")));
            }
            seen[p - 1] = true;
        }
        Ok(WeylElement {
            perm,
            parity: sign(&perm),
        })
    }

    pub fn identity() -> Self {
        WeylElement {
            perm: [1, 2, 3],
            parity: 1,
        }
    }

    pub fn sigma() -> Self {
        WeylElement {
            perm: [3, 2, 1],
            parity: -1,
        }
    }

    pub fn tau() -> Self {
        WeylElement {
            perm: [2, 3, 1],
            parity: 1,
        }
    }

    /// (self ∘ other)(i) = self(other(i)).
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        let perm = other.perm.map(|i| self.perm[i - 1]);
        WeylElement {
            perm,
            parity: self.parity * other.parity,
        }
    }

    pub fn all() -> [WeylElement; 6] {
        let (s, t) = (Self::sigma(), Self::tau());
        [Self::identity(), s, t, t.compose(&t), s.compose(&t), t.compose(&s)]
    }

    /// 0 for even, 1 for odd permutations.
    pub fn p(&self) -> u32 {
        if self.parity > 0 {
            0
        } else {
            1
        }
    }

    pub fn name(&self) -> &'static str {
        let (s, t) = (Self::sigma(), Self::tau());
        match *self {
            x if x == Self::identity() => "id",
            x if x == s => "sigma",
            x if x == t => "tau",
            x if x == t.compose(&t) => "tau2",
            x if x == s.compose(&t) => "sigma_tau",
            _ => "tau_sigma",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::all().into_iter().find(|w| w.name() == s).ok_or_else(|| {
            Error::Parse(format!(
                "unknown Weyl element '{s}' (id, sigma, tau, tau2, sigma_tau, tau_sigma)"
            ))
        })
    }

    /// Dot action on (r¹, r²), defined so that βᵢ(s·r) = β_{s(i)}(r).
    pub fn act(&self, r: &RPair) -> RPair {
        let b = super::indices_from_r(r).beta;
        let b1 = b[self.perm[0] - 1];
        let b3 = b[self.perm[2] - 1];
        RPair { r1: 2.0 - b3, r2: b1 }
    }
}

pub fn dot_action(w: &WeylElement, r: &RPair) -> RPair {
    w.act(r)
}
