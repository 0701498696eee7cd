//! Link-counters: non-negative integer vectors indexed by dominance link.
//!
//! The chart engine works on raw `&[u32]` slices through [`raw`]; the
//! [`LinkCounter`] value type wraps the same arithmetic with a grammar
//! fingerprint so counters of different grammars never mix.

use std::fmt;

use thiserror::Error;

use crate::grammar::{Grammar, LinkId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CounterError {
    #[error("counters belong to different grammars")]
    GrammarMismatch,
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
}

/// Componentwise arithmetic on dense counters of equal length.
pub mod raw {
    pub fn add_into(out: &mut [u32], a: &[u32], b: &[u32]) {
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x + y;
        }
    }

    /// Truncated subtraction, componentwise.
    pub fn monus_into(out: &mut [u32], a: &[u32], b: &[u32]) {
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x.saturating_sub(*y);
        }
    }

    pub fn norm(a: &[u32]) -> u64 {
        a.iter().map(|&x| u64::from(x)).sum()
    }

    pub fn leq(a: &[u32], b: &[u32]) -> bool {
        a.iter().zip(b).all(|(x, y)| x <= y)
    }

    pub fn is_zero(a: &[u32]) -> bool {
        a.iter().all(|&x| x == 0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinkCounter {
    fingerprint: u64,
    counts: Box<[u32]>,
}

impl LinkCounter {
    pub fn zero(grammar: &Grammar) -> Self {
        LinkCounter {
            fingerprint: grammar.fingerprint(),
            counts: vec![0; grammar.links().len()].into_boxed_slice(),
        }
    }

    pub fn from_multiset(grammar: &Grammar, reqs: &[LinkId]) -> Result<Self, CounterError> {
        let mut c = Self::zero(grammar);
        for &id in reqs {
            let slot = c
                .counts
                .get_mut(id.index())
                .ok_or(CounterError::UnknownLink(id))?;
            *slot += 1;
        }
        Ok(c)
    }

    /// Build from explicit `(link, count)` pairs; unspecified links are 0.
    pub fn from_counts(
        grammar: &Grammar,
        counts: impl IntoIterator<Item = (LinkId, u32)>,
    ) -> Result<Self, CounterError> {
        let mut c = Self::zero(grammar);
        for (id, n) in counts {
            *c.counts
                .get_mut(id.index())
                .ok_or(CounterError::UnknownLink(id))? = n;
        }
        Ok(c)
    }

    pub(crate) fn from_raw(fingerprint: u64, counts: &[u32]) -> Self {
        LinkCounter {
            fingerprint,
            counts: counts.into(),
        }
    }

    pub fn get(&self, id: LinkId) -> u32 {
        self.counts.get(id.index()).copied().unwrap_or(0)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.counts
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn check(&self, other: &Self) -> Result<(), CounterError> {
        if self.fingerprint != other.fingerprint || self.counts.len() != other.counts.len() {
            return Err(CounterError::GrammarMismatch);
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Self,
        f: fn(&mut [u32], &[u32], &[u32]),
    ) -> Result<Self, CounterError> {
        self.check(other)?;
        let mut out = vec![0; self.counts.len()];
        f(&mut out, &self.counts, &other.counts);
        Ok(LinkCounter {
            fingerprint: self.fingerprint,
            counts: out.into_boxed_slice(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, CounterError> {
        self.zip_with(other, raw::add_into)
    }

    pub fn monus(&self, other: &Self) -> Result<Self, CounterError> {
        self.zip_with(other, raw::monus_into)
    }

    pub fn norm(&self) -> u64 {
        raw::norm(&self.counts)
    }

    pub fn leq(&self, other: &Self) -> Result<bool, CounterError> {
        self.check(other)?;
        Ok(raw::leq(&self.counts, &other.counts))
    }

    pub fn is_zero(&self) -> bool {
        raw::is_zero(&self.counts)
    }

    pub fn min(&self, other: &Self) -> Result<Self, CounterError> {
        self.zip_with(other, |o, a, b| {
            for ((o, x), y) in o.iter_mut().zip(a).zip(b) {
                *o = (*x).min(*y);
            }
        })
    }

    pub fn max(&self, other: &Self) -> Result<Self, CounterError> {
        self.zip_with(other, |o, a, b| {
            for ((o, x), y) in o.iter_mut().zip(a).zip(b) {
                *o = (*x).max(*y);
            }
        })
    }
}

/// Renders as `{l1:2, l2:0}`, every link in id order.
impl fmt::Display for LinkCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_counts(f, &self.counts)
    }
}

impl fmt::Debug for LinkCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_counts(f, &self.counts)
    }
}

pub(crate) fn write_counts(f: &mut impl fmt::Write, counts: &[u32]) -> fmt::Result {
    f.write_char('{')?;
    for (i, c) in counts.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}:{}", LinkId(i as u32), c)?;
    }
    f.write_char('}')
}
