use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on the number of links.
pub const MAX_LINKS: usize = 16;

/// Largest `K` for which partitions are enumerated. Bell(12) = 4,213,597.
pub const MAX_PARTITION_K: usize = 12;

/// A set of link indices `0..K` stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_mask(mask: u32) -> Self {
        Coalition(mask)
    }

    pub fn from_members(members: &[usize]) -> Self {
        Coalition(members.iter().fold(0, |acc, &m| {
            assert!(m < MAX_LINKS, "link index {m} out of range");
            acc | (1 << m)
        }))
    }

    pub fn singleton(k: usize) -> Self {
        Coalition::from_members(&[k])
    }

    /// The grand coalition of `k` links.
    pub fn full(k: usize) -> Self {
        assert!(k <= MAX_LINKS);
        Coalition(((1u64 << k) - 1) as u32)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, k: usize) -> bool {
        k < 32 && self.0 & (1 << k) != 0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    pub fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Coalition) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    /// Complement within the grand coalition of `k` links.
    pub fn complement(self, k: usize) -> Coalition {
        Coalition::full(k).difference(self)
    }

    /// Members in ascending order.
    pub fn members(self) -> Vec<usize> {
        let mut bits = self.0;
        let mut out = Vec::with_capacity(self.len());
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            out.push(k);
            bits &= bits - 1;
        }
        out
    }

    /// Position of member `k` in [`Coalition::members`].
    pub fn rank_of(self, k: usize) -> Option<usize> {
        self.contains(k)
            .then(|| (self.0 & ((1u32 << k) - 1)).count_ones() as usize)
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<usize> {
        (!self.is_empty()).then(|| self.0.trailing_zeros() as usize)
    }

    /// All nonempty subsets, in ascending mask order.
    pub fn subsets(self) -> impl Iterator<Item = Coalition> {
        let full = self.0;
        let mut sub: u32 = 0;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            // next subset of `full` in increasing order
            sub = sub.wrapping_sub(full) & full;
            if sub == 0 {
                done = true;
                return None;
            }
            Some(Coalition(sub))
        })
    }

    /// All nonempty coalitions of `k` links, ascending mask order.
    pub fn all_nonempty(k: usize) -> impl Iterator<Item = Coalition> {
        (1..=Coalition::full(k).0).map(Coalition)
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.members().iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", m.join(","))
    }
}

/// A partition of `0..K` into nonempty disjoint blocks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CoalitionStructure {
    blocks: Vec<Coalition>,
}

impl CoalitionStructure {
    /// Validates and canonicalizes (blocks sorted by smallest member).
    pub fn new(k: usize, mut blocks: Vec<Coalition>) -> Result<Self> {
        let mut seen = Coalition::EMPTY;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block in structure".into()));
            }
            if !b.is_disjoint(seen) {
                return Err(Error::InvalidArgument(format!("overlapping block {b}")));
            }
            seen = seen.union(*b);
        }
        if seen != Coalition::full(k) {
            return Err(Error::InvalidArgument(format!(
                "blocks cover {seen}, expected all of {}",
                Coalition::full(k)
            )));
        }
        blocks.sort_by_key(|b| b.first());
        Ok(CoalitionStructure { blocks })
    }

    /// Builds from a restricted-growth string (`rgs[i]` is the block of link `i`).
    pub fn from_rgs(rgs: &[usize]) -> Self {
        let nblocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Coalition::EMPTY; nblocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b] = blocks[b].union(Coalition::singleton(i));
        }
        // RGS order already sorts blocks by smallest member
        CoalitionStructure { blocks }
    }

    pub fn grand(k: usize) -> Self {
        CoalitionStructure {
            blocks: vec![Coalition::full(k)],
        }
    }

    pub fn singletons(k: usize) -> Self {
        CoalitionStructure {
            blocks: (0..k).map(Coalition::singleton).collect(),
        }
    }

    pub fn blocks(&self) -> &[Coalition] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, k: usize) -> Coalition {
        *self
            .blocks
            .iter()
            .find(|b| b.contains(k))
            .expect("structure covers every link")
    }

    /// Canonical text form, e.g. `{0,1}|{2}`.
    pub fn encode(&self) -> String {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        parts.join("|")
    }

    /// Parses the canonical text form.
    pub fn decode(k: usize, text: &str) -> Result<Self> {
        let blocks = text
            .split('|')
            .map(|part| {
                let inner = part
                    .trim()
                    .strip_prefix('{')
                    .and_then(|p| p.strip_suffix('}'))
                    .ok_or_else(|| Error::Parse(format!("bad block '{part}'")))?;
                let members = inner
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("bad member '{s}': {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if members.iter().any(|&m| m >= k) {
                    return Err(Error::Parse(format!("member out of range in '{part}'")));
                }
                Ok(Coalition::from_members(&members))
            })
            .collect::<Result<Vec<_>>>()?;
        CoalitionStructure::new(k, blocks)
    }
}

impl fmt::Debug for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

/// Iterator over all partitions of `0..k` in lexicographic
/// restricted-growth-string order.
pub struct Partitions {
    rgs: Vec<usize>,
    // maxima[i] = max(rgs[0..i])
    maxima: Vec<usize>,
    done: bool,
}

impl Iterator for Partitions {
    type Item = CoalitionStructure;

    fn next(&mut self) -> Option<CoalitionStructure> {
        if self.done {
            return None;
        }
        let out = CoalitionStructure::from_rgs(&self.rgs);
        // advance: rightmost position that can be incremented
        let n = self.rgs.len();
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.rgs[i] <= self.maxima[i] {
                self.rgs[i] += 1;
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.maxima[j] = self.maxima[j - 1].max(self.rgs[j - 1]);
                }
                break;
            }
        }
        Some(out)
    }
}

/// Every partition of `0..k` exactly once.
pub fn enumerate_partitions(k: usize) -> Result<Partitions> {
    partitions_unchecked(k, MAX_PARTITION_K)
}

pub(crate) fn partitions_unchecked(k: usize, max: usize) -> Result<Partitions> {
    if k == 0 || k > max {
        return Err(Error::KTooLarge { k, max });
    }
    Ok(Partitions {
        rgs: vec![0; k],
        maxima: vec![0; k],
        done: false,
    })
}

/// Partitions of an arbitrary coalition's members.
pub fn partitions_of(set: Coalition) -> Vec<Vec<Coalition>> {
    let members = set.members();
    if members.is_empty() {
        return Vec::new();
    }
    partitions_unchecked(members.len(), MAX_LINKS)
        .expect("coalition fits")
        .map(|p| {
            p.blocks()
                .iter()
                .map(|b| Coalition::from_members(&b.members().iter().map(|&i| members[i]).collect::<Vec<_>>()))
                .collect()
        })
        .collect()
}

/// Bell number by the Bell triangle.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}
