//! Independence structures over ground-set indices.
//!
//! Sets of indices are passed as slices and treated as sets: order and
//! repeated entries are ignored.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground set [`MatroidSpec::independent_sets`] enumerates for
/// uniform and partition matroids.
pub const MAX_ENUMERATION_N: usize = 25;

/// Largest ground set [`MatroidSpec::validate_axioms`] checks exhaustively.
pub const MAX_AXIOM_CHECK_N: usize = 20;

/// Serialized form: `{"type":"uniform","k":2}`, `{"type":"partition","blocks":[[0,1],[2]],"caps":[1,1]}`,
/// `{"type":"explicit","sets":[[0],[1],[0,1]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MatroidKind {
    Uniform {
        k: usize,
    },
    Partition {
        blocks: Vec<Vec<usize>>,
        caps: Vec<usize>,
    },
    Explicit {
        sets: Vec<Vec<usize>>,
    },
}

#[derive(Clone, Debug)]
pub struct MatroidSpec {
    kind: MatroidKind,
    ground_size: usize,
    block_of: Vec<usize>,
    members: HashSet<Vec<usize>>,
}

impl PartialEq for MatroidSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.ground_size == other.ground_size
    }
}

fn normalized(set: &[usize]) -> Vec<usize> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// Size first, then lexicographic.
fn size_lex(a: &Vec<usize>, b: &Vec<usize>) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl MatroidSpec {
    pub fn new(kind: MatroidKind, ground_size: usize) -> Result<Self> {
        let mut block_of = Vec::new();
        let mut members = HashSet::new();
        let kind = match kind {
            MatroidKind::Uniform { k } => {
                if k == 0 {
                    return Err(Error::InvalidMatroid(
                        "uniform matroid requires k >= 1".into(),
                    ));
                }
                MatroidKind::Uniform { k }
            }
            MatroidKind::Partition { blocks, caps } => {
                if blocks.len() != caps.len() {
                    return Err(Error::InvalidMatroid(format!(
                        "partition has {} blocks but {} caps",
                        blocks.len(),
                        caps.len()
                    )));
                }
                block_of = vec![usize::MAX; ground_size];
                for (b, block) in blocks.iter().enumerate() {
                    for &i in block {
                        if i >= ground_size {
                            return Err(Error::IndexOutOfRange {
                                index: i,
                                ground_size,
                            });
                        }
                        if block_of[i] != usize::MAX {
                            return Err(Error::InvalidMatroid(format!(
                                "index {i} appears in more than one block"
                            )));
                        }
                        block_of[i] = b;
                    }
                }
                if let Some(i) = block_of.iter().position(|&b| b == usize::MAX) {
                    return Err(Error::InvalidMatroid(format!(
                        "index {i} is not covered by any block"
                    )));
                }
                MatroidKind::Partition { blocks, caps }
            }
            MatroidKind::Explicit { sets } => {
                let mut family: Vec<Vec<usize>> = Vec::with_capacity(sets.len() + 1);
                family.push(Vec::new());
                for set in &sets {
                    if let Some(&index) = set.iter().find(|&&i| i >= ground_size) {
                        return Err(Error::IndexOutOfRange { index, ground_size });
                    }
                    family.push(normalized(set));
                }
                family.sort_by(size_lex);
                family.dedup();
                members = family.iter().cloned().collect();
                MatroidKind::Explicit { sets: family }
            }
        };
        Ok(Self {
            kind,
            ground_size,
            block_of,
            members,
        })
    }

    pub fn uniform(k: usize, ground_size: usize) -> Result<Self> {
        Self::new(MatroidKind::Uniform { k }, ground_size)
    }

    pub fn partition(
        blocks: Vec<Vec<usize>>,
        caps: Vec<usize>,
        ground_size: usize,
    ) -> Result<Self> {
        Self::new(MatroidKind::Partition { blocks, caps }, ground_size)
    }

    pub fn explicit(sets: Vec<Vec<usize>>, ground_size: usize) -> Result<Self> {
        Self::new(MatroidKind::Explicit { sets }, ground_size)
    }

    /// Normalized kind; explicit families are sorted and include `∅`.
    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, MatroidKind::Uniform { .. })
    }

    /// Maximum cardinality of an independent set.
    pub fn rank_cap(&self) -> usize {
        match &self.kind {
            MatroidKind::Uniform { k } => (*k).min(self.ground_size),
            MatroidKind::Partition { blocks, caps } => {
                blocks.iter().zip(caps).map(|(b, &c)| c.min(b.len())).sum()
            }
            MatroidKind::Explicit { sets } => sets.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    fn check_range(&self, set: &[usize]) -> Result<()> {
        match set.iter().find(|&&i| i >= self.ground_size) {
            Some(&index) => Err(Error::IndexOutOfRange {
                index,
                ground_size: self.ground_size,
            }),
            None => Ok(()),
        }
    }

    pub fn is_independent(&self, set: &[usize]) -> Result<bool> {
        self.check_range(set)?;
        let set = normalized(set);
        Ok(self.independent_sorted(&set))
    }

    fn independent_sorted(&self, set: &[usize]) -> bool {
        match &self.kind {
            MatroidKind::Uniform { k } => set.len() <= *k,
            MatroidKind::Partition { caps, .. } => {
                let mut counts = vec![0usize; caps.len()];
                for &i in set {
                    let b = self.block_of[i];
                    counts[b] += 1;
                    if counts[b] > caps[b] {
                        return false;
                    }
                }
                true
            }
            MatroidKind::Explicit { .. } => self.members.contains(set),
        }
    }

    /// Whether `set ∪ {x}` is independent.
    pub fn can_extend(&self, set: &[usize], x: usize) -> Result<bool> {
        self.check_range(set)?;
        self.check_range(&[x])?;
        let mut with = set.to_vec();
        with.push(x);
        let with = normalized(&with);
        Ok(self.independent_sorted(&with))
    }

    /// Exhaustive check of the hereditary and augmentation axioms.
    ///
    /// Uniform and partition matroids are valid by construction. Explicit families
    /// are scanned in size-then-lexicographic order and the first violation found
    /// is reported (hereditary violations before augmentation ones).
    pub fn validate_axioms(&self) -> Result<AxiomReport> {
        let family = match &self.kind {
            MatroidKind::Explicit { sets } => sets,
            _ => {
                return Ok(AxiomReport {
                    hereditary_ok: true,
                    augmentation_ok: true,
                    counterexample: None,
                })
            }
        };
        if self.ground_size > MAX_AXIOM_CHECK_N {
            return Err(Error::GuardExceeded(format!(
                "explicit family over {} elements exceeds the exhaustive axiom check limit of {}; \
                 check a sample of pairs instead",
                self.ground_size, MAX_AXIOM_CHECK_N
            )));
        }

        let mut counterexample = None;

        let mut hereditary_ok = true;
        'hereditary: for larger in family {
            for drop in 0..larger.len() {
                let mut smaller = larger.clone();
                smaller.remove(drop);
                if !self.members.contains(&smaller) {
                    hereditary_ok = false;
                    counterexample = Some(AxiomViolation {
                        axiom: Axiom::Hereditary,
                        smaller,
                        larger: larger.clone(),
                    });
                    break 'hereditary;
                }
            }
        }

        let mut augmentation_ok = true;
        'augment: for smaller in family {
            for larger in family.iter().filter(|t| t.len() > smaller.len()) {
                let extendable = larger
                    .iter()
                    .filter(|j| smaller.binary_search(j).is_err())
                    .any(|&j| {
                        let mut with = smaller.clone();
                        with.push(j);
                        with.sort_unstable();
                        self.members.contains(&with)
                    });
                if !extendable {
                    augmentation_ok = false;
                    if counterexample.is_none() {
                        counterexample = Some(AxiomViolation {
                            axiom: Axiom::Augmentation,
                            smaller: smaller.clone(),
                            larger: larger.clone(),
                        });
                    }
                    break 'augment;
                }
            }
        }

        Ok(AxiomReport {
            hereditary_ok,
            augmentation_ok,
            counterexample,
        })
    }

    /// Every independent set of cardinality at most `max_card`, each exactly once,
    /// ordered by size and then lexicographically.
    pub fn independent_sets(&self, max_card: Option<usize>) -> Result<IndependentSets<'_>> {
        let max_card = max_card.unwrap_or(usize::MAX);
        match &self.kind {
            MatroidKind::Explicit { sets } => {
                let listed: Vec<Vec<usize>> = sets
                    .iter()
                    .filter(|s| s.len() <= max_card)
                    .cloned()
                    .collect();
                Ok(IndependentSets::Listed(listed.into_iter()))
            }
            _ => {
                if self.ground_size > MAX_ENUMERATION_N {
                    return Err(Error::GuardExceeded(format!(
                        "enumeration over {} elements exceeds the limit of {}",
                        self.ground_size, MAX_ENUMERATION_N
                    )));
                }
                Ok(IndependentSets::Levels {
                    spec: self,
                    level: vec![Vec::new()],
                    pos: 0,
                    max_card,
                })
            }
        }
    }
}

/// Level-by-level enumeration; a set is only extended when it is itself independent.
pub enum IndependentSets<'a> {
    Listed(std::vec::IntoIter<Vec<usize>>),
    Levels {
        spec: &'a MatroidSpec,
        level: Vec<Vec<usize>>,
        pos: usize,
        max_card: usize,
    },
}

impl Iterator for IndependentSets<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        match self {
            IndependentSets::Listed(it) => it.next(),
            IndependentSets::Levels {
                spec,
                level,
                pos,
                max_card,
            } => {
                if *pos == level.len() {
                    let card = level.first().map_or(usize::MAX, Vec::len);
                    if level.is_empty() || card >= *max_card {
                        return None;
                    }
                    let n = spec.ground_size;
                    let mut next = Vec::new();
                    for set in level.iter() {
                        let start = set.last().map_or(0, |&l| l + 1);
                        for x in start..n {
                            let mut with = set.clone();
                            with.push(x);
                            if spec.independent_sorted(&with) {
                                next.push(with);
                            }
                        }
                    }
                    *level = next;
                    *pos = 0;
                    if level.is_empty() {
                        return None;
                    }
                }
                *pos += 1;
                Some(level[*pos - 1].clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    Hereditary,
    Augmentation,
}

/// For a hereditary violation `larger` is in the family and `smaller = larger ∖ {x}` is not.
/// For an augmentation violation no `j ∈ larger ∖ smaller` gives `smaller ∪ {j}` in the family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub smaller: Vec<usize>,
    pub larger: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub hereditary_ok: bool,
    pub augmentation_ok: bool,
    pub counterexample: Option<AxiomViolation>,
}

impl AxiomReport {
    pub fn is_matroid(&self) -> bool {
        self.hereditary_ok && self.augmentation_ok
    }

    pub fn label(&self) -> &'static str {
        if self.is_matroid() {
            "matroid"
        } else {
            "independence system, not matroid"
        }
    }
}
