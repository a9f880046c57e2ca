//! p-spectrum, presence-bits and intersection string kernels.
//!
//! Pairwise values are computed from sparse p-gram profiles; the explicit
//! feature space (|alphabet|^p coordinates) is never built. For matrix
//! construction the p-grams of a whole sample set are interned to integer
//! ids once per `p`, so each cell is a merge-join of two sorted
//! `(id, count)` lists.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{ids_of, KernelMatrix, Provenance};
use crate::error::{invalid, Result};
use crate::exec::{self, Executor};
use crate::linalg::Matrix;
use crate::recipe::{Component, ComponentKind};
use crate::text::{channel_texts, PgramProfile, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StringKernelKind {
    /// Inner product of p-gram frequency vectors.
    Spectrum,
    /// Inner product of p-gram presence bits.
    Presence,
    /// Sum of per-p-gram minimum frequencies.
    Intersection,
}

impl StringKernelKind {
    #[inline]
    fn term(self, a: u64, b: u64) -> u64 {
        match self {
            StringKernelKind::Spectrum => a * b,
            StringKernelKind::Presence => 1,
            StringKernelKind::Intersection => a.min(b),
        }
    }
}

/// Inclusive range of p-gram lengths, `1 <= p_min <= p_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PgramRange {
    p_min: usize,
    p_max: usize,
}

impl PgramRange {
    pub fn new(p_min: usize, p_max: usize) -> Result<Self> {
        if p_min < 1 || p_min > p_max {
            return Err(invalid!("invalid p-gram range {p_min}-{p_max}"));
        }
        Ok(Self { p_min, p_max })
    }

    pub fn single(p: usize) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn p_min(&self) -> usize {
        self.p_min
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn len(&self) -> usize {
        self.p_max - self.p_min + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> core::ops::RangeInclusive<usize> {
        self.p_min..=self.p_max
    }

    pub fn contains(&self, other: &PgramRange) -> bool {
        self.p_min <= other.p_min && other.p_max <= self.p_max
    }
}

impl fmt::Display for PgramRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.p_min, self.p_max)
    }
}

fn check_same_p(s: &PgramProfile, t: &PgramProfile) -> Result<()> {
    if s.p() != t.p() {
        return Err(invalid!("profiles have different p-gram lengths ({} vs {})", s.p(), t.p()));
    }
    Ok(())
}

/// Kernel value between two profiles. The smaller profile is iterated in
/// key order and probed against the larger one.
pub fn kernel(kind: StringKernelKind, s: &PgramProfile, t: &PgramProfile) -> Result<u64> {
    check_same_p(s, t)?;
    let (small, large) = if s.len() <= t.len() { (s, t) } else { (t, s) };
    Ok(small
        .iter()
        .map(|(gram, a)| match large.count(gram) {
            0 => 0,
            b => kind.term(a, b),
        })
        .sum())
}

pub fn spectrum_kernel(s: &PgramProfile, t: &PgramProfile) -> Result<u64> {
    kernel(StringKernelKind::Spectrum, s, t)
}

pub fn presence_kernel(s: &PgramProfile, t: &PgramProfile) -> Result<u64> {
    kernel(StringKernelKind::Presence, s, t)
}

pub fn intersection_kernel(s: &PgramProfile, t: &PgramProfile) -> Result<u64> {
    kernel(StringKernelKind::Intersection, s, t)
}

/// Blended kernel between two texts: the sum of per-p kernels over `range`.
pub fn blended_kernel(kind: StringKernelKind, s: &str, t: &str, range: PgramRange) -> Result<u64> {
    let texts = [s, t];
    let mut total = 0;
    for p in range.iter() {
        let enc = EncodedProfiles::new(&texts, p);
        total += enc.kernel(kind, 0, 1);
    }
    Ok(total)
}

/// Profiles of a fixed sample set for one `p`, with p-grams interned to ids.
#[derive(Debug, Clone)]
pub struct EncodedProfiles {
    p: usize,
    profiles: Vec<Vec<(u32, u32)>>,
}

impl EncodedProfiles {
    pub fn new<S: AsRef<str>>(texts: &[S], p: usize) -> Self {
        assert!(p >= 1, "p-gram length must be at least 1");
        let chars: Vec<Vec<char>> = texts.iter().map(|t| t.as_ref().chars().collect()).collect();
        let mut vocab: BTreeMap<&[char], u32> = BTreeMap::new();
        let mut profiles = Vec::with_capacity(chars.len());
        for c in &chars {
            let mut grams: Vec<u32> = c
                .windows(p)
                .map(|w| {
                    let next = vocab.len() as u32;
                    *vocab.entry(w).or_insert(next)
                })
                .collect();
            grams.sort_unstable();
            let mut prof: Vec<(u32, u32)> = Vec::new();
            for g in grams {
                match prof.last_mut() {
                    Some((last, n)) if *last == g => *n += 1,
                    _ => prof.push((g, 1)),
                }
            }
            profiles.push(prof);
        }
        Self { p, profiles }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Kernel value between texts `i` and `j` by merge-join of their ids.
    pub fn kernel(&self, kind: StringKernelKind, i: usize, j: usize) -> u64 {
        let (a, b) = (&self.profiles[i], &self.profiles[j]);
        let (mut x, mut y) = (0, 0);
        let mut total = 0u64;
        while x < a.len() && y < b.len() {
            let (ga, ca) = a[x];
            let (gb, cb) = b[y];
            match ga.cmp(&gb) {
                core::cmp::Ordering::Less => x += 1,
                core::cmp::Ordering::Greater => y += 1,
                core::cmp::Ordering::Equal => {
                    total += kind.term(ca as u64, cb as u64);
                    x += 1;
                    y += 1;
                }
            }
        }
        total
    }
}

/// Raw per-p self-similarity matrix over `texts`.
pub fn raw_self_matrix<E: Executor + ?Sized, S: AsRef<str> + Sync>(exec: &E, texts: &[S], kind: StringKernelKind, p: usize) -> Matrix {
    let enc = EncodedProfiles::new(texts, p);
    exec::fill_symmetric(exec, texts.len(), |i, j| enc.kernel(kind, i, j) as f64)
}

/// Raw per-p matrices for every `p` in `range`, in ascending `p`.
pub fn per_p_self_matrices<E: Executor + ?Sized, S: AsRef<str> + Sync>(
    exec: &E,
    texts: &[S],
    kind: StringKernelKind,
    range: PgramRange,
) -> Vec<Matrix> {
    range.iter().map(|p| raw_self_matrix(exec, texts, kind, p)).collect()
}

/// Blended (summed over `range`) raw kernel between two sample lists.
pub fn blended_raw_matrix<E: Executor + ?Sized>(
    exec: &E,
    rows: &[Sample],
    cols: &[Sample],
    channel: &str,
    kind: StringKernelKind,
    range: PgramRange,
) -> Result<KernelMatrix> {
    let row_texts = channel_texts(rows, channel)?;
    let col_texts = channel_texts(cols, channel)?;
    let n = rows.len();
    let mut all = row_texts;
    all.extend(col_texts);
    let mut values = Matrix::zeros(n, cols.len());
    for p in range.iter() {
        let enc = EncodedProfiles::new(&all, p);
        let part = exec::fill(exec, n, cols.len(), |i, j| enc.kernel(kind, i, n + j) as f64);
        add_assign(&mut values, &part);
    }
    let component = Component::string(kind, channel, range).normalized(false);
    KernelMatrix::new(values, ids_of(rows), ids_of(cols), Provenance::single(component, false))
}

/// Blended raw self-similarity matrix; exactly symmetric.
pub fn blended_self_matrix<E: Executor + ?Sized>(
    exec: &E,
    samples: &[Sample],
    channel: &str,
    kind: StringKernelKind,
    range: PgramRange,
) -> Result<KernelMatrix> {
    let texts = channel_texts(samples, channel)?;
    let mut values = Matrix::zeros(samples.len(), samples.len());
    for m in per_p_self_matrices(exec, &texts, kind, range) {
        add_assign(&mut values, &m);
    }
    let ids = ids_of(samples);
    let component = Component::string(kind, channel, range).normalized(false);
    KernelMatrix::new(values, ids.clone(), ids, Provenance::single(component, true))
}

pub(crate) fn add_assign(acc: &mut Matrix, part: &Matrix) {
    for (a, b) in acc.as_mut_slice().iter_mut().zip(part.as_slice()) {
        *a += b;
    }
}

impl From<StringKernelKind> for ComponentKind {
    fn from(kind: StringKernelKind) -> Self {
        match kind {
            StringKernelKind::Spectrum => ComponentKind::Spectrum,
            StringKernelKind::Presence => ComponentKind::Presence,
            StringKernelKind::Intersection => ComponentKind::Intersection,
        }
    }
}
