//! Local Rank Distance and the RBF kernel built on top of it.
//!
//! For every p-gram position `i` of `x`, the nearest position `j` of an
//! identical p-gram in `y` contributes `|i - j|` when that offset is below
//! the window `m`, and `m` otherwise (including when no match exists). The
//! distance is the sum of both directions. Nearest positions come from a
//! per-string table of `(p-gram id, position)` pairs sorted
//! lexicographically, so each lookup is one binary search.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::algebra::{ids_of, KernelMatrix, Provenance};
use crate::error::{invalid, Result};
use crate::exec::{self, Executor};
use crate::linalg::Matrix;
use crate::recipe::Component;
use crate::string_kernels::PgramRange;
use crate::text::{channel_texts, Sample};

/// Default maximum offset window.
pub const DEFAULT_WINDOW: usize = 300;
/// Default RBF width.
pub const DEFAULT_SIGMA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrdParams {
    pub p: usize,
    pub m: usize,
    pub sigma: f64,
}

impl LrdParams {
    pub fn new(p: usize, m: usize, sigma: f64) -> Result<Self> {
        check_pm(p, m)?;
        check_sigma(sigma)?;
        Ok(Self { p, m, sigma })
    }
}

fn check_pm(p: usize, m: usize) -> Result<()> {
    if p == 0 {
        return Err(invalid!("p-gram length must be at least 1"));
    }
    if m == 0 {
        return Err(invalid!("LRD window m must be at least 1"));
    }
    Ok(())
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid!("sigma must be a positive finite number, got {sigma}"));
    }
    Ok(())
}

/// Position table of one string for one `p`.
#[derive(Debug, Clone)]
struct Positions {
    grams: Vec<u32>,
    sorted: Vec<(u32, u32)>,
}

/// Position tables of a fixed set of strings for one `p`, sharing one
/// p-gram vocabulary.
#[derive(Debug, Clone)]
pub struct LrdTable {
    p: usize,
    entries: Vec<Positions>,
}

impl LrdTable {
    pub fn new<S: AsRef<str>>(texts: &[S], p: usize) -> Self {
        assert!(p >= 1, "p-gram length must be at least 1");
        let chars: Vec<Vec<char>> = texts.iter().map(|t| t.as_ref().chars().collect()).collect();
        let mut vocab: BTreeMap<&[char], u32> = BTreeMap::new();
        let mut entries = Vec::with_capacity(chars.len());
        for c in &chars {
            let grams: Vec<u32> = c
                .windows(p)
                .map(|w| {
                    let next = vocab.len() as u32;
                    *vocab.entry(w).or_insert(next)
                })
                .collect();
            let mut sorted: Vec<(u32, u32)> = grams.iter().enumerate().map(|(i, &g)| (g, i as u32)).collect();
            sorted.sort_unstable();
            entries.push(Positions { grams, sorted });
        }
        Self { p, entries }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of p-gram positions of string `i`.
    pub fn positions(&self, i: usize) -> usize {
        self.entries[i].grams.len()
    }

    /// Offset sum from string `x` to string `y`.
    pub fn directed(&self, x: usize, y: usize, m: usize) -> u64 {
        let (x, y) = (&self.entries[x], &self.entries[y]);
        let m = m as u64;
        let mut total = 0u64;
        for (i, &g) in x.grams.iter().enumerate() {
            let i = i as u32;
            let at = y.sorted.partition_point(|&key| key < (g, i));
            // Earlier candidate first so equal offsets resolve to the smaller j.
            let mut best: Option<u32> = None;
            if at > 0 {
                let (h, j) = y.sorted[at - 1];
                if h == g {
                    best = Some(i - j);
                }
            }
            if let Some(&(h, j)) = y.sorted.get(at) {
                if h == g && best.is_none_or(|b| j - i < b) {
                    best = Some(j - i);
                }
            }
            total += match best {
                Some(off) if (off as u64) < m => off as u64,
                _ => m,
            };
        }
        total
    }

    pub fn distance(&self, x: usize, y: usize, m: usize) -> u64 {
        self.directed(x, y, m) + self.directed(y, x, m)
    }

    /// Distance divided by its maximum `m * (n_x + n_y)`; 0 when both
    /// strings are shorter than `p`.
    pub fn normalized(&self, x: usize, y: usize, m: usize) -> f64 {
        let denom = (m as u64) * (self.positions(x) + self.positions(y)) as u64;
        if denom == 0 {
            return 0.0;
        }
        self.distance(x, y, m) as f64 / denom as f64
    }
}

pub fn lrd_directed(x: &str, y: &str, p: usize, m: usize) -> Result<u64> {
    check_pm(p, m)?;
    Ok(LrdTable::new(&[x, y], p).directed(0, 1, m))
}

/// Symmetric Local Rank Distance.
pub fn lrd(x: &str, y: &str, params: &LrdParams) -> Result<u64> {
    check_pm(params.p, params.m)?;
    Ok(LrdTable::new(&[x, y], params.p).distance(0, 1, params.m))
}

pub fn lrd_normalized(x: &str, y: &str, params: &LrdParams) -> Result<f64> {
    check_pm(params.p, params.m)?;
    Ok(LrdTable::new(&[x, y], params.p).normalized(0, 1, params.m))
}

/// RBF transform of a normalized distance: `exp(-d / (2 sigma^2))`.
#[inline]
pub fn rbf(distance: f64, sigma: f64) -> f64 {
    libm::exp(-distance / (2.0 * sigma * sigma))
}

/// Normalized LRD self-distance matrices for every `p` in `range`.
pub fn normalized_distance_matrices<E: Executor + ?Sized, S: AsRef<str> + Sync>(
    exec: &E,
    texts: &[S],
    range: PgramRange,
    m: usize,
) -> Result<Vec<Matrix>> {
    check_pm(range.p_min(), m)?;
    Ok(range
        .iter()
        .map(|p| {
            let table = LrdTable::new(texts, p);
            exec::fill_symmetric(exec, texts.len(), |i, j| table.normalized(i, j, m))
        })
        .collect())
}

/// Sums `rbf(d_p, sigma)` over per-p distance matrices, in the given order.
pub fn rbf_blend(distances: &[Matrix], sigma: f64) -> Result<Matrix> {
    check_sigma(sigma)?;
    let first = distances.first().ok_or_else(|| invalid!("no distance matrices to blend"))?;
    let mut out = Matrix::zeros(first.rows(), first.cols());
    for d in distances {
        for (o, v) in out.as_mut_slice().iter_mut().zip(d.as_slice()) {
            *o += rbf(*v, sigma);
        }
    }
    Ok(out)
}

/// Blended LRD RBF kernel between two sample lists (no squaring).
pub fn lrd_rbf_matrix<E: Executor + ?Sized>(
    exec: &E,
    rows: &[Sample],
    cols: &[Sample],
    channel: &str,
    range: PgramRange,
    m: usize,
    sigma: f64,
) -> Result<KernelMatrix> {
    check_pm(range.p_min(), m)?;
    check_sigma(sigma)?;
    let mut all = channel_texts(rows, channel)?;
    all.extend(channel_texts(cols, channel)?);
    let n = rows.len();
    let tables: Vec<LrdTable> = range.iter().map(|p| LrdTable::new(&all, p)).collect();
    let values = exec::fill(exec, n, cols.len(), |i, j| tables.iter().fold(0.0, |acc, t| acc + rbf(t.normalized(i, n + j, m), sigma)));
    let component = Component::lrd(channel, range, m, sigma);
    KernelMatrix::new(values, ids_of(rows), ids_of(cols), Provenance::single(component, false))
}

/// Blended LRD RBF self-similarity matrix (no squaring); exactly symmetric.
pub fn lrd_rbf_self_matrix<E: Executor + ?Sized>(
    exec: &E,
    samples: &[Sample],
    channel: &str,
    range: PgramRange,
    m: usize,
    sigma: f64,
) -> Result<KernelMatrix> {
    let texts = channel_texts(samples, channel)?;
    let values = rbf_blend(&normalized_distance_matrices(exec, &texts, range, m)?, sigma)?;
    let ids = ids_of(samples);
    let component = Component::lrd(channel, range, m, sigma);
    KernelMatrix::new(values, ids.clone(), ids, Provenance::single(component, true))
}
