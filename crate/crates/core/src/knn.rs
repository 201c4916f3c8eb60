//! Exact nearest-neighbor search and pairwise distances.
//!
//! Both entry points share one blocked kernel. The row set is cut into square
//! tiles of `TILE_ROWS` points; only tiles on or above the diagonal are
//! visited, so each unordered pair is evaluated once. Inside a tile the
//! feature axis is walked in `COL_CHUNK` slices so that both row panels stay
//! resident in cache even when rows are hundreds of kilobytes wide.
//!
//! Squared distances are accumulated in `LANES` independent partial sums,
//! lane `l` owning every feature whose index is `l` modulo `LANES`. The lane
//! state is carried across column chunks and reduced in a fixed tree at the
//! end, so the value of a pair does not depend on tiling, on argument order,
//! or on the number of worker threads.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::{Error, Matrix, Result};

const LANES: usize = 8;
const TILE_ROWS: usize = 64;
// Must stay a multiple of LANES.
const COL_CHUNK: usize = 1024;

#[inline(always)]
fn accumulate(a: &[f64], b: &[f64], acc: &mut [f64; LANES]) {
    let mut ca = a.chunks_exact(LANES);
    let mut cb = b.chunks_exact(LANES);
    let mut local = *acc;
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..LANES {
            let d = x[l] - y[l];
            local[l] += d * d;
        }
    }
    for (l, (x, y)) in ca.remainder().iter().zip(cb.remainder()).enumerate() {
        let d = x - y;
        local[l] += d * d;
    }
    *acc = local;
}

/// Four pairs at once, `acc = [q0-r0, q0-r1, q1-r0, q1-r1]`, each with the
/// exact lane arithmetic of [`accumulate`].
#[inline(always)]
fn accumulate_2x2(q0: &[f64], q1: &[f64], r0: &[f64], r1: &[f64], acc: &mut [[f64; LANES]; 4]) {
    let len = q0.len();
    let body = len - len % LANES;
    let mut local = *acc;
    let mut i = 0;
    while i < body {
        let (a, b) = (&q0[i..i + LANES], &q1[i..i + LANES]);
        let (c, d) = (&r0[i..i + LANES], &r1[i..i + LANES]);
        for l in 0..LANES {
            let d00 = a[l] - c[l];
            let d01 = a[l] - d[l];
            let d10 = b[l] - c[l];
            let d11 = b[l] - d[l];
            local[0][l] += d00 * d00;
            local[1][l] += d01 * d01;
            local[2][l] += d10 * d10;
            local[3][l] += d11 * d11;
        }
        i += LANES;
    }
    *acc = local;
    if body < len {
        accumulate(&q0[body..], &r0[body..], &mut acc[0]);
        accumulate(&q0[body..], &r1[body..], &mut acc[1]);
        accumulate(&q1[body..], &r0[body..], &mut acc[2]);
        accumulate(&q1[body..], &r1[body..], &mut acc[3]);
    }
}

#[inline(always)]
fn reduce(acc: &[f64; LANES]) -> f64 {
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

/// Squared Euclidean distance with the same summation order as the tiled
/// kernel.
pub fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; LANES];
    accumulate(a, b, &mut acc);
    reduce(&acc)
}

/// Squared distances of one tile, `out[a * cols + b]` for query row
/// `q0 + a` and reference row `r0 + b`. On diagonal tiles only `a < b` is
/// filled.
struct Tile {
    q0: usize,
    r0: usize,
    rows: usize,
    cols: usize,
    sq: Vec<f64>,
}

impl Tile {
    fn compute(points: &Matrix, q0: usize, r0: usize) -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx512f") {
                // SAFETY: the CPU supports AVX-512F.
                return unsafe { Self::compute_avx512(points, q0, r0) };
            }
            if std::arch::is_x86_feature_detected!("avx2") {
                // SAFETY: the CPU supports AVX2.
                return unsafe { Self::compute_avx2(points, q0, r0) };
            }
        }
        Self::compute_generic(points, q0, r0)
    }

    // Same arithmetic as the generic path, only wider registers: no fused
    // multiply-add is emitted, so results are bit-identical.
    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn compute_avx2(points: &Matrix, q0: usize, r0: usize) -> Self {
        Self::compute_generic(points, q0, r0)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx512f")]
    unsafe fn compute_avx512(points: &Matrix, q0: usize, r0: usize) -> Self {
        Self::compute_generic(points, q0, r0)
    }

    #[inline(always)]
    fn compute_generic(points: &Matrix, q0: usize, r0: usize) -> Self {
        let n = points.rows();
        let dim = points.cols();
        let rows = TILE_ROWS.min(n - q0);
        let cols = TILE_ROWS.min(n - r0);
        let diagonal = q0 == r0;
        let mut acc = vec![[0.0; LANES]; rows * cols];
        let mut c0 = 0;
        while c0 < dim {
            let c1 = (c0 + COL_CHUNK).min(dim);
            let q = |a: usize| &points.row(q0 + a)[c0..c1];
            let r = |b: usize| &points.row(r0 + b)[c0..c1];
            let mut a = 0;
            while a < rows {
                let start = if diagonal { a & !1 } else { 0 };
                if a + 1 < rows {
                    let mut b = start;
                    while b + 1 < cols {
                        let (i00, i01, i10, i11) =
                            (a * cols + b, a * cols + b + 1, (a + 1) * cols + b, (a + 1) * cols + b + 1);
                        let mut block = [acc[i00], acc[i01], acc[i10], acc[i11]];
                        accumulate_2x2(q(a), q(a + 1), r(b), r(b + 1), &mut block);
                        [acc[i00], acc[i01], acc[i10], acc[i11]] = block;
                        b += 2;
                    }
                    if b < cols {
                        accumulate(q(a), r(b), &mut acc[a * cols + b]);
                        accumulate(q(a + 1), r(b), &mut acc[(a + 1) * cols + b]);
                    }
                    a += 2;
                } else {
                    for b in start..cols {
                        accumulate(q(a), r(b), &mut acc[a * cols + b]);
                    }
                    a += 1;
                }
            }
            c0 = c1;
        }
        let sq = acc.iter().map(reduce).collect();
        Self { q0, r0, rows, cols, sq }
    }

    /// Pairs `(i, j, squared distance)` with `i < j` covered by this tile.
    fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let diagonal = self.q0 == self.r0;
        (0..self.rows).flat_map(move |a| {
            let start = if diagonal { a + 1 } else { 0 };
            (start..self.cols).map(move |b| (self.q0 + a, self.r0 + b, self.sq[a * self.cols + b]))
        })
    }
}

fn upper_tiles(n: usize) -> Vec<(usize, usize)> {
    let starts: Vec<usize> = (0..n).step_by(TILE_ROWS).collect();
    let mut tiles = Vec::with_capacity(starts.len() * (starts.len() + 1) / 2);
    for (bi, &q0) in starts.iter().enumerate() {
        for &r0 in &starts[bi..] {
            tiles.push((q0, r0));
        }
    }
    tiles
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    sq: f64,
    index: usize,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq.total_cmp(&other.sq).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

/// Max-heap holding the `k` smallest candidates seen so far.
struct Bounded {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl Bounded {
    fn new(k: usize) -> Self {
        Self { k, heap: BinaryHeap::with_capacity(k + 1) }
    }

    #[inline]
    fn push(&mut self, c: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if let Some(mut top) = self.heap.peek_mut() {
            if c < *top {
                *top = c;
            }
        }
    }
}

/// Sorted nearest-neighbor distances per point, self excluded.
///
/// Row `i` holds the distances from point `i` to its 1st..k-th nearest
/// neighbors in nondecreasing order, together with the neighbor row indices.
/// Equal distances are ordered by lower row index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    n: usize,
    k: usize,
    dist: Vec<f64>,
    index: Vec<usize>,
}

impl NeighborTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.dist[i * self.k..(i + 1) * self.k]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.index[i * self.k..(i + 1) * self.k]
    }

    pub fn all_distances(&self) -> &[f64] {
        &self.dist
    }
}

/// Exact `k` nearest neighbors of every row under the L2 metric.
///
/// Duplicate points show up as zero distances; they are not filtered.
pub fn knn_l2(points: &Matrix, k: usize) -> Result<NeighborTable> {
    let n = points.rows();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, rows: n });
    }
    let heaps: Vec<Mutex<Bounded>> = (0..n).map(|_| Mutex::new(Bounded::new(k))).collect();

    upper_tiles(n).into_par_iter().for_each(|(q0, r0)| {
        let tile = Tile::compute(points, q0, r0);
        let diagonal = q0 == r0;
        for a in 0..tile.rows {
            let i = q0 + a;
            let start = if diagonal { a + 1 } else { 0 };
            let mut heap = heaps[i].lock().unwrap();
            for b in start..tile.cols {
                heap.push(Candidate { sq: tile.sq[a * tile.cols + b], index: r0 + b });
            }
        }
        for b in 0..tile.cols {
            let j = r0 + b;
            let end = if diagonal { b } else { tile.rows };
            let mut heap = heaps[j].lock().unwrap();
            for a in 0..end {
                heap.push(Candidate { sq: tile.sq[a * tile.cols + b], index: q0 + a });
            }
        }
    });

    let mut dist = Vec::with_capacity(n * k);
    let mut index = Vec::with_capacity(n * k);
    for heap in heaps {
        let sorted = heap.into_inner().unwrap().heap.into_sorted_vec();
        debug_assert_eq!(sorted.len(), k);
        for c in sorted {
            dist.push(c.sq.sqrt());
            index.push(c.index);
        }
    }
    Ok(NeighborTable { n, k, dist, index })
}

/// Position of pair `(i, j)`, `i < j`, in the condensed distance list.
#[inline]
pub fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairwise L2 distances in lexicographic `(i, j)`, `i < j` order.
pub fn pairwise_l2(points: &Matrix) -> Result<Vec<f64>> {
    let n = points.rows();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n });
    }
    let tiles: Vec<Tile> = upper_tiles(n).into_par_iter().map(|(q0, r0)| Tile::compute(points, q0, r0)).collect();
    let mut out = vec![0.0; n * (n - 1) / 2];
    for tile in &tiles {
        for (i, j, sq) in tile.pairs() {
            out[condensed_index(n, i, j)] = sq.sqrt();
        }
    }
    Ok(out)
}
