//! Distance-transform morphology: the exact Euclidean minimal distance
//! transform, 8-neighbour local maxima, locally adaptive thinning of those
//! maxima into anchor points, and 8-connected component labelling.
//!
//! All distance comparisons are made on integer squared distances; square
//! roots are only taken when values leave this module.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::image::BinaryImage;

const NEIGHBOURS_8: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Per-cell Euclidean distance to the nearest background cell, stored as
/// exact integer squared distances in pixel units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceField {
    rows: usize,
    cols: usize,
    squared: Vec<u64>,
}

impl DistanceField {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Squared distance at `(row, col)`.
    pub fn squared(&self, row: usize, col: usize) -> u64 {
        self.squared[row * self.cols + col]
    }

    /// Distance at `(row, col)` in pixel units.
    pub fn value(&self, row: usize, col: usize) -> f64 {
        (self.squared(row, col) as f64).sqrt()
    }

    pub fn squared_values(&self) -> &[u64] {
        &self.squared
    }

    pub fn values(&self) -> Vec<f64> {
        self.squared.iter().map(|&d| (d as f64).sqrt()).collect()
    }

    pub fn max_squared(&self) -> u64 {
        self.squared.iter().copied().max().unwrap_or(0)
    }

    /// Rotates the field like [`BinaryImage::rotate90`].
    pub fn rotate90(&self, quarter_turns: u32) -> Self {
        Self {
            rows: if quarter_turns % 2 == 1 { self.cols } else { self.rows },
            cols: if quarter_turns % 2 == 1 { self.rows } else { self.cols },
            squared: rotate_grid(&self.squared, self.rows, self.cols, quarter_turns),
        }
    }
}

/// Row-major boolean mask over an image grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    flags: Vec<bool>,
}

/// Anchor cells selected by [`adaptive_thin`].
pub type AnchorMask = Mask;

impl Mask {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.flags[row * self.cols + col]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Flagged cells as `(row, col)` in row-major order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| (i / self.cols, i % self.cols))
            .collect()
    }

    pub fn rotate90(&self, quarter_turns: u32) -> Self {
        Self {
            rows: if quarter_turns % 2 == 1 { self.cols } else { self.rows },
            cols: if quarter_turns % 2 == 1 { self.rows } else { self.cols },
            flags: rotate_grid(&self.flags, self.rows, self.cols, quarter_turns),
        }
    }
}

/// Connected-component labels: 0 is background, objects are `1..=count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelField {
    rows: usize,
    cols: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelField {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.cols + col]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of objects, `K`.
    pub fn count(&self) -> u32 {
        self.count
    }

    /// Cell count of every object, indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count as usize];
        for &l in &self.labels {
            if l > 0 {
                sizes[l as usize - 1] += 1;
            }
        }
        sizes
    }
}

fn rotate_grid<T: Copy>(data: &[T], rows: usize, cols: usize, quarter_turns: u32) -> Vec<T> {
    let mut out = data.to_vec();
    match quarter_turns % 4 {
        0 => {}
        1 => {
            for r in 0..rows {
                for c in 0..cols {
                    out[(cols - 1 - c) * rows + r] = data[r * cols + c];
                }
            }
        }
        2 => out.reverse(),
        _ => {
            for r in 0..rows {
                for c in 0..cols {
                    out[c * rows + (rows - 1 - r)] = data[r * cols + c];
                }
            }
        }
    }
    out
}

/// Exact Euclidean distance transform.
///
/// Only cells inside the image count as background; the area outside the
/// grid is not. Uses the two-pass separable algorithm of Meijster et al.:
/// a 1-D distance per column, then a lower envelope of parabolas per row,
/// entirely in integer arithmetic.
pub fn distance_transform(img: &BinaryImage) -> Result<DistanceField> {
    if !img.has_background() {
        return Err(Error::AllForeground);
    }
    let (rows, cols) = (img.rows(), img.cols());
    // Larger than any in-grid distance, small enough that its square plus a
    // squared column offset cannot overflow.
    let inf = (rows + cols) as i64;

    // Column pass: vertical distance to the nearest background cell.
    let mut g = vec![inf; rows * cols];
    for c in 0..cols {
        if !img.is_foreground(0, c) {
            g[c] = 0;
        }
        for r in 1..rows {
            let i = r * cols + c;
            g[i] = if img.is_foreground(r, c) {
                (g[i - cols] + 1).min(inf)
            } else {
                0
            };
        }
        for r in (0..rows.saturating_sub(1)).rev() {
            let i = r * cols + c;
            let below = g[i + cols] + 1;
            if below < g[i] {
                g[i] = below;
            }
        }
    }

    // Row pass: lower envelope of parabolas (x - u)^2 + g(u)^2.
    let mut squared = vec![0u64; rows * cols];
    let mut s = vec![0usize; cols];
    let mut t = vec![0i64; cols];
    for r in 0..rows {
        let row = &g[r * cols..(r + 1) * cols];
        let f = |x: i64, i: usize| -> i64 {
            let dx = x - i as i64;
            dx * dx + row[i] * row[i]
        };
        let sep = |i: usize, u: usize| -> i64 {
            let (i64_i, i64_u) = (i as i64, u as i64);
            let num = i64_u * i64_u - i64_i * i64_i + row[u] * row[u] - row[i] * row[i];
            num.div_euclid(2 * (i64_u - i64_i))
        };

        let mut q: isize = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..cols {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let w = 1 + sep(s[q as usize], u);
                if w < cols as i64 {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = w;
                }
            }
        }
        for u in (0..cols).rev() {
            squared[r * cols + u] = f(u as i64, s[q as usize]) as u64;
            if u as i64 == t[q as usize] {
                q -= 1;
            }
        }
    }

    Ok(DistanceField { rows, cols, squared })
}

/// Cells whose distance is positive and at least that of every in-grid
/// 8-neighbour. Ties are kept, so a flat plateau is flagged entirely.
pub fn local_maxima(field: &DistanceField) -> Mask {
    let (rows, cols) = (field.rows, field.cols);
    let mut flags = vec![false; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let v = field.squared(r, c);
            if v == 0 {
                continue;
            }
            flags[r * cols + c] = neighbours(r, c, rows, cols).all(|(nr, nc)| v >= field.squared(nr, nc));
        }
    }
    Mask { rows, cols, flags }
}

fn neighbours(r: usize, c: usize, rows: usize, cols: usize) -> impl Iterator<Item = (usize, usize)> {
    NEIGHBOURS_8.iter().filter_map(move |&(dr, dc)| {
        let nr = r.checked_add_signed(dr)?;
        let nc = c.checked_add_signed(dc)?;
        (nr < rows && nc < cols).then_some((nr, nc))
    })
}

const BUCKET: usize = 16;

/// Spatial hash of accepted anchors for radius queries.
struct AnchorBuckets {
    bucket_cols: usize,
    bucket_rows: usize,
    buckets: Vec<Vec<(usize, usize)>>,
}

impl AnchorBuckets {
    fn new(rows: usize, cols: usize) -> Self {
        let bucket_rows = rows.div_ceil(BUCKET);
        let bucket_cols = cols.div_ceil(BUCKET);
        Self {
            bucket_cols,
            bucket_rows,
            buckets: vec![Vec::new(); bucket_rows * bucket_cols],
        }
    }

    fn insert(&mut self, r: usize, c: usize) {
        self.buckets[(r / BUCKET) * self.bucket_cols + c / BUCKET].push((r, c));
    }

    /// Whether any stored anchor lies strictly closer than `sqrt(radius_sq)` to `(r, c)`.
    fn any_within(&self, r: usize, c: usize, radius_sq: u64) -> bool {
        // ceil(sqrt) is enough reach; the exact test is done in integers.
        let reach = ((radius_sq as f64).sqrt().ceil() as usize) + 1;
        let br0 = r.saturating_sub(reach) / BUCKET;
        let br1 = ((r + reach) / BUCKET).min(self.bucket_rows - 1);
        let bc0 = c.saturating_sub(reach) / BUCKET;
        let bc1 = ((c + reach) / BUCKET).min(self.bucket_cols - 1);
        (br0..=br1).any(|br| {
            (bc0..=bc1).any(|bc| {
                self.buckets[br * self.bucket_cols + bc].iter().any(|&(ar, ac)| {
                    let dr = ar.abs_diff(r) as u64;
                    let dc = ac.abs_diff(c) as u64;
                    dr * dr + dc * dc < radius_sq
                })
            })
        })
    }
}

/// Locally adaptive thinning of local maxima into anchor points.
///
/// Candidates are visited by decreasing distance value, ties in row-major
/// order. A candidate is accepted when every previously accepted anchor is
/// at least its own distance value away, so no two anchors end up closer to
/// each other than to the object boundary.
pub fn adaptive_thin(field: &DistanceField, maxima: &Mask) -> AnchorMask {
    let (rows, cols) = (field.rows, field.cols);
    let mut candidates: Vec<usize> = maxima
        .flags
        .iter()
        .enumerate()
        .filter(|&(i, &f)| f && field.squared[i] > 0)
        .map(|(i, _)| i)
        .collect();
    // stable sort keeps row-major order among ties
    candidates.sort_by_key(|&i| std::cmp::Reverse(field.squared[i]));

    let mut buckets = AnchorBuckets::new(rows, cols);
    let mut flags = vec![false; rows * cols];
    for i in candidates {
        let (r, c) = (i / cols, i % cols);
        if !buckets.any_within(r, c, field.squared[i]) {
            buckets.insert(r, c);
            flags[i] = true;
        }
    }
    Mask { rows, cols, flags }
}

/// 8-connected component labelling. Labels follow the row-major position of
/// each component's first cell.
pub fn connected_components(img: &BinaryImage) -> LabelField {
    let (rows, cols) = (img.rows(), img.cols());
    let mut labels = vec![0u32; rows * cols];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..rows * cols {
        if img.cells()[start] == 0 || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for (nr, nc) in neighbours(i / cols, i % cols, rows, cols) {
                let j = nr * cols + nc;
                if img.cells()[j] == 1 && labels[j] == 0 {
                    labels[j] = count;
                    queue.push_back(j);
                }
            }
        }
    }
    LabelField {
        rows,
        cols,
        labels,
        count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// O(n^2) oracle: minimum squared distance to any background cell.
    fn brute_force_sq(img: &BinaryImage) -> Vec<u64> {
        let bg: Vec<(i64, i64)> = (0..img.rows())
            .flat_map(|r| (0..img.cols()).map(move |c| (r, c)))
            .filter(|&(r, c)| !img.is_foreground(r, c))
            .map(|(r, c)| (r as i64, c as i64))
            .collect();
        (0..img.rows())
            .flat_map(|r| (0..img.cols()).map(move |c| (r as i64, c as i64)))
            .map(|(r, c)| {
                bg.iter()
                    .map(|&(br, bc)| ((r - br).pow(2) + (c - bc).pow(2)) as u64)
                    .min()
                    .unwrap()
            })
            .collect()
    }

    /// Whether two labellings induce the same partition (labels may differ).
    fn same_partition(a: &LabelField, b: &[u32]) -> bool {
        use std::collections::HashMap;
        let mut ab = HashMap::new();
        let mut ba = HashMap::new();
        a.labels()
            .iter()
            .zip(b)
            .all(|(&x, &y)| (x == 0) == (y == 0) && *ab.entry(x).or_insert(y) == y && *ba.entry(y).or_insert(x) == x)
    }

    fn arb_image(max: usize) -> impl Strategy<Value = BinaryImage> {
        (1usize..max, 1usize..max, 0.0f64..1.0).prop_flat_map(|(r, c, p)| {
            proptest::collection::vec(proptest::bool::weighted(p), r * c).prop_map(move |cells| {
                let mut cells: Vec<u8> = cells.into_iter().map(u8::from).collect();
                cells[0] = 0;
                BinaryImage::new(r, c, cells).unwrap()
            })
        })
    }

    #[test]
    fn all_zero_field() {
        let f = distance_transform(&BinaryImage::zeros(4, 5)).unwrap();
        assert!(f.squared_values().iter().all(|&v| v == 0));
        assert_eq!(local_maxima(&f).count(), 0);
    }

    #[test]
    fn all_foreground_is_an_error() {
        let img = BinaryImage::from_fn(3, 3, |_, _| true);
        assert!(matches!(distance_transform(&img), Err(Error::AllForeground)));
    }

    #[test]
    fn single_interior_pixel() {
        let img = BinaryImage::from_ascii(&["...", ".#.", "..."]).unwrap();
        let f = distance_transform(&img).unwrap();
        assert_eq!(f.value(1, 1), 1.0);
        assert_eq!(f.squared_values().iter().sum::<u64>(), 1);
    }

    #[test]
    fn centered_block_5x5() {
        let img = BinaryImage::from_ascii(&[".....", ".###.", ".###.", ".###.", "....."]).unwrap();
        let f = distance_transform(&img).unwrap();
        assert_eq!(f.squared_values(), brute_force_sq(&img).as_slice());
        assert_eq!(f.value(2, 2), 2.0);
        for (r, c) in [(1, 2), (2, 1), (2, 3), (3, 2), (1, 1), (1, 3), (3, 1), (3, 3)] {
            assert_eq!(f.value(r, c), 1.0);
        }
    }

    #[test]
    fn exterior_is_not_background() {
        // object touching the left border: the border does not count
        let img = BinaryImage::from_ascii(&["###."]).unwrap();
        let f = distance_transform(&img).unwrap();
        assert_eq!(f.squared_values(), &[9, 4, 1, 0]);
    }

    #[test]
    fn maxima_of_increasing_row() {
        let img = BinaryImage::from_ascii(&["#####."]).unwrap();
        let f = distance_transform(&img).unwrap();
        assert_eq!(f.values()[..5], [5.0, 4.0, 3.0, 2.0, 1.0]);
        // reversed orientation of the 1x5 (1,2,3,4,5) example
        let m = local_maxima(&f);
        assert_eq!(m.cells(), vec![(0, 0)]);
        let rev = BinaryImage::from_ascii(&[".#####"]).unwrap();
        let m = local_maxima(&distance_transform(&rev).unwrap());
        assert_eq!(m.cells(), vec![(0, 5)]);
    }

    #[test]
    fn plateau_is_fully_flagged() {
        let img = BinaryImage::from_ascii(&["......", ".####.", "......"]).unwrap();
        let f = distance_transform(&img).unwrap();
        let m = local_maxima(&f);
        assert_eq!(m.cells(), vec![(1, 1), (1, 2), (1, 3), (1, 4)]);
        // mutual distance 1 >= radius 1: all survive
        assert_eq!(adaptive_thin(&f, &m).count(), 4);
    }

    #[test]
    fn tied_plateau_collapses_to_first() {
        // 3-wide bar: the middle row is a plateau of value 2 away from the ends
        let img = BinaryImage::from_ascii(&[".........", ".#######.", ".#######.", ".#######.", "........."]).unwrap();
        let f = distance_transform(&img).unwrap();
        let m = local_maxima(&f);
        assert_eq!(m.cells(), vec![(2, 2), (2, 3), (2, 4), (2, 5), (2, 6)]);
        let anchors = adaptive_thin(&f, &m);
        // radius 2: accepted at column 2, then 4, then 6
        assert_eq!(anchors.cells(), vec![(2, 2), (2, 4), (2, 6)]);
    }

    #[test]
    fn plateau_mutually_closer_than_radius() {
        // four tied maxima of radius 3 forming a 2x2 block
        let img = BinaryImage::from_ascii(&[
            "........", ".######.", ".######.", ".######.", ".######.", ".######.", ".######.", "........",
        ])
        .unwrap();
        let f = distance_transform(&img).unwrap();
        let m = local_maxima(&f);
        assert_eq!(m.cells(), vec![(3, 3), (3, 4), (4, 3), (4, 4)]);
        assert_eq!(adaptive_thin(&f, &m).cells(), vec![(3, 3)]);
    }

    #[test]
    fn single_run_one_anchor() {
        let img = BinaryImage::from_ascii(&["...........", ".#########.", "..........."]).unwrap();
        let f = distance_transform(&img).unwrap();
        // row-only profile would be 1..5..1; neighbouring rows cap it at 1
        let run = BinaryImage::from_ascii(&[".#########."]).unwrap();
        let fr = distance_transform(&run).unwrap();
        assert_eq!(fr.values()[1..10], [1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0, 1.0]);
        let m = local_maxima(&fr);
        assert_eq!(m.cells(), vec![(0, 5)]);
        assert_eq!(adaptive_thin(&fr, &m).cells(), vec![(0, 5)]);
        assert!(adaptive_thin(&f, &local_maxima(&f)).count() >= 1);
    }

    #[test]
    fn single_maximum_is_anchor() {
        let img = BinaryImage::from_ascii(&["...", ".#.", "..."]).unwrap();
        let f = distance_transform(&img).unwrap();
        let m = local_maxima(&f);
        assert_eq!(adaptive_thin(&f, &m).cells(), vec![(1, 1)]);
    }

    #[test]
    fn components_basic() {
        let cc = connected_components(&BinaryImage::zeros(3, 3));
        assert_eq!(cc.count(), 0);
        assert!(cc.labels().iter().all(|&l| l == 0));

        let diag = BinaryImage::from_ascii(&["#.", ".#"]).unwrap();
        assert_eq!(connected_components(&diag).count(), 1);

        let two = BinaryImage::from_ascii(&["##...", "##...", ".....", "...##", "...##"]).unwrap();
        let cc = connected_components(&two);
        assert_eq!(cc.count(), 2);
        assert_eq!(cc.get(0, 0), 1);
        assert_eq!(cc.get(4, 4), 2);
        assert_eq!(cc.sizes(), vec![4, 4]);
    }

    #[test]
    fn components_scan_order() {
        // the component whose first cell comes first gets label 1 even if it
        // extends further down
        let img = BinaryImage::from_ascii(&["..#", "#.#", "#.#"]).unwrap();
        let cc = connected_components(&img);
        assert_eq!(cc.get(0, 2), 1);
        assert_eq!(cc.get(1, 0), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn edt_matches_brute_force(img in arb_image(24)) {
            let f = distance_transform(&img).unwrap();
            let expected = brute_force_sq(&img);
            prop_assert_eq!(f.squared_values(), expected.as_slice());
        }

        #[test]
        fn anchors_are_separated(img in arb_image(32)) {
            let f = distance_transform(&img).unwrap();
            let maxima = local_maxima(&f);
            let anchors = adaptive_thin(&f, &maxima);
            let cells = anchors.cells();
            for &(r, c) in &cells {
                prop_assert!(maxima.get(r, c));
                prop_assert!(f.squared(r, c) > 0);
            }
            for (i, &(r1, c1)) in cells.iter().enumerate() {
                for &(r2, c2) in &cells[i + 1..] {
                    let d2 = (r1.abs_diff(r2).pow(2) + c1.abs_diff(c2).pow(2)) as u64;
                    prop_assert!(d2 >= f.squared(r1, c1).min(f.squared(r2, c2)));
                }
            }
            // every object carries at least one anchor
            let cc = connected_components(&img);
            let mut seen = vec![false; cc.count() as usize];
            for &(r, c) in &cells {
                seen[cc.get(r, c) as usize - 1] = true;
            }
            prop_assert!(seen.iter().all(|&s| s));
        }

        #[test]
        fn rotation_equivariance(img in arb_image(20), k in 1u32..4) {
            let rot = img.rotate90(k);
            let f = distance_transform(&img).unwrap();
            let fr = distance_transform(&rot).unwrap();
            prop_assert_eq!(&f.rotate90(k), &fr);
            prop_assert_eq!(local_maxima(&f).rotate90(k), local_maxima(&fr));

            let cc = connected_components(&img);
            let ccr = connected_components(&rot);
            prop_assert_eq!(cc.count(), ccr.count());
            let rotated_labels = rotate_grid(cc.labels(), img.rows(), img.cols(), k);
            prop_assert!(same_partition(&ccr, &rotated_labels));
        }

        #[test]
        fn components_are_maximal(img in arb_image(20)) {
            let cc = connected_components(&img);
            let (rows, cols) = (img.rows(), img.cols());
            for r in 0..rows {
                for c in 0..cols {
                    let l = cc.get(r, c);
                    prop_assert_eq!(l == 0, !img.is_foreground(r, c));
                    if l > 0 {
                        for (nr, nc) in neighbours(r, c, rows, cols) {
                            let m = cc.get(nr, nc);
                            prop_assert!(m == 0 || m == l);
                        }
                    }
                }
            }
            let mut used = vec![false; cc.count() as usize];
            for &l in cc.labels() {
                if l > 0 { used[l as usize - 1] = true; }
            }
            prop_assert!(used.iter().all(|&u| u));
        }
    }
}
