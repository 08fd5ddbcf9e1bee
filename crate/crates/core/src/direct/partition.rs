//! Flat rectangle store for the DIRECT partition of the unit hypercube.
//!
//! Rectangle `id` owns slots `id * n .. (id + 1) * n` of the per-dimension
//! arrays. Each coordinate is kept exactly as a trisection level `L` and a
//! cell index `a`, so the side is `3^-L` and the center is
//! `(2a + 1) / (2 * 3^L)`; the `f64` centers are mirrors of that.

use std::collections::{BTreeMap, BTreeSet};
use std::cmp::Ordering;

use crate::direct::poh::{potentially_optimal, HullPoint};
use crate::error::EvalError;

/// Rectangles whose shortest side reaches this level are no longer divided.
pub const MAX_LEVEL: u8 = 30;

/// Measures closer than `1e-12` share a group.
const MEASURE_SCALE: f64 = 1e12;

/// Center-to-vertex distance of a rectangle with the given trisection levels.
pub fn measure(levels: &[u8]) -> f64 {
    0.5 * levels
        .iter()
        .map(|&l| 9f64.powi(-i32::from(l)))
        .sum::<f64>()
        .sqrt()
}

fn measure_key(d: f64) -> i64 {
    (d * MEASURE_SCALE).round() as i64
}

fn cell_center(cell: u64, level: u8) -> f64 {
    (2 * cell + 1) as f64 / (2.0 * 3f64.powi(i32::from(level)))
}

/// Owned copy of one partition cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    pub id: usize,
    pub center: Vec<f64>,
    pub levels: Vec<u8>,
    /// Exact cell index per dimension at that dimension's level.
    pub cells: Vec<u64>,
    pub value: f64,
}

impl Rectangle {
    pub fn measure(&self) -> f64 {
        measure(&self.levels)
    }

    pub fn volume(&self) -> f64 {
        self.levels.iter().map(|&l| 3f64.powi(-i32::from(l))).product()
    }
}

#[derive(Debug, Clone, Copy)]
struct ByValue {
    value: f64,
    id: usize,
}

impl PartialEq for ByValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ByValue {}

impl PartialOrd for ByValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone)]
struct Group {
    measure: f64,
    members: BTreeSet<ByValue>,
}

/// The set of rectangles tiling `[0, 1]^n`, grouped by measure.
#[derive(Debug, Clone)]
pub struct PartitionState {
    dim: usize,
    levels: Vec<u8>,
    cells: Vec<u64>,
    centers: Vec<f64>,
    values: Vec<f64>,
    groups: BTreeMap<i64, Group>,
    retired: BTreeSet<usize>,
    smallest_measure: f64,
    f_min: f64,
    x_min: Vec<f64>,
}

impl PartitionState {
    /// The undivided unit cube, with `center_value` = f at its center.
    pub fn new(dim: usize, center_value: f64) -> Self {
        assert!(dim >= 1, "partition needs at least one dimension");
        let mut state = Self {
            dim,
            levels: Vec::new(),
            cells: Vec::new(),
            centers: Vec::new(),
            values: Vec::new(),
            groups: BTreeMap::new(),
            retired: BTreeSet::new(),
            smallest_measure: f64::INFINITY,
            f_min: center_value,
            x_min: vec![0.5; dim],
        };
        let id = state.push(&vec![0; dim], &vec![0; dim], &vec![0.5; dim], center_value);
        state.index(id);
        state
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest objective value seen by this partition, including samples of
    /// an interrupted division.
    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    /// Unit-cube location of [`Self::f_min`].
    pub fn x_min(&self) -> &[f64] {
        &self.x_min
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn smallest_measure(&self) -> f64 {
        self.smallest_measure
    }

    pub fn value(&self, id: usize) -> f64 {
        self.values[id]
    }

    pub fn levels(&self, id: usize) -> &[u8] {
        &self.levels[id * self.dim..(id + 1) * self.dim]
    }

    pub fn center(&self, id: usize) -> &[f64] {
        &self.centers[id * self.dim..(id + 1) * self.dim]
    }

    pub fn rectangle(&self, id: usize) -> Rectangle {
        let r = id * self.dim..(id + 1) * self.dim;
        Rectangle {
            id,
            center: self.centers[r.clone()].to_vec(),
            levels: self.levels[r.clone()].to_vec(),
            cells: self.cells[r].to_vec(),
            value: self.values[id],
        }
    }

    pub fn rectangles(&self) -> impl Iterator<Item = Rectangle> + '_ {
        (0..self.len()).map(|id| self.rectangle(id))
    }

    /// Groups in ascending measure order, each as `(measure, ids by ascending value)`.
    pub fn groups(&self) -> impl Iterator<Item = (f64, Vec<usize>)> + '_ {
        self.groups
            .values()
            .map(|g| (g.measure, g.members.iter().map(|m| m.id).collect()))
    }

    /// Rectangles too small to divide further.
    pub fn retired(&self) -> impl Iterator<Item = usize> + '_ {
        self.retired.iter().copied()
    }

    fn push(&mut self, levels: &[u8], cells: &[u64], center: &[f64], value: f64) -> usize {
        let id = self.values.len();
        self.levels.extend_from_slice(levels);
        self.cells.extend_from_slice(cells);
        self.centers.extend_from_slice(center);
        self.values.push(value);
        id
    }

    fn index(&mut self, id: usize) {
        let lv = self.levels(id);
        let d = measure(lv);
        let shortest = lv.iter().copied().min().unwrap_or(0);
        self.smallest_measure = self.smallest_measure.min(d);
        if shortest >= MAX_LEVEL {
            self.retired.insert(id);
            return;
        }
        self.groups
            .entry(measure_key(d))
            .or_insert_with(|| Group {
                measure: d,
                members: BTreeSet::new(),
            })
            .members
            .insert(ByValue {
                value: self.values[id],
                id,
            });
    }

    fn unindex(&mut self, id: usize) {
        let key = measure_key(measure(self.levels(id)));
        let entry = ByValue {
            value: self.values[id],
            id,
        };
        if let Some(g) = self.groups.get_mut(&key) {
            g.members.remove(&entry);
            if g.members.is_empty() {
                self.groups.remove(&key);
            }
        }
    }

    /// Ids of the potentially optimal rectangles for the given `eps`.
    pub fn identify_poh(&self, eps: f64) -> Vec<usize> {
        let reps: Vec<HullPoint> = self
            .groups
            .values()
            .filter_map(|g| {
                g.members.first().map(|m| HullPoint {
                    measure: g.measure,
                    value: m.value,
                    id: m.id,
                })
            })
            .collect();
        potentially_optimal(&reps, eps)
    }

    /// Samples `c ± δe_i` along every longest side of rectangle `id` and
    /// trisects it along those sides, most promising dimension first.
    ///
    /// `eval` receives unit-cube points. All samples are taken before the
    /// partition changes, so a refused evaluation leaves the tiling intact;
    /// values that were obtained still update [`Self::f_min`]. Returns the
    /// ids of the new rectangles.
    pub fn sample_and_divide<F>(&mut self, id: usize, eval: &mut F) -> Result<Vec<usize>, EvalError>
    where
        F: FnMut(&[f64]) -> Result<f64, EvalError>,
    {
        let n = self.dim;
        let lmin = self.levels(id).iter().copied().min().expect("dim >= 1");
        if lmin >= MAX_LEVEL {
            return Ok(Vec::new());
        }
        let longest: Vec<usize> = (0..n).filter(|&i| self.levels(id)[i] == lmin).collect();
        let base_cells = self.cells[id * n..(id + 1) * n].to_vec();
        let center = self.center(id).to_vec();

        // (dimension, [(cell, center coordinate, value); lower, upper])
        let mut samples: Vec<(usize, [(u64, f64, f64); 2])> = Vec::with_capacity(longest.len());
        let mut point = center.clone();
        for &i in &longest {
            let mut sides = [(0u64, 0.0f64, 0.0f64); 2];
            for (slot, offset) in [0u64, 2].into_iter().enumerate() {
                let cell = 3 * base_cells[i] + offset;
                let coord = cell_center(cell, lmin + 1);
                point[i] = coord;
                let v = eval(&point)?;
                if v < self.f_min {
                    self.f_min = v;
                    self.x_min.copy_from_slice(&point);
                }
                sides[slot] = (cell, coord, v);
            }
            point[i] = center[i];
            samples.push((i, sides));
        }

        samples.sort_by(|a, b| {
            let wa = a.1[0].2.min(a.1[1].2);
            let wb = b.1[0].2.min(b.1[1].2);
            wa.total_cmp(&wb).then(a.0.cmp(&b.0))
        });

        self.unindex(id);
        let mut created = Vec::with_capacity(2 * samples.len());
        for (i, sides) in &samples {
            let i = *i;
            self.levels[id * n + i] += 1;
            self.cells[id * n + i] = 3 * base_cells[i] + 1;
            let levels = self.levels(id).to_vec();
            let cells = self.cells[id * n..(id + 1) * n].to_vec();
            for &(cell, coord, value) in sides {
                let mut c = cells.clone();
                c[i] = cell;
                let mut p = center.clone();
                p[i] = coord;
                let child = self.push(&levels, &c, &p, value);
                self.index(child);
                created.push(child);
            }
        }
        self.index(id);
        Ok(created)
    }

    /// Verifies that the rectangles tile the unit cube: volumes sum to one
    /// within `1e-9` and no two rectangles share interior points, the latter
    /// decided exactly on the integer cell coordinates.
    pub fn check_tiling(&self) -> Result<(), String> {
        let n = self.dim;
        let m = self.len();
        let volume: f64 = self.rectangles().map(|r| r.volume()).sum();
        if (volume - 1.0).abs() > 1e-9 {
            return Err(format!("volumes sum to {volume}"));
        }
        let finest: Vec<u8> = (0..n)
            .map(|i| (0..m).map(|r| self.levels[r * n + i]).max().unwrap_or(0))
            .collect();
        // Half-open integer intervals at resolution 3^finest[i].
        let mut lo = vec![0u64; m * n];
        let mut hi = vec![0u64; m * n];
        for r in 0..m {
            for i in 0..n {
                let scale = 3u64.pow(u32::from(finest[i] - self.levels[r * n + i]));
                let a = self.cells[r * n + i];
                lo[r * n + i] = a * scale;
                hi[r * n + i] = (a + 1) * scale;
                if hi[r * n + i] > 3u64.pow(u32::from(finest[i])) {
                    return Err(format!("rectangle {r} leaves the unit cube in dimension {i}"));
                }
            }
        }
        let sweep = (0..n).max_by_key(|&i| finest[i]).unwrap_or(0);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&r| lo[r * n + sweep]);
        let mut active: Vec<usize> = Vec::new();
        for &r in &order {
            let start = lo[r * n + sweep];
            active.retain(|&a| hi[a * n + sweep] > start);
            for &a in &active {
                let overlap = (0..n).all(|i| lo[a * n + i] < hi[r * n + i] && lo[r * n + i] < hi[a * n + i]);
                if overlap {
                    return Err(format!("rectangles {a} and {r} overlap"));
                }
            }
            active.push(r);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn divide_with(state: &mut PartitionState, id: usize, f: impl Fn(&[f64]) -> f64) -> Vec<usize> {
        state.sample_and_divide(id, &mut |z: &[f64]| Ok(f(z))).unwrap()
    }

    #[test]
    fn measure_examples() {
        assert!((measure(&[0, 0]) - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!((measure(&[1]) - 1.0 / 6.0).abs() < 1e-15);
        // n = 3 after one division: p = 1, k = 0.
        let eq5 = 0.5 * (3f64.powi(-2) + 2.0).sqrt();
        assert!((measure(&[1, 0, 0]) - eq5).abs() < 1e-15);
        assert!((measure(&[1, 0, 0]) - 0.726_483_2).abs() < 1e-7);
    }

    #[test]
    fn one_dimensional_division() {
        let mut s = PartitionState::new(1, 0.5);
        let new = divide_with(&mut s, 0, |z| z[0]);
        assert_eq!(new.len(), 2);
        let mut centers: Vec<f64> = s.rectangles().map(|r| r.center[0]).collect();
        centers.sort_by(f64::total_cmp);
        for (c, want) in centers.iter().zip([1.0 / 6.0, 0.5, 5.0 / 6.0]) {
            assert!((c - want).abs() < 1e-15);
        }
        assert!(s.rectangles().all(|r| r.levels == vec![1]));
        assert_eq!(s.f_min(), 1.0 / 6.0);
        s.check_tiling().unwrap();
    }

    #[test]
    fn two_dimensional_division_order() {
        let mut s = PartitionState::new(2, 0.5);
        let mut calls = 0;
        s.sample_and_divide(0, &mut |z: &[f64]| {
            calls += 1;
            Ok(z[0])
        })
        .unwrap();
        assert_eq!(calls, 4);
        let mut rects: Vec<(Vec<u64>, Vec<u8>)> = s
            .rectangles()
            .map(|r| {
                // centers as multiples of 1/6 for exact comparison
                let c = r.center.iter().map(|v| (v * 6.0).round() as u64).collect();
                (c, r.levels)
            })
            .collect();
        rects.sort();
        let mut want = vec![
            (vec![1, 3], vec![1, 0]),
            (vec![5, 3], vec![1, 0]),
            (vec![3, 1], vec![1, 1]),
            (vec![3, 5], vec![1, 1]),
            (vec![3, 3], vec![1, 1]),
        ];
        want.sort();
        assert_eq!(rects, want);
        s.check_tiling().unwrap();
    }

    #[test]
    fn equal_weights_divide_lower_dimension_first() {
        let mut s = PartitionState::new(2, 0.0);
        divide_with(&mut s, 0, |_| 1.0);
        // Children of the first divided dimension keep the other side long.
        assert_eq!(s.levels(1), &[1, 0]);
        assert_eq!(s.levels(3), &[1, 1]);
    }

    #[test]
    fn refused_evaluation_leaves_tiling_untouched() {
        let mut s = PartitionState::new(2, 1.0);
        let mut left = 3;
        let r = s.sample_and_divide(0, &mut |z: &[f64]| {
            if left == 0 {
                return Err(EvalError::Halted(crate::error::Halt::EvalBudget));
            }
            left -= 1;
            Ok(z[0] - 1.0)
        });
        assert!(r.is_err());
        assert_eq!(s.len(), 1);
        assert_eq!(s.group_count(), 1);
        assert_eq!(s.f_min(), 1.0 / 6.0 - 1.0);
        s.check_tiling().unwrap();
    }

    #[test]
    fn overlap_is_detected() {
        let mut s = PartitionState::new(1, 0.0);
        divide_with(&mut s, 0, |z| z[0]);
        s.cells[1] = 1; // move a child onto the middle cell
        assert!(s.check_tiling().is_err());
    }

    #[test]
    fn deep_rectangles_retire() {
        let mut s = PartitionState::new(1, 0.0);
        let f = |z: &[f64]| (z[0] - 0.3).abs();
        for _ in 0..40 {
            let best = s.identify_poh(1e-4);
            for id in best {
                divide_with(&mut s, id, f);
            }
        }
        assert!(s.retired().count() > 0);
        assert!(s.retired().all(|id| s.levels(id)[0] >= MAX_LEVEL));
        s.check_tiling().unwrap();
    }
}
