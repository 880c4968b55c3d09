//! Brute-force enumeration of weighted stone configurations.
//!
//! `2k` labelled stones are placed in the off-diagonal cells of an
//! `(n+1) x (n+1)` field. In the unordered variant the cells are the pairs
//! `i < j` and a vertex collects the stones of every cell it belongs to; in
//! the ordered variant the cells are the pairs `i != j` and row `i` collects
//! only the cells `(i, j)`. A configuration with some row holding exactly one
//! stone is discarded, and each surviving one is weighted by `p` to the number
//! of non-empty cells.
//!
//! Labelled stones mean a cell occupancy `(k_c)` is counted with multiplicity
//! `(2k)! / prod k_c!`, the coefficient it carries in the expansion of a
//! `2k`-th power of a sum over cells.

use crate::{Error, Result};

pub const MAX_VERTICES: usize = 10;
pub const MAX_K: usize = 2;

/// Largest bound ratios of [`bound_ratio_scan`] at `p = 1/2`, computed once
/// by exhaustive enumeration and frozen here. Keys are `(k, ordered)`; the
/// scanned `n` range is `4..=9` for `k = 1` and `4..=6` for `k = 2`.
///
/// The unordered ratios decrease in `n`. The ordered ones grow roughly like
/// `n`, because a single row holding all `2k` stones in distinct cells already
/// contributes about `n (np)^{2k}`; their constants only pin the scanned range.
pub const FROZEN_MAX_RATIO: [((usize, bool), f64); 4] = [
    ((1, false), 0.625),
    ((2, false), 2.1875),
    ((1, true), 11.11111111111111),
    ((2, true), 186.0185185185185),
];

pub fn frozen_max_ratio(k: usize, ordered: bool) -> Option<f64> {
    FROZEN_MAX_RATIO.iter().find(|(key, _)| *key == (k, ordered)).map(|(_, v)| *v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigSum {
    pub n_plus_1: usize,
    pub k: usize,
    pub p: f64,
    pub ordered: bool,
    /// `sum_c count_c p^c`
    pub value: f64,
    /// Number of admissible labelled configurations.
    pub config_count: u64,
    /// `counts_by_cells[c]`: admissible configurations with `c` non-empty
    /// cells.
    pub counts_by_cells: Vec<u64>,
}

struct Field {
    /// `(row, col)` per cell, sorted by row.
    cells: Vec<(usize, usize)>,
    ordered: bool,
    vertices: usize,
}

impl Field {
    fn new(vertices: usize, ordered: bool) -> Self {
        let mut cells = Vec::new();
        for i in 0..vertices {
            for j in 0..vertices {
                if (ordered && i != j) || (!ordered && i < j) {
                    cells.push((i, j));
                }
            }
        }
        Self { cells, ordered, vertices }
    }

    fn touch(&self, rows: &mut [usize], cell: usize, by: isize) {
        let (i, j) = self.cells[cell];
        rows[i] = (rows[i] as isize + by) as usize;
        if !self.ordered {
            rows[j] = (rows[j] as isize + by) as usize;
        }
    }
}

fn factorial(m: usize) -> u64 {
    (1..=m as u64).product()
}

struct Walk<'a> {
    field: &'a Field,
    stones: usize,
    rows: Vec<usize>,
    occupancy: Vec<usize>,
    counts: Vec<u64>,
}

impl Walk<'_> {
    /// Rows strictly below `row` receive no further stones once the walk has
    /// moved past them (cells are sorted by row and, in the unordered
    /// variant, a vertex only appears in cells of rows up to itself).
    fn rows_final_below(&self, row: usize) -> bool {
        self.rows[..row].iter().all(|&s| s != 1)
    }

    /// Place the remaining stones in cells `from..` with non-decreasing cell
    /// index.
    fn place(&mut self, from: usize, remaining: usize) {
        if remaining == 0 {
            if self.rows.iter().all(|&s| s != 1) {
                let nonempty: Vec<usize> = self.occupancy.iter().copied().filter(|&c| c > 0).collect();
                let weight = factorial(self.stones) / nonempty.iter().map(|&c| factorial(c)).product::<u64>();
                self.counts[nonempty.len()] += weight;
            }
            return;
        }
        for cell in from..self.field.cells.len() {
            let row = self.field.cells[cell].0;
            if !self.rows_final_below(row) {
                break;
            }
            for take in 1..=remaining {
                for _ in 0..take {
                    self.field.touch(&mut self.rows, cell, 1);
                }
                self.occupancy[cell] += take;
                self.place(cell + 1, remaining - take);
                self.occupancy[cell] -= take;
                for _ in 0..take {
                    self.field.touch(&mut self.rows, cell, -1);
                }
            }
        }
    }
}

fn check_regime(n_plus_1: usize, k: usize, p: f64) -> Result<()> {
    if !(2..=MAX_VERTICES).contains(&n_plus_1) || !(1..=MAX_K).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "enumeration regime is 2 <= n+1 <= {MAX_VERTICES}, 1 <= k <= {MAX_K}; got n+1 = {n_plus_1}, k = {k}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

/// Exact weighted sum over admissible configurations of `2k` stones.
pub fn weighted_config_sum(n_plus_1: usize, k: usize, p: f64, ordered: bool) -> Result<ConfigSum> {
    check_regime(n_plus_1, k, p)?;
    let field = Field::new(n_plus_1, ordered);
    let stones = 2 * k;
    let mut walk = Walk {
        field: &field,
        stones,
        rows: vec![0; field.vertices],
        occupancy: vec![0; field.cells.len()],
        counts: vec![0; stones + 1],
    };
    walk.place(0, stones);
    let counts = walk.counts;
    let value = counts.iter().enumerate().map(|(c, &w)| w as f64 * p.powi(c as i32)).sum();
    Ok(ConfigSum { n_plus_1, k, p, ordered, value, config_count: counts.iter().sum(), counts_by_cells: counts })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub n: usize,
    pub value: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioScan {
    pub k: usize,
    pub p: f64,
    pub ordered: bool,
    pub rows: Vec<RatioRow>,
    pub max_ratio: f64,
}

/// `value / (n^k (np)^k)` (unordered) or `value / (np)^{2k}` (ordered) for
/// each `n` in `n_list`, where the field has `n + 1` rows.
pub fn bound_ratio_scan(k: usize, n_list: &[usize], p: f64, ordered: bool) -> Result<RatioScan> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty n list".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let s = weighted_config_sum(n + 1, k, p, ordered)?;
        let np = n as f64 * p;
        let scale = if ordered { np.powi(2 * k as i32) } else { (n as f64).powi(k as i32) * np.powi(k as i32) };
        rows.push(RatioRow { n, value: s.value, ratio: s.value / scale });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioScan { k, p, ordered, rows, max_ratio })
}
