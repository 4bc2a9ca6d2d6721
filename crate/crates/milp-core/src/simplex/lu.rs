//! Sparse LU factorization of a simplex basis.
//!
//! LP bases are close to triangular, so the factorization first peels row and
//! column singletons (which produce L/U entries straight from the original
//! values, with no arithmetic), then runs a dense partially-pivoted LU on the
//! remaining bump. Solves against the factors are exposed as `ftran`
//! (`B x = v`) and `btran` (`B^T y = c`).

/// Basis matrices whose bump pivot falls below this are reported singular.
const SINGULAR_TOL: f64 = 1e-12;

pub struct Lu {
    m: usize,
    /// Original row index of the k-th pivot.
    row_of: Vec<u32>,
    /// Basis position (column) of the k-th pivot.
    col_of: Vec<u32>,
    /// Unit-lower-triangular factor, stored by pivot column: (pivot pos > k, multiplier).
    l_cols: Vec<Vec<(u32, f64)>>,
    /// Upper factor rows: diagonal separate, off-diagonals (pivot pos > k, value).
    u_diag: Vec<f64>,
    u_rows: Vec<Vec<(u32, f64)>>,
}

pub struct SingularBasis;

struct Entry {
    row: u32,
    col: u32,
    val: f64,
}

impl Lu {
    /// Factorizes the m x m matrix whose column `c` holds `columns[c]` as
    /// (row, value) pairs.
    pub fn factorize(m: usize, columns: &[Vec<(u32, f64)>]) -> Result<Lu, SingularBasis> {
        assert_eq!(columns.len(), m);
        let mut entries = Vec::new();
        let mut col_entry_ids: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut row_entry_ids: Vec<Vec<u32>> = vec![Vec::new(); m];
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                if v == 0.0 {
                    continue;
                }
                let id = entries.len() as u32;
                entries.push(Entry {
                    row: r,
                    col: c as u32,
                    val: v,
                });
                col_entry_ids[c].push(id);
                row_entry_ids[r as usize].push(id);
            }
        }

        let mut row_pivoted = vec![false; m];
        let mut col_pivoted = vec![false; m];
        let mut row_count: Vec<u32> = row_entry_ids.iter().map(|v| v.len() as u32).collect();
        let mut col_count: Vec<u32> = col_entry_ids.iter().map(|v| v.len() as u32).collect();
        if row_count.contains(&0) || col_count.contains(&0) {
            return Err(SingularBasis);
        }

        let alive = |e: &Entry, rp: &[bool], cp: &[bool]| {
            !rp[e.row as usize] && !cp[e.col as usize]
        };

        let mut row_of: Vec<u32> = Vec::with_capacity(m);
        let mut col_of: Vec<u32> = Vec::with_capacity(m);
        // L/U entries collected with original row / column ids; remapped to
        // pivot positions once the full pivot order is known.
        let mut l_raw: Vec<Vec<(u32, f64)>> = Vec::with_capacity(m);
        let mut u_raw: Vec<Vec<(u32, f64)>> = Vec::with_capacity(m);
        let mut u_diag: Vec<f64> = Vec::with_capacity(m);

        let mut col_stack: Vec<u32> = (0..m as u32).filter(|&c| col_count[c as usize] == 1).collect();
        let mut row_stack: Vec<u32> = (0..m as u32).filter(|&r| row_count[r as usize] == 1).collect();

        loop {
            let (pivot_row, pivot_col, from_col_stack) = if let Some(c) = col_stack.pop() {
                let c = c as usize;
                if col_pivoted[c] || col_count[c] != 1 {
                    continue;
                }
                let e = col_entry_ids[c]
                    .iter()
                    .map(|&id| &entries[id as usize])
                    .find(|e| alive(e, &row_pivoted, &col_pivoted))
                    .expect("count says one alive entry");
                (e.row as usize, c, true)
            } else if let Some(r) = row_stack.pop() {
                let r = r as usize;
                if row_pivoted[r] || row_count[r] != 1 {
                    continue;
                }
                let e = row_entry_ids[r]
                    .iter()
                    .map(|&id| &entries[id as usize])
                    .find(|e| alive(e, &row_pivoted, &col_pivoted))
                    .expect("count says one alive entry");
                (r, e.col as usize, false)
            } else {
                break;
            };

            let pivot_val = entries[col_entry_ids[pivot_col]
                .iter()
                .map(|&id| id as usize)
                .find(|&id| {
                    entries[id].row as usize == pivot_row && alive(&entries[id], &row_pivoted, &col_pivoted)
                })
                .expect("pivot entry alive")]
            .val;
            if pivot_val.abs() < SINGULAR_TOL {
                return Err(SingularBasis);
            }

            u_diag.push(pivot_val);
            row_of.push(pivot_row as u32);
            col_of.push(pivot_col as u32);

            if from_col_stack {
                // Column singleton: no multipliers; the pivot row's remaining
                // alive entries land in U.
                let mut urow = Vec::new();
                row_pivoted[pivot_row] = true;
                for &id in &row_entry_ids[pivot_row] {
                    let e = &entries[id as usize];
                    if e.col as usize == pivot_col || col_pivoted[e.col as usize] {
                        continue;
                    }
                    urow.push((e.col, e.val));
                    col_count[e.col as usize] -= 1;
                    if col_count[e.col as usize] == 1 {
                        col_stack.push(e.col);
                    }
                }
                col_pivoted[pivot_col] = true;
                l_raw.push(Vec::new());
                u_raw.push(urow);
            } else {
                // Row singleton: the pivot column's remaining alive entries
                // are eliminated into L; nothing joins U.
                let mut lcol = Vec::new();
                col_pivoted[pivot_col] = true;
                for &id in &col_entry_ids[pivot_col] {
                    let e = &entries[id as usize];
                    if e.row as usize == pivot_row || row_pivoted[e.row as usize] {
                        continue;
                    }
                    lcol.push((e.row, e.val / pivot_val));
                    row_count[e.row as usize] -= 1;
                    if row_count[e.row as usize] == 1 {
                        row_stack.push(e.row);
                    }
                }
                row_pivoted[pivot_row] = true;
                l_raw.push(lcol);
                u_raw.push(Vec::new());
            }
        }

        // Dense LU with partial pivoting on whatever the peel left behind.
        let bump_rows: Vec<usize> = (0..m).filter(|&r| !row_pivoted[r]).collect();
        let bump_cols: Vec<usize> = (0..m).filter(|&c| !col_pivoted[c]).collect();
        let k = bump_rows.len();
        debug_assert_eq!(k, bump_cols.len());
        if k > 0 {
            let mut dense = vec![0.0f64; k * k];
            let mut local_row = vec![usize::MAX; m];
            for (i, &r) in bump_rows.iter().enumerate() {
                local_row[r] = i;
            }
            for (j, &c) in bump_cols.iter().enumerate() {
                for &id in &col_entry_ids[c] {
                    let e = &entries[id as usize];
                    if !row_pivoted[e.row as usize] {
                        dense[local_row[e.row as usize] * k + j] = e.val;
                    }
                }
            }
            // perm[i] = original bump row occupying local position i.
            let mut perm: Vec<usize> = (0..k).collect();
            for step in 0..k {
                let mut best = step;
                let mut best_abs = dense[perm[step] * k + step].abs();
                for i in step + 1..k {
                    let a = dense[perm[i] * k + step].abs();
                    if a > best_abs {
                        best = i;
                        best_abs = a;
                    }
                }
                if best_abs < SINGULAR_TOL {
                    return Err(SingularBasis);
                }
                perm.swap(step, best);
                let prow = perm[step];
                let piv = dense[prow * k + step];

                u_diag.push(piv);
                row_of.push(bump_rows[prow] as u32);
                col_of.push(bump_cols[step] as u32);
                let mut urow = Vec::new();
                for j in step + 1..k {
                    let v = dense[prow * k + j];
                    if v != 0.0 {
                        urow.push((bump_cols[j] as u32, v));
                    }
                }
                u_raw.push(urow);

                let mut lcol = Vec::new();
                for &irow in perm.iter().skip(step + 1) {
                    let v = dense[irow * k + step];
                    if v == 0.0 {
                        continue;
                    }
                    let mult = v / piv;
                    lcol.push((bump_rows[irow] as u32, mult));
                    for j in step + 1..k {
                        dense[irow * k + j] -= mult * dense[prow * k + j];
                    }
                }
                l_raw.push(lcol);
            }
        }

        // Remap raw row/col ids to pivot positions.
        let mut pos_of_row = vec![u32::MAX; m];
        let mut pos_of_col = vec![u32::MAX; m];
        for (pos, (&r, &c)) in row_of.iter().zip(col_of.iter()).enumerate() {
            pos_of_row[r as usize] = pos as u32;
            pos_of_col[c as usize] = pos as u32;
        }
        let l_cols: Vec<Vec<(u32, f64)>> = l_raw
            .into_iter()
            .map(|col| {
                col.into_iter()
                    .map(|(r, v)| (pos_of_row[r as usize], v))
                    .collect()
            })
            .collect();
        let u_rows: Vec<Vec<(u32, f64)>> = u_raw
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(c, v)| (pos_of_col[c as usize], v))
                    .collect()
            })
            .collect();

        Ok(Lu {
            m,
            row_of,
            col_of,
            l_cols,
            u_diag,
            u_rows,
        })
    }

    /// Solves `B x = v`. Input `v` is indexed by row; the result is written to
    /// `out` indexed by basis position. `scratch` must have length m.
    pub fn ftran(&self, v: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            scratch[k] = v[self.row_of[k] as usize];
        }
        for k in 0..m {
            let wk = scratch[k];
            if wk != 0.0 {
                for &(i, mult) in &self.l_cols[k] {
                    scratch[i as usize] -= mult * wk;
                }
            }
        }
        for k in (0..m).rev() {
            let mut s = scratch[k];
            for &(j, val) in &self.u_rows[k] {
                s -= val * scratch[j as usize];
            }
            let xk = s / self.u_diag[k];
            scratch[k] = xk;
        }
        for k in 0..m {
            out[self.col_of[k] as usize] = scratch[k];
        }
    }

    /// Solves `B^T y = c`. Input `c` is indexed by basis position; the result
    /// is written to `out` indexed by row. `scratch` must have length m.
    pub fn btran(&self, c: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            scratch[k] = c[self.col_of[k] as usize];
        }
        for k in 0..m {
            let t = scratch[k] / self.u_diag[k];
            scratch[k] = t;
            if t != 0.0 {
                for &(j, val) in &self.u_rows[k] {
                    scratch[j as usize] -= val * t;
                }
            }
        }
        for k in (0..m).rev() {
            let mut s = scratch[k];
            for &(i, mult) in &self.l_cols[k] {
                s -= mult * scratch[i as usize];
            }
            scratch[k] = s;
        }
        for k in 0..m {
            out[self.row_of[k] as usize] = scratch[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(cols: &[Vec<(u32, f64)>], x: &[f64]) -> Vec<f64> {
        let m = cols.len();
        let mut out = vec![0.0; m];
        for (c, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                out[r as usize] += v * x[c];
            }
        }
        out
    }

    fn check_roundtrip(cols: Vec<Vec<(u32, f64)>>) {
        let m = cols.len();
        let lu = Lu::factorize(m, &cols).map_err(|_| "singular").unwrap();
        let x_true: Vec<f64> = (0..m).map(|i| (i as f64 * 0.7).sin() + 1.5).collect();
        let v = mat_vec(&cols, &x_true);
        let mut out = vec![0.0; m];
        let mut scratch = vec![0.0; m];
        lu.ftran(&v, &mut out, &mut scratch);
        for i in 0..m {
            assert!((out[i] - x_true[i]).abs() < 1e-9, "ftran mismatch at {i}");
        }
        // btran: pick y_true, compute c = B^T y, recover y.
        let y_true: Vec<f64> = (0..m).map(|i| (i as f64 * 1.3).cos() - 0.2).collect();
        let mut c = vec![0.0; m];
        for (cidx, col) in cols.iter().enumerate() {
            for &(r, v) in col {
                c[cidx] += v * y_true[r as usize];
            }
        }
        let mut y = vec![0.0; m];
        lu.btran(&c, &mut y, &mut scratch);
        for i in 0..m {
            assert!((y[i] - y_true[i]).abs() < 1e-9, "btran mismatch at {i}");
        }
    }

    #[test]
    fn identity() {
        check_roundtrip(vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 1.0)]]);
    }

    #[test]
    fn permuted_triangular() {
        check_roundtrip(vec![
            vec![(2, 3.0)],
            vec![(2, 1.0), (0, 2.0)],
            vec![(0, 0.5), (1, 4.0), (2, -1.0)],
        ]);
    }

    #[test]
    fn full_bump() {
        // Fully dense 4x4, nothing to peel after the first pass.
        let cols = vec![
            vec![(0, 2.0), (1, 1.0), (2, 0.5), (3, -1.0)],
            vec![(0, -1.0), (1, 3.0), (2, 1.0), (3, 0.25)],
            vec![(0, 0.1), (1, -0.7), (2, 2.5), (3, 1.0)],
            vec![(0, 1.0), (1, 0.3), (2, -0.2), (3, 4.0)],
        ];
        check_roundtrip(cols);
    }

    #[test]
    fn mixed_structure() {
        // Identity-ish slacks plus a dense block, the common basis shape.
        let cols = vec![
            vec![(0, 1.0)],
            vec![(1, -1.0), (3, 0.5)],
            vec![(2, 2.0), (3, 1.0), (4, -0.5)],
            vec![(3, 1.5), (4, 2.0), (2, -1.0)],
            vec![(4, 1.0), (2, 0.5), (3, -2.0)],
        ];
        check_roundtrip(cols);
    }

    #[test]
    fn singular_is_detected() {
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)]];
        assert!(Lu::factorize(2, &cols).is_err());
    }

    #[test]
    fn duplicate_column_is_singular() {
        let cols = vec![vec![(0, 1.0)], vec![(0, 1.0)]];
        assert!(Lu::factorize(2, &cols).is_err());
    }
}
