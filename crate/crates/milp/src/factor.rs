//! Sparse basis factorization for the revised simplex.
//!
//! The basis matrix is factorized as `P B Q = L U` where the permutations
//! come from singleton peeling: columns or rows of the active submatrix with
//! a single remaining entry pivot for free without fill, which triangularizes
//! most of an LP basis. The remaining bump is eliminated left-looking with
//! partial pivoting. Pivots after the factorization are absorbed into a
//! product-form eta file until the caller refactorizes.

/// Column-compressed matrix holding every column of the standard-form
/// problem (structural, slack, artificial).
#[derive(Debug, Clone)]
pub(crate) struct ColMatrix {
    pub nrows: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl ColMatrix {
    pub fn ncols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        (&self.row_idx[lo..hi], &self.values[lo..hi])
    }
}

/// Builder used when assembling the standard form.
#[derive(Debug, Default)]
pub(crate) struct ColMatrixBuilder {
    nrows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl ColMatrixBuilder {
    pub fn new(nrows: usize) -> Self {
        ColMatrixBuilder {
            nrows,
            col_ptr: vec![0],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push_col(&mut self, entries: &[(usize, f64)]) -> usize {
        for &(r, v) in entries {
            debug_assert!(r < self.nrows);
            if v != 0.0 {
                self.row_idx.push(r);
                self.values.push(v);
            }
        }
        self.col_ptr.push(self.row_idx.len());
        self.col_ptr.len() - 2
    }

    pub fn finish(self) -> ColMatrix {
        ColMatrix {
            nrows: self.nrows,
            col_ptr: self.col_ptr,
            row_idx: self.row_idx,
            values: self.values,
        }
    }
}

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug)]
pub(crate) struct SingularBasis;

/// One product-form update: the ftran'd entering column at pivot time,
/// expressed in basis-slot space.
struct Eta {
    slot: usize,
    diag: f64,
    /// Off-pivot nonzeros `(slot, value)`.
    entries: Vec<(usize, f64)>,
}

pub(crate) struct Factorization {
    m: usize,
    /// position -> original row
    rperm: Vec<usize>,
    /// original row -> position
    rpos: Vec<usize>,
    /// position -> basis slot
    cperm: Vec<usize>,
    /// L multipliers per pivot position (entries at later positions).
    l_cols: Vec<Vec<(u32, f64)>>,
    /// U entries per pivot position (entries at earlier positions).
    u_cols: Vec<Vec<(u32, f64)>>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    /// Scratch in position space.
    work: Vec<f64>,
    /// Scratch in slot space.
    slot_work: Vec<f64>,
}

impl Factorization {
    /// Placeholder for a not-yet-factorized state.
    pub fn trivial() -> Self {
        Factorization {
            m: 0,
            rperm: Vec::new(),
            rpos: Vec::new(),
            cperm: Vec::new(),
            l_cols: Vec::new(),
            u_cols: Vec::new(),
            u_diag: Vec::new(),
            etas: Vec::new(),
            work: Vec::new(),
            slot_work: Vec::new(),
        }
    }

    /// Factorizes the basis given by `basis[slot] = column index`.
    pub fn new(matrix: &ColMatrix, basis: &[usize]) -> Result<Self, SingularBasis> {
        let m = matrix.nrows;
        assert_eq!(basis.len(), m);

        // Row-wise view of the basis matrix: row -> (slot, value) list.
        let mut row_cnt = vec![0usize; m];
        for &col in basis {
            let (rows, _) = matrix.col(col);
            for &r in rows {
                row_cnt[r] += 1;
            }
        }
        let mut row_ptr = vec![0usize; m + 1];
        for r in 0..m {
            row_ptr[r + 1] = row_ptr[r] + row_cnt[r];
        }
        let nnz = row_ptr[m];
        let mut row_slot = vec![0u32; nnz];
        let mut row_val = vec![0.0f64; nnz];
        let mut fill = row_ptr.clone();
        for (slot, &col) in basis.iter().enumerate() {
            let (rows, vals) = matrix.col(col);
            for (&r, &v) in rows.iter().zip(vals) {
                row_slot[fill[r]] = slot as u32;
                row_val[fill[r]] = v;
                fill[r] += 1;
            }
        }

        let mut col_count = vec![0usize; m];
        for (slot, &col) in basis.iter().enumerate() {
            col_count[slot] = matrix.col(col).0.len();
        }
        let mut row_count = row_cnt;

        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        let mut rperm = Vec::with_capacity(m);
        let mut cperm = Vec::with_capacity(m);
        let mut rpos = vec![usize::MAX; m];
        // L entries keyed by original row until all positions are known.
        let mut l_raw: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut u_cols: Vec<Vec<(u32, f64)>> = Vec::with_capacity(m);
        let mut u_diag = Vec::with_capacity(m);

        if row_count.iter().any(|&c| c == 0) || col_count.iter().any(|&c| c == 0) {
            return Err(SingularBasis);
        }

        let mut col_queue: Vec<usize> = (0..m).filter(|&j| col_count[j] == 1).collect();
        let mut row_queue: Vec<usize> = (0..m).filter(|&r| row_count[r] == 1).collect();

        let place = |rperm: &mut Vec<usize>,
                     cperm: &mut Vec<usize>,
                     rpos: &mut Vec<usize>,
                     r: usize,
                     slot: usize| {
            rpos[r] = rperm.len();
            rperm.push(r);
            cperm.push(slot);
        };

        // Singleton peeling. No fill is created here, so raw matrix values are
        // still the true factor entries (bump pivots, which do create fill,
        // only start after peeling has stalled).
        loop {
            if let Some(j) = col_queue.pop() {
                if !col_active[j] || col_count[j] != 1 {
                    continue;
                }
                let (rows, vals) = matrix.col(basis[j]);
                let mut pivot = None;
                let mut uents: Vec<(u32, f64)> = Vec::new();
                for (&r, &v) in rows.iter().zip(vals) {
                    if row_active[r] {
                        pivot = Some((r, v));
                    } else {
                        uents.push((rpos[r] as u32, v));
                    }
                }
                let (r, v) = pivot.ok_or(SingularBasis)?;
                if v.abs() <= PIVOT_EPS {
                    return Err(SingularBasis);
                }
                place(&mut rperm, &mut cperm, &mut rpos, r, j);
                u_diag.push(v);
                u_cols.push(uents);
                l_raw.push(Vec::new());
                col_active[j] = false;
                row_active[r] = false;
                // Deactivate row r: other active columns over it lose an entry.
                for k in row_ptr[r]..row_ptr[r + 1] {
                    let s = row_slot[k] as usize;
                    if col_active[s] {
                        col_count[s] -= 1;
                        if col_count[s] == 1 {
                            col_queue.push(s);
                        }
                    }
                }
                continue;
            }
            if let Some(r) = row_queue.pop() {
                if !row_active[r] || row_count[r] != 1 {
                    continue;
                }
                // The single active column over row r.
                let mut slot = usize::MAX;
                let mut pv = 0.0;
                for k in row_ptr[r]..row_ptr[r + 1] {
                    let s = row_slot[k] as usize;
                    if col_active[s] {
                        slot = s;
                        pv = row_val[k];
                    }
                }
                if slot == usize::MAX {
                    return Err(SingularBasis);
                }
                if pv.abs() <= PIVOT_EPS {
                    return Err(SingularBasis);
                }
                place(&mut rperm, &mut cperm, &mut rpos, r, slot);
                u_diag.push(pv);
                let mut uents: Vec<(u32, f64)> = Vec::new();
                let mut lents: Vec<(usize, f64)> = Vec::new();
                let (rows, vals) = matrix.col(basis[slot]);
                for (&rr, &v) in rows.iter().zip(vals) {
                    if rr == r {
                        continue;
                    }
                    if row_active[rr] {
                        lents.push((rr, v / pv));
                        row_count[rr] -= 1;
                        if row_count[rr] == 1 {
                            row_queue.push(rr);
                        }
                    } else {
                        uents.push((rpos[rr] as u32, v));
                    }
                }
                u_cols.push(uents);
                l_raw.push(lents);
                col_active[slot] = false;
                row_active[r] = false;
                continue;
            }
            break;
        }

        // Bump: general left-looking elimination over whatever is left.
        let bump_cols: Vec<usize> = {
            let mut v: Vec<usize> = (0..m).filter(|&j| col_active[j]).collect();
            v.sort_by_key(|&j| (col_count[j], j));
            v
        };
        if !bump_cols.is_empty() {
            let mut w = vec![0.0f64; m]; // keyed by original row
            let mut touched: Vec<usize> = Vec::new();
            for &j in &bump_cols {
                let (rows, vals) = matrix.col(basis[j]);
                for (&r, &v) in rows.iter().zip(vals) {
                    w[r] = v;
                    touched.push(r);
                }
                // Apply earlier pivots in position order.
                let kcur = rperm.len();
                let mut uents: Vec<(u32, f64)> = Vec::new();
                for k in 0..kcur {
                    let pr = rperm[k];
                    let uv = w[pr];
                    if uv != 0.0 {
                        uents.push((k as u32, uv));
                        for &(orig, mult) in &l_raw[k] {
                            if w[orig] == 0.0 {
                                touched.push(orig);
                            }
                            w[orig] -= mult * uv;
                        }
                        w[pr] = 0.0;
                    }
                }
                // An entry can cancel to zero and be re-filled, so the
                // touched list may hold duplicates.
                touched.sort_unstable();
                touched.dedup();
                // Partial pivoting over the remaining active rows.
                let mut best = (0.0f64, usize::MAX);
                for &r in &touched {
                    if row_active[r] && w[r].abs() > best.0 {
                        best = (w[r].abs(), r);
                    }
                }
                let (mag, r) = best;
                if r == usize::MAX || mag <= PIVOT_EPS {
                    return Err(SingularBasis);
                }
                let pv = w[r];
                let mut lents: Vec<(usize, f64)> = Vec::new();
                for &rr in &touched {
                    if rr != r && row_active[rr] && w[rr] != 0.0 {
                        lents.push((rr, w[rr] / pv));
                    }
                }
                lents.sort_unstable_by_key(|&(rr, _)| rr);
                place(&mut rperm, &mut cperm, &mut rpos, r, j);
                u_diag.push(pv);
                u_cols.push(uents);
                l_raw.push(lents);
                row_active[r] = false;
                col_active[j] = false;
                for &rr in &touched {
                    w[rr] = 0.0;
                }
                touched.clear();
            }
        }

        debug_assert_eq!(rperm.len(), m);

        // Remap L entries from original rows to pivot positions.
        let l_cols: Vec<Vec<(u32, f64)>> = l_raw
            .into_iter()
            .map(|col| {
                let mut out: Vec<(u32, f64)> =
                    col.into_iter().map(|(r, v)| (rpos[r] as u32, v)).collect();
                out.sort_unstable_by_key(|&(p, _)| p);
                out
            })
            .collect();

        Ok(Factorization {
            m,
            rperm,
            rpos,
            cperm,
            l_cols,
            u_cols,
            u_diag,
            etas: Vec::new(),
            work: vec![0.0; m],
            slot_work: vec![0.0; m],
        })
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = a` for a sparse column `a`. The result is written into
    /// `out`, indexed by basis slot.
    pub fn ftran(&mut self, rows: &[usize], vals: &[f64], out: &mut [f64]) {
        let w = &mut self.work;
        w.iter_mut().for_each(|x| *x = 0.0);
        for (&r, &v) in rows.iter().zip(vals) {
            w[self.rpos[r]] += v;
        }
        self.ftran_inner(out);
    }

    /// Solves `B x = a` for a dense right-hand side indexed by original row.
    pub fn ftran_dense(&mut self, rhs: &[f64], out: &mut [f64]) {
        for r in 0..self.m {
            self.work[self.rpos[r]] = rhs[r];
        }
        self.ftran_inner(out);
    }

    fn ftran_inner(&mut self, out: &mut [f64]) {
        let m = self.m;
        let w = &mut self.work;
        // L solve, column oriented.
        for k in 0..m {
            let wk = w[k];
            if wk != 0.0 {
                for &(i, mult) in &self.l_cols[k] {
                    w[i as usize] -= mult * wk;
                }
            }
        }
        // U solve, column oriented, backwards.
        for k in (0..m).rev() {
            let wk = w[k];
            if wk != 0.0 {
                let xk = wk / self.u_diag[k];
                w[k] = xk;
                for &(i, v) in &self.u_cols[k] {
                    w[i as usize] -= v * xk;
                }
            }
        }
        // Map to basis-slot space.
        for x in out.iter_mut() {
            *x = 0.0;
        }
        for k in 0..m {
            if w[k] != 0.0 {
                out[self.cperm[k]] = w[k];
            }
        }
        // Product-form updates.
        for eta in &self.etas {
            let t = out[eta.slot];
            if t != 0.0 {
                let xr = t / eta.diag;
                out[eta.slot] = xr;
                for &(i, v) in &eta.entries {
                    out[i] -= v * xr;
                }
            }
        }
    }

    /// Solves `B^T y = c` where `c` is indexed by basis slot. The result is
    /// written into `out`, indexed by original row.
    pub fn btran(&mut self, c: &[f64], out: &mut [f64]) {
        let m = self.m;
        debug_assert_eq!(c.len(), m);
        let slotv = &mut self.slot_work;
        slotv.copy_from_slice(c);
        // Reverse eta file first: y = B_old^-T F^-T c.
        for eta in self.etas.iter().rev() {
            let mut dot = 0.0;
            for &(i, v) in &eta.entries {
                dot += v * slotv[i];
            }
            slotv[eta.slot] = (slotv[eta.slot] - dot) / eta.diag;
        }
        let w = &mut self.work;
        for k in 0..m {
            w[k] = slotv[self.cperm[k]];
        }
        // U^T solve (forward): z_k = (w_k - sum_{i<k} U[i,k] z_i) / U[k,k].
        for k in 0..m {
            let mut acc = w[k];
            for &(i, v) in &self.u_cols[k] {
                acc -= v * w[i as usize];
            }
            w[k] = acc / self.u_diag[k];
        }
        // L^T solve (backward): y_k = z_k - sum_{i>k} L[i,k] y_i.
        for k in (0..m).rev() {
            let mut acc = w[k];
            for &(i, v) in &self.l_cols[k] {
                acc -= v * w[i as usize];
            }
            w[k] = acc;
        }
        for y in out.iter_mut() {
            *y = 0.0;
        }
        for k in 0..m {
            out[self.rperm[k]] = w[k];
        }
    }

    /// Registers a pivot: the variable in `slot` leaves and the column whose
    /// ftran result is `w` (slot space) enters. `w[slot]` must be the pivot
    /// element.
    pub fn push_eta(&mut self, slot: usize, w: &[f64]) -> Result<(), SingularBasis> {
        let diag = w[slot];
        if diag.abs() <= PIVOT_EPS {
            return Err(SingularBasis);
        }
        let mut entries = Vec::new();
        for (i, &v) in w.iter().enumerate() {
            if i != slot && v != 0.0 {
                entries.push((i, v));
            }
        }
        self.etas.push(Eta {
            slot,
            diag,
            entries,
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_to_matrix(cols: &[Vec<f64>]) -> (ColMatrix, Vec<usize>) {
        let m = cols[0].len();
        let mut b = ColMatrixBuilder::new(m);
        for col in cols {
            let entries: Vec<(usize, f64)> = col
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(r, v)| (r, *v))
                .collect();
            b.push_col(&entries);
        }
        (b.finish(), (0..cols.len()).collect())
    }

    fn check_ftran_btran(cols: &[Vec<f64>]) {
        let m = cols[0].len();
        let (mat, basis) = dense_to_matrix(cols);
        let mut f = Factorization::new(&mat, &basis).expect("nonsingular");

        // ftran against every unit vector: B x = e_r.
        for r in 0..m {
            let mut x = vec![0.0; m];
            f.ftran(&[r], &[1.0], &mut x);
            for row in 0..m {
                let lhs: f64 = (0..m).map(|slot| cols[slot][row] * x[slot]).sum();
                let want = if row == r { 1.0 } else { 0.0 };
                assert!(
                    (lhs - want).abs() < 1e-9,
                    "ftran residual at row {row}: {lhs} vs {want}"
                );
            }
        }
        // btran: B^T y = c.
        let c: Vec<f64> = (0..m).map(|i| (i as f64) - 1.5).collect();
        let mut y = vec![0.0; m];
        f.btran(&c, &mut y);
        for slot in 0..m {
            let lhs: f64 = (0..m).map(|row| cols[slot][row] * y[row]).sum();
            assert!(
                (lhs - c[slot]).abs() < 1e-9,
                "btran residual at slot {slot}"
            );
        }
    }

    #[test]
    fn factorizes_identity() {
        check_ftran_btran(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
    }

    #[test]
    fn factorizes_triangular_and_cycle() {
        // A cyclic SoC-style band that defeats singleton peeling.
        check_ftran_btran(&[
            vec![1.0, -1.0, 0.0, 0.0],
            vec![0.0, 1.0, -1.0, 0.0],
            vec![0.0, 0.0, 1.0, -1.0],
            vec![-1.0, 0.0, 0.0, 1.5],
        ]);
    }

    #[test]
    fn factorizes_mixed_structure() {
        check_ftran_btran(&[
            vec![2.0, 1.0, 0.0, 3.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 4.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 1.0, 0.0],
            vec![0.0, 2.0, 0.0, 0.0, 5.0],
        ]);
    }

    #[test]
    fn rejects_singular() {
        let (mat, basis) = dense_to_matrix(&[
            vec![1.0, 1.0, 0.0],
            vec![2.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert!(Factorization::new(&mat, &basis).is_err());
    }

    #[test]
    fn eta_updates_track_basis_change() {
        let cols = [
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let (mat, basis) = dense_to_matrix(&cols);
        let mut f = Factorization::new(&mat, &basis).unwrap();
        // Replace slot 1 with column [1, 1, 1]^T.
        let mut w = vec![0.0; 3];
        f.ftran(&[0, 1, 2], &[1.0, 1.0, 1.0], &mut w);
        f.push_eta(1, &w).unwrap();
        // New basis columns: e0, [1,1,1], e2. Solve B x = [3, 4, 5].
        let mut x = vec![0.0; 3];
        f.ftran(&[0, 1, 2], &[3.0, 4.0, 5.0], &mut x);
        // x1 * 1 = 4 (middle row), x0 = 3 - 4 = -1, x2 = 5 - 4 = 1.
        assert!((x[0] - (-1.0)).abs() < 1e-12);
        assert!((x[1] - 4.0).abs() < 1e-12);
        assert!((x[2] - 1.0).abs() < 1e-12);
        // btran on the updated basis.
        let mut y = vec![0.0; 3];
        f.btran(&[1.0, 1.0, 1.0], &mut y);
        // B^T y = c with B = [e0, ones, e2]: y0 = 1, y0+y1+y2 = 1, y2 = 1 -> y1 = -1.
        assert!((y[0] - 1.0).abs() < 1e-12);
        assert!((y[1] - (-1.0)).abs() < 1e-12);
        assert!((y[2] - 1.0).abs() < 1e-12);
    }
}
