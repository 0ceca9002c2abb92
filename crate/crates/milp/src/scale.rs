//! Geometric-mean equilibration.
//!
//! Planner matrices mix coefficients from unit efficiencies up to big-M
//! constants spanning roughly 1e0..1e6; equilibration keeps the simplex
//! pivots well conditioned. Scale factors are snapped to powers of two so
//! scaling and unscaling are exact in floating point.

/// Row and column scale factors for a sparse matrix given as
/// `(row, col, value)` triplets.
pub(crate) struct Scaling {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

fn snap_pow2(x: f64) -> f64 {
    if x <= 0.0 || !x.is_finite() {
        return 1.0;
    }
    let e = x.log2().round();
    // Clamp to a sane window to avoid over/underflow on degenerate inputs.
    2f64.powi(e.clamp(-60.0, 60.0) as i32)
}

impl Scaling {
    pub fn identity(nrows: usize, ncols: usize) -> Self {
        Scaling {
            row: vec![1.0; nrows],
            col: vec![1.0; ncols],
        }
    }

    /// Two passes of row/column geometric-mean equilibration.
    ///
    /// `fixed_cols` marks columns whose scale must stay 1 (binaries, so that
    /// their {0,1} bounds survive scaling untouched).
    pub fn geometric_mean(
        nrows: usize,
        ncols: usize,
        entries: impl Fn(&mut dyn FnMut(usize, usize, f64)) + Copy,
        fixed_cols: &[bool],
    ) -> Self {
        let mut s = Scaling::identity(nrows, ncols);
        for _ in 0..2 {
            // Rows.
            let mut lo = vec![f64::INFINITY; nrows];
            let mut hi = vec![0.0f64; nrows];
            entries(&mut |r, c, v| {
                let a = (v * s.row[r] * s.col[c]).abs();
                if a > 0.0 {
                    lo[r] = lo[r].min(a);
                    hi[r] = hi[r].max(a);
                }
            });
            for r in 0..nrows {
                if hi[r] > 0.0 {
                    s.row[r] = snap_pow2(s.row[r] / (lo[r] * hi[r]).sqrt());
                }
            }
            // Columns.
            let mut lo = vec![f64::INFINITY; ncols];
            let mut hi = vec![0.0f64; ncols];
            entries(&mut |r, c, v| {
                let a = (v * s.row[r] * s.col[c]).abs();
                if a > 0.0 {
                    lo[c] = lo[c].min(a);
                    hi[c] = hi[c].max(a);
                }
            });
            for c in 0..ncols {
                if !fixed_cols[c] && hi[c] > 0.0 {
                    s.col[c] = snap_pow2(s.col[c] / (lo[c] * hi[c]).sqrt());
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_are_powers_of_two() {
        let entries = |f: &mut dyn FnMut(usize, usize, f64)| {
            f(0, 0, 1e6);
            f(0, 1, 2.0);
            f(1, 0, 4.0);
            f(1, 1, 1e-4);
        };
        let s = Scaling::geometric_mean(2, 2, entries, &[false, false]);
        for v in s.row.iter().chain(s.col.iter()) {
            let e = v.log2();
            assert_eq!(e, e.round(), "{v} is not a power of two");
        }
        // Scaled matrix should span a much narrower range.
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        entries(&mut |r, c, v| {
            let a = (v * s.row[r] * s.col[c]).abs();
            lo = lo.min(a);
            hi = hi.max(a);
        });
        assert!(hi / lo < 1e4, "range still {}", hi / lo);
    }

    #[test]
    fn fixed_columns_keep_unit_scale() {
        let entries = |f: &mut dyn FnMut(usize, usize, f64)| {
            f(0, 0, 1e6);
            f(0, 1, 1e6);
        };
        let s = Scaling::geometric_mean(1, 2, entries, &[false, true]);
        assert_eq!(s.col[1], 1.0);
    }
}
