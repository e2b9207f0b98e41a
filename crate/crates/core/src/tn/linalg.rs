//! Row-major dense kernels used by the tensor-network code.

use nalgebra::DMatrix;

/// Strided view description: `(rows, cols, row_stride, col_stride)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Layout {
    pub rows: usize,
    pub cols: usize,
    pub rs: isize,
    pub cs: isize,
}

impl Layout {
    pub fn row_major(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            rs: cols as isize,
            cs: 1,
        }
    }

    /// The transpose of a row-major `rows × cols` block, seen as `cols × rows`.
    pub fn transposed(rows: usize, cols: usize) -> Self {
        Self {
            rows: cols,
            cols: rows,
            rs: 1,
            cs: cols as isize,
        }
    }
}

/// `c ← a·b + beta·c`; `c` is row-major `a.rows × b.cols`.
pub(crate) fn gemm(a: &[f64], la: Layout, b: &[f64], lb: Layout, beta: f64, c: &mut [f64]) {
    assert_eq!(la.cols, lb.rows, "inner dimensions differ");
    let (m, k, n) = (la.rows, la.cols, lb.cols);
    assert!(c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c[..m * n].iter_mut().for_each(|v| *v *= beta);
        return;
    }
    let span = |l: Layout| (l.rows as isize - 1) * l.rs + (l.cols as isize - 1) * l.cs + 1;
    assert!(span(la) as usize <= a.len() && span(lb) as usize <= b.len());
    // SAFETY: the asserts above bound every strided access inside `a`, `b`
    // and `c`, and `c` does not alias the inputs (distinct borrows).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            la.rs,
            la.cs,
            b.as_ptr(),
            lb.rs,
            lb.cs,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub(crate) fn matmul(a: &[f64], la: Layout, b: &[f64], lb: Layout) -> Vec<f64> {
    let mut c = vec![0.0; la.rows * lb.cols];
    gemm(a, la, b, lb, 0.0, &mut c);
    c
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn to_dmatrix(data: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        out.extend(m.row(r).iter());
    }
    out
}

/// Truncated SVD of a row-major `rows × cols` matrix.
pub(crate) struct Truncated {
    /// `rows × kept`, row-major, orthonormal columns.
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    /// `kept × cols`, row-major, orthonormal rows.
    pub vt: Vec<f64>,
}

impl Truncated {
    pub fn kept(&self) -> usize {
        self.s.len()
    }
}

/// Keeps at most `max_rank` singular values and drops any below
/// `rel_cutoff · s_max`; at least one value always survives. A negative
/// cutoff keeps `max_rank` values even when some are zero.
pub(crate) fn svd_truncate(
    data: &[f64],
    rows: usize,
    cols: usize,
    max_rank: usize,
    rel_cutoff: f64,
) -> Truncated {
    let svd = to_dmatrix(data, rows, cols).svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s_max = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let kept: Vec<usize> = order
        .iter()
        .copied()
        .enumerate()
        .take_while(|&(rank, i)| {
            rank == 0 || (rank < max_rank && svd.singular_values[i] > rel_cutoff * s_max)
        })
        .map(|(_, i)| i)
        .collect();
    let k = kept.len();
    let mut u_out = vec![0.0; rows * k];
    for r in 0..rows {
        for (j, &i) in kept.iter().enumerate() {
            u_out[r * k + j] = u[(r, i)];
        }
    }
    let mut vt_out = vec![0.0; k * cols];
    for (j, &i) in kept.iter().enumerate() {
        for c in 0..cols {
            vt_out[j * cols + c] = vt[(i, c)];
        }
    }
    Truncated {
        u: u_out,
        s: kept.iter().map(|&i| svd.singular_values[i]).collect(),
        vt: vt_out,
    }
}

/// Thin QR of a row-major `rows × cols` matrix: `(Q: rows × k, R: k × cols)`
/// with `k = min(rows, cols)`.
pub(crate) fn thin_qr(data: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let qr = to_dmatrix(data, rows, cols).qr();
    let q = qr.q();
    let r = qr.r();
    (from_dmatrix(&q), from_dmatrix(&r), rows.min(cols))
}
