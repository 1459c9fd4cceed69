//! Compressed sparse rows and a preconditioned conjugate gradient solver for
//! the symmetric positive definite systems produced by the P1 assemblies.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            let mut last = usize::MAX;
            for (c, v) in row {
                if c == last {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = c;
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(col, value)` entries of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yr = s;
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    /// Restricts to the `free` unknowns: returns `A_ff` and the map from
    /// full indices to reduced indices.
    pub fn restrict(&self, free: &[bool]) -> (CsrMatrix, Vec<Option<usize>>) {
        let mut map = vec![None; self.n];
        let mut m = 0;
        for (a, &f) in free.iter().enumerate() {
            if f {
                map[a] = Some(m);
                m += 1;
            }
        }
        let mut triplets = Vec::new();
        for r in 0..self.n {
            if let Some(rr) = map[r] {
                for (c, v) in self.row(r) {
                    if let Some(cc) = map[c] {
                        triplets.push((rr, cc, v));
                    }
                }
            }
        }
        (CsrMatrix::from_triplets(m, &triplets), map)
    }
}

/// Solves `A x = b` for Dirichlet data: rows/columns outside `free` are
/// fixed to `fixed[a]`, and the reduced system is `A_ff x_f = b_f − A_fb x_b`.
pub fn solve_dirichlet_system(
    a: &CsrMatrix,
    rhs: &[f64],
    free: &[bool],
    fixed: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    let (aff, map) = a.restrict(free);
    let mut b = vec![0.0; aff.dim()];
    for r in 0..a.dim() {
        if let Some(rr) = map[r] {
            let mut s = rhs[r];
            for (c, v) in a.row(r) {
                if map[c].is_none() {
                    s -= v * fixed[c];
                }
            }
            b[rr] = s;
        }
    }
    let xf = solve_spd(&aff, &b, tol)?;
    let mut x = fixed.to_vec();
    for (a_idx, m) in map.iter().enumerate() {
        if let Some(k) = m {
            x[a_idx] = xf[*k];
        }
    }
    Ok(x)
}

enum Preconditioner {
    Jacobi(Vec<f64>),
    /// Incomplete Cholesky with the sparsity of the lower triangle.
    Ic0 {
        l: CsrMatrix,
    },
}

impl Preconditioner {
    fn ic0(a: &CsrMatrix) -> Option<Self> {
        let n = a.dim();
        // lower triangle rows, columns ascending, diagonal last
        let mut rows: Vec<Vec<(usize, f64)>> =
            (0..n).map(|r| a.row(r).filter(|&(c, _)| c <= r).collect()).collect();
        for i in 0..n {
            let (before, rest) = rows.split_at_mut(i);
            let ri = &mut rest[0];
            for k in 0..ri.len() {
                let (j, _) = ri[k];
                if j == i {
                    let s: f64 = ri[..k].iter().map(|e| e.1 * e.1).sum();
                    let d = ri[k].1 - s;
                    if !(d > 0.0) || !d.is_finite() {
                        return None;
                    }
                    ri[k].1 = d.sqrt();
                } else {
                    let rj = &before[j];
                    // dot of the sparse prefixes of rows i and j before column j
                    let mut s = 0.0;
                    let (mut p, mut q) = (0, 0);
                    while p < k && q < rj.len() {
                        let (cp, cq) = (ri[p].0, rj[q].0);
                        if cq >= j {
                            break;
                        }
                        if cp == cq {
                            s += ri[p].1 * rj[q].1;
                            p += 1;
                            q += 1;
                        } else if cp < cq {
                            p += 1;
                        } else {
                            q += 1;
                        }
                    }
                    let djj = rj.last().map(|e| e.1).unwrap_or(0.0);
                    ri[k].1 = (ri[k].1 - s) / djj;
                }
            }
        }
        let triplets: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
            .collect();
        Some(Preconditioner::Ic0 {
            l: CsrMatrix::from_triplets(n, &triplets),
        })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Jacobi(d) => {
                for i in 0..r.len() {
                    z[i] = r[i] / d[i];
                }
            }
            Preconditioner::Ic0 { l } => {
                let n = l.dim();
                // forward: L y = r
                for i in 0..n {
                    let mut s = r[i];
                    let mut diag = 1.0;
                    for (c, v) in l.row(i) {
                        if c < i {
                            s -= v * z[c];
                        } else {
                            diag = v;
                        }
                    }
                    z[i] = s / diag;
                }
                // backward: Lᵀ x = y, column-oriented over the rows of L
                for i in (0..n).rev() {
                    let diag = l.get(i, i);
                    z[i] /= diag;
                    let zi = z[i];
                    for (c, v) in l.row(i) {
                        if c < i {
                            z[c] -= v * zi;
                        }
                    }
                }
            }
        }
    }
}

/// Preconditioned CG on a symmetric positive definite matrix, relative
/// residual `tol`. Tries IC(0) first and falls back to Jacobi when the
/// incomplete factorization breaks down.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let diag = a.diagonal();
    if let Some((i, d)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(Error::LinearSolve(format!("non-positive diagonal {d:.3e} in row {i}")));
    }
    let pre = Preconditioner::ic0(a).unwrap_or(Preconditioner::Jacobi(diag.clone()));
    match pcg(a, b, &pre, tol) {
        Ok(x) => Ok(x),
        Err(e) if matches!(pre, Preconditioner::Ic0 { .. }) => {
            pcg(a, b, &Preconditioner::Jacobi(diag), tol).map_err(|_| e)
        }
        Err(e) => Err(e),
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn pcg(a: &CsrMatrix, b: &[f64], pre: &Preconditioner, tol: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 10 * n + 100;
    for _ in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolve("matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol * bnorm {
            return Ok(x);
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve(format!(
        "conjugate gradient stalled at relative residual {:.3e}",
        dot(&r, &r).sqrt() / bnorm
    )))
}
