//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QspError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn diag(v: &[C64]) -> CMat {
    let n = v.len();
    let mut m = zeros(n, n);
    for (i, x) in v.iter().enumerate() {
        m[(i, i)] = *x;
    }
    m
}

pub fn diag_re(v: &[f64]) -> CMat {
    diag(&v.iter().map(|x| cr(*x)).collect::<Vec<_>>())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&CMat]) -> CMat {
    let mut out = eye(1);
    for m in ms {
        out = kron(&out, m);
    }
    out
}

/// Block diagonal sum.
pub fn dsum(blocks: &[&CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn fro(a: &CMat) -> f64 {
    a.norm()
}

/// ‖a − b‖ relative to the larger of the two norms (absolute when both vanish).
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    let scale = fro(a).max(fro(b));
    let d = fro(&(a - b));
    if scale < 1e-300 {
        d
    } else {
        d / scale
    }
}

pub fn matpow(a: &CMat, k: usize) -> CMat {
    let mut out = eye(a.nrows());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

/// Matrix exponential (scaling and squaring with a degree 13 Padé approximant).
pub fn expm(a: &CMat) -> CMat {
    a.exp()
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| QspError::Degenerate("singular matrix".into()))
}

/// Singular values in descending order.
pub fn svals(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![];
    }
    let s = a.clone().svd(false, false).singular_values;
    let mut v: Vec<f64> = s.iter().copied().collect();
    v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    v
}

/// Orthonormal basis (as columns) of the kernel of `a`. A singular value counts as
/// zero when it is below `rtol` times the largest one (or `rtol` if the matrix is tiny).
pub fn nullspace(a: &CMat, rtol: f64) -> CMat {
    let n = a.ncols();
    if n == 0 {
        return zeros(0, 0);
    }
    let work = if a.nrows() < n {
        let mut p = zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let vt = svd.v_t.expect("v requested");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max).max(1.0);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= rtol * smax).collect();
    let mut out = zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        for k in 0..n {
            out[(k, j)] = vt[(i, k)].conj();
        }
    }
    out
}

/// Least squares solution of `a x = b`.
pub fn lstsq(a: &CMat, b: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.solve(b, 1e-13 * smax.max(1e-300)).expect("u and v computed")
}

/// Eigenvalues of a general complex matrix via the Schur form.
pub fn eigvals(a: &CMat) -> Vec<C64> {
    if a.nrows() == 0 {
        return vec![];
    }
    if a.nrows() == 1 {
        return vec![a[(0, 0)]];
    }
    if a.nrows() == 2 {
        let tr = a[(0, 0)] + a[(1, 1)];
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let disc = (tr * tr - det * 4.0).sqrt();
        return vec![(tr + disc) / 2.0, (tr - disc) / 2.0];
    }
    // nalgebra's complex Schur occasionally returns NaN on exactly structured input; a shift helps
    let n = a.nrows();
    let scale = fro(a).max(1e-300);
    for shift in [0.0, 0.1234567, -0.3141592] {
        let s = C64::new(shift * scale, 0.5 * shift * scale);
        let t = (a + eye(n) * s).schur().unpack().1;
        let ev: Vec<C64> = (0..n).map(|i| t[(i, i)] - s).collect();
        if ev.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
            return ev;
        }
    }
    vec![C64::new(f64::NAN, f64::NAN); n]
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let h = (a + a.adjoint()) * cr(0.5);
    let e = h.symmetric_eigen();
    let n = a.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| e.eigenvalues[x].partial_cmp(&e.eigenvalues[y]).unwrap());
    let mut vecs = zeros(n, n);
    for (j, &i) in idx.iter().enumerate() {
        vecs.set_column(j, &e.eigenvectors.column(i));
    }
    (idx.iter().map(|&i| e.eigenvalues[i]).collect(), vecs)
}

/// Permutation matrix sending the tensor leg order to `perm`: output leg k carries
/// input leg `perm[k]`. Legs are row-major (leg 0 most significant).
pub fn leg_perm(dims: &[usize], perm: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut p = zeros(total, total);
    let mut idx = vec![0usize; dims.len()];
    for old in 0..total {
        let mut rem = old;
        for k in (0..dims.len()).rev() {
            idx[k] = rem % dims[k];
            rem /= dims[k];
        }
        let mut new = 0;
        for (k, &src) in perm.iter().enumerate() {
            new = new * new_dims[k] + idx[src];
        }
        p[(new, old)] = cr(1.0);
    }
    p
}

/// Place `op` (acting on legs `legs`, in that order) inside the full tensor product.
pub fn on_legs(dims: &[usize], legs: &[usize], op: &CMat) -> CMat {
    let mut perm: Vec<usize> = legs.to_vec();
    perm.extend((0..dims.len()).filter(|k| !legs.contains(k)));
    let rest: usize = (0..dims.len())
        .filter(|k| !legs.contains(k))
        .map(|k| dims[k])
        .product();
    let p = leg_perm(dims, &perm);
    let inner = kron(op, &eye(rest));
    p.adjoint() * inner * p
}

/// Flip of a two-fold tensor product: x⊗y ↦ y⊗x.
pub fn flip(m: usize, n: usize) -> CMat {
    leg_perm(&[m, n], &[1, 0])
}

pub fn to_json(m: &CMat) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.nrows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn from_json(v: &serde_json::Value) -> Result<CMat> {
    let bad = || QspError::Input("matrix must be nested arrays of [re,im]".into());
    let rows = v.as_array().ok_or_else(bad)?;
    let n = rows.len();
    let m = rows.first().and_then(|r| r.as_array()).map_or(0, |r| r.len());
    let mut out = zeros(n, m);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(bad)?;
        if row.len() != m {
            return Err(bad());
        }
        for (j, e) in row.iter().enumerate() {
            out[(i, j)] = match e {
                serde_json::Value::Number(x) => cr(x.as_f64().ok_or_else(bad)?),
                serde_json::Value::Array(p) if p.len() == 2 => C64::new(
                    p[0].as_f64().ok_or_else(bad)?,
                    p[1].as_f64().ok_or_else(bad)?,
                ),
                _ => return Err(bad()),
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_rank_one() {
        let a = CMat::from_row_slice(1, 3, &[cr(1.0), cr(1.0), cr(0.0)]);
        let n = nullspace(&a, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!(fro(&(&a * &n)) < 1e-14);
    }

    #[test]
    fn leg_perm_matches_flip() {
        let a = CMat::from_fn(2, 2, |i, j| cr((i * 2 + j) as f64));
        let b = CMat::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        let p = flip(2, 3);
        assert!(fro(&(&p * kron(&a, &b) * p.adjoint() - kron(&b, &a))) < 1e-14);
    }

    #[test]
    fn on_legs_13() {
        let a = CMat::from_fn(2, 2, |i, j| cr((1 + i + 3 * j) as f64));
        let b = CMat::from_fn(2, 2, |i, j| C64::new(j as f64, 1.0 + i as f64));
        let op = kron(&a, &b);
        let full = on_legs(&[2, 2, 2], &[0, 2], &op);
        assert!(fro(&(full - kron_all(&[&a, &eye(2), &b]))) < 1e-14);
    }

    #[test]
    fn complex_eigenvalues() {
        let a = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(-1.0), cr(0.0)]);
        let mut ev = eigvals(&a);
        ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((ev[0] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - I).norm() < 1e-12);
    }

    #[test]
    fn expm_rotation() {
        let a = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(-1.0), cr(0.0)]) * cr(std::f64::consts::FRAC_PI_2);
        let e = expm(&a);
        let g = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(-1.0), cr(0.0)]);
        assert!(fro(&(e - g)) < 1e-13);
    }
}
