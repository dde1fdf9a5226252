//! R-matrices on pairs of modules, braidings and the standard sanity identities.

use crate::error::{QspError, Result};
use crate::linalg::{cr, eye, flip, fro, inverse, kron, lstsq, nullspace, on_legs, CMat, C64};
use crate::lusztig::braid_word_on_module;
use crate::rootsys::{qfact, WeylWord};
use crate::uqrep::{decompose, ribbon_on, WeightModule};

#[derive(Clone, Debug)]
pub struct RMatrix {
    pub matrix: CMat,
    pub dims: (usize, usize),
    /// Which product order / leg convention satisfied the normalization.
    pub tag: String,
}

impl RMatrix {
    /// Σ∘ℛ : M⊗N → N⊗M.
    pub fn braiding(&self) -> CMat {
        flip(self.dims.0, self.dims.1) * &self.matrix
    }
}

fn top_index(m: &WeightModule) -> usize {
    let rho = m.datum.rho();
    (0..m.dim())
        .max_by(|&a, &b| {
            let x = m.datum.pair(&m.weights[a], &rho);
            let y = m.datum.pair(&m.weights[b], &rho);
            x.cmp(&y).then(b.cmp(&a))
        })
        .unwrap_or(0)
}

fn bottom_index(m: &WeightModule) -> usize {
    let rho = m.datum.rho();
    (0..m.dim())
        .min_by(|&a, &b| {
            let x = m.datum.pair(&m.weights[a], &rho);
            let y = m.datum.pair(&m.weights[b], &rho);
            x.cmp(&y).then(a.cmp(&b))
        })
        .unwrap_or(0)
}

/// Δ^op(E_r), Δ^op(F_r) on M⊗N.
fn delta_op(m: &WeightModule, n: &WeightModule, r: usize) -> (CMat, CMat) {
    let (im, io) = (eye(m.dim()), eye(n.dim()));
    let e = kron(&im, &n.e[r]) + kron(&m.e[r], &n.k_alpha(r));
    let f = kron(&m.k_alpha_inv(r), &n.f[r]) + kron(&m.f[r], &io);
    (e, f)
}

/// Relative residual of ℛΔ(x) = Δ^op(x)ℛ over all generators.
pub fn intertwining_residual(m: &WeightModule, n: &WeightModule, r: &CMat) -> f64 {
    let p = m.tensor(n);
    let mut worst: f64 = 0.0;
    let scale = fro(r).max(1e-300);
    for s in 0..m.rank() {
        let (eo, fo) = delta_op(m, n, s);
        let a = fro(&(r * &p.e[s] - &eo * r)) / (scale * fro(&eo).max(1.0));
        let b = fro(&(r * &p.f[s] - &fo * r)) / (scale * fro(&fo).max(1.0));
        worst = worst.max(a).max(b);
    }
    for i in 0..m.rank() {
        let k = p.k(&m.datum.fundamental(i));
        worst = worst.max(fro(&(r * &k - &k * r)) / (scale * fro(&k)));
    }
    worst
}

/// Distance of ℛ(ξ⊗η) from q^{−(wt ξ, wt η)} ξ⊗η, ξ highest in M, η lowest in N.
pub fn normalization_residual(m: &WeightModule, n: &WeightModule, r: &CMat) -> f64 {
    let (i, j) = (top_index(m), bottom_index(n));
    let v = i * n.dim() + j;
    let target = m.qp.pow(-m.datum.pair(&m.weights[i], &n.weights[j]));
    let mut col = r.column(v).clone_owned();
    col[v] -= cr(target);
    col.norm() / target
}

fn cartan_factor(m: &WeightModule, n: &WeightModule) -> CMat {
    let d: Vec<C64> = m
        .weights
        .iter()
        .flat_map(|a| n.weights.iter().map(move |b| cr(m.qp.pow(-m.datum.pair(a, b)))))
        .collect();
    CMat::from_diagonal(&nalgebra::DVector::from_vec(d))
}

/// Per-root factors Σ_n a_n(q_β) E_β^n ⊗ F_β^n along the reduced word of w_0.
fn root_factors(m: &WeightModule, n: &WeightModule) -> Vec<CMat> {
    let datum = &m.datum;
    let all: Vec<usize> = (0..datum.rank()).collect();
    let w = datum.longest_element(&all);
    let mut out = vec![];
    for k in 0..w.len() {
        let rk = w.0[k];
        let pre = WeylWord(w.0[..k].to_vec());
        let tm = braid_word_on_module(m, &pre);
        let tn = braid_word_on_module(n, &pre);
        let em = &tm * &m.e[rk] * inverse(&tm).expect("braid operators are invertible");
        let fnn = &tn * &n.f[rk] * inverse(&tn).expect("braid operators are invertible");
        let qb = m.qr(rk);
        let mut s = CMat::zeros(m.dim() * n.dim(), m.dim() * n.dim());
        let (mut ep, mut fp) = (eye(m.dim()), eye(n.dim()));
        let mut j = 0u32;
        loop {
            let a = (1.0 / qb - qb).powi(j as i32) * qb.powf(-(j as f64) * (j as f64 - 1.0) / 2.0) / qfact(j, qb);
            s += kron(&ep, &fp) * cr(a);
            j += 1;
            ep = &ep * &em;
            fp = &fp * &fnn;
            if fro(&ep) < 1e-13 || fro(&fp) < 1e-13 {
                break;
            }
        }
        out.push(s);
    }
    out
}

fn quasi_product(m: &WeightModule, n: &WeightModule, reversed: bool) -> CMat {
    let fs = root_factors(m, n);
    let mut th = eye(m.dim() * n.dim());
    let seq: Vec<&CMat> = if reversed { fs.iter().rev().collect() } else { fs.iter().collect() };
    for s in seq {
        th *= s;
    }
    th * cartan_factor(m, n)
}

/// ℛ on M⊗N from the root-vector product formula. The product order and leg convention
/// are pinned by the highest⊗lowest normalization and the intertwining property.
pub fn rmat(m: &WeightModule, n: &WeightModule) -> Result<RMatrix> {
    m.check_same_algebra(n)?;
    let dims = (m.dim(), n.dim());
    let mut tried = vec![];
    for reversed in [true, false] {
        let base = quasi_product(m, n, reversed);
        let swapped = || -> Result<CMat> {
            let other = quasi_product(n, m, reversed);
            Ok(flip(n.dim(), m.dim()) * other * flip(m.dim(), n.dim()))
        };
        let order = if reversed { "reversed" } else { "forward" };
        let cands: Vec<(String, Box<dyn Fn() -> Result<CMat>>)> = vec![
            (format!("{order}"), Box::new(|| Ok(base.clone()))),
            (format!("{order}-inverse"), Box::new(|| inverse(&base))),
            (format!("{order}-21"), Box::new(swapped)),
            (format!("{order}-21-inverse"), Box::new(|| inverse(&swapped()?))),
        ];
        for (tag, make) in cands {
            let r = make()?;
            let a = intertwining_residual(m, n, &r);
            let b = normalization_residual(m, n, &r);
            if a < 1e-9 && b < 1e-9 {
                return Ok(RMatrix { matrix: r, dims, tag });
            }
            tried.push(format!("{tag}: {a:.1e}/{b:.1e}"));
        }
    }
    Err(QspError::Internal(format!(
        "no R-matrix convention matches the normalization ({})",
        tried.join(", ")
    )))
}

/// Independent ℛ: solve ℛΔ(x) = Δ^op(x)ℛ and fix each block by the normalization.
/// Only available when M⊗N is multiplicity free.
pub fn rmat_oracle(m: &WeightModule, n: &WeightModule) -> Result<RMatrix> {
    m.check_same_algebra(n)?;
    let p = m.tensor(n);
    for c in decompose(&p)? {
        if c.multiplicity > 1 {
            return Err(QspError::Input(format!(
                "oracle needs a multiplicity free product, V_{} appears {} times",
                c.highest, c.multiplicity
            )));
        }
    }
    let d = p.dim();
    let id = eye(d);
    let mut blocks = vec![];
    // vec(RA) = (Aᵀ⊗I)vec R, vec(BR) = (I⊗B)vec R, column-major vec
    let mut push = |a: &CMat, b: &CMat| blocks.push(kron(&a.transpose(), &id) - kron(&id, b));
    for s in 0..m.rank() {
        let (eo, fo) = delta_op(m, n, s);
        push(&p.e[s], &eo);
        push(&p.f[s], &fo);
    }
    for i in 0..m.rank() {
        let k = p.k(&m.datum.fundamental(i));
        push(&k, &k);
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut sys = CMat::zeros(rows, d * d);
    let mut off = 0;
    for b in &blocks {
        sys.view_mut((off, 0), (b.nrows(), d * d)).copy_from(b);
        off += b.nrows();
    }
    let ns = nullspace(&sys, 1e-10);
    // ℛ(ξ⊗v) = q^{−(wt ξ, wt v)} ξ⊗v for every v in N; ξ⊗N generates M⊗N, so this fixes
    // every isotypic block.
    let i = top_index(m);
    let dn = n.dim();
    let mut a = CMat::zeros(d * dn, ns.ncols());
    let mut rhs = CMat::zeros(d * dn, 1);
    for j in 0..dn {
        let v = i * dn + j;
        for k in 0..ns.ncols() {
            for row in 0..d {
                a[(j * d + row, k)] = ns[(v * d + row, k)];
            }
        }
        rhs[(j * d + v, 0)] = cr(m.qp.pow(-m.datum.pair(&m.weights[i], &n.weights[j])));
    }
    let coef = lstsq(&a, &rhs);
    let fit = fro(&(&a * &coef - &rhs)) / fro(&rhs);
    if fit > 1e-9 {
        return Err(QspError::Internal(format!("oracle normalization failed ({fit:.2e})")));
    }
    let vecr = &ns * &coef;
    let r = CMat::from_column_slice(d, d, vecr.as_slice());
    Ok(RMatrix { matrix: r, dims: (m.dim(), n.dim()), tag: "oracle".into() })
}

/// ‖ℛ12ℛ13ℛ23 − ℛ23ℛ13ℛ12‖ / ‖ℛ12ℛ13ℛ23‖ on M⊗M⊗M.
pub fn ybe_residual(m: &WeightModule) -> Result<f64> {
    let r = rmat(m, m)?.matrix;
    let d = m.dim();
    let dims = [d, d, d];
    let r12 = on_legs(&dims, &[0, 1], &r);
    let r13 = on_legs(&dims, &[0, 2], &r);
    let r23 = on_legs(&dims, &[1, 2], &r);
    let lhs = &r12 * &r13 * &r23;
    let rhs = &r23 * &r13 * &r12;
    Ok(fro(&(&lhs - &rhs)) / fro(&lhs))
}

/// (Δ⊗id)ℛ = ℛ13ℛ23 and (id⊗Δ)ℛ = ℛ13ℛ12 on M⊗N⊗P.
pub fn hexagon_residuals(m: &WeightModule, n: &WeightModule, p: &WeightModule) -> Result<(f64, f64)> {
    let dims = [m.dim(), n.dim(), p.dim()];
    let mn = m.tensor(n);
    let np = n.tensor(p);
    let a = rmat(&mn, p)?.matrix;
    let rhs_a = on_legs(&dims, &[0, 2], &rmat(m, p)?.matrix) * on_legs(&dims, &[1, 2], &rmat(n, p)?.matrix);
    let b = rmat(m, &np)?.matrix;
    let rhs_b = on_legs(&dims, &[0, 2], &rmat(m, p)?.matrix) * on_legs(&dims, &[0, 1], &rmat(m, n)?.matrix);
    Ok((fro(&(&a - &rhs_a)) / fro(&a), fro(&(&b - &rhs_b)) / fro(&b)))
}

/// ‖ℛ21ℛΔ(v) − v⊗v‖ / ‖v⊗v‖ on M⊗N, v the ribbon element.
pub fn ribbon_residual(m: &WeightModule, n: &WeightModule) -> Result<f64> {
    let r = rmat(m, n)?.matrix;
    let r21 = flip(n.dim(), m.dim()) * rmat(n, m)?.matrix * flip(m.dim(), n.dim());
    let lhs = r21 * r * ribbon_on(&m.tensor(n))?;
    let rhs = kron(&ribbon_on(m)?, &ribbon_on(n)?);
    Ok(fro(&(&lhs - &rhs)) / fro(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_datum, parse_type, RootDatum, Weight};
    use crate::uqrep::{build_irrep, QParams};
    use std::sync::Arc;

    fn setup(t: &str, q: f64) -> (Arc<RootDatum>, QParams) {
        let rd = Arc::new(build_root_datum(&parse_type(t).unwrap()).unwrap());
        let qp = QParams::new(q, &rd).unwrap();
        (rd, qp)
    }

    fn irrep(rd: &Arc<RootDatum>, qp: &QParams, w: &[i64]) -> WeightModule {
        build_irrep(rd, &Weight::from_ints(w), qp).unwrap()
    }

    #[test]
    fn su2_golden_matrix() {
        let q: f64 = 0.7;
        let (rd, qp) = setup("A1", q);
        let v = irrep(&rd, &qp, &[1]);
        let rm = rmat(&v, &v).unwrap();
        assert_eq!(rm.tag, "reversed");
        let r = rm.matrix;
        let s = q.sqrt();
        let want = [
            [s / q, 0.0, 0.0, 0.0],
            [0.0, s, s * (1.0 / q - q), 0.0],
            [0.0, 0.0, s, 0.0],
            [0.0, 0.0, 0.0, s / q],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((r[(i, j)] - cr(want[i][j])).norm() < 1e-12, "{i}{j}: {}", r[(i, j)]);
            }
        }
    }

    #[test]
    fn trivial_factor_gives_identity() {
        let (rd, qp) = setup("A2", 0.6);
        let v = irrep(&rd, &qp, &[1, 0]);
        let t = WeightModule::trivial(rd.clone(), qp);
        let r = rmat(&v, &t).unwrap().matrix;
        assert!(fro(&(r - eye(3))) < 1e-12);
    }

    #[test]
    fn ybe_and_ribbon() {
        let (rd, qp) = setup("A1", 0.7);
        for w in 1..=3 {
            let v = irrep(&rd, &qp, &[w]);
            assert!(ybe_residual(&v).unwrap() < 1e-10);
            assert!(ribbon_residual(&v, &irrep(&rd, &qp, &[1])).unwrap() < 1e-10);
        }
        let (rd, qp) = setup("A2", 0.6);
        let a = irrep(&rd, &qp, &[1, 0]);
        let b = irrep(&rd, &qp, &[0, 1]);
        assert!(ybe_residual(&a).unwrap() < 1e-10);
        assert!(ribbon_residual(&a, &b).unwrap() < 1e-10);
        assert!(ribbon_residual(&a, &a).unwrap() < 1e-10);
        let (h1, h2) = hexagon_residuals(&a, &b, &a).unwrap();
        assert!(h1 < 1e-10 && h2 < 1e-10);
    }

    #[test]
    fn matches_oracle() {
        let (rd, qp) = setup("A1", 0.7);
        for (x, y) in [(1, 1), (2, 1), (3, 3), (1, 2)] {
            let (a, b) = (irrep(&rd, &qp, &[x]), irrep(&rd, &qp, &[y]));
            let r1 = rmat(&a, &b).unwrap().matrix;
            let r2 = rmat_oracle(&a, &b).unwrap().matrix;
            assert!(fro(&(&r1 - &r2)) < 1e-9 * fro(&r1), "{x} {y}");
        }
        let (rd, qp) = setup("A2", 0.6);
        let (a, b) = (irrep(&rd, &qp, &[1, 0]), irrep(&rd, &qp, &[0, 1]));
        let r1 = rmat(&a, &b).unwrap().matrix;
        assert!(fro(&(&r1 - rmat_oracle(&a, &b).unwrap().matrix)) < 1e-9 * fro(&r1));
        let ad = irrep(&rd, &qp, &[1, 1]);
        assert!(matches!(rmat_oracle(&ad, &ad), Err(QspError::Input(_))));
    }

    #[test]
    fn diagram_symmetry() {
        let (rd, qp) = setup("A2", 0.6);
        let a = irrep(&rd, &qp, &[1, 0]);
        let b = irrep(&rd, &qp, &[1, 1]);
        let p = [1, 0];
        let r = rmat(&a, &b).unwrap().matrix;
        let rt = rmat(&a.twisted(&p), &b.twisted(&p)).unwrap().matrix;
        assert!(fro(&(r - rt)) < 1e-10);
    }
}
