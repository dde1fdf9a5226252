//! Highest weight modules built level by level from F-monomials.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{QspError, Result};
use crate::linalg::{cr, CMat, C64};
use crate::rootsys::{RootDatum, Weight};

use super::{dominant_weight, QParams, WeightModule};

pub const DEFAULT_DIM_CAP: usize = 400;

type Sparse = BTreeMap<usize, C64>;

fn add_into(acc: &mut Sparse, i: usize, v: C64) {
    *acc.entry(i).or_insert(C64::new(0.0, 0.0)) += v;
}

pub fn build_irrep(datum: &Arc<RootDatum>, lam: &Weight, qp: &QParams) -> Result<WeightModule> {
    build_irrep_capped(datum, lam, qp, DEFAULT_DIM_CAP)
}

/// V_λ with an orthonormal basis. Each level is spanned by F_r applied to the previous
/// level; the invariant form on these candidates is computed from [E_r, F_s] and the
/// candidates are orthonormalized in order, dropping the radical.
pub fn build_irrep_capped(
    datum: &Arc<RootDatum>,
    lam: &Weight,
    qp: &QParams,
    cap: usize,
) -> Result<WeightModule> {
    let lam = dominant_weight(datum, lam)?;
    let expected = datum.weyl_dim(&lam) as usize;
    if expected > cap {
        return Err(QspError::Resource(format!(
            "V_{lam} has dimension {expected}, above the cap {cap}"
        )));
    }
    let n = datum.rank();
    let alphas: Vec<Weight> = (0..n).map(|r| datum.alpha(r)).collect();
    let qrs: Vec<f64> = (0..n).map(|r| qp.qr(datum, r)).collect();

    let mut wts = vec![lam.clone()];
    let mut levels = vec![0usize];
    let mut level_sets: Vec<Vec<usize>> = vec![vec![0]];
    // e_cols[s][j]: E_s applied to basis vector j; f_cols likewise.
    let mut e_cols: Vec<Vec<Sparse>> = vec![vec![Sparse::new()]; n];
    let mut f_cols: Vec<Vec<Sparse>> = vec![vec![Sparse::new()]; n];

    loop {
        let prev = level_sets.last().unwrap().clone();
        let cands: Vec<(usize, usize)> = prev.iter().flat_map(|&b| (0..n).map(move |r| (r, b))).collect();
        let cw: Vec<Weight> = cands.iter().map(|&(r, b)| wts[b].sub(&alphas[r])).collect();

        // E_s on candidate F_r b, expressed in the previous level.
        let e_on_cand = |s: usize, r: usize, b: usize, e_cols: &Vec<Vec<Sparse>>, f_cols: &Vec<Vec<Sparse>>| {
            let mut out = Sparse::new();
            for (&i, &v) in &e_cols[s][b] {
                for (&k, &w) in &f_cols[r][i] {
                    add_into(&mut out, k, w * v);
                }
            }
            if s == r {
                let h = qp.pow(datum.pair(&alphas[r], &wts[b]));
                let qr = qrs[r];
                add_into(&mut out, b, cr((h - 1.0 / h) / (qr - 1.0 / qr)));
            }
            out
        };
        let ecand: Vec<Vec<Sparse>> = (0..n)
            .map(|s| cands.iter().map(|&(r, b)| e_on_cand(s, r, b, &e_cols, &f_cols)).collect())
            .collect();

        // Group candidates by weight, keeping first-appearance order.
        let mut groups: Vec<(Weight, Vec<usize>)> = vec![];
        for (i, w) in cw.iter().enumerate() {
            match groups.iter_mut().find(|g| &g.0 == w) {
                Some(g) => g.1.push(i),
                None => groups.push((w.clone(), vec![i])),
            }
        }

        // (group index, coefficients over the group's candidates)
        let mut new_vecs: Vec<(usize, Vec<C64>)> = vec![];
        let mut grams: Vec<CMat> = vec![];
        for (gi, (_, members)) in groups.iter().enumerate() {
            let m = members.len();
            let mut g = CMat::zeros(m, m);
            for (a, &i) in members.iter().enumerate() {
                let (r, b) = cands[i];
                let factor = 1.0 / qp.pow(datum.pair(&alphas[r], &wts[b]));
                for (c, &j) in members.iter().enumerate() {
                    if let Some(v) = ecand[r][j].get(&b) {
                        g[(a, c)] = v * factor;
                    }
                }
            }
            let sigmax = (0..m).map(|i| g[(i, i)].norm()).fold(1.0, f64::max);
            let mut basis: Vec<Vec<C64>> = vec![];
            for i in 0..m {
                let mut v = vec![C64::new(0.0, 0.0); m];
                v[i] = cr(1.0);
                for c in &basis {
                    let ip = ip_g(c, &g, &v);
                    for k in 0..m {
                        v[k] -= ip * c[k];
                    }
                }
                let nn = ip_g(&v, &g, &v).re;
                if nn > 1e-8 * sigmax {
                    let s = nn.sqrt();
                    basis.push(v.iter().map(|x| x / s).collect());
                }
            }
            for c in basis {
                new_vecs.push((gi, c));
            }
            grams.push(g);
        }
        if new_vecs.is_empty() {
            break;
        }
        let depth = levels[prev[0]] + 1;
        let start = wts.len();
        let mut idx = vec![];
        for (k, (gi, _)) in new_vecs.iter().enumerate() {
            wts.push(groups[*gi].0.clone());
            levels.push(depth);
            idx.push(start + k);
            for s in 0..n {
                e_cols[s].push(Sparse::new());
                f_cols[s].push(Sparse::new());
            }
        }
        if wts.len() > cap {
            return Err(QspError::Resource(format!("irrep construction exceeded the cap {cap}")));
        }
        for (k, (gi, c)) in new_vecs.iter().enumerate() {
            let members = &groups[*gi].1;
            let g = &grams[*gi];
            let id = idx[k];
            // F_r b = Σ_k ⟨n_k, F_r b⟩ n_k.
            for (col, &ci) in members.iter().enumerate() {
                let (r, b) = cands[ci];
                let mut val = C64::new(0.0, 0.0);
                for (row, _) in members.iter().enumerate() {
                    val += c[row].conj() * g[(row, col)];
                }
                if val.norm() > 1e-14 {
                    f_cols[r][b].insert(id, val);
                }
            }
            for s in 0..n {
                let mut acc = Sparse::new();
                for (row, &ci) in members.iter().enumerate() {
                    if c[row].norm() == 0.0 {
                        continue;
                    }
                    for (&i, &v) in &ecand[s][ci] {
                        add_into(&mut acc, i, c[row] * v);
                    }
                }
                acc.retain(|_, v| v.norm() > 1e-14);
                e_cols[s][id] = acc;
            }
        }
        level_sets.push(idx);
    }

    let dim = wts.len();
    if dim != expected {
        return Err(QspError::Degenerate(format!(
            "built dimension {dim} differs from the Weyl dimension {expected} for {lam}"
        )));
    }
    let to_mat = |cols: &Vec<Sparse>| {
        let mut m = CMat::zeros(dim, dim);
        for (j, col) in cols.iter().enumerate() {
            for (&i, &v) in col {
                m[(i, j)] = v;
            }
        }
        m
    };
    Ok(WeightModule {
        datum: datum.clone(),
        qp: *qp,
        weights: wts,
        e: e_cols.iter().map(to_mat).collect(),
        f: f_cols.iter().map(to_mat).collect(),
        highest: Some(lam),
        levels,
    })
}

fn ip_g(a: &[C64], g: &CMat, b: &[C64]) -> C64 {
    let m = a.len();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..m {
        if a[i].norm() == 0.0 {
            continue;
        }
        let mut t = C64::new(0.0, 0.0);
        for j in 0..m {
            t += g[(i, j)] * b[j];
        }
        s += a[i].conj() * t;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_datum, parse_type};

    fn setup(t: &str, q: f64) -> (Arc<RootDatum>, QParams) {
        let rd = Arc::new(build_root_datum(&parse_type(t).unwrap()).unwrap());
        let qp = QParams::new(q, &rd).unwrap();
        (rd, qp)
    }

    #[test]
    fn dimensions_and_relations() {
        for (t, w) in [("A1", vec![3]), ("A2", vec![1, 1]), ("A2", vec![2, 0]), ("B2", vec![1, 1]), ("C3", vec![0, 1, 0]), ("G2", vec![1, 0]), ("A3", vec![1, 0, 1])] {
            let (rd, qp) = setup(t, 0.7);
            let w = Weight::from_ints(&w);
            let m = build_irrep(&rd, &w, &qp).unwrap();
            assert_eq!(m.dim() as u64, rd.weyl_dim(&w), "{t}");
            let res = m.relation_residuals();
            assert!(res.max() < 1e-10, "{t} {w}: {res:?}");
        }
    }

    #[test]
    fn trivial_weight() {
        let (rd, qp) = setup("A2", 0.5);
        let m = build_irrep(&rd, &Weight::from_ints(&[0, 0]), &qp).unwrap();
        assert_eq!(m.dim(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let (rd, qp) = setup("A2", 0.5);
        let err = build_irrep_capped(&rd, &Weight::from_ints(&[3, 3]), &qp, 20).unwrap_err();
        assert!(matches!(err, QspError::Resource(_)));
    }

    #[test]
    fn non_dominant_rejected() {
        let (rd, qp) = setup("A2", 0.5);
        assert!(build_irrep(&rd, &Weight::from_ints(&[-1, 0]), &qp).is_err());
    }
}
