//! Isotypic decomposition of a finite dimensional unitary weight module.

use crate::error::{QspError, Result};
use crate::linalg::{fro, lstsq, nullspace, CMat};
use crate::rootsys::Weight;

use super::{build_irrep, WeightModule};

#[derive(Clone, Debug)]
pub struct Component {
    pub highest: Weight,
    pub multiplicity: usize,
    /// Isometric module maps V_highest → M, one per copy.
    pub embeddings: Vec<CMat>,
    pub module: WeightModule,
}

/// Highest weight vectors are the joint kernel of the E_r on each weight space; each one
/// is propagated down V_λ level by level through J F_r = F_r J.
pub fn decompose(m: &WeightModule) -> Result<Vec<Component>> {
    let n = m.rank();
    let mut distinct: Vec<Weight> = m.weights.clone();
    distinct.sort();
    distinct.dedup();
    distinct.retain(|w| w.is_dominant());
    let rho = m.datum.rho();
    distinct.sort_by(|a, b| {
        let ka = m.datum.pair_f64(a, &rho);
        let kb = m.datum.pair_f64(b, &rho);
        kb.partial_cmp(&ka).unwrap().then_with(|| b.cmp(a))
    });

    let mut out = vec![];
    let mut total = 0usize;
    for lam in distinct {
        let idx = m.weight_indices(&lam);
        let mut stacked = CMat::zeros(n * m.dim(), idx.len());
        for r in 0..n {
            for (c, &i) in idx.iter().enumerate() {
                for row in 0..m.dim() {
                    stacked[(r * m.dim() + row, c)] = m.e[r][(row, i)];
                }
            }
        }
        let ker = nullspace(&stacked, 1e-9);
        if ker.ncols() == 0 {
            continue;
        }
        let v = build_irrep(&m.datum, &lam, &m.qp)?;
        let mut embeddings = vec![];
        for k in 0..ker.ncols() {
            let mut top = CMat::zeros(m.dim(), 1);
            for (c, &i) in idx.iter().enumerate() {
                top[(i, 0)] = ker[(c, k)];
            }
            let j = propagate(m, &v, &top)?;
            let gram = j.adjoint() * &j;
            let err = fro(&(gram - CMat::identity(v.dim(), v.dim())));
            if err > 1e-7 * (v.dim() as f64) {
                return Err(QspError::Degenerate(format!(
                    "embedding of V_{lam} is not isometric (defect {err:.2e})"
                )));
            }
            embeddings.push(j);
        }
        total += v.dim() * embeddings.len();
        out.push(Component {
            highest: lam,
            multiplicity: embeddings.len(),
            embeddings,
            module: v,
        });
    }
    if total != m.dim() {
        return Err(QspError::Degenerate(format!(
            "components account for {total} of {} dimensions",
            m.dim()
        )));
    }
    Ok(out)
}

fn propagate(m: &WeightModule, v: &WeightModule, top: &CMat) -> Result<CMat> {
    let n = m.rank();
    let depth = v.levels.iter().copied().max().unwrap_or(0);
    let mut j = CMat::zeros(m.dim(), v.dim());
    j.set_column(0, &top.column(0));
    for lev in 1..=depth {
        let prev: Vec<usize> = (0..v.dim()).filter(|&i| v.levels[i] == lev - 1).collect();
        let cur: Vec<usize> = (0..v.dim()).filter(|&i| v.levels[i] == lev).collect();
        // S: F_r b in V restricted to this level, T: F_r J b in M.
        let ncand = prev.len() * n;
        let mut s = CMat::zeros(cur.len(), ncand);
        let mut t = CMat::zeros(m.dim(), ncand);
        for (pi, &b) in prev.iter().enumerate() {
            for r in 0..n {
                let col = pi * n + r;
                for (ci, &c) in cur.iter().enumerate() {
                    s[(ci, col)] = v.f[r][(c, b)];
                }
                t.set_column(col, &(&m.f[r] * j.column(b)));
            }
        }
        // J_L S = T
        let jl = lstsq(&s.transpose(), &t.transpose()).transpose();
        let resid = fro(&(&jl * &s - &t));
        if resid > 1e-8 * (1.0 + fro(&t)) {
            return Err(QspError::Degenerate(format!(
                "highest weight vector does not generate a copy of the irreducible (residual {resid:.2e})"
            )));
        }
        for (ci, &c) in cur.iter().enumerate() {
            j.set_column(c, &jl.column(ci));
        }
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::comm;
    use crate::rootsys::{build_root_datum, parse_type};
    use crate::uqrep::QParams;
    use std::sync::Arc;

    #[test]
    fn a1_clebsch_gordan() {
        let rd = Arc::new(build_root_datum(&parse_type("A1").unwrap()).unwrap());
        let qp = QParams::new(0.7, &rd).unwrap();
        let v1 = build_irrep(&rd, &Weight::from_ints(&[1]), &qp).unwrap();
        let v2 = build_irrep(&rd, &Weight::from_ints(&[2]), &qp).unwrap();
        let m = v1.tensor(&v2);
        let cs = decompose(&m).unwrap();
        let hs: Vec<String> = cs.iter().map(|c| c.highest.to_string()).collect();
        assert_eq!(hs, vec!["(3)", "(1)"]);
        for c in &cs {
            let j = &c.embeddings[0];
            for r in 0..1 {
                assert!(fro(&(&m.e[r] * j - j * &c.module.e[r])) < 1e-10);
                assert!(fro(&(&m.f[r] * j - j * &c.module.f[r])) < 1e-10);
            }
        }
    }

    #[test]
    fn a2_multiplicity_two() {
        let rd = Arc::new(build_root_datum(&parse_type("A2").unwrap()).unwrap());
        let qp = QParams::new(0.6, &rd).unwrap();
        let ad = build_irrep(&rd, &Weight::from_ints(&[1, 1]), &qp).unwrap();
        let m = ad.tensor(&ad);
        let cs = decompose(&m).unwrap();
        let adj = cs.iter().find(|c| c.highest == Weight::from_ints(&[1, 1])).unwrap();
        assert_eq!(adj.multiplicity, 2);
        let p: CMat = cs.iter().flat_map(|c| c.embeddings.iter().map(|j| j * j.adjoint())).fold(
            CMat::zeros(m.dim(), m.dim()),
            |a, b| a + b,
        );
        assert!(fro(&(p - CMat::identity(m.dim(), m.dim()))) < 1e-8);
        let rib = crate::uqrep::ribbon_on(&m).unwrap();
        for r in 0..2 {
            assert!(fro(&comm(&rib, &m.e[r])) < 1e-8);
        }
    }
}
