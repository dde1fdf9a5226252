//! Finite-dimensional admissible *-representations of U_q(u).

mod algebra;
mod decompose;
mod irrep;

use std::sync::Arc;

use serde_json::json;

use crate::error::{input, QspError, Result};
use crate::linalg::{cr, diag_re, eye, fro, kron, matpow, CMat, C64};
use crate::rootsys::{qbinom, RootDatum, Weight, Q};

pub use algebra::{AlgebraElement, Letter, TensorElement};
pub use decompose::{decompose, Component};
pub use irrep::{build_irrep, build_irrep_capped, DEFAULT_DIM_CAP};

/// Numeric deformation parameter, 0 < q < 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QParams {
    pub q: f64,
    /// ħ with e^{πiħ} = q.
    pub hbar: C64,
    /// q^{1/d_A}.
    pub root: f64,
    pub d_a: i64,
}

impl QParams {
    pub fn new(q: f64, datum: &RootDatum) -> Result<Self> {
        Self::with_denominator(q, datum.d_a)
    }

    pub fn with_denominator(q: f64, d_a: i64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return input(format!("q must lie in (0,1), got {q}"));
        }
        Ok(QParams {
            q,
            hbar: C64::new(0.0, -q.ln() / std::f64::consts::PI),
            root: q.powf(1.0 / d_a as f64),
            d_a,
        })
    }

    /// q^x for a rational exponent.
    pub fn pow(&self, x: Q) -> f64 {
        let y = x * Q::from_integer(self.d_a);
        if y.is_integer() && y.to_integer().abs() < 4096 {
            self.root.powi(y.to_integer() as i32)
        } else {
            self.q.powf(*x.numer() as f64 / *x.denom() as f64)
        }
    }

    pub fn powf(&self, x: f64) -> f64 {
        self.q.powf(x)
    }

    /// q_r = q^{d_r}.
    pub fn qr(&self, datum: &RootDatum, r: usize) -> f64 {
        self.q.powi(datum.d[r] as i32)
    }
}

/// A module with orthonormal weight basis and generator matrices.
#[derive(Clone, Debug)]
pub struct WeightModule {
    pub datum: Arc<RootDatum>,
    pub qp: QParams,
    pub weights: Vec<Weight>,
    pub e: Vec<CMat>,
    pub f: Vec<CMat>,
    /// Set for modules built as irreducibles.
    pub highest: Option<Weight>,
    /// Depth below the highest weight, for irreducibles.
    pub levels: Vec<usize>,
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct RelationResiduals {
    pub cartan: f64,
    pub ef: f64,
    pub serre: f64,
    pub star: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        self.cartan.max(self.ef).max(self.serre).max(self.star)
    }
}

fn rel(res: &CMat, scale: f64) -> f64 {
    fro(res) / scale.max(1e-300)
}

impl WeightModule {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn rank(&self) -> usize {
        self.datum.rank()
    }

    pub fn trivial(datum: Arc<RootDatum>, qp: QParams) -> Self {
        let n = datum.rank();
        WeightModule {
            weights: vec![Weight::zero(n)],
            e: vec![CMat::zeros(1, 1); n],
            f: vec![CMat::zeros(1, 1); n],
            highest: Some(Weight::zero(n)),
            levels: vec![0],
            datum,
            qp,
        }
    }

    /// Diagonal of K_ω.
    pub fn k_diag(&self, omega: &Weight) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| self.qp.pow(self.datum.pair(omega, w)))
            .collect()
    }

    pub fn k(&self, omega: &Weight) -> CMat {
        diag_re(&self.k_diag(omega))
    }

    pub fn k_alpha(&self, r: usize) -> CMat {
        self.k(&self.datum.alpha(r))
    }

    pub fn k_alpha_inv(&self, r: usize) -> CMat {
        self.k(&self.datum.alpha(r).neg())
    }

    pub fn qr(&self, r: usize) -> f64 {
        self.qp.qr(&self.datum, r)
    }

    /// Indices of basis vectors with the given weight.
    pub fn weight_indices(&self, w: &Weight) -> Vec<usize> {
        (0..self.dim()).filter(|&i| &self.weights[i] == w).collect()
    }

    pub fn tensor(&self, other: &WeightModule) -> WeightModule {
        let n = self.rank();
        let (im, io) = (eye(self.dim()), eye(other.dim()));
        let e = (0..n)
            .map(|r| kron(&self.e[r], &io) + kron(&self.k_alpha(r), &other.e[r]))
            .collect();
        let f = (0..n)
            .map(|r| kron(&self.f[r], &other.k_alpha_inv(r)) + kron(&im, &other.f[r]))
            .collect();
        let weights = self
            .weights
            .iter()
            .flat_map(|a| other.weights.iter().map(move |b| a.add(b)))
            .collect();
        WeightModule {
            datum: self.datum.clone(),
            qp: self.qp,
            weights,
            e,
            f,
            highest: None,
            levels: vec![],
        }
    }

    pub fn direct_sum(mods: &[&WeightModule]) -> WeightModule {
        let first = mods[0];
        let n = first.rank();
        let blocks = |pick: &dyn Fn(&WeightModule) -> &CMat| {
            crate::linalg::dsum(&mods.iter().map(|m| pick(m)).collect::<Vec<_>>())
        };
        let e = (0..n).map(|r| blocks(&|m| &m.e[r])).collect();
        let f = (0..n).map(|r| blocks(&|m| &m.f[r])).collect();
        WeightModule {
            datum: first.datum.clone(),
            qp: first.qp,
            weights: mods.iter().flat_map(|m| m.weights.clone()).collect(),
            e,
            f,
            highest: None,
            levels: vec![],
        }
    }

    /// The module with action twisted by a diagram automorphism p: E_r acts as E_{p(r)}.
    pub fn twisted(&self, p: &[usize]) -> WeightModule {
        let n = self.rank();
        let inv: Vec<usize> = {
            let mut v = vec![0; n];
            for i in 0..n {
                v[p[i]] = i;
            }
            v
        };
        WeightModule {
            datum: self.datum.clone(),
            qp: self.qp,
            weights: self.weights.iter().map(|w| self.datum.permute_weight(&inv, w)).collect(),
            e: (0..n).map(|r| self.e[p[r]].clone()).collect(),
            f: (0..n).map(|r| self.f[p[r]].clone()).collect(),
            highest: self.highest.as_ref().map(|w| self.datum.permute_weight(&inv, w)),
            levels: self.levels.clone(),
        }
    }

    /// Relative residuals of the defining relations and of E_r* = F_r K_r.
    pub fn relation_residuals(&self) -> RelationResiduals {
        let n = self.rank();
        let mut out = RelationResiduals::default();
        for i in 0..n {
            let om = self.datum.fundamental(i);
            let (k, kinv) = (self.k(&om), self.k(&om.neg()));
            for r in 0..n {
                let c = self.qp.pow(self.datum.pair(&om, &self.datum.alpha(r)));
                let lhs = &k * &self.e[r] * &kinv;
                out.cartan = out.cartan.max(rel(&(&lhs - &self.e[r] * cr(c)), fro(&self.e[r])));
            }
        }
        for r in 0..n {
            let qr = self.qr(r);
            let (kr, kri) = (self.k_alpha(r), self.k_alpha_inv(r));
            let fk = &self.f[r] * &kr;
            out.star = out.star.max(rel(&(self.e[r].adjoint() - &fk), fro(&self.e[r]).max(fro(&fk))));
            for s in 0..n {
                let ef = &self.e[r] * &self.f[s];
                let fe = &self.f[s] * &self.e[r];
                let mut res = &ef - &fe;
                let mut scale = fro(&ef).max(fro(&fe));
                if r == s {
                    let rhs = (&kr - &kri) * cr(1.0 / (qr - 1.0 / qr));
                    scale = scale.max(fro(&rhs));
                    res -= rhs;
                }
                out.ef = out.ef.max(rel(&res, scale));
                if r != s {
                    let m = (1 - self.datum.cartan[r][s]) as u32;
                    for (x, y) in [(&self.e[r], &self.e[s]), (&self.f[r], &self.f[s])] {
                        let mut acc = CMat::zeros(self.dim(), self.dim());
                        let mut scale: f64 = 0.0;
                        for k in 0..=m {
                            let c = qbinom(m, k, qr) * if k % 2 == 0 { 1.0 } else { -1.0 };
                            let t = matpow(x, (m - k) as usize) * y * matpow(x, k as usize) * cr(c);
                            scale = scale.max(fro(&t));
                            acc += t;
                        }
                        out.serre = out.serre.max(if scale < 1e-300 { 0.0 } else { fro(&acc) / scale });
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "algebra": self.datum.type_label(),
            "q": self.qp.q,
            "dim": self.dim(),
            "highest": self.highest,
            "weights": self.weights,
            "E": self.e.iter().map(crate::linalg::to_json).collect::<Vec<_>>(),
            "F": self.f.iter().map(crate::linalg::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn check_same_algebra(&self, other: &WeightModule) -> Result<()> {
        if self.datum != other.datum || self.qp != other.qp {
            return Err(QspError::Input("modules over different algebras or q".into()));
        }
        Ok(())
    }
}

/// (ϖ, ϖ + 2ρ); the ribbon element acts on V_ϖ by q to this power.
pub fn casimir_scalar(datum: &RootDatum, w: &Weight) -> Q {
    datum.pair(w, &w.add(&datum.rho().scale(Q::from_integer(2))))
}

/// The ribbon element on an arbitrary module, through its isotypic decomposition.
pub fn ribbon_on(m: &WeightModule) -> Result<CMat> {
    if let Some(h) = &m.highest {
        let v = m.qp.pow(casimir_scalar(&m.datum, h));
        return Ok(eye(m.dim()) * cr(v));
    }
    let mut out = CMat::zeros(m.dim(), m.dim());
    for c in decompose(m)? {
        let v = m.qp.pow(casimir_scalar(&m.datum, &c.highest));
        for j in &c.embeddings {
            out += j * j.adjoint() * cr(v);
        }
    }
    Ok(out)
}

/// Highest weight of the module `V_ϖ` parsed from fundamental coordinates.
pub fn dominant_weight(datum: &RootDatum, w: &Weight) -> Result<Weight> {
    if w.len() != datum.rank() {
        return input(format!("weight has {} entries, rank is {}", w.len(), datum.rank()));
    }
    if !w.is_dominant() {
        return input(format!("weight {w} is not dominant integral"));
    }
    Ok(w.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_datum, parse_type};

    pub(crate) fn setup(t: &str, q: f64) -> (Arc<RootDatum>, QParams) {
        let rd = Arc::new(build_root_datum(&parse_type(t).unwrap()).unwrap());
        let qp = QParams::new(q, &rd).unwrap();
        (rd, qp)
    }

    #[test]
    fn qparams() {
        let (rd, qp) = setup("A1", 0.7);
        assert!((qp.root - 0.7f64.sqrt()).abs() < 1e-15);
        assert!(qp.hbar.im > 0.0);
        assert!(QParams::new(1.5, &rd).is_err());
        let e = (C64::new(0.0, std::f64::consts::PI) * qp.hbar).exp();
        assert!((e - cr(0.7)).norm() < 1e-14);
    }

    #[test]
    fn a1_fundamental_matches_explicit_matrices() {
        let (rd, qp) = setup("A1", 0.7);
        let v = build_irrep(&rd, &Weight::from_ints(&[1]), &qp).unwrap();
        let q: f64 = 0.7;
        let e = CMat::from_row_slice(2, 2, &[cr(0.0), cr(q.sqrt()), cr(0.0), cr(0.0)]);
        let f = CMat::from_row_slice(2, 2, &[cr(0.0), cr(0.0), cr(1.0 / q.sqrt()), cr(0.0)]);
        assert!(fro(&(&v.e[0] - e)) < 1e-14);
        assert!(fro(&(&v.f[0] - f)) < 1e-14);
        assert!(fro(&(v.k_alpha(0) - diag_re(&[q, 1.0 / q]))) < 1e-14);
    }

    #[test]
    fn casimir_values() {
        let (rd, _) = setup("A1", 0.7);
        assert_eq!(casimir_scalar(&rd, &Weight::from_ints(&[1])), Q::new(3, 2));
        assert_eq!(casimir_scalar(&rd, &Weight::from_ints(&[2])), Q::from_integer(4));
        assert_eq!(casimir_scalar(&rd, &Weight::from_ints(&[0])), Q::from_integer(0));
    }

    #[test]
    fn tensor_k_spectrum() {
        let (rd, qp) = setup("A1", 0.7);
        let v = build_irrep(&rd, &Weight::from_ints(&[1]), &qp).unwrap();
        let vv = v.tensor(&v);
        let mut k: Vec<f64> = vv.k_diag(&rd.alpha(0));
        k.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q: f64 = 0.7;
        let mut want = [q * q, 1.0, 1.0, 1.0 / (q * q)];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in k.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(vv.relation_residuals().max() < 1e-12);
        let t = WeightModule::trivial(rd.clone(), qp);
        let vt = v.tensor(&t);
        assert!(fro(&(&vt.e[0] - &v.e[0])) < 1e-15 && fro(&(&vt.f[0] - &v.f[0])) < 1e-15);
    }
}
