//! Formal noncommutative polynomials in E_r, F_r, K_ω.

use std::collections::{BTreeMap, HashMap};

use crate::linalg::{cr, eye, kron, CMat, C64};
use crate::rootsys::{RootDatum, Weight};

use super::WeightModule;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    E(usize),
    F(usize),
    K(Weight),
}

type Word = Vec<Letter>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgebraElement {
    pub terms: BTreeMap<Word, C64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TensorElement {
    pub terms: BTreeMap<(Word, Word), C64>,
}

const DROP: f64 = 1e-15;

fn normalize(word: Word) -> Word {
    let mut out: Word = Vec::with_capacity(word.len());
    for l in word {
        match (out.last_mut(), l) {
            (Some(Letter::K(a)), Letter::K(b)) => {
                *a = a.add(&b);
                if a.is_zero() {
                    out.pop();
                }
            }
            (_, Letter::K(b)) if b.is_zero() => {}
            (_, l) => out.push(l),
        }
    }
    out
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(c: C64) -> Self {
        let mut terms = BTreeMap::new();
        if c.norm() > 0.0 {
            terms.insert(vec![], c);
        }
        AlgebraElement { terms }
    }

    pub fn one() -> Self {
        Self::scalar(cr(1.0))
    }

    pub fn letter(l: Letter) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(normalize(vec![l]), cr(1.0));
        AlgebraElement { terms }
    }

    pub fn e(r: usize) -> Self {
        Self::letter(Letter::E(r))
    }

    pub fn f(r: usize) -> Self {
        Self::letter(Letter::F(r))
    }

    pub fn k(w: Weight) -> Self {
        Self::letter(Letter::K(w))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn push(&mut self, w: Word, c: C64) {
        let w = normalize(w);
        let slot = self.terms.entry(w.clone()).or_insert(C64::new(0.0, 0.0));
        *slot += c;
        if slot.norm() < DROP {
            self.terms.remove(&w);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.push(w.clone(), *c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(cr(-1.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero();
        for (w, x) in &self.terms {
            out.push(w.clone(), x * c);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let mut w = w1.clone();
                w.extend(w2.iter().cloned());
                out.push(w, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Replace every letter by an element and multiply out.
    pub fn substitute(&self, f: &dyn Fn(&Letter) -> AlgebraElement) -> AlgebraElement {
        let mut cache: HashMap<Letter, AlgebraElement> = HashMap::new();
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let mut acc = Self::scalar(*c);
            for l in w {
                let img = cache.entry(l.clone()).or_insert_with(|| f(l)).clone();
                acc = acc.mul(&img);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Evaluate on a module.
    pub fn act(&self, m: &WeightModule) -> CMat {
        let d = m.dim();
        let mut cache: HashMap<Letter, CMat> = HashMap::new();
        let mut out = CMat::zeros(d, d);
        for (w, c) in &self.terms {
            let mut acc = eye(d) * *c;
            for l in w {
                let mat = cache.entry(l.clone()).or_insert_with(|| match l {
                    Letter::E(r) => m.e[*r].clone(),
                    Letter::F(r) => m.f[*r].clone(),
                    Letter::K(om) => m.k(om),
                });
                acc = &acc * &*mat;
            }
            out += acc;
        }
        out
    }

    pub fn coproduct(&self, datum: &RootDatum) -> TensorElement {
        let mut out = TensorElement::default();
        for (w, c) in &self.terms {
            let mut acc: Vec<(Word, Word, C64)> = vec![(vec![], vec![], *c)];
            for l in w {
                let parts: Vec<(Letter, Letter)> = match l {
                    Letter::E(r) => vec![
                        (Letter::E(*r), Letter::K(Weight::zero(datum.rank()))),
                        (Letter::K(datum.alpha(*r)), Letter::E(*r)),
                    ],
                    Letter::F(r) => vec![
                        (Letter::F(*r), Letter::K(datum.alpha(*r).neg())),
                        (Letter::K(Weight::zero(datum.rank())), Letter::F(*r)),
                    ],
                    Letter::K(om) => vec![(Letter::K(om.clone()), Letter::K(om.clone()))],
                };
                let mut next = Vec::with_capacity(acc.len() * parts.len());
                for (a, b, x) in &acc {
                    for (pa, pb) in &parts {
                        let mut a2 = a.clone();
                        a2.push(pa.clone());
                        let mut b2 = b.clone();
                        b2.push(pb.clone());
                        next.push((a2, b2, *x));
                    }
                }
                acc = next;
            }
            for (a, b, x) in acc {
                out.push(normalize(a), normalize(b), x);
            }
        }
        out
    }

    pub fn antipode(&self, datum: &RootDatum) -> AlgebraElement {
        let mut out = Self::zero();
        for (w, c) in &self.terms {
            let mut acc = Self::scalar(*c);
            for l in w.iter().rev() {
                let img = match l {
                    Letter::E(r) => Self::k(datum.alpha(*r).neg()).mul(&Self::e(*r)).scale(cr(-1.0)),
                    Letter::F(r) => Self::f(*r).mul(&Self::k(datum.alpha(*r))).scale(cr(-1.0)),
                    Letter::K(om) => Self::k(om.neg()),
                };
                acc = acc.mul(&img);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Adjoint action ad_q(x)(y) = Σ x_(1) y S(x_(2)).
    pub fn ad(&self, y: &AlgebraElement, datum: &RootDatum) -> AlgebraElement {
        let mut out = Self::zero();
        for ((a, b), c) in &self.coproduct(datum).terms {
            let left = AlgebraElement {
                terms: [(a.clone(), *c)].into_iter().collect(),
            };
            let right = AlgebraElement {
                terms: [(b.clone(), cr(1.0))].into_iter().collect(),
            }
            .antipode(datum);
            out = out.add(&left.mul(y).mul(&right));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }
}

impl TensorElement {
    fn push(&mut self, a: Word, b: Word, c: C64) {
        let key = (a, b);
        let slot = self.terms.entry(key.clone()).or_insert(C64::new(0.0, 0.0));
        *slot += c;
        if slot.norm() < DROP {
            self.terms.remove(&key);
        }
    }

    /// Evaluate on M ⊗ N.
    pub fn act(&self, m: &WeightModule, n: &WeightModule) -> CMat {
        let mut out = CMat::zeros(m.dim() * n.dim(), m.dim() * n.dim());
        for ((a, b), c) in &self.terms {
            let ea = AlgebraElement {
                terms: [(a.clone(), *c)].into_iter().collect(),
            };
            let eb = AlgebraElement {
                terms: [(b.clone(), cr(1.0))].into_iter().collect(),
            };
            out += kron(&ea.act(m), &eb.act(n));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro;
    use crate::rootsys::{build_root_datum, parse_type};
    use crate::uqrep::{build_irrep, QParams};
    use std::sync::Arc;

    #[test]
    fn coproduct_matches_tensor_module() {
        let rd = Arc::new(build_root_datum(&parse_type("A2").unwrap()).unwrap());
        let qp = QParams::new(0.6, &rd).unwrap();
        let v = build_irrep(&rd, &Weight::from_ints(&[1, 0]), &qp).unwrap();
        let w = build_irrep(&rd, &Weight::from_ints(&[0, 1]), &qp).unwrap();
        let vw = v.tensor(&w);
        let x = AlgebraElement::e(0).mul(&AlgebraElement::f(1)).add(&AlgebraElement::k(rd.alpha(0)).scale(cr(2.0)));
        let lhs = x.coproduct(&rd).act(&v, &w);
        assert!(fro(&(lhs - x.act(&vw))) < 1e-12);
    }

    #[test]
    fn antipode_axiom() {
        let rd = Arc::new(build_root_datum(&parse_type("A1").unwrap()).unwrap());
        let qp = QParams::new(0.6, &rd).unwrap();
        let v = build_irrep(&rd, &Weight::from_ints(&[2]), &qp).unwrap();
        for x in [AlgebraElement::e(0), AlgebraElement::f(0), AlgebraElement::e(0).mul(&AlgebraElement::f(0))] {
            // m(S ⊗ id)Δ(x) = ε(x)
            let mut acc = AlgebraElement::zero();
            for ((a, b), c) in &x.coproduct(&rd).terms {
                let sa = AlgebraElement { terms: [(a.clone(), *c)].into_iter().collect() }.antipode(&rd);
                acc = acc.add(&sa.mul(&AlgebraElement { terms: [(b.clone(), cr(1.0))].into_iter().collect() }));
            }
            let m = acc.act(&v);
            assert!(fro(&m) < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn ad_of_e_on_f() {
        let rd = Arc::new(build_root_datum(&parse_type("A1").unwrap()).unwrap());
        let qp = QParams::new(0.6, &rd).unwrap();
        let v = build_irrep(&rd, &Weight::from_ints(&[2]), &qp).unwrap();
        // ad(E)(Y) = E Y − K Y K^{-1} E
        let y = AlgebraElement::f(0);
        let lhs = AlgebraElement::e(0).ad(&y, &rd).act(&v);
        let (e, k, ki) = (v.e[0].clone(), v.k_alpha(0), v.k_alpha_inv(0));
        let f = v.f[0].clone();
        let rhs = &e * &f - &k * &f * &ki * &e;
        assert!(fro(&(lhs - rhs)) < 1e-12);
    }
}
