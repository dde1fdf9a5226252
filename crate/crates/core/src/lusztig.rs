//! Lusztig braid operators on U_q(g) and on integrable modules, and the constants
//! relating T_{w_X} to products of divided powers.

use std::sync::Arc;

use num_traits::{Signed, ToPrimitive};

use crate::diagrams::SatakeDiagram;
use crate::error::{input, Result};
use crate::linalg::{cr, fro, inverse, CMat, C64};
use crate::rootsys::{qfact, RootDatum, Weight, WeylWord, Q};
use crate::uqrep::{build_irrep, AlgebraElement, Letter, QParams, WeightModule};

fn qr_of(datum: &RootDatum, qp: &QParams, r: usize) -> f64 {
    qp.qr(datum, r)
}

/// T_r on a single generator.
pub fn braid_on_algebra(datum: &RootDatum, qp: &QParams, r: usize, gen: &Letter) -> AlgebraElement {
    let qr = qr_of(datum, qp, r);
    let kr = || AlgebraElement::k(datum.alpha(r));
    let kri = || AlgebraElement::k(datum.alpha(r).neg());
    match gen {
        Letter::K(chi) => AlgebraElement::k(datum.reflect(r, chi)),
        Letter::E(s) if *s == r => AlgebraElement::f(r).mul(&kr()).scale(cr(-1.0)),
        Letter::F(s) if *s == r => kri().mul(&AlgebraElement::e(r)).scale(cr(-1.0)),
        Letter::E(s) => {
            let a = -datum.cartan[r][*s];
            let mut out = AlgebraElement::zero();
            for m in 0..=a {
                let n = a - m;
                let c = (-qr).powi(-(m as i32)) / (qfact(m as u32, qr) * qfact(n as u32, qr));
                let t = AlgebraElement::e(r)
                    .pow(n as usize)
                    .mul(&AlgebraElement::e(*s))
                    .mul(&AlgebraElement::e(r).pow(m as usize));
                out = out.add(&t.scale(cr(c)));
            }
            out
        }
        Letter::F(s) => {
            let a = -datum.cartan[r][*s];
            let mut out = AlgebraElement::zero();
            for m in 0..=a {
                let n = a - m;
                let c = (-qr).powi(m as i32) / (qfact(m as u32, qr) * qfact(n as u32, qr));
                let t = AlgebraElement::f(r)
                    .pow(m as usize)
                    .mul(&AlgebraElement::f(*s))
                    .mul(&AlgebraElement::f(r).pow(n as usize));
                out = out.add(&t.scale(cr(c)));
            }
            out
        }
    }
}

pub fn braid_element(datum: &RootDatum, qp: &QParams, r: usize, x: &AlgebraElement) -> AlgebraElement {
    x.substitute(&|l| braid_on_algebra(datum, qp, r, l))
}

/// T_w = T_{r_1}⋯T_{r_M} as an algebra automorphism.
pub fn braid_word_on_algebra(datum: &RootDatum, qp: &QParams, w: &WeylWord, x: &AlgebraElement) -> AlgebraElement {
    w.0.iter().rev().fold(x.clone(), |acc, &r| braid_element(datum, qp, r, &acc))
}

/// T_r v = Σ_{b−a−c = n} (−1)^b q_r^{b−ac} E^{(a)}F^{(b)}E^{(c)} v for v of weight μ,
/// n = (μ, α_r^∨). Columns are processed one weight space at a time.
pub fn braid_on_module(m: &WeightModule, r: usize) -> CMat {
    let d = m.dim();
    let qr = m.qr(r);
    let datum = &m.datum;
    let alpha = datum.alpha(r);
    let e = &m.e[r];
    let f = &m.f[r];
    let mut out = CMat::zeros(d, d);
    let mut wts: Vec<&Weight> = m.weights.iter().collect();
    wts.sort();
    wts.dedup();
    let tiny = 1e-300;
    for w in wts {
        let cols = m.weight_indices(w);
        let n = datum.coroot_pair(w, &alpha).to_integer();
        let mut p = CMat::zeros(d, cols.len());
        for (k, &j) in cols.iter().enumerate() {
            p[(j, k)] = cr(1.0);
        }
        let mut acc = CMat::zeros(d, cols.len());
        // xc = E^{(c)} P
        let mut xc = p;
        let mut c = 0i64;
        while fro(&xc) > tiny {
            let a0 = (-(n + c)).max(0);
            // y = F^{(b)} xc for b = n + a0 + c
            let b0 = n + a0 + c;
            let mut y = xc.clone();
            for k in 1..=b0 {
                y = (f * &y) / cr(qint_pos(k, qr));
            }
            let mut a = a0;
            let mut b = b0;
            while fro(&y) > tiny {
                let mut z = y.clone();
                for k in 1..=a {
                    z = (e * &z) / cr(qint_pos(k, qr));
                }
                let sign = if b % 2 == 0 { 1.0 } else { -1.0 };
                acc += z * cr(sign * qr.powi((b - a * c) as i32));
                a += 1;
                b += 1;
                y = (f * &y) / cr(qint_pos(b, qr));
            }
            c += 1;
            xc = (e * &xc) / cr(qint_pos(c, qr));
        }
        for (k, &j) in cols.iter().enumerate() {
            out.set_column(j, &acc.column(k));
        }
    }
    out
}

fn qint_pos(k: i64, q: f64) -> f64 {
    crate::rootsys::qint(k, q)
}

pub fn braid_word_on_module(m: &WeightModule, w: &WeylWord) -> CMat {
    let mut t = CMat::identity(m.dim(), m.dim());
    for &r in &w.0 {
        t = &t * braid_on_module(m, r);
    }
    t
}

/// Everything attached to w_X for a fixed diagram.
#[derive(Clone, Debug)]
pub struct BraidContext {
    pub diagram: SatakeDiagram,
    pub datum: Arc<RootDatum>,
    pub word: WeylWord,
    pub betas: Vec<Weight>,
    pub qp: QParams,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppBResiduals {
    pub t_lowest: f64,
    pub t_inverse_lowest: f64,
    pub t_twice: f64,
    pub t_back: f64,
    pub e_scalar: f64,
    pub d_scalar: f64,
}

impl AppBResiduals {
    pub fn max(&self) -> f64 {
        [self.t_lowest, self.t_inverse_lowest, self.t_twice, self.t_back, self.e_scalar, self.d_scalar]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

impl BraidContext {
    pub fn new(diagram: &SatakeDiagram, qp: QParams) -> Self {
        let word = diagram.datum.longest_element(&diagram.x);
        let betas = diagram.datum.roots_along(&word);
        BraidContext {
            datum: Arc::new(diagram.datum.clone()),
            diagram: diagram.clone(),
            word,
            betas,
            qp,
        }
    }

    pub fn t_wx_module(&self, m: &WeightModule) -> CMat {
        braid_word_on_module(m, &self.word)
    }

    pub fn t_wx(&self, x: &AlgebraElement) -> AlgebraElement {
        braid_word_on_algebra(&self.datum, &self.qp, &self.word, x)
    }

    /// E ↦ −F, F ↦ −E, K_χ ↦ K_{−χ}.
    pub fn omega(&self, x: &AlgebraElement) -> AlgebraElement {
        x.substitute(&|l| match l {
            Letter::E(r) => AlgebraElement::f(*r).scale(cr(-1.0)),
            Letter::F(r) => AlgebraElement::e(*r).scale(cr(-1.0)),
            Letter::K(w) => AlgebraElement::k(w.neg()),
        })
    }

    pub fn tau(&self, x: &AlgebraElement) -> AlgebraElement {
        let t = &self.diagram.tau;
        x.substitute(&|l| match l {
            Letter::E(r) => AlgebraElement::e(t[*r]),
            Letter::F(r) => AlgebraElement::f(t[*r]),
            Letter::K(w) => AlgebraElement::k(self.datum.permute_weight(t, w)),
        })
    }

    /// E_r ↦ E_r K_r, F_r ↦ K_r^{-1} F_r.
    pub fn psi(&self, x: &AlgebraElement) -> AlgebraElement {
        x.substitute(&|l| match l {
            Letter::E(r) => AlgebraElement::e(*r).mul(&AlgebraElement::k(self.datum.alpha(*r))),
            Letter::F(r) => AlgebraElement::k(self.datum.alpha(*r).neg()).mul(&AlgebraElement::f(*r)),
            Letter::K(w) => AlgebraElement::k(w.clone()),
        })
    }

    /// E_r ↦ z_r E_r, F_r ↦ z_r^{-1} F_r.
    pub fn ad_s(&self, x: &AlgebraElement) -> AlgebraElement {
        x.substitute(&|l| match l {
            Letter::E(r) => AlgebraElement::e(*r).scale(self.diagram.z_c64(*r)),
            Letter::F(r) => AlgebraElement::f(*r).scale(self.diagram.z_c64(*r).conj()),
            Letter::K(w) => AlgebraElement::k(w.clone()),
        })
    }

    /// (ϖ, β_k^∨) along the stored word; ϖ must be dominant for X.
    pub fn exponents(&self, w: &Weight) -> Result<Vec<u32>> {
        let mut out = vec![];
        for b in &self.betas {
            let p = self.datum.coroot_pair(w, b);
            if !p.is_integer() || p.is_negative() {
                return input(format!("weight {w} is not dominant integral for X"));
            }
            out.push(p.to_integer().to_u32().unwrap_or(0));
        }
        Ok(out)
    }

    fn monomial(&self, ex: &[u32], lower: bool) -> AlgebraElement {
        let mut out = AlgebraElement::one();
        // leftmost factor carries r_M
        for k in (0..ex.len()).rev() {
            let r = self.word.0[k];
            let g = if lower { AlgebraElement::f(r) } else { AlgebraElement::e(r) };
            out = out.mul(&g.pow(ex[k] as usize));
        }
        out
    }

    /// Z⁻_ϖ = F_{r_M}^{n_M}⋯F_{r_1}^{n_1} with n_k = (ϖ, β_k^∨), plain powers.
    pub fn z_minus(&self, w: &Weight) -> Result<AlgebraElement> {
        Ok(self.monomial(&self.exponents(w)?, true))
    }

    /// Z⁺_μ = E_{r_M}^{m_M}⋯E_{r_1}^{m_1} with m_k = −(μ, β_k^∨) for μ antidominant on X.
    /// Applied to a lowest weight vector of weight μ it climbs back to the top.
    pub fn z_plus(&self, mu: &Weight) -> Result<AlgebraElement> {
        Ok(self.monomial(&self.exponents(&mu.neg())?, false))
    }

    /// (Z⁻_ϖ, Z⁺_{w_X ϖ}).
    pub fn z_elements(&self, w: &Weight) -> Result<(AlgebraElement, AlgebraElement)> {
        let low = self.datum.weyl_act(&self.word, w);
        Ok((self.z_minus(w)?, self.z_plus(&low)?))
    }

    /// e_ϖ = d_{w_X ϖ} = Π ([(ϖ, β_k^∨)]_{q_{r_k}}!)².
    pub fn e_d_constants(&self, w: &Weight) -> Result<f64> {
        let ex = self.exponents(w)?;
        Ok(ex
            .iter()
            .zip(&self.word.0)
            .map(|(&n, &r)| qfact(n, self.qp.qr(&self.datum, r)).powi(2))
            .product())
    }

    /// w_X(α_r), dominant for X when r ∉ X.
    pub fn wx_alpha(&self, r: usize) -> Weight {
        self.datum.weyl_act(&self.word, &self.datum.alpha(r))
    }

    /// a_r⁺ = d_{α_r}^{-1/2}.
    pub fn a_plus(&self, r: usize) -> Result<f64> {
        if self.diagram.in_x(r) {
            return input(format!("vertex {} lies in X", r + 1));
        }
        Ok(1.0 / self.e_d_constants(&self.wx_alpha(r))?.sqrt())
    }

    /// Ratio a with T_{w_X}(E_r) = a·Ad_q(Z_r⁺)(E_r) on `m`, and the relative residual
    /// of the best fit.
    pub fn a_plus_measured(&self, r: usize, m: &WeightModule) -> Result<(C64, f64)> {
        let t = self.t_wx_module(m);
        let ti = inverse(&t)?;
        let lhs = &t * &m.e[r] * &ti;
        let zp = self.z_plus(&self.datum.alpha(r))?;
        let rhs = zp.ad(&AlgebraElement::e(r), &self.datum).act(m);
        let den = rhs.iter().map(|x| x.norm_sqr()).sum::<f64>();
        if den == 0.0 {
            return input("Ad_q(Z_r+)(E_r) vanishes on this module");
        }
        let num: C64 = rhs.iter().zip(lhs.iter()).map(|(b, a)| b.conj() * a).sum();
        let a = num / den;
        let res = fro(&(&lhs - &rhs * a)) / fro(&lhs).max(1e-300);
        Ok((a, res))
    }

    /// The braid identities on lowest and highest weight vectors of the X-submodule
    /// generated by the top vector of V_λ, where λ extends ϖ by zero off X.
    pub fn verify_appb(&self, w: &Weight) -> Result<AppBResiduals> {
        let ex = self.exponents(w)?;
        let n = self.datum.rank();
        let mut lam = Weight::zero(n);
        for &s in &self.diagram.x {
            lam.0[s] = w.0[s];
        }
        let m = build_irrep(&self.datum, &lam, &self.qp)?;
        let t = self.t_wx_module(&m);
        let ti = inverse(&t)?;
        let mut xi = CMat::zeros(m.dim(), 1);
        xi[(0, 0)] = cr(1.0);
        let (zm, zp) = self.z_elements(w)?;
        let zm_m = zm.act(&m);
        let zp_m = zp.act(&m);
        let fact: f64 = ex
            .iter()
            .zip(&self.word.0)
            .map(|(&k, &r)| qfact(k, self.qp.qr(&self.datum, r)))
            .product();
        let sign: f64 = if ex.iter().map(|&k| k as u64).sum::<u64>() % 2 == 0 { 1.0 } else { -1.0 };
        let rho_x: Weight = self
            .betas
            .iter()
            .fold(Weight::zero(n), |a, b| a.add(b))
            .scale(Q::new(1, 2));
        let qrho = self.qp.pow(self.datum.pair(&lam, &rho_x) * Q::from_integer(2));
        let rel = |a: &CMat, b: &CMat| fro(&(a - b)) / fro(a).max(fro(b)).max(1e-300);

        let low = &t * &xi;
        let zxi = &zm_m * &xi;
        let t_lowest = rel(&low, &(&zxi * cr(qrho * sign / fact)));
        let t_inverse_lowest = rel(&(&ti * &xi), &(&zxi * cr(1.0 / fact)));
        let t_twice = rel(&(&t * &low), &(&zp_m * &low * cr(1.0 / fact)));
        let t_back = rel(&(&ti * &low), &(&zp_m * &low * cr(sign / (qrho * fact))));
        let e = self.e_d_constants(w)?;
        let e_scalar = rel(&(&zp_m * &zm_m * &xi), &(&xi * cr(e)));
        let d_scalar = rel(&(&zm_m * &zp_m * &low), &(&low * cr(e)));
        Ok(AppBResiduals {
            t_lowest,
            t_inverse_lowest,
            t_twice,
            t_back,
            e_scalar,
            d_scalar,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dsum;
    use crate::rootsys::{build_root_datum, parse_type};

    fn setup(t: &str, q: f64) -> (Arc<RootDatum>, QParams) {
        let rd = Arc::new(build_root_datum(&parse_type(t).unwrap()).unwrap());
        let qp = QParams::new(q, &rd).unwrap();
        (rd, qp)
    }

    fn conj_residual(m: &WeightModule, r: usize) -> f64 {
        let t = braid_on_module(m, r);
        let ti = inverse(&t).unwrap();
        let mut worst: f64 = 0.0;
        let n = m.rank();
        let mut gens: Vec<Letter> = vec![];
        for s in 0..n {
            gens.push(Letter::E(s));
            gens.push(Letter::F(s));
            gens.push(Letter::K(m.datum.fundamental(s)));
        }
        for g in gens {
            let lhs = &t * AlgebraElement::letter(g.clone()).act(m) * &ti;
            let rhs = braid_on_algebra(&m.datum, &m.qp, r, &g).act(m);
            worst = worst.max(fro(&(&lhs - &rhs)) / fro(&rhs).max(1.0));
        }
        worst
    }

    #[test]
    fn module_braid_realizes_algebra_braid() {
        for (t, w) in [("A1", vec![1]), ("A1", vec![3]), ("A2", vec![1, 1]), ("B2", vec![1, 1]), ("G2", vec![1, 0]), ("A3", vec![0, 1, 0])] {
            let (rd, qp) = setup(t, 0.7);
            let m = build_irrep(&rd, &Weight::from_ints(&w), &qp).unwrap();
            for r in 0..rd.rank() {
                assert!(conj_residual(&m, r) < 1e-10, "{t} {r}");
            }
        }
    }

    #[test]
    fn trivial_module_braid_is_identity() {
        let (rd, qp) = setup("A2", 0.5);
        let m = WeightModule::trivial(rd, qp);
        assert!(fro(&(braid_on_module(&m, 0) - CMat::identity(1, 1))) < 1e-15);
    }

    #[test]
    fn spin_half_braid_is_antidiagonal() {
        let (rd, qp) = setup("A1", 0.7);
        let m = build_irrep(&rd, &Weight::from_ints(&[1]), &qp).unwrap();
        let t = braid_on_module(&m, 0);
        assert!(t[(0, 0)].norm() < 1e-14 && t[(1, 1)].norm() < 1e-14);
        assert!(t[(0, 1)].norm() > 0.1 && t[(1, 0)].norm() > 0.1);
    }

    #[test]
    fn reduced_word_independence() {
        let (rd, qp) = setup("A2", 0.6);
        let m = build_irrep(&rd, &Weight::from_ints(&[2, 1]), &qp).unwrap();
        let a = braid_word_on_module(&m, &WeylWord(vec![0, 1, 0]));
        let b = braid_word_on_module(&m, &WeylWord(vec![1, 0, 1]));
        assert!(fro(&(&a - &b)) < 1e-10 * fro(&a));
        let (rd, qp) = setup("B2", 0.6);
        let m = build_irrep(&rd, &Weight::from_ints(&[1, 1]), &qp).unwrap();
        let a = braid_word_on_module(&m, &WeylWord(vec![0, 1, 0, 1]));
        let b = braid_word_on_module(&m, &WeylWord(vec![1, 0, 1, 0]));
        assert!(fro(&(&a - &b)) < 1e-10 * fro(&a));
    }

    #[test]
    fn zero_cartan_entry_leaves_generator() {
        let (rd, qp) = setup("A3", 0.7);
        assert_eq!(braid_on_algebra(&rd, &qp, 0, &Letter::E(2)), AlgebraElement::e(2));
        let chi = rd.fundamental(0);
        assert_eq!(braid_on_algebra(&rd, &qp, 0, &Letter::K(chi.clone())), AlgebraElement::k(rd.reflect(0, &chi)));
    }

    fn ctx(t: &str, x: &[usize], tau: &[usize], q: f64) -> BraidContext {
        let rd = build_root_datum(&parse_type(t).unwrap()).unwrap();
        let qp = QParams::new(q, &rd).unwrap();
        let d = SatakeDiagram::new(rd, x, tau).unwrap();
        BraidContext::new(&d, qp)
    }

    #[test]
    fn e_d_constants_closed_form() {
        let c = ctx("A3", &[1], &[2, 1, 0], 0.7);
        assert_eq!(c.e_d_constants(&Weight::from_ints(&[0, 0, 0])).unwrap(), 1.0);
        assert!((c.e_d_constants(&Weight::from_ints(&[0, 1, 0])).unwrap() - 1.0).abs() < 1e-15);
        let q: f64 = 0.7;
        let want = (q + 1.0 / q).powi(2);
        assert!((c.e_d_constants(&Weight::from_ints(&[0, 2, 0])).unwrap() - want).abs() < 1e-12);
        assert!(c.exponents(&Weight::from_ints(&[0, -1, 0])).is_err());
        let empty = ctx("A1", &[], &[0], 0.7);
        assert_eq!(empty.a_plus(0).unwrap(), 1.0);
    }

    #[test]
    fn z_element_identities() {
        for (t, x, tau, ws) in [
            ("A3", vec![1], vec![2, 1, 0], vec![vec![0, 1, 0], vec![0, 2, 0], vec![0, 3, 0]]),
            ("A3", vec![0, 2], vec![0, 1, 2], vec![vec![1, 0, 1], vec![2, 0, 1]]),
            ("A4", vec![1, 2], vec![3, 2, 1, 0], vec![vec![0, 1, 1, 0], vec![0, 2, 1, 0]]),
        ] {
            let c = ctx(t, &x, &tau, 0.7);
            for w in ws {
                let res = c.verify_appb(&Weight::from_ints(&w)).unwrap();
                assert!(res.max() < 1e-9, "{t} {w:?}: {res:?}");
            }
        }
    }

    #[test]
    fn a_plus_matches_definition() {
        for (t, x, tau) in [("A3", vec![1], vec![2, 1, 0]), ("A3", vec![0, 2], vec![0, 1, 2])] {
            let c = ctx(t, &x, &tau, 0.7);
            let mods: Vec<WeightModule> = (0..3)
                .map(|i| build_irrep(&c.datum, &c.datum.fundamental(i), &c.qp).unwrap())
                .collect();
            let faithful = direct(&mods);
            for r in c.diagram.white() {
                let (a, res) = c.a_plus_measured(r, &faithful).unwrap();
                let want = c.a_plus(r).unwrap();
                assert!(res < 1e-10, "{t} {r} {res}");
                assert!((a - cr(want)).norm() < 1e-8, "{t} {r}: {a} vs {want}");
                assert_eq!(c.a_plus(r).unwrap(), c.a_plus(c.diagram.tau[r]).unwrap());
            }
        }
    }

    fn direct(mods: &[WeightModule]) -> WeightModule {
        let refs: Vec<&WeightModule> = mods.iter().collect();
        let s = WeightModule::direct_sum(&refs);
        let _ = dsum(&[]);
        s
    }
}
