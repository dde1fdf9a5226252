//! Rank-one twisted double U_q^{10}: the lowest-weight modules M_r, the coaction of U_q(su2)
//! and the ν_q-braid ℰ = R̃₂₁(id⊗ν_q)(R̃)(1⊗v⁻¹).
//!
//! Relations: KF = q⁻²FK, KF* = q²F*K, F*F − q²FF* = (1 + K⁻²)/(q − q⁻¹). ν_q flips the signs
//! of E and F, and is Ad(K_χ) with K_χ = i^H.

use crate::error::{input, QspError, Result};
use crate::linalg::{cr, diag, eigvals, eye, fro, kron, nullspace, svals, zeros, CMat, C64};
use crate::rmatrix::rmat;
use crate::uqrep::{ribbon_on, WeightModule};
use crate::linalg::{flip, on_legs};

/// M_r on the levels e_0..e_{N−1}. F* on e_{N−1} is cut off.
#[derive(Clone, Debug)]
pub struct TruncatedModule {
    pub r: f64,
    pub q: f64,
    pub levels: usize,
    pub k: CMat,
    pub f: CMat,
    pub fs: CMat,
}

impl TruncatedModule {
    /// H = log_q K on each level.
    pub fn h(&self) -> Vec<f64> {
        (0..self.levels).map(|n| -self.r + 2.0 * n as f64).collect()
    }

    /// The three defining relations, relative, on levels below N − 1.
    pub fn relation_residuals(&self) -> [f64; 3] {
        let q = self.q;
        let n = self.levels - 1;
        let kinv2: Vec<C64> = (0..self.levels).map(|i| cr(1.0 / self.k[(i, i)].re.powi(2))).collect();
        let cut = |m: &CMat, scale: &CMat| fro(&m.view((0, 0), (n, n)).into_owned()) / fro(&scale.view((0, 0), (n, n)).into_owned()).max(1e-300);
        let kf = &self.k * &self.f;
        let r1 = cut(&(&kf - &self.f * &self.k * cr(q.powi(-2))), &kf);
        let kfs = &self.k * &self.fs;
        let r2 = cut(&(&kfs - &self.fs * &self.k * cr(q * q)), &kfs);
        let lhs = &self.fs * &self.f - &self.f * &self.fs * cr(q * q);
        let rhs = (eye(self.levels) + diag(&kinv2)) / cr(q - 1.0 / q);
        let r3 = cut(&(&lhs - &rhs), &rhs);
        [r1, r2, r3]
    }
}

pub fn build_mr(r: f64, q: f64, levels: usize) -> Result<TruncatedModule> {
    if levels < 2 {
        return input("M_r needs at least two levels");
    }
    if !(q > 0.0 && q < 1.0) || !r.is_finite() {
        return input("need 0 < q < 1 and finite r");
    }
    let mut k = zeros(levels, levels);
    let mut f = zeros(levels, levels);
    for n in 0..levels {
        k[(n, n)] = cr(q.powf(-r + 2.0 * n as f64));
        if n > 0 {
            let rad = (1.0 - q.powi(2 * n as i32)) * (1.0 + q.powf(2.0 * r + 2.0 - 2.0 * n as f64));
            if rad < 0.0 {
                return input(format!("negative radicand at level {n}"));
            }
            f[(n - 1, n)] = cr(q.powi(-(n as i32)) * rad.sqrt() / (q.sqrt() * (1.0 / q - q)));
        }
    }
    let fs = f.adjoint();
    Ok(TruncatedModule { r, q, levels, k, f, fs })
}

/// Generators of U_q^{10} acting on M ⊗ V through the coaction, and their ν_q-twists.
#[derive(Clone, Debug)]
pub struct TensorAction {
    pub k: CMat,
    pub f: CMat,
    pub fs: CMat,
    pub f_nu: CMat,
    pub fs_nu: CMat,
    pub dim_v: usize,
    /// Index of the first level whose rows and columns are unreliable.
    pub valid_levels: usize,
}

/// Any U_q^{10}-module given by K, F, F* and H = log_q K. Rows and columns from `interior` on
/// are truncation artefacts.
#[derive(Clone, Debug)]
pub struct U10Module {
    pub k: CMat,
    pub f: CMat,
    pub fs: CMat,
    pub h: Vec<f64>,
    pub interior: usize,
}

impl TruncatedModule {
    pub fn as_u10(&self) -> U10Module {
        U10Module { k: self.k.clone(), f: self.f.clone(), fs: self.fs.clone(), h: self.h(), interior: self.levels - 1 }
    }
}

fn check_v(v: &WeightModule) -> Result<()> {
    if v.rank() != 1 {
        return input("the rank-one double needs an A1 module");
    }
    Ok(())
}

fn v_h(v: &WeightModule) -> Vec<f64> {
    v.k_alpha(0).diagonal().iter().map(|x| x.re.ln() / v.qp.q.ln()).collect()
}

/// K_χ = i^H on V.
pub fn k_chi(v: &WeightModule) -> CMat {
    let ph: Vec<C64> = v_h(v).iter().map(|h| C64::new(0.0, std::f64::consts::FRAC_PI_2 * h).exp()).collect();
    diag(&ph)
}

fn inv_diag(m: &CMat) -> CMat {
    diag(&m.diagonal().iter().map(|x| x.inv()).collect::<Vec<_>>())
}

/// X ⊙ V: the U_q^{10}-module X ⊗ V through the coaction.
pub fn coact(x: &U10Module, v: &WeightModule) -> Result<U10Module> {
    check_v(v)?;
    let ix = eye(x.k.nrows());
    let kvi = v.k_alpha_inv(0);
    // F* = K⁻¹E in U_q(su2)
    let fsv = &kvi * &v.e[0];
    let hv = v_h(v);
    Ok(U10Module {
        k: kron(&x.k, &v.k_alpha(0)),
        f: kron(&x.f, &kvi) + kron(&ix, &v.f[0]),
        fs: kron(&x.fs, &kvi) + kron(&ix, &fsv),
        h: x.h.iter().flat_map(|a| hv.iter().map(move |b| a + b)).collect(),
        interior: x.interior * v.dim(),
    })
}

pub fn coaction_tensor(m: &TruncatedModule, v: &WeightModule) -> Result<TensorAction> {
    check_v(v)?;
    let im = eye(m.levels);
    let kvi = v.k_alpha_inv(0);
    let fv = v.f[0].clone();
    let fsv = &kvi * &v.e[0];
    let x = coact(&m.as_u10(), v)?;
    let f_nu = kron(&m.f, &kvi) - kron(&im, &fv);
    let fs_nu = kron(&m.fs, &kvi) - kron(&im, &fsv);
    Ok(TensorAction { k: x.k, f: x.f, fs: x.fs, f_nu, fs_nu, dim_v: v.dim(), valid_levels: m.levels - 1 })
}

fn qint(q: f64, n: usize) -> f64 {
    (q.powi(n as i32) - q.powi(-(n as i32))) / (q - 1.0 / q)
}

/// ℰ_{X,W} = R̃₂₁(id⊗ν_q)(R̃)(1⊗v⁻¹) with the quasi-R series
/// Σ_k q^{−k(k−1)/2}(q−q⁻¹)^k/[k]! (KF*)^k⊗F^k, resp. (−1)^k ⋯ F^k⊗E^k, each times q^{−½H⊗H}.
pub fn e_matrix_on(x: &U10Module, w: &WeightModule) -> Result<CMat> {
    check_v(w)?;
    let q = w.qp.q;
    let hw = v_h(w);
    let (dx, dw) = (x.k.nrows(), w.dim());
    let n = dx * dw;
    let mut gauss = zeros(n, n);
    for (a, hx) in x.h.iter().enumerate() {
        for (b, y) in hw.iter().enumerate() {
            gauss[(a * dw + b, a * dw + b)] = cr(q.powf(-0.5 * hx * y));
        }
    }
    let kfs = &x.k * &x.fs;
    let (mut r_nu, mut r21) = (zeros(n, n), zeros(n, n));
    let (mut p1, mut p2, mut p3, mut p4) = (eye(dx), eye(dw), eye(dx), eye(dw));
    let mut fact = 1.0;
    for k in 0..dw {
        if k > 0 {
            p1 = &p1 * &kfs;
            p2 = &p2 * &w.f[0];
            p3 = &p3 * &x.f;
            p4 = &p4 * &w.e[0];
            fact *= qint(q, k);
        }
        let c = q.powf(-((k * k.saturating_sub(1)) as f64) / 2.0) * (q - 1.0 / q).powi(k as i32) / fact;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        r_nu += kron(&p1, &p2) * cr(c);
        r21 += kron(&p3, &p4) * cr(sign * c);
    }
    let vinv = crate::linalg::inverse(&ribbon_on(w)?)?;
    Ok(r21 * &gauss * r_nu * &gauss * kron(&eye(dx), &vinv))
}

/// ℰ on the truncation of M ⊗ V.
pub fn e_matrix(m: &TruncatedModule, v: &WeightModule) -> Result<CMat> {
    e_matrix_on(&m.as_u10(), v)
}

/// ℰ(1⊗K_χ⁻¹), a plain module map.
pub fn twist_to_plain(e: &CMat, m: &TruncatedModule, v: &WeightModule) -> CMat {
    let inv = inv_diag(&k_chi(v));
    e * kron(&eye(m.levels), &inv)
}

fn interior(x: &CMat, cut: usize) -> CMat {
    x.view((0, 0), (cut, cut)).into_owned()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EIntertwining {
    /// ℰ(id⊗ν_q)α(x) − α(x)ℰ, relative, on the truncation interior.
    pub twisted: f64,
    /// Same for the plain braid against α(x) on both sides.
    pub plain: f64,
}

pub fn e_intertwining(m: &TruncatedModule, v: &WeightModule) -> Result<EIntertwining> {
    let t = coaction_tensor(m, v)?;
    let e = e_matrix(m, v)?;
    let p = twist_to_plain(&e, m, v);
    let cut = m.levels.saturating_sub(2) * t.dim_v;
    let rel = |l: &CMat, r: &CMat, s: &CMat| fro(&interior(&(l - r), cut)) / fro(&interior(s, cut)).max(1e-300);
    let mut tw: f64 = 0.0;
    let mut pl: f64 = 0.0;
    for (a, b) in [(&t.k, &t.k), (&t.f, &t.f_nu), (&t.fs, &t.fs_nu)] {
        tw = tw.max(rel(&(&e * b), &(a * &e), &(a * &e)));
        pl = pl.max(rel(&(&p * a), &(a * &p), &(a * &p)));
    }
    Ok(EIntertwining { twisted: tw, plain: pl })
}

/// Twisted intertwining ℰ(id⊗ν_q)α(x) = α(x)ℰ for a general first leg.
pub fn twisted_intertwining_on(x: &U10Module, w: &WeightModule) -> Result<f64> {
    let e = e_matrix_on(x, w)?;
    let ix = eye(x.k.nrows());
    let kwi = w.k_alpha_inv(0);
    let fsw = &kwi * &w.e[0];
    let pairs = [
        (kron(&x.k, &w.k_alpha(0)), kron(&x.k, &w.k_alpha(0))),
        (kron(&x.f, &kwi) + kron(&ix, &w.f[0]), kron(&x.f, &kwi) - kron(&ix, &w.f[0])),
        (kron(&x.fs, &kwi) + kron(&ix, &fsw), kron(&x.fs, &kwi) - kron(&ix, &fsw)),
    ];
    let cut = x.interior.saturating_sub(w.dim()) * w.dim();
    let mut worst: f64 = 0.0;
    for (a, b) in &pairs {
        let l = &e * b;
        let r = a * &e;
        worst = worst.max(fro(&interior(&(&l - &r), cut)) / fro(&interior(&r, cut)).max(1e-300));
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoganAxioms {
    /// ℰ_{M⊙V,W} = ℛ₃₂ ℰ₁₃ (id⊗ν_q)(ℛ)₂₃.
    pub octagon: f64,
    /// ℰ_{M,V⊗W} = ℰ_{M⊙V,W} ℰ₁₂.
    pub ribbon: f64,
    pub intertwining: f64,
}

impl VoganAxioms {
    pub fn max(&self) -> f64 {
        self.octagon.max(self.ribbon).max(self.intertwining)
    }
}

/// Both braid laws on M ⊗ V ⊗ W with trivial associators, on the truncation interior.
/// Round-off grows roughly like q^{−3N}; N ≈ 10 keeps it near 1e-13 at q = 0.7.
pub fn vogan_axioms(m: &TruncatedModule, v: &WeightModule, w: &WeightModule) -> Result<VoganAxioms> {
    check_v(v)?;
    check_v(w)?;
    let mx = m.as_u10();
    let xv = coact(&mx, v)?;
    let (nm, dv, dw) = (m.levels, v.dim(), w.dim());
    let dims = [nm, dv, dw];
    let e_xw = e_matrix_on(&xv, w)?;
    let e_mw = e_matrix_on(&mx, w)?;
    let e_mv = e_matrix_on(&mx, v)?;
    let e_m_vw = e_matrix_on(&mx, &v.tensor(w))?;
    let p = flip(dw, dv);
    let r32 = &p * rmat(w, v)?.matrix * p.transpose();
    let kc = k_chi(w);
    let r_nu = kron(&eye(dv), &kc) * rmat(v, w)?.matrix * kron(&eye(dv), &inv_diag(&kc));
    let rhs = kron(&eye(nm), &r32) * on_legs(&dims, &[0, 2], &e_mw) * kron(&eye(nm), &r_nu);
    let cut = nm.saturating_sub(dv + dw + 1) * dv * dw;
    let rel = |a: &CMat, b: &CMat| fro(&interior(&(a - b), cut)) / fro(&interior(b, cut)).max(1e-300);
    let octagon = rel(&e_xw, &rhs);
    let fused = &e_xw * kron(&e_mv, &eye(dw));
    let ribbon = rel(&e_m_vw, &fused);
    let intertwining = twisted_intertwining_on(&mx, &v.tensor(w))?;
    Ok(VoganAxioms { octagon, ribbon, intertwining })
}

/// ℰ data on one total-weight 2-space span{e_n⊗e₊, e_{n+1}⊗e₋}.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelData {
    pub level: usize,
    /// Scalar of ℰ on the M_{r+1} component, from F*^n(η⊗e₋) twisted versus untwisted.
    pub sub: f64,
    /// Scalar of ℰ on the quotient by M_{r+1}, with representative e_n⊗e₊.
    pub quotient: f64,
    pub singular_values: [f64; 2],
    pub plain_eigenvalues: [C64; 2],
}

/// The 2-space indices, V ordered (e₊, e₋).
fn block(v: &WeightModule, n: usize) -> Result<[usize; 2]> {
    let hv = v_h(v);
    if hv.len() != 2 {
        return input("level data needs V of dimension 2");
    }
    let (p, mi) = if hv[0] > hv[1] { (0, 1) } else { (1, 0) };
    Ok([n * 2 + p, (n + 1) * 2 + mi])
}

pub fn level_data(m: &TruncatedModule, v: &WeightModule, level: usize) -> Result<LevelData> {
    if level + 2 >= m.levels {
        return input("level outside the truncation interior");
    }
    let t = coaction_tensor(m, v)?;
    let e = e_matrix(m, v)?;
    let [ip, im] = block(v, level)?;
    let n = m.levels * 2;
    let [_, low] = block(v, 0)?;
    let low = low - 2; // η⊗e₋ sits at level 0
    let mut s = zeros(n, 1);
    let mut s_nu = zeros(n, 1);
    s[(low, 0)] = cr(1.0);
    s_nu[(low, 0)] = cr(1.0);
    for _ in 0..level + 1 {
        s = &t.fs * s;
        s_nu = &t.fs_nu * s_nu;
    }
    let img = &e * &s_nu;
    let k = s.iter().enumerate().max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap()).unwrap().0;
    let sub_c = img[(k, 0)] / s[(k, 0)];
    if fro(&(&img - &s * sub_c)) > 1e-8 * fro(&img) {
        return Err(QspError::Accuracy("ℰ does not map the twisted M_{r+1} line onto the untwisted one".into()));
    }
    // quotient: ℰ(e_n⊗e₊) = λ e_n⊗e₊ + μ s
    let y = e.column(ip);
    let (sp, sm) = (s[(ip, 0)], s[(im, 0)]);
    let mu = y[im] / sm;
    let lam = y[ip] - mu * sp;
    let blk = CMat::from_fn(2, 2, |a, b| e[([ip, im][a], [ip, im][b])]);
    let sv = svals(&blk);
    let p = twist_to_plain(&e, m, v);
    let pb = CMat::from_fn(2, 2, |a, b| p[([ip, im][a], [ip, im][b])]);
    let mut ev = eigvals(&pb);
    ev.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
    if sub_c.im.abs() > 1e-9 * sub_c.norm() || lam.im.abs() > 1e-9 * lam.norm() {
        return Err(QspError::Accuracy("ℰ scalars are not real".into()));
    }
    Ok(LevelData {
        level,
        sub: sub_c.re,
        quotient: lam.re,
        singular_values: [sv[0], sv[1]],
        plain_eigenvalues: [ev[0], ev[1]],
    })
}

/// {q^{−r−3/2}, q^{r+1/2}}.
pub fn closed_form_eigenvalues(r: f64, q: f64) -> [f64; 2] {
    [q.powf(-r - 1.5), q.powf(r + 0.5)]
}

/// Multiplicities of lowest-weight vectors in M_r ⊗ V, keyed by the exponent s with K = q^{−s}.
#[derive(Clone, Debug, PartialEq)]
pub struct Fusion {
    pub lowest: Vec<(f64, usize)>,
}

pub fn fusion_check(m: &TruncatedModule, v: &WeightModule) -> Result<Fusion> {
    if m.levels < 3 {
        return input("fusion needs a truncation of at least three levels");
    }
    let t = coaction_tensor(m, v)?;
    let hm = m.h();
    let hv = v_h(v);
    let mut weights: Vec<(f64, usize)> = vec![];
    for (a, x) in hm.iter().enumerate().take(m.levels - 1) {
        for (b, y) in hv.iter().enumerate() {
            weights.push((x + y, a * v.dim() + b));
        }
    }
    let mut groups: Vec<(f64, Vec<usize>)> = vec![];
    for (w, i) in weights {
        match groups.iter_mut().find(|g| (g.0 - w).abs() < 1e-9) {
            Some(g) => g.1.push(i),
            None => groups.push((w, vec![i])),
        }
    }
    groups.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = m.levels * v.dim();
    let mut lowest = vec![];
    for (w, idx) in &groups {
        // a weight space is complete only if no index of that weight lives on the last level
        let last = (m.levels - 1) * v.dim();
        if (last..n).any(|i| (hm[i / v.dim()] + hv[i % v.dim()] - w).abs() < 1e-9) {
            continue;
        }
        let sub = CMat::from_fn(n, idx.len(), |r, c| t.f[(r, idx[c])]);
        let k = nullspace(&sub, 1e-10).ncols();
        if k > 0 {
            lowest.push((-w, k));
        }
    }
    Ok(Fusion { lowest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_datum, parse_type, Weight};
    use crate::uqrep::{build_irrep, QParams};
    use std::sync::Arc;

    fn v_half(q: f64) -> WeightModule {
        let d = Arc::new(build_root_datum(&parse_type("A1").unwrap()).unwrap());
        let qp = QParams::new(q, &d).unwrap();
        build_irrep(&d, &Weight::from_ints(&[1]), &qp).unwrap()
    }

    fn trivial(q: f64) -> WeightModule {
        let d = Arc::new(build_root_datum(&parse_type("A1").unwrap()).unwrap());
        let qp = QParams::new(q, &d).unwrap();
        build_irrep(&d, &Weight::from_ints(&[0]), &qp).unwrap()
    }

    #[test]
    fn mr_formulas_and_relations() {
        let q: f64 = 0.7;
        let m = build_mr(0.25, q, 20).unwrap();
        assert!(m.f.column(0).iter().all(|x| x.norm() == 0.0));
        assert!((m.k[(1, 1)].re - q.powf(-0.25 + 2.0)).abs() < 1e-15);
        for r in m.relation_residuals() {
            assert!(r < 1e-12, "{r:.2e}");
        }
        assert!(build_mr(0.25, 1.3, 5).is_err());
        assert!(build_mr(0.25, 0.7, 1).is_err());
    }

    #[test]
    fn eigenvalues_match_closed_form() {
        let q = 0.7;
        let v = v_half(q);
        for r in [0.25, 1.0, 3.0] {
            let m = build_mr(r, q, 20).unwrap();
            let [a, b] = closed_form_eigenvalues(r, q);
            let e = e_matrix(&m, &v).unwrap();
            assert!((e[(1, 1)].re - a).abs() < 1e-12 && e[(1, 1)].im.abs() < 1e-15);
            for lv in 0..10 {
                let d = level_data(&m, &v, lv).unwrap();
                assert!((d.sub - a).abs() < 1e-10 * a, "r={r} lv={lv} {d:?}");
                assert!((d.quotient - b).abs() < 1e-10 * a, "r={r} lv={lv} {d:?}");
                let (x, y) = (d.singular_values[0], d.singular_values[1]);
                assert!((x - a.max(b)).abs() < 1e-10 * a && (y - a.min(b)).abs() < 1e-10 * a);
            }
            let it = e_intertwining(&m, &v).unwrap();
            assert!(it.twisted < 1e-9 && it.plain < 1e-9, "{it:?}");
        }
    }

    #[test]
    fn plain_braid_phases() {
        let q: f64 = 0.7;
        let v = v_half(q);
        let m = build_mr(0.25, q, 12).unwrap();
        let d = level_data(&m, &v, 0).unwrap();
        let want = C64::new(0.0, q.powf(-0.25 - 1.5));
        assert!((d.plain_eigenvalues[0] - want).norm() < 1e-10);
        // Ad(K_χ)(E) = −E on V
        let kc = k_chi(&v);
        let ad = &kc * &v.e[0] * diag(&kc.diagonal().iter().map(|x| x.inv()).collect::<Vec<_>>());
        assert!(fro(&(ad + &v.e[0])) < 1e-14);
    }

    #[test]
    fn truncation_independent() {
        let q = 0.7;
        let v = v_half(q);
        let e10 = e_matrix(&build_mr(1.0, q, 10).unwrap(), &v).unwrap();
        let e20 = e_matrix(&build_mr(1.0, q, 20).unwrap(), &v).unwrap();
        let k = 9 * 2;
        let diff = fro(&(e10.view((0, 0), (k, k)) - e20.view((0, 0), (k, k))));
        assert!(diff < 1e-13, "{diff:.2e}");
    }

    #[test]
    fn braid_laws_on_triple_products() {
        let q = 0.7;
        let d = Arc::new(build_root_datum(&parse_type("A1").unwrap()).unwrap());
        let qp = QParams::new(q, &d).unwrap();
        let v1 = build_irrep(&d, &Weight::from_ints(&[2]), &qp).unwrap();
        let v = v_half(q);
        for r in [0.25, 1.0] {
            let m = build_mr(r, q, 10).unwrap();
            for (a, b) in [(&v, &v), (&v, &v1), (&v1, &v)] {
                let ax = vogan_axioms(&m, a, b).unwrap();
                assert!(ax.max() < 1e-9, "r={r} {ax:?}");
            }
        }
    }

    #[test]
    fn trivial_v_gives_identity() {
        let q = 0.7;
        let m = build_mr(0.5, q, 6).unwrap();
        let e = e_matrix(&m, &trivial(q)).unwrap();
        assert!(fro(&(e - eye(6))) < 1e-15);
    }

    #[test]
    fn fusion_multiplicities() {
        for q in [0.5, 0.7] {
            let v = v_half(q);
            for r in [0.25, 1.0, 3.0] {
                let f = fusion_check(&build_mr(r, q, 12).unwrap(), &v).unwrap();
                assert_eq!(f.lowest.len(), 2, "{f:?}");
                assert!((f.lowest[0].0 - (r + 1.0)).abs() < 1e-12 && f.lowest[0].1 == 1);
                assert!((f.lowest[1].0 - (r - 1.0)).abs() < 1e-12 && f.lowest[1].1 == 1);
            }
        }
        assert!(fusion_check(&build_mr(0.2, 0.7, 2).unwrap(), &v_half(0.7)).is_err());
    }
}
