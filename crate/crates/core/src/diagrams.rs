//! Satake and Vogan diagrams, admissibility, Θ, and the Hermitian classification.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{input, QspError, Result};
use crate::linalg::C64;
use crate::rootsys::{build_root_datum, CartanType, RootDatum, Weight, Q};

/// Unit complex number i^k, k mod 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phase(pub u8);

impl Phase {
    pub const ONE: Phase = Phase(0);

    pub fn i_pow(k: i64) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn mul(self, o: Phase) -> Phase {
        Phase((self.0 + o.0) % 4)
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_c64(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Parse "1", "-1", "i", "-i".
    pub fn parse(s: &str) -> Result<Phase> {
        Ok(match s.trim() {
            "1" | "+1" => Phase(0),
            "i" | "+i" => Phase(1),
            "-1" => Phase(2),
            "-i" => Phase(3),
            other => return input(format!("z entries must be one of 1,-1,i,-i, got {other:?}")),
        })
    }

    pub fn label(self) -> &'static str {
        ["1", "i", "-1", "-i"][self.0 as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatakeDiagram {
    pub datum: RootDatum,
    pub x: Vec<usize>,
    pub tau: Vec<usize>,
    pub z: Vec<Phase>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SatakeSets {
    pub i_c: Vec<usize>,
    pub i_ns: Vec<usize>,
    pub i_s: Vec<usize>,
    pub j: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HermitianKind {
    NonHermitian,
    SType,
    CType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HermitianClass {
    pub kind: HermitianKind,
    /// Distinguished vertex (0-based).
    pub distinguished: Option<usize>,
    /// For C-type, the τ-orbit of the distinguished vertex.
    pub orbit: Vec<usize>,
}

fn check_tau(datum: &RootDatum, tau: &[usize]) -> Result<()> {
    if !datum.is_automorphism(tau) {
        return input("tau is not a diagram automorphism");
    }
    if (0..tau.len()).any(|i| tau[tau[i]] != i) {
        return input("tau is not involutive");
    }
    Ok(())
}

/// Conditions for (X, τ) to be admissible. Returns the list of violations.
pub fn check_admissible(datum: &RootDatum, x: &[usize], tau: &[usize]) -> Result<(bool, Vec<String>)> {
    check_tau(datum, tau)?;
    let n = datum.rank();
    if x.iter().any(|&r| r >= n) {
        return input("X contains a vertex outside the diagram");
    }
    let xs: BTreeSet<usize> = x.iter().copied().collect();
    let mut bad = vec![];
    if xs.len() == n {
        bad.push("X equals the whole vertex set".to_string());
    }
    if xs.iter().any(|&r| !xs.contains(&tau[r])) {
        bad.push("X is not tau-invariant".to_string());
    }
    let xv: Vec<usize> = xs.iter().copied().collect();
    let wx = datum.longest_element(&xv);
    for &r in &xv {
        let img = datum.weyl_act(&wx, &datum.alpha(r)).neg();
        if img != datum.alpha(tau[r]) {
            bad.push(format!("tau and -w_X disagree at vertex {}", r + 1));
        }
    }
    let rc = datum.rho_check(&xv);
    for r in 0..n {
        if tau[r] == r && !datum.pair(&datum.alpha(r), &rc).is_integer() {
            bad.push(format!("(alpha_{}, rho_X^vee) is not an integer at a tau-fixed vertex", r + 1));
        }
    }
    Ok((bad.is_empty(), bad))
}

impl SatakeDiagram {
    /// Admissible diagram with the canonical phases attached.
    pub fn new(datum: RootDatum, x: &[usize], tau: &[usize]) -> Result<Self> {
        let (ok, bad) = check_admissible(&datum, x, tau)?;
        if !ok {
            return input(format!("not admissible: {}", bad.join("; ")));
        }
        let mut xs = x.to_vec();
        xs.sort_unstable();
        xs.dedup();
        let mut d = SatakeDiagram {
            datum,
            x: xs,
            tau: tau.to_vec(),
            z: vec![],
        };
        d.z = d.choose_z();
        Ok(d)
    }

    /// Like `new` but with user phases, which must satisfy the phase conditions.
    pub fn with_z(datum: RootDatum, x: &[usize], tau: &[usize], z: Vec<Phase>) -> Result<Self> {
        let mut d = Self::new(datum, x, tau)?;
        if z.len() != d.rank() {
            return input("z has the wrong length");
        }
        d.z = z;
        let bad = d.z_violations();
        if !bad.is_empty() {
            return input(bad.join("; "));
        }
        Ok(d)
    }

    pub fn rank(&self) -> usize {
        self.datum.rank()
    }

    pub fn in_x(&self, r: usize) -> bool {
        self.x.binary_search(&r).is_ok()
    }

    pub fn white(&self) -> Vec<usize> {
        (0..self.rank()).filter(|&r| !self.in_x(r)).collect()
    }

    /// 2(α_r, ρ_X^∨), an integer.
    pub fn two_rho_pairing(&self, r: usize) -> i64 {
        let v = self.datum.pair(&self.datum.alpha(r), &self.datum.rho_check(&self.x)) * Q::from_integer(2);
        debug_assert!(v.is_integer());
        v.to_integer()
    }

    /// Canonical phases: 1 on X and on τ-fixed vertices; on a 2-orbit the smaller vertex
    /// gets i^{|2(α_r,ρ_X^∨)|} and its partner is forced by the involutivity condition.
    pub fn choose_z(&self) -> Vec<Phase> {
        let n = self.rank();
        let mut z = vec![Phase::ONE; n];
        for r in 0..n {
            let t = self.tau[r];
            if self.in_x(r) || t == r || t < r {
                continue;
            }
            let e = self.two_rho_pairing(r);
            z[r] = Phase::i_pow(e.abs());
            z[t] = z[r].mul(Phase::i_pow(2 * e));
        }
        z
    }

    pub fn z_violations(&self) -> Vec<String> {
        let mut bad = vec![];
        for r in 0..self.rank() {
            if self.in_x(r) && self.z[r] != Phase::ONE {
                bad.push(format!("z_{} must be 1 on X", r + 1));
            }
            let lhs = self.z[r].mul(self.z[self.tau[r]].conj());
            if lhs != Phase::i_pow(2 * self.two_rho_pairing(r)) {
                bad.push(format!("phase condition fails at vertex {}", r + 1));
            }
        }
        bad
    }

    pub fn z_c64(&self, r: usize) -> C64 {
        self.z[r].to_c64()
    }

    /// Θ = −w_X ∘ τ on weights.
    pub fn theta_action(&self, mu: &Weight) -> Weight {
        let wx = self.datum.longest_element(&self.x);
        let t = self.datum.permute_weight(&self.tau, mu);
        self.datum.weyl_act(&wx, &t).neg()
    }

    /// A rational basis of {ω ∈ P ⊗ Q : Θ(ω) = ω}.
    pub fn theta_fixed_basis(&self) -> Vec<Weight> {
        let n = self.rank();
        // Matrix of Θ − 1 in fundamental coordinates, column j = (Θ − 1)(ϖ_j).
        let cols: Vec<Weight> = (0..n)
            .map(|j| {
                let w = self.datum.fundamental(j);
                self.theta_action(&w).sub(&w)
            })
            .collect();
        let mut m: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| cols[j].0[i]).collect()).collect();
        // Reduced row echelon form.
        let mut pivots = vec![];
        let mut row = 0;
        for c in 0..n {
            let Some(p) = (row..n).find(|&r| !m[r][c].is_zero()) else {
                continue;
            };
            m.swap(row, p);
            let piv = m[row][c];
            for j in 0..n {
                m[row][j] /= piv;
            }
            for r in 0..n {
                if r != row && !m[r][c].is_zero() {
                    let f = m[r][c];
                    for j in 0..n {
                        let v = m[row][j];
                        m[r][j] -= f * v;
                    }
                }
            }
            pivots.push(c);
            row += 1;
        }
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = Weight::zero(n);
                v.0[f] = Q::one();
                for (k, &p) in pivots.iter().enumerate() {
                    v.0[p] = -m[k][f];
                }
                v
            })
            .collect()
    }

    pub fn classify_sets(&self) -> SatakeSets {
        let n = self.rank();
        let rd = &self.datum;
        let white = self.white();
        let mut i_c = vec![];
        let mut i_ns = vec![];
        for &r in &white {
            let a = rd.alpha(r);
            let ta = self.theta_action(&a);
            if self.tau[r] != r && rd.pair(&a, &ta).is_zero() {
                i_c.push(r);
            }
            if self.tau[r] == r && ta == a.neg() {
                i_ns.push(r);
            }
        }
        let i_s = i_ns
            .iter()
            .copied()
            .filter(|&r| i_ns.iter().all(|&s| rd.cartan[s][r] % 2 == 0))
            .collect();
        let j = white
            .iter()
            .copied()
            .filter(|&r| self.x.iter().all(|&s| rd.cartan[r][s] == 0))
            .collect();
        let _ = n;
        SatakeSets { i_c, i_ns, i_s, j }
    }

    /// The alternative reading of I_S with a_rs in place of a_sr.
    pub fn i_s_transposed(&self) -> Vec<usize> {
        let sets = self.classify_sets();
        sets.i_ns
            .iter()
            .copied()
            .filter(|&r| sets.i_ns.iter().all(|&s| self.datum.cartan[r][s] % 2 == 0))
            .collect()
    }

    /// Representatives of τ-orbits in I∖X (smaller index).
    pub fn orbit_reps(&self) -> Vec<usize> {
        self.white().into_iter().filter(|&r| self.tau[r] >= r).collect()
    }

    pub fn hermitian_type(&self) -> Result<HermitianClass> {
        if self.datum.components.len() != 1 {
            return input("classification needs an irreducible diagram");
        }
        let sets = self.classify_sets();
        let c_orbits: Vec<usize> = self
            .white()
            .into_iter()
            .filter(|&r| self.tau[r] > r && !sets.i_c.contains(&r))
            .collect();
        match (sets.i_s.len(), c_orbits.len()) {
            (0, 0) => Ok(HermitianClass {
                kind: HermitianKind::NonHermitian,
                distinguished: None,
                orbit: vec![],
            }),
            (1, 0) => Ok(HermitianClass {
                kind: HermitianKind::SType,
                distinguished: Some(sets.i_s[0]),
                orbit: vec![sets.i_s[0]],
            }),
            (0, 1) => {
                let lo = c_orbits[0];
                let hi = self.tau[lo];
                // In type D the orbit is the fork {n-1, n} and the larger label is the
                // conventional noncompact root; elsewhere the smaller label is.
                let dist = if self.datum.components[0].0 == CartanType::D { hi } else { lo };
                Ok(HermitianClass {
                    kind: HermitianKind::CType,
                    distinguished: Some(dist),
                    orbit: vec![lo, hi],
                })
            }
            (s, c) => Err(QspError::Internal(format!(
                "classification found {s} S-type vertices and {c} C-type orbits"
            ))),
        }
    }
}

/// Every admissible (X, τ) of the datum, with canonical phases.
pub fn enumerate_admissible(datum: &RootDatum) -> Vec<SatakeDiagram> {
    let n = datum.rank();
    let mut out = vec![];
    let taus: Vec<Vec<usize>> = datum
        .automorphisms()
        .into_iter()
        .filter(|t| (0..n).all(|i| t[t[i]] == i))
        .collect();
    for mask in 0u32..(1 << n) {
        let x: Vec<usize> = (0..n).filter(|&r| mask & (1 << r) != 0).collect();
        for t in &taus {
            if let Ok((true, _)) = check_admissible(datum, &x, t) {
                out.push(SatakeDiagram::new(datum.clone(), &x, t).expect("checked"));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoganDiagram {
    pub datum: RootDatum,
    pub y: Vec<usize>,
    pub mu: Vec<usize>,
}

pub fn check_vogan(datum: &RootDatum, y: &[usize], mu: &[usize]) -> Result<bool> {
    check_tau(datum, mu)?;
    if y.iter().any(|&r| r >= datum.rank()) {
        return input("Y contains a vertex outside the diagram");
    }
    let fixed = y.iter().all(|&r| mu[r] == r);
    let trivial = y.is_empty() && (0..mu.len()).all(|i| mu[i] == i);
    Ok(fixed && !trivial)
}

pub fn is_standard_vogan(datum: &RootDatum, y: &[usize], mu: &[usize]) -> Result<bool> {
    if !check_vogan(datum, y, mu)? {
        return Ok(false);
    }
    let all: Vec<usize> = (0..datum.rank()).collect();
    for comp in datum.connected_components(&all) {
        let marked: Vec<usize> = y.iter().copied().filter(|r| comp.contains(r)).collect();
        if marked.len() > 1 {
            return Ok(false);
        }
        if let Some(&r) = marked.first() {
            if comp.iter().all(|&i| mu[i] == i) {
                let wr = datum.fundamental(r);
                for &s in &comp {
                    let ws = datum.fundamental(s);
                    if datum.pair(&wr.sub(&ws), &ws) > Q::zero() {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

impl VoganDiagram {
    pub fn new(datum: RootDatum, y: &[usize], mu: &[usize]) -> Result<Self> {
        if !check_vogan(&datum, y, mu)? {
            return input("not a Vogan diagram");
        }
        Ok(VoganDiagram {
            datum,
            y: y.to_vec(),
            mu: mu.to_vec(),
        })
    }

    /// ε_r = −1 exactly on Y.
    pub fn epsilon(&self, r: usize) -> f64 {
        if self.y.contains(&r) {
            -1.0
        } else {
            1.0
        }
    }

    /// N: the map on weights dual to ν on the Cartan subalgebra.
    pub fn n_action(&self, w: &Weight) -> Weight {
        self.datum.permute_weight(&self.mu, w)
    }
}

/// JSON diagram file: {"type":"A","rank":3,"X":[2],"tau":[[1,3]],"z":optional}, 1-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagramFile {
    #[serde(rename = "type")]
    pub typ: String,
    pub rank: usize,
    #[serde(rename = "X", default)]
    pub x: Vec<usize>,
    #[serde(default)]
    pub tau: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<String>>,
}

impl DiagramFile {
    pub fn to_diagram(&self) -> Result<SatakeDiagram> {
        let (datum, x, tau) = self.parts()?;
        match &self.z {
            None => SatakeDiagram::new(datum, &x, &tau),
            Some(z) => {
                let z = z.iter().map(|s| Phase::parse(s)).collect::<Result<Vec<_>>>()?;
                SatakeDiagram::with_z(datum, &x, &tau, z)
            }
        }
    }

    /// Root datum and 0-based (X, τ) without the admissibility check.
    pub fn parts(&self) -> Result<(RootDatum, Vec<usize>, Vec<usize>)> {
        let t: CartanType = self.typ.parse()?;
        let datum = build_root_datum(&[(t, self.rank)])?;
        let n = self.rank;
        let zero_based = |v: usize| -> Result<usize> {
            if v == 0 || v > n {
                input(format!("vertex {v} out of range 1..={n}"))
            } else {
                Ok(v - 1)
            }
        };
        let x: Vec<usize> = self.x.iter().map(|&v| zero_based(v)).collect::<Result<_>>()?;
        let mut tau: Vec<usize> = (0..n).collect();
        for pair in &self.tau {
            if pair.len() != 2 {
                return input("tau entries must be pairs");
            }
            let (a, b) = (zero_based(pair[0])?, zero_based(pair[1])?);
            tau[a] = b;
            tau[b] = a;
        }
        Ok((datum, x, tau))
    }

    pub fn from_diagram(d: &SatakeDiagram) -> DiagramFile {
        let (t, n) = d.datum.components[0];
        let tau = (0..n)
            .filter(|&r| d.tau[r] > r)
            .map(|r| vec![r + 1, d.tau[r] + 1])
            .collect();
        DiagramFile {
            typ: t.to_string(),
            rank: n,
            x: d.x.iter().map(|r| r + 1).collect(),
            tau,
            z: Some(d.z.iter().map(|p| p.label().to_string()).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::parse_type;

    fn rd(s: &str) -> RootDatum {
        build_root_datum(&parse_type(s).unwrap()).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        assert!(check_admissible(&rd("A1"), &[], &[0]).unwrap().0);
        assert!(check_admissible(&rd("A2"), &[], &[1, 0]).unwrap().0);
        assert!(check_admissible(&rd("A3"), &[0, 2], &[0, 1, 2]).unwrap().0);
        // X = {2} in A3 with τ = id violates the integrality condition.
        assert!(!check_admissible(&rd("A3"), &[1], &[0, 1, 2]).unwrap().0);
        assert!(check_admissible(&rd("A2"), &[], &[0, 0]).is_err());
    }

    #[test]
    fn theta_examples() {
        let d = SatakeDiagram::new(rd("A2"), &[], &[1, 0]).unwrap();
        assert_eq!(d.theta_action(&d.datum.alpha(0)), d.datum.alpha(1).neg());
        let d = SatakeDiagram::new(rd("A1"), &[], &[0]).unwrap();
        assert_eq!(d.theta_action(&d.datum.alpha(0)), d.datum.alpha(0).neg());
    }

    #[test]
    fn canonical_z_for_a3_x2() {
        let d = SatakeDiagram::new(rd("A3"), &[1], &[2, 1, 0]).unwrap();
        assert_eq!(d.z, vec![Phase(1), Phase(0), Phase(3)]);
        assert!(d.z_violations().is_empty());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_admissible(&rd("A1")).len(), 1);
        let a2 = enumerate_admissible(&rd("A2"));
        assert!(a2.iter().any(|d| d.x.is_empty() && d.tau == vec![1, 0]));
    }

    #[test]
    fn sets_examples() {
        let d = SatakeDiagram::new(rd("A1"), &[], &[0]).unwrap();
        let s = d.classify_sets();
        assert_eq!((s.i_ns.clone(), s.i_s.clone(), s.j.clone()), (vec![0], vec![0], vec![0]));
        let d = SatakeDiagram::new(rd("A2"), &[], &[1, 0]).unwrap();
        let s = d.classify_sets();
        assert!(s.i_ns.is_empty() && s.i_s.is_empty());
        assert_eq!(s.j, vec![0, 1]);
    }

    #[test]
    fn hermitian_examples() {
        let ci = SatakeDiagram::new(rd("C3"), &[], &[0, 1, 2]).unwrap();
        let h = ci.hermitian_type().unwrap();
        assert_eq!((h.kind, h.distinguished), (HermitianKind::SType, Some(2)));
        let aii = SatakeDiagram::new(rd("A3"), &[0, 2], &[0, 1, 2]).unwrap();
        assert_eq!(aii.hermitian_type().unwrap().kind, HermitianKind::NonHermitian);
        let aiii = SatakeDiagram::new(rd("A3"), &[1], &[2, 1, 0]).unwrap();
        let h = aiii.hermitian_type().unwrap();
        assert_eq!((h.kind, h.orbit.clone()), (HermitianKind::CType, vec![0, 2]));
    }

    #[test]
    fn theta_fixed_basis_is_fixed() {
        for d in enumerate_admissible(&rd("A3")) {
            for w in d.theta_fixed_basis() {
                assert_eq!(d.theta_action(&w), w);
            }
        }
    }

    #[test]
    fn vogan_checks() {
        let a1 = rd("A1");
        assert!(is_standard_vogan(&a1, &[0], &[0]).unwrap());
        let a3 = rd("A3");
        assert!(!is_standard_vogan(&a3, &[0, 2], &[0, 1, 2]).unwrap());
        assert!(check_vogan(&rd("A2"), &[], &[1, 0]).unwrap());
        assert!(!check_vogan(&a1, &[], &[0]).unwrap());
    }

    #[test]
    fn diagram_file_roundtrip() {
        let f: DiagramFile = serde_json::from_str(r#"{"type":"A","rank":3,"X":[2],"tau":[[1,3]]}"#).unwrap();
        let d = f.to_diagram().unwrap();
        assert_eq!(d.x, vec![1]);
        let back = DiagramFile::from_diagram(&d);
        assert_eq!(back.to_diagram().unwrap(), d);
    }
}
