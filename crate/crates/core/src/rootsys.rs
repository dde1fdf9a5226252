//! Cartan data, weights, Weyl group words and q-numbers. Everything here is exact.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{input, QspError, Result};

pub type Q = Rational64;

pub const MAX_RANK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CartanType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl FromStr for CartanType {
    type Err = QspError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "A" => CartanType::A,
            "B" => CartanType::B,
            "C" => CartanType::C,
            "D" => CartanType::D,
            "E" => CartanType::E,
            "F" => CartanType::F,
            "G" => CartanType::G,
            other => return input(format!("unknown Cartan type {other:?}")),
        })
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

pub fn q_to_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn q_from_str(s: &str) -> Result<Q> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| QspError::Input(format!("bad rational {s:?}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse(d)?;
            if d == 0 {
                return input(format!("zero denominator in {s:?}"));
            }
            Ok(Q::new(parse(n)?, d))
        }
        None => Ok(Q::from_integer(parse(s)?)),
    }
}

/// A weight in fundamental-weight coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub Vec<Q>);

impl Weight {
    pub fn zero(n: usize) -> Self {
        Weight(vec![Q::zero(); n])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        Weight(v.iter().map(|&x| Q::from_integer(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &Weight) -> Weight {
        Weight(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Weight) -> Weight {
        Weight(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: Q) -> Weight {
        Weight(self.0.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> Weight {
        self.scale(-Q::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    pub fn is_dominant(&self) -> bool {
        self.is_integral() && self.0.iter().all(|x| !x.is_negative())
    }

    /// Parse "1,0,2" or "1 0 2" (entries may be rationals).
    pub fn parse(s: &str) -> Result<Weight> {
        let parts: Vec<&str> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        Ok(Weight(parts.into_iter().map(q_from_str).collect::<Result<_>>()?))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.iter().map(q_to_string).collect::<Vec<_>>().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| q_from_str(s))
            .collect::<Result<Vec<_>>>()
            .map(Weight)
            .map_err(serde::de::Error::custom)
    }
}

/// Word in simple reflections (0-based vertex indices), read left to right as a product.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WeylWord(pub Vec<usize>);

impl WeylWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootDatum {
    pub components: Vec<(CartanType, usize)>,
    pub cartan: Vec<Vec<i64>>,
    pub d: Vec<i64>,
    pub d_a: i64,
    form: Vec<Vec<Q>>,
    cartan_inv: Vec<Vec<Q>>,
}

fn component_cartan(t: CartanType, n: usize) -> Result<(Vec<Vec<i64>>, Vec<i64>)> {
    let ok = match t {
        CartanType::A => n >= 1,
        CartanType::B | CartanType::C => n >= 2,
        CartanType::D => n >= 3,
        CartanType::E => (6..=8).contains(&n),
        CartanType::F => n == 4,
        CartanType::G => n == 2,
    };
    if !ok || n > MAX_RANK {
        return input(format!("invalid rank {n} for type {t}"));
    }
    let mut a = vec![vec![0i64; n]; n];
    let mut link = |i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match t {
        CartanType::A | CartanType::B | CartanType::C | CartanType::F | CartanType::G => {
            for i in 0..n - 1 {
                link(i, i + 1);
            }
        }
        CartanType::D => {
            for i in 0..n - 2 {
                link(i, i + 1);
            }
            link(n - 3, n - 1);
        }
        CartanType::E => {
            link(0, 2);
            link(1, 3);
            for i in 2..n - 1 {
                link(i, i + 1);
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut d = vec![1i64; n];
    match t {
        CartanType::B => {
            a[n - 1][n - 2] = -2;
            d = vec![2; n];
            d[n - 1] = 1;
        }
        CartanType::C => {
            a[n - 2][n - 1] = -2;
            d[n - 1] = 2;
        }
        CartanType::F => {
            a[2][1] = -2;
            d = vec![2, 2, 1, 1];
        }
        CartanType::G => {
            a[0][1] = -3;
            d = vec![1, 3];
        }
        _ => {}
    }
    Ok((a, d))
}

fn rational_inverse(a: &[Vec<i64>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .map(|r| r.iter().map(|&x| Q::from_integer(x)).collect())
        .collect();
    let mut inv: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero()).expect("Cartan matrices are invertible");
        m.swap(c, p);
        inv.swap(c, p);
        let piv = m[c][c];
        for j in 0..n {
            m[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c];
                for j in 0..n {
                    let (mc, ic) = (m[c][j], inv[c][j]);
                    m[r][j] -= f * mc;
                    inv[r][j] -= f * ic;
                }
            }
        }
    }
    inv
}

fn int_det(a: &[Vec<i64>]) -> i64 {
    // Bareiss elimination, exact on integers.
    let n = a.len();
    let mut m: Vec<Vec<i64>> = a.to_vec();
    let mut sign = 1;
    let mut prev = 1i64;
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

pub fn build_root_datum(spec: &[(CartanType, usize)]) -> Result<RootDatum> {
    if spec.is_empty() {
        return input("empty type list");
    }
    let n: usize = spec.iter().map(|s| s.1).sum();
    let mut cartan = vec![vec![0i64; n]; n];
    let mut d = vec![0i64; n];
    let mut off = 0;
    let mut d_a = 1i64;
    for &(t, k) in spec {
        let (a, dd) = component_cartan(t, k)?;
        d_a *= int_det(&a);
        for i in 0..k {
            d[off + i] = dd[i];
            for j in 0..k {
                cartan[off + i][off + j] = a[i][j];
            }
        }
        off += k;
    }
    let cartan_inv = rational_inverse(&cartan);
    let form = (0..n)
        .map(|i| (0..n).map(|j| cartan_inv[i][j] * Q::from_integer(d[i])).collect())
        .collect();
    Ok(RootDatum {
        components: spec.to_vec(),
        cartan,
        d,
        d_a,
        form,
        cartan_inv,
    })
}

/// Parse "A3", "B2xA1", "D4".
pub fn parse_type(s: &str) -> Result<Vec<(CartanType, usize)>> {
    s.split(['x', '+', '*'])
        .map(|part| {
            let part = part.trim();
            if part.len() < 2 {
                return input(format!("bad type {s:?}"));
            }
            let t: CartanType = part[..1].parse()?;
            let n: usize = part[1..]
                .parse()
                .map_err(|_| QspError::Input(format!("bad rank in {part:?}")))?;
            Ok((t, n))
        })
        .collect()
}

impl RootDatum {
    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    pub fn type_label(&self) -> String {
        self.components
            .iter()
            .map(|(t, n)| format!("{t}{n}"))
            .collect::<Vec<_>>()
            .join("x")
    }

    pub fn fundamental(&self, i: usize) -> Weight {
        let mut w = Weight::zero(self.rank());
        w.0[i] = Q::one();
        w
    }

    /// α_r expressed in fundamental weights (column r of the Cartan matrix).
    pub fn alpha(&self, r: usize) -> Weight {
        Weight((0..self.rank()).map(|i| Q::from_integer(self.cartan[i][r])).collect())
    }

    pub fn rho(&self) -> Weight {
        Weight(vec![Q::one(); self.rank()])
    }

    pub fn pair(&self, a: &Weight, b: &Weight) -> Q {
        let n = self.rank();
        let mut s = Q::zero();
        for i in 0..n {
            if a.0[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b.0[j].is_zero() {
                    s += a.0[i] * self.form[i][j] * b.0[j];
                }
            }
        }
        s
    }

    pub fn pair_f64(&self, a: &Weight, b: &Weight) -> f64 {
        let p = self.pair(a, b);
        *p.numer() as f64 / *p.denom() as f64
    }

    /// (μ, β^∨) for a root β.
    pub fn coroot_pair(&self, mu: &Weight, beta: &Weight) -> Q {
        self.pair(mu, beta) * Q::from_integer(2) / self.pair(beta, beta)
    }

    /// Coordinates in the simple-root basis.
    pub fn root_coords(&self, mu: &Weight) -> Vec<Q> {
        let n = self.rank();
        (0..n)
            .map(|i| (0..n).map(|j| self.cartan_inv[i][j] * mu.0[j]).sum())
            .collect()
    }

    pub fn height(&self, mu: &Weight) -> Q {
        self.root_coords(mu).into_iter().sum()
    }

    pub fn reflect(&self, r: usize, mu: &Weight) -> Weight {
        let c = mu.0[r];
        if c.is_zero() {
            return mu.clone();
        }
        mu.sub(&self.alpha(r).scale(c))
    }

    /// w(μ) for w = s_{r1}⋯s_{rM}.
    pub fn weyl_act(&self, w: &WeylWord, mu: &Weight) -> Weight {
        w.0.iter().rev().fold(mu.clone(), |acc, &r| self.reflect(r, &acc))
    }

    pub fn is_positive_root(&self, mu: &Weight) -> bool {
        let c = self.root_coords(mu);
        c.iter().all(|x| !x.is_negative()) && c.iter().any(|x| x.is_positive())
    }

    /// Positive roots spanned by `subset`, by closure under simple reflections.
    pub fn positive_roots_closure(&self, subset: &[usize]) -> Vec<Weight> {
        let mut all: BTreeSet<Weight> = subset.iter().map(|&r| self.alpha(r)).collect();
        let mut frontier: Vec<Weight> = all.iter().cloned().collect();
        while let Some(b) = frontier.pop() {
            for &r in subset {
                let c = self.reflect(r, &b);
                if !all.contains(&c) {
                    all.insert(c.clone());
                    frontier.push(c);
                }
            }
        }
        let mut pos: Vec<Weight> = all.into_iter().filter(|b| self.is_positive_root(b)).collect();
        pos.sort_by_key(|b| (self.height(b), b.clone()));
        pos
    }

    /// Reduced word for the longest element of the parabolic subgroup W_subset.
    pub fn longest_element(&self, subset: &[usize]) -> WeylWord {
        let mut sub: Vec<usize> = subset.to_vec();
        sub.sort_unstable();
        let mut y = Weight::zero(self.rank());
        for &r in &sub {
            y.0[r] = Q::one();
        }
        let mut letters = vec![];
        while let Some(&r) = sub.iter().find(|&&r| y.0[r].is_positive()) {
            y = self.reflect(r, &y);
            letters.push(r);
        }
        letters.reverse();
        WeylWord(letters)
    }

    /// β_k = s_{r_1}⋯s_{r_{k−1}}(α_{r_k}) along the reduced word of w_subset.
    pub fn positive_roots(&self, subset: &[usize]) -> Vec<Weight> {
        self.roots_along(&self.longest_element(subset))
    }

    pub fn roots_along(&self, w: &WeylWord) -> Vec<Weight> {
        (0..w.len())
            .map(|k| self.weyl_act(&WeylWord(w.0[..k].to_vec()), &self.alpha(w.0[k])))
            .collect()
    }

    /// ρ_X^∨ = half the sum of positive coroots of X, as an element of h* via the form.
    pub fn rho_check(&self, subset: &[usize]) -> Weight {
        let mut acc = Weight::zero(self.rank());
        for b in self.positive_roots_closure(subset) {
            let nb = self.pair(&b, &b);
            acc = acc.add(&b.scale(Q::one() / nb));
        }
        acc
    }

    pub fn tau0(&self) -> Vec<usize> {
        let w0 = self.longest_element(&(0..self.rank()).collect::<Vec<_>>());
        (0..self.rank())
            .map(|r| {
                let img = self.weyl_act(&w0, &self.alpha(r)).neg();
                (0..self.rank())
                    .find(|&s| self.alpha(s) == img)
                    .expect("-w0 permutes simple roots")
            })
            .collect()
    }

    pub fn is_automorphism(&self, p: &[usize]) -> bool {
        let n = self.rank();
        p.len() == n
            && (0..n).all(|i| p[i] < n)
            && (0..n).all(|i| (0..n).all(|j| self.cartan[p[i]][p[j]] == self.cartan[i][j]))
    }

    /// All diagram automorphisms (as vertex permutations).
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.rank();
        let mut out = vec![];
        let mut cur = vec![usize::MAX; n];
        let mut used = vec![false; n];
        fn rec(
            rd: &RootDatum,
            k: usize,
            cur: &mut Vec<usize>,
            used: &mut Vec<bool>,
            out: &mut Vec<Vec<usize>>,
        ) {
            let n = rd.rank();
            if k == n {
                out.push(cur.clone());
                return;
            }
            for c in 0..n {
                if used[c] || rd.d[c] != rd.d[k] {
                    continue;
                }
                if (0..k).all(|j| rd.cartan[c][cur[j]] == rd.cartan[k][j] && rd.cartan[cur[j]][c] == rd.cartan[j][k]) {
                    used[c] = true;
                    cur[k] = c;
                    rec(rd, k + 1, cur, used, out);
                    used[c] = false;
                }
            }
        }
        rec(self, 0, &mut cur, &mut used, &mut out);
        out
    }

    /// Apply a diagram automorphism to a weight (permuting fundamental coordinates).
    pub fn permute_weight(&self, p: &[usize], mu: &Weight) -> Weight {
        let mut out = Weight::zero(self.rank());
        for i in 0..self.rank() {
            out.0[p[i]] = mu.0[i];
        }
        out
    }

    /// Connected components of the Dynkin diagram restricted to `subset`.
    pub fn connected_components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = BTreeSet::new();
        let mut comps = vec![];
        for &s in subset {
            if seen.contains(&s) {
                continue;
            }
            let mut comp = vec![s];
            seen.insert(s);
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                for &u in subset {
                    if !seen.contains(&u) && self.cartan[v][u] != 0 {
                        seen.insert(u);
                        comp.push(u);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Weyl dimension formula.
    pub fn weyl_dim(&self, lam: &Weight) -> u64 {
        let rho = self.rho();
        let lr = lam.add(&rho);
        let mut num = Q::one();
        for b in self.positive_roots_closure(&(0..self.rank()).collect::<Vec<_>>()) {
            num *= self.pair(&lr, &b) / self.pair(&rho, &b);
        }
        debug_assert!(num.is_integer());
        num.to_integer() as u64
    }

    /// Exponent k with q^{pairing} = (q^{1/d_A})^k.
    pub fn pairing_steps(&self, x: Q) -> Option<i64> {
        let y = x * Q::from_integer(self.d_a);
        y.is_integer().then(|| y.to_integer())
    }
}

impl Serialize for RootDatum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("cartan_matrix", &self.cartan)?;
        m.serialize_entry("components", &self.components)?;
        m.serialize_entry("d", &self.d)?;
        m.serialize_entry("d_A", &self.d_a)?;
        let form: Vec<Vec<String>> = self
            .form
            .iter()
            .map(|r| r.iter().map(q_to_string).collect())
            .collect();
        m.serialize_entry("form", &form)?;
        m.end()
    }
}

/// [n]_q = (q^{-n} − q^n)/(q^{-1} − q).
pub fn qint(n: i64, q: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let m = n.unsigned_abs() as i64;
    let s: f64 = (0..m).map(|k| q.powi((-m + 1 + 2 * k) as i32)).sum();
    if n < 0 {
        -s
    } else {
        s
    }
}

pub fn qfact(n: u32, q: f64) -> f64 {
    (1..=n as i64).map(|k| qint(k, q)).product()
}

pub fn qbinom(m: u32, n: u32, q: f64) -> f64 {
    if n > m {
        return 0.0;
    }
    qfact(m, q) / (qfact(n, q) * qfact(m - n, q))
}

pub fn qint_exact(n: i64, q: Q) -> Q {
    let m = n.abs();
    let s: Q = (0..m).map(|k| pow_q(q, -m + 1 + 2 * k)).sum();
    if n < 0 {
        -s
    } else {
        s
    }
}

pub fn qfact_exact(n: u32, q: Q) -> Q {
    (1..=n as i64).map(|k| qint_exact(k, q)).product()
}

/// q-binomial through the recursion [m,n] = q^{-n}[m-1,n] + q^{m-n}[m-1,n-1].
pub fn qbinom_exact(m: u32, n: u32, q: Q) -> Q {
    if n > m {
        return Q::zero();
    }
    if n == 0 || n == m {
        return Q::one();
    }
    pow_q(q, -(n as i64)) * qbinom_exact(m - 1, n, q)
        + pow_q(q, m as i64 - n as i64) * qbinom_exact(m - 1, n - 1, q)
}

fn pow_q(q: Q, k: i64) -> Q {
    if k >= 0 {
        num_traits::pow(q, k as usize)
    } else {
        num_traits::pow(q.recip(), (-k) as usize)
    }
}

pub fn lcm_all(v: impl IntoIterator<Item = i64>) -> i64 {
    v.into_iter().fold(1, |a, b| a.lcm(&b))
}
