//! Pure states and density matrices of `p` particles carrying `n` DoFs each.
//!
//! Amplitudes of identical particles are stored in the Lo Franco convention:
//! a basis tuple `|m1,...,mp>` is the symmetrized (or antisymmetrized) ket whose
//! self-overlap is `prod(mult!)` for bosons and `1` for fermions. Tuples are
//! kept in canonical sorted order, with the fermionic sign folded into the
//! amplitude. Densifying multiplies by `sqrt(prod(mult!))` so that the density
//! matrix lives on an orthonormal Fock basis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleKind {
    Boson,
    Fermion,
    Distinguishable,
}

impl ParticleKind {
    /// Exchange factor, `None` for labeled particles.
    pub fn eta(self) -> Option<f64> {
        match self {
            ParticleKind::Boson => Some(1.0),
            ParticleKind::Fermion => Some(-1.0),
            ParticleKind::Distinguishable => None,
        }
    }

    pub fn is_identical(self) -> bool {
        self != ParticleKind::Distinguishable
    }

    pub fn name(self) -> &'static str {
        match self {
            ParticleKind::Boson => "boson",
            ParticleKind::Fermion => "fermion",
            ParticleKind::Distinguishable => "distinguishable",
        }
    }
}

impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParticleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boson" | "bosons" | "b" => Ok(ParticleKind::Boson),
            "fermion" | "fermions" | "f" => Ok(ParticleKind::Fermion),
            "distinguishable" | "dist" | "d" => Ok(ParticleKind::Distinguishable),
            other => Err(Error::InvalidParam(format!("unknown particle kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofSpec {
    pub name: String,
    pub labels: Vec<String>,
}

impl DofSpec {
    pub fn new(name: &str, labels: &[&str]) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidParam(format!("dof `{name}` needs at least two eigenvalues")));
        }
        let distinct: BTreeSet<&&str> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::InvalidParam(format!("dof `{name}` has repeated eigenvalue labels")));
        }
        Ok(DofSpec { name: name.to_string(), labels: labels.iter().map(|s| s.to_string()).collect() })
    }

    pub fn qubit(name: &str) -> Self {
        DofSpec { name: name.to_string(), labels: vec!["0".into(), "1".into()] }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<u8> {
        self.labels.iter().position(|l| l == label).map(|i| i as u8)
    }
}

/// Single-particle basis ket: a spatial region plus one eigenvalue per DoF.
/// A `None` slot marks a DoF that has been traced out at this region.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ket {
    pub region: String,
    pub dofs: Vec<Option<u8>>,
}

impl Ket {
    pub fn new(region: &str, dofs: &[u8]) -> Self {
        Ket { region: region.to_string(), dofs: dofs.iter().map(|&d| Some(d)).collect() }
    }

    pub fn value(&self, j: usize) -> Option<u8> {
        self.dofs.get(j).copied().flatten()
    }

    pub fn without(&self, j: usize) -> Ket {
        let mut k = self.clone();
        k.dofs[j] = None;
        k
    }

    pub fn live_dofs(&self) -> Vec<usize> {
        (0..self.dofs.len()).filter(|&j| self.dofs[j].is_some()).collect()
    }

    pub fn label(&self, specs: &[DofSpec]) -> String {
        let vals: Vec<String> = self
            .dofs
            .iter()
            .zip(specs)
            .filter_map(|(v, s)| v.map(|v| s.labels[v as usize].clone()))
            .collect();
        format!("{}:{}", self.region, vals.join(","))
    }
}

pub type Tuple = Vec<Ket>;

/// Sort a ket tuple into canonical order. Returns the exchange sign picked up
/// on the way, or `None` when fermionic exclusion kills the tuple.
pub fn canonicalize(mut kets: Tuple, kind: ParticleKind) -> Option<(Tuple, f64)> {
    if kind == ParticleKind::Distinguishable {
        return Some((kets, 1.0));
    }
    let mut swaps = 0usize;
    for i in 1..kets.len() {
        let mut j = i;
        while j > 0 && kets[j - 1] > kets[j] {
            kets.swap(j - 1, j);
            swaps += 1;
            j -= 1;
        }
    }
    if kind == ParticleKind::Fermion {
        if kets.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        Some((kets, sign))
    } else {
        Some((kets, 1.0))
    }
}

/// Self-overlap of a canonical basis tuple in the Lo Franco convention.
pub fn gram_weight(t: &[Ket], kind: ParticleKind) -> f64 {
    if kind != ParticleKind::Boson {
        return 1.0;
    }
    let mut w = 1.0;
    let mut run = 1usize;
    for i in 1..=t.len() {
        if i < t.len() && t[i] == t[i - 1] {
            run += 1;
        } else {
            for k in 2..=run {
                w *= k as f64;
            }
            run = 1;
        }
    }
    w
}

/// Sparse single-particle state used to build multi-particle kets.
pub type Particle = Vec<(Ket, C64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct SymState {
    kind: ParticleKind,
    dofs: Vec<DofSpec>,
    particle_labels: Option<Vec<String>>,
    terms: BTreeMap<Tuple, C64>,
}

impl SymState {
    pub fn new(kind: ParticleKind, dofs: Vec<DofSpec>) -> Self {
        SymState { kind, dofs, particle_labels: None, terms: BTreeMap::new() }
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        self.particle_labels = Some(labels.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn kind(&self) -> ParticleKind {
        self.kind
    }

    pub fn dofs(&self) -> &[DofSpec] {
        &self.dofs
    }

    pub fn particle_labels(&self) -> Option<&[String]> {
        self.particle_labels.as_deref()
    }

    pub fn terms(&self) -> &BTreeMap<Tuple, C64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_particles(&self) -> usize {
        self.terms.keys().next().map_or(0, |t| t.len())
    }

    fn check_ket(&self, k: &Ket) -> Result<()> {
        if k.dofs.len() != self.dofs.len() {
            return Err(Error::Shape(format!(
                "ket carries {} dofs, state declares {}",
                k.dofs.len(),
                self.dofs.len()
            )));
        }
        for (j, (v, spec)) in k.dofs.iter().zip(&self.dofs).enumerate() {
            if let Some(v) = v {
                if (*v as usize) >= spec.dim() {
                    return Err(Error::DofOutOfRange(j));
                }
            }
        }
        Ok(())
    }

    /// Accumulate `amp * |kets>`; the tuple is brought to canonical order.
    pub fn add(&mut self, kets: Tuple, amp: C64) -> Result<()> {
        for k in &kets {
            self.check_ket(k)?;
        }
        if let Some(n) = self.terms.keys().next().map(|t| t.len()) {
            if n != kets.len() {
                return Err(Error::Shape("mixed particle numbers".into()));
            }
        }
        if let Some((t, sign)) = canonicalize(kets, self.kind) {
            *self.terms.entry(t).or_insert(c(0.0, 0.0)) += amp * sign;
        }
        Ok(())
    }

    /// Drop amplitudes below `tol` in magnitude.
    pub fn prune(mut self, tol: f64) -> Self {
        self.terms.retain(|_, a| a.norm() > tol);
        self
    }

    /// Multilinear expansion of `|phi_1, ..., phi_p>`.
    pub fn from_particles(kind: ParticleKind, dofs: Vec<DofSpec>, particles: &[Particle]) -> Result<Self> {
        let mut s = SymState::new(kind, dofs);
        let mut stack: Vec<(Tuple, C64)> = vec![(Vec::new(), c(1.0, 0.0))];
        for p in particles {
            let mut next = Vec::with_capacity(stack.len() * p.len());
            for (t, a) in &stack {
                for (k, b) in p {
                    let mut t2 = t.clone();
                    t2.push(k.clone());
                    next.push((t2, a * b));
                }
            }
            stack = next;
        }
        for (t, a) in stack {
            s.add(t, a)?;
        }
        Ok(s.prune(0.0))
    }

    pub fn amplitude(&self, t: &[Ket]) -> C64 {
        self.terms.get(t).copied().unwrap_or(c(0.0, 0.0))
    }

    /// Amplitude on the orthonormal Fock basis.
    pub fn fock_amplitude(&self, t: &[Ket]) -> C64 {
        self.amplitude(t) * gram_weight(t, self.kind).sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(t, a)| a.norm_sqr() * gram_weight(t, self.kind)).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 1e-300) {
            return Err(Error::Degenerate("state has zero norm".into()));
        }
        let f = c(1.0 / n.sqrt(), 0.0);
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a *= f;
        }
        Ok(out)
    }

    pub fn scale(&self, f: C64) -> Self {
        let mut out = self.clone();
        for a in out.terms.values_mut() {
            *a *= f;
        }
        out
    }

    /// Vector of Fock amplitudes over the given basis.
    pub fn fock_vector(&self, basis: &[Tuple]) -> CVec {
        CVec::from_iterator(basis.len(), basis.iter().map(|t| self.fock_amplitude(t)))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let s = self.normalize()?;
        let basis: Vec<Tuple> = s.terms.keys().cloned().collect();
        let v = s.fock_vector(&basis);
        DensityMatrix::new(self.kind, self.dofs.clone(), basis, linalg::outer(&v))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let eta = match self.kind.eta() {
            Some(e) => serde_json::json!(e as i32),
            None => serde_json::json!("distinguishable"),
        };
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(t, a)| {
                let kets: Vec<serde_json::Value> = t
                    .iter()
                    .map(|k| {
                        let vals: Vec<Option<String>> = k
                            .dofs
                            .iter()
                            .zip(&self.dofs)
                            .map(|(v, s)| v.map(|v| s.labels[v as usize].clone()))
                            .collect();
                        serde_json::json!({"region": k.region, "dofs": vals})
                    })
                    .collect();
                serde_json::json!({"kets": kets, "re": a.re, "im": a.im})
            })
            .collect();
        let mut v = serde_json::json!({"eta": eta, "dof_specs": self.dofs, "terms": terms});
        if let Some(l) = &self.particle_labels {
            v["particle_labels"] = serde_json::json!(l);
        }
        v
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::InvalidParam(format!("state json: {m}"));
        let kind = match &v["eta"] {
            serde_json::Value::Number(n) => match n.as_i64() {
                Some(1) => ParticleKind::Boson,
                Some(-1) => ParticleKind::Fermion,
                _ => return Err(bad("eta must be 1, -1 or \"distinguishable\"")),
            },
            serde_json::Value::String(s) if s == "distinguishable" => ParticleKind::Distinguishable,
            _ => return Err(bad("eta must be 1, -1 or \"distinguishable\"")),
        };
        let dofs: Vec<DofSpec> =
            serde_json::from_value(v["dof_specs"].clone()).map_err(|e| bad(&e.to_string()))?;
        for d in &dofs {
            let labels: Vec<&str> = d.labels.iter().map(|s| s.as_str()).collect();
            DofSpec::new(&d.name, &labels)?;
        }
        let mut s = SymState::new(kind, dofs.clone());
        if let Some(l) = v.get("particle_labels").and_then(|l| l.as_array()) {
            s.particle_labels = Some(l.iter().filter_map(|x| x.as_str().map(String::from)).collect());
        }
        let terms = v["terms"].as_array().ok_or_else(|| bad("terms must be an array"))?;
        for term in terms {
            let kets = term["kets"].as_array().ok_or_else(|| bad("kets must be an array"))?;
            let mut t = Vec::new();
            for k in kets {
                let region = k["region"].as_str().ok_or_else(|| bad("region must be a string"))?;
                let vals = k["dofs"].as_array().ok_or_else(|| bad("dofs must be an array"))?;
                if vals.len() != dofs.len() {
                    return Err(Error::Shape("ket dof count differs from dof_specs".into()));
                }
                let mut dv = Vec::new();
                for (x, spec) in vals.iter().zip(&dofs) {
                    dv.push(match x {
                        serde_json::Value::Null => None,
                        serde_json::Value::String(l) => {
                            Some(spec.index_of(l).ok_or_else(|| bad(&format!("unknown label `{l}`")))?)
                        }
                        _ => return Err(bad("dof values must be labels or null")),
                    });
                }
                t.push(Ket { region: region.to_string(), dofs: dv });
            }
            let re = term["re"].as_f64().ok_or_else(|| bad("re must be a number"))?;
            let im = term["im"].as_f64().unwrap_or(0.0);
            s.add(t, c(re, im))?;
        }
        Ok(s)
    }
}

/// `<a|b>` in the symmetric inner product.
pub fn symmetric_inner(a: &SymState, b: &SymState) -> Result<C64> {
    if a.kind != b.kind || a.dofs != b.dofs {
        return Err(Error::Shape("states differ in statistics or dof specs".into()));
    }
    let mut s = c(0.0, 0.0);
    for (t, x) in &a.terms {
        if let Some(y) = b.terms.get(t) {
            s += x.conj() * y * gram_weight(t, a.kind);
        }
    }
    Ok(s)
}

fn particle_overlap(a: &Particle, b: &Particle) -> C64 {
    let mut s = c(0.0, 0.0);
    for (ka, x) in a {
        for (kb, y) in b {
            if ka == kb {
                s += x.conj() * y;
            }
        }
    }
    s
}

/// First-quantized `<phi_1..phi_p|psi_1..psi_p>` as a permanent (bosons),
/// determinant (fermions) or plain product (labeled particles).
pub fn symmetric_inner_particles(kind: ParticleKind, a: &[Particle], b: &[Particle]) -> Result<C64> {
    if a.len() != b.len() {
        return Err(Error::Shape("particle numbers differ".into()));
    }
    let p = a.len();
    let g: Vec<Vec<C64>> = (0..p).map(|i| (0..p).map(|j| particle_overlap(&a[i], &b[j])).collect()).collect();
    if kind == ParticleKind::Distinguishable {
        return Ok((0..p).map(|i| g[i][i]).product());
    }
    let eta = kind.eta().unwrap();
    let mut total = c(0.0, 0.0);
    let mut perm: Vec<usize> = (0..p).collect();
    permutations(&mut perm, 0, &mut |perm, parity| {
        let mut term = c(if parity % 2 == 1 { eta } else { 1.0 }, 0.0);
        for i in 0..p {
            term *= g[i][perm[i]];
        }
        total += term;
    }, 0);
    Ok(total)
}

fn permutations(perm: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize], usize), parity: usize) {
    if k == perm.len() {
        f(perm, parity);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permutations(perm, k + 1, f, parity + usize::from(i != k));
        perm.swap(k, i);
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub kind: ParticleKind,
    pub dofs: Vec<DofSpec>,
    pub basis: Vec<Tuple>,
    pub data: CMat,
}

impl DensityMatrix {
    pub fn new(kind: ParticleKind, dofs: Vec<DofSpec>, basis: Vec<Tuple>, data: CMat) -> Result<Self> {
        if data.nrows() != basis.len() || data.ncols() != basis.len() {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but basis has {} entries",
                data.nrows(),
                data.ncols(),
                basis.len()
            )));
        }
        Ok(DensityMatrix { kind, dofs, basis, data })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.data).re
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 1e-14) {
            return Err(Error::Degenerate(format!("trace {t:e} cannot be renormalized")));
        }
        let mut out = self.clone();
        out.data /= c(t, 0.0);
        Ok(out)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::max_abs_diff(&self.data, &self.data.adjoint()) <= tol
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::herm_eigenvalues(&self.data)
    }

    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    /// Hermitian, trace one and PSD within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.is_hermitian(tol)
            && (self.trace() - 1.0).abs() <= tol
            && self.eigenvalues().first().is_none_or(|&l| l >= -tol)
    }

    pub fn index_of(&self, t: &[Ket]) -> Option<usize> {
        self.basis.iter().position(|b| b.as_slice() == t)
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.kind == other.kind
            && self.basis == other.basis
            && linalg::max_abs_diff(&self.data, &other.data) <= tol
    }

    /// Regions occurring anywhere in the basis, sorted.
    pub fn regions(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.basis.iter().flat_map(|t| t.iter().map(|k| &k.region)).collect();
        set.into_iter().cloned().collect()
    }

    /// Re-express on a register of qubits, one per `(region, dof)` slot, in
    /// the given order (first slot = most significant bit). Every basis tuple
    /// must hold exactly one ket per listed region and no other live DoFs.
    pub fn qubit_matrix(&self, slots: &[(String, usize)]) -> Result<CMat> {
        let index = self.qubit_indices(slots)?;
        let n = 1usize << slots.len();
        let mut out = CMat::zeros(n, n);
        for (a, &ia) in index.iter().enumerate() {
            for (b, &ib) in index.iter().enumerate() {
                out[(ia, ib)] += self.data[(a, b)];
            }
        }
        Ok(out)
    }

    /// Qubit-register index of each basis tuple, see [`Self::qubit_matrix`].
    pub fn qubit_indices(&self, slots: &[(String, usize)]) -> Result<Vec<usize>> {
        let regions: BTreeSet<&String> = slots.iter().map(|(r, _)| r).collect();
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(self.basis.len());
        for t in &self.basis {
            if t.len() != regions.len() {
                return Err(Error::Shape("basis tuple does not hold one ket per listed region".into()));
            }
            let mut idx = 0usize;
            for (r, j) in slots {
                let hits: Vec<&Ket> = t.iter().filter(|k| &k.region == r).collect();
                if hits.len() != 1 {
                    return Err(Error::Shape(format!("region `{r}` is not singly occupied")));
                }
                if *j >= self.dofs.len() || self.dofs[*j].dim() != 2 {
                    return Err(Error::DofOutOfRange(*j));
                }
                let v = hits[0].value(*j).ok_or(Error::DofOutOfRange(*j))?;
                idx = (idx << 1) | v as usize;
            }
            for k in t {
                let listed: Vec<usize> = slots.iter().filter(|(r, _)| r == &k.region).map(|(_, j)| *j).collect();
                if k.live_dofs().iter().any(|j| !listed.contains(j)) {
                    return Err(Error::Shape(format!("region `{}` still carries untraced dofs", k.region)));
                }
            }
            if !seen.insert(idx) {
                return Err(Error::Shape("two basis tuples map onto the same qubit string".into()));
            }
            out.push(idx);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let basis: Vec<Vec<String>> =
            self.basis.iter().map(|t| t.iter().map(|k| k.label(&self.dofs)).collect()).collect();
        let mut data = Vec::with_capacity(2 * self.dim() * self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                data.push(self.data[(i, j)].re);
                data.push(self.data[(i, j)].im);
            }
        }
        serde_json::json!({"kind": self.kind, "basis": basis, "data_re_im": data})
    }

    /// Row-major CSV with real and imaginary parts interleaved.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .flat_map(|j| {
                    let z = self.data[(i, j)];
                    [format!("{:.12e}", z.re), format!("{:.12e}", z.im)]
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Convex combination of density matrices over the union of their bases.
pub fn mix(states: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    let first = states.first().ok_or_else(|| Error::InvalidParam("empty ensemble".into()))?;
    if states.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidParam("negative weight".into()));
    }
    let total: f64 = states.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParam(format!("weights sum to {total}, not 1")));
    }
    let kind = first.1.kind;
    let dofs = first.1.dofs.clone();
    let mut set = BTreeSet::new();
    for (_, r) in states {
        if r.kind != kind || r.dofs != dofs {
            return Err(Error::Shape("ensemble members differ in statistics or dofs".into()));
        }
        set.extend(r.basis.iter().cloned());
    }
    let basis: Vec<Tuple> = set.into_iter().collect();
    let pos: BTreeMap<&Tuple, usize> = basis.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut data = CMat::zeros(basis.len(), basis.len());
    for (w, r) in states {
        let map: Vec<usize> = r.basis.iter().map(|t| pos[t]).collect();
        for a in 0..r.dim() {
            for b in 0..r.dim() {
                data[(map[a], map[b])] += r.data[(a, b)] * *w;
            }
        }
    }
    DensityMatrix::new(kind, dofs, basis, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spin() -> Vec<DofSpec> {
        vec![DofSpec::new("spin", &["up", "down"]).unwrap()]
    }

    fn one(region: &str, v: u8) -> Particle {
        vec![(Ket::new(region, &[v]), c(1.0, 0.0))]
    }

    #[test]
    fn pauli_kills_doubled_fermions() {
        let phi = one("s1", 0);
        let s = SymState::from_particles(ParticleKind::Fermion, spin(), &[phi.clone(), phi.clone()]).unwrap();
        assert!(s.is_empty());
        assert!(s.normalize().is_err());
        let x = symmetric_inner_particles(ParticleKind::Fermion, &[phi.clone(), phi.clone()], &[phi.clone(), one("s1", 1)])
            .unwrap();
        assert!(x.norm() < 1e-15);
    }

    #[test]
    fn exchange_picks_up_eta() {
        let (phi, psi) = (one("s1", 0), one("s2", 0));
        for kind in [ParticleKind::Boson, ParticleKind::Fermion] {
            let a = SymState::from_particles(kind, spin(), &[phi.clone(), psi.clone()]).unwrap();
            let b = SymState::from_particles(kind, spin(), &[psi.clone(), phi.clone()]).unwrap();
            let eta = kind.eta().unwrap();
            assert!((symmetric_inner(&a, &b).unwrap() - c(eta, 0.0)).norm() < 1e-15);
            assert!((symmetric_inner(&a, &a).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn doubled_boson_has_norm_two() {
        let phi = one("s1", 0);
        let s = SymState::from_particles(ParticleKind::Boson, spin(), &[phi.clone(), phi]).unwrap();
        assert!((s.norm_sqr() - 2.0).abs() < 1e-15);
        let n = s.normalize().unwrap();
        let a = n.terms().values().next().unwrap();
        assert!((a.re - 0.5f64.sqrt()).abs() < 1e-15);
        let rho = n.to_density().unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_pair_has_half_weight_per_ordered_term() {
        // first-quantized expansion of |phi,psi>: (|phi psi> + |psi phi>)/sqrt(2)
        let s = SymState::from_particles(ParticleKind::Boson, spin(), &[one("s1", 0), one("s1", 1)]).unwrap();
        let n = s.normalize().unwrap();
        let kappa = n.terms().values().next().unwrap().re;
        let per_ordered = kappa / 2f64.sqrt();
        assert!((per_ordered - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bell_density_is_pure() {
        let dofs = vec![DofSpec::qubit("q")];
        let mut s = SymState::new(ParticleKind::Distinguishable, dofs).with_labels(&["A", "B"]);
        s.add(vec![Ket::new("A", &[0]), Ket::new("B", &[1])], c(1.0, 0.0)).unwrap();
        s.add(vec![Ket::new("A", &[1]), Ket::new("B", &[0])], c(-1.0, 0.0)).unwrap();
        let rho = s.to_density().unwrap();
        assert!(rho.is_valid(1e-12));
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let q = rho.qubit_matrix(&[("A".into(), 0), ("B".into(), 0)]).unwrap();
        assert_eq!(q.nrows(), 4);
        assert!((q[(1, 2)].re + 0.5).abs() < 1e-12);
    }

    #[test]
    fn mix_of_products_is_diagonal() {
        let dofs = vec![DofSpec::qubit("q")];
        let mk = |v: u8| {
            let mut s = SymState::new(ParticleKind::Distinguishable, dofs.clone());
            s.add(vec![Ket::new("A", &[v]), Ket::new("B", &[v])], c(1.0, 0.0)).unwrap();
            s.to_density().unwrap()
        };
        let m = mix(&[(0.5, mk(0)), (0.5, mk(1))]).unwrap();
        let q = m.qubit_matrix(&[("A".into(), 0), ("B".into(), 0)]).unwrap();
        assert!((q[(0, 0)].re - 0.5).abs() < 1e-15 && (q[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!(m.purity() < 1.0);
        assert!(mix(&[(-0.5, mk(0)), (1.5, mk(1))]).is_err());
        let single = mix(&[(1.0, mk(0))]).unwrap();
        assert!(single.approx_eq(&mk(0), 0.0));
    }

    #[test]
    fn json_roundtrip() {
        let s = SymState::from_particles(
            ParticleKind::Fermion,
            spin(),
            &[vec![(Ket::new("s1", &[0]), c(0.6, 0.0)), (Ket::new("s2", &[1]), c(0.0, 0.8))], one("s2", 0)],
        )
        .unwrap();
        let back = SymState::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn dof_spec_rejects_duplicates() {
        assert!(DofSpec::new("x", &["a", "a"]).is_err());
        assert!(DofSpec::new("x", &["a"]).is_err());
    }
}
