//! Projection onto the one-particle-per-region subspace and the trace-out
//! rules: whole region, single DoF (identical and labeled particles) and the
//! Lo Franco single-DoF particle trace.
//!
//! DoF trace for identical particles: while the region keeps other DoFs, the
//! eigenvalue of DoF `j` is summed coherently, `rho -> Q rho Q^dag` with
//! `Q = sum_m <s^x m_j|` acting on every particle found at `s^x`. Once the
//! region is left with DoF `j` alone the particle itself is traced with the
//! localized Lo Franco rule, `rho -> sum_m a_m rho a_m^dag`. Every step is
//! renormalized.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, C64};
use crate::qstate::{canonicalize, gram_weight, DensityMatrix, Ket, ParticleKind, SymState, Tuple};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub region: String,
    /// Zero-based DoF index; `None` selects the whole region.
    pub dof_index: Option<usize>,
}

impl Subsystem {
    pub fn dof(region: &str, j: usize) -> Self {
        Subsystem { region: region.to_string(), dof_index: Some(j) }
    }

    pub fn region(region: &str) -> Self {
        Subsystem { region: region.to_string(), dof_index: None }
    }
}

/// `region` or `region:dof`.
impl std::str::FromStr for Subsystem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if !s.is_empty() => Ok(Subsystem::region(s)),
            Some((r, j)) if !r.is_empty() => {
                let j = j.parse().map_err(|_| Error::InvalidParam(format!("bad DoF index in `{s}`")))?;
                Ok(Subsystem::dof(r, j))
            }
            _ => Err(Error::InvalidParam(format!("bad subsystem `{s}`"))),
        }
    }
}

impl std::fmt::Display for Subsystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.dof_index {
            Some(j) => write!(f, "{}:{j}", self.region),
            None => f.write_str(&self.region),
        }
    }
}

fn occupies_once(t: &[Ket], regions: &[&str]) -> bool {
    regions.iter().all(|r| t.iter().filter(|k| k.region == *r).count() == 1)
}

fn check_distinct(regions: &[&str]) -> Result<()> {
    let set: BTreeSet<&&str> = regions.iter().collect();
    if set.len() != regions.len() {
        return Err(Error::InvalidParam("regions must be distinct".into()));
    }
    Ok(())
}

pub fn project_one_per_region(rho: &DensityMatrix, regions: &[&str]) -> Result<DensityMatrix> {
    check_distinct(regions)?;
    let keep: Vec<usize> = (0..rho.dim()).filter(|&i| occupies_once(&rho.basis[i], regions)).collect();
    let basis: Vec<Tuple> = keep.iter().map(|&i| rho.basis[i].clone()).collect();
    let data = CMat::from_fn(keep.len(), keep.len(), |a, b| rho.data[(keep[a], keep[b])]);
    let out = DensityMatrix::new(rho.kind, rho.dofs.clone(), basis, data)?;
    if !(out.trace() > 1e-14) {
        return Err(Error::EmptySubspace(format!("no weight with one particle in each of {regions:?}")));
    }
    out.normalized()
}

pub fn project_state_one_per_region(s: &SymState, regions: &[&str]) -> Result<SymState> {
    check_distinct(regions)?;
    let mut out = SymState::new(s.kind(), s.dofs().to_vec());
    for (t, a) in s.terms() {
        if occupies_once(t, regions) {
            out.add(t.clone(), *a)?;
        }
    }
    if out.norm_sqr() <= 1e-28 {
        return Err(Error::EmptySubspace(format!("no weight with one particle in each of {regions:?}")));
    }
    out.normalize()
}

/// `a_k |t>` on the orthonormal Fock basis.
fn annihilate(t: &[Ket], k: &Ket, kind: ParticleKind) -> Option<(Tuple, f64)> {
    let first = t.iter().position(|x| x == k)?;
    let n = t.iter().filter(|x| *x == k).count();
    let mut out = t.to_vec();
    out.remove(first);
    let coef = match kind {
        ParticleKind::Fermion => {
            if first % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
        _ => (n as f64).sqrt(),
    };
    Some((out, coef))
}

/// Second-quantized image of a single-particle relabeling on the Fock basis.
fn relabel(t: &[Ket], f: &dyn Fn(&Ket) -> Ket, kind: ParticleKind) -> Option<(Tuple, f64)> {
    let mapped: Tuple = t.iter().map(f).collect();
    let (out, sign) = canonicalize(mapped, kind)?;
    let w = (gram_weight(&out, kind) / gram_weight(t, kind)).sqrt();
    Some((out, sign * w))
}

/// Sparse operator from the input basis to a fresh output basis.
struct Op {
    entries: Vec<(Tuple, usize, f64)>,
}

fn conjugate_sum(rho: &DensityMatrix, ops: &[Op]) -> Result<DensityMatrix> {
    let set: BTreeSet<&Tuple> = ops.iter().flat_map(|o| o.entries.iter().map(|e| &e.0)).collect();
    let basis: Vec<Tuple> = set.into_iter().cloned().collect();
    let pos: BTreeMap<&Tuple, usize> = basis.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut data = CMat::zeros(basis.len(), basis.len());
    for op in ops {
        let mut a = CMat::zeros(basis.len(), rho.dim());
        for (t, i, w) in &op.entries {
            a[(pos[t], *i)] += c(*w, 0.0);
        }
        data += &a * &rho.data * a.adjoint();
    }
    let out = DensityMatrix::new(rho.kind, rho.dofs.clone(), basis, data)?;
    if !(out.trace() > 1e-14) {
        return Err(Error::Degenerate("trace-out left no weight".into()));
    }
    out.normalized()
}

fn region_kets(rho: &DensityMatrix, region: &str) -> BTreeSet<Ket> {
    rho.basis.iter().flat_map(|t| t.iter().filter(|k| k.region == region).cloned()).collect()
}

/// Slot index of a labeled particle that sits in `region` in every basis tuple.
pub fn slot_of_region(rho: &DensityMatrix, region: &str) -> Result<usize> {
    let first = rho.basis.first().ok_or_else(|| Error::Shape("empty basis".into()))?;
    let slot = first
        .iter()
        .position(|k| k.region == region)
        .ok_or_else(|| Error::UnknownRegion(region.to_string()))?;
    if rho.basis.iter().all(|t| t.get(slot).is_some_and(|k| k.region == region)) {
        Ok(slot)
    } else {
        Err(Error::Shape(format!("region `{region}` is not tied to a single labeled particle")))
    }
}

fn localized_particle_trace(rho: &DensityMatrix, region: &str) -> Result<DensityMatrix> {
    let modes = region_kets(rho, region);
    if modes.is_empty() {
        return Err(Error::UnknownRegion(region.to_string()));
    }
    let ops: Vec<Op> = modes
        .iter()
        .map(|k| Op {
            entries: rho
                .basis
                .iter()
                .enumerate()
                .filter_map(|(i, t)| annihilate(t, k, rho.kind).map(|(o, w)| (o, i, w)))
                .collect(),
        })
        .collect();
    conjugate_sum(rho, &ops)
}

/// Trace of a whole region. For identical particles this is the localized
/// Lo Franco trace; for labeled particles the standard partial trace of the
/// particle living there.
pub fn trace_region(rho: &DensityMatrix, region: &str) -> Result<DensityMatrix> {
    match rho.kind {
        ParticleKind::Distinguishable => {
            let slot = slot_of_region(rho, region)?;
            partial_trace_slot(rho, slot, None)
        }
        _ => localized_particle_trace(rho, region),
    }
}

pub fn trace_dof_indist(rho: &DensityMatrix, sub: &Subsystem) -> Result<DensityMatrix> {
    if rho.kind == ParticleKind::Distinguishable {
        return Err(Error::InvalidParam("trace_dof_indist needs identical particles".into()));
    }
    let j = sub.dof_index.ok_or_else(|| Error::InvalidParam("subsystem needs a dof index".into()))?;
    if j >= rho.dofs.len() {
        return Err(Error::DofOutOfRange(j));
    }
    let kets = region_kets(rho, &sub.region);
    if kets.is_empty() {
        return Err(Error::UnknownRegion(sub.region.clone()));
    }
    if kets.iter().any(|k| k.value(j).is_none()) {
        return Err(Error::InvalidParam(format!("dof {j} at `{}` is already traced", sub.region)));
    }
    let empties = kets.iter().filter(|k| k.live_dofs().len() == 1).count();
    if empties == kets.len() {
        return localized_particle_trace(rho, &sub.region);
    }
    if empties != 0 {
        return Err(Error::Shape(format!("kets at `{}` carry different dof sets", sub.region)));
    }
    let region = sub.region.clone();
    let f = move |k: &Ket| if k.region == region { k.without(j) } else { k.clone() };
    let op = Op {
        entries: rho
            .basis
            .iter()
            .enumerate()
            .filter_map(|(i, t)| relabel(t, &f, rho.kind).map(|(o, w)| (o, i, w)))
            .collect(),
    };
    conjugate_sum(rho, &[op])
}

/// Coherent DoF deletion on a pure state. Fails when the deletion would
/// empty a region, since that step is incoherent.
pub fn delete_dof_state(s: &SymState, sub: &Subsystem) -> Result<SymState> {
    if s.kind() == ParticleKind::Distinguishable {
        return Err(Error::InvalidParam("coherent deletion needs identical particles".into()));
    }
    let j = sub.dof_index.ok_or_else(|| Error::InvalidParam("subsystem needs a dof index".into()))?;
    if j >= s.dofs().len() {
        return Err(Error::DofOutOfRange(j));
    }
    let mut found = false;
    let mut out = SymState::new(s.kind(), s.dofs().to_vec());
    for (t, a) in s.terms() {
        let mut mapped = Vec::with_capacity(t.len());
        for k in t {
            if k.region == sub.region {
                found = true;
                if k.value(j).is_none() {
                    return Err(Error::InvalidParam(format!("dof {j} at `{}` is already traced", sub.region)));
                }
                if k.live_dofs().len() == 1 {
                    return Err(Error::InvalidParam(format!(
                        "tracing dof {j} empties `{}`; use the density-matrix path",
                        sub.region
                    )));
                }
                mapped.push(k.without(j));
            } else {
                mapped.push(k.clone());
            }
        }
        out.add(mapped, *a)?;
    }
    if !found {
        return Err(Error::UnknownRegion(sub.region.clone()));
    }
    out.normalize()
}

/// Standard partial trace over a labeled particle's DoF, or over the whole
/// particle when `dof` is `None` or no live DoF would remain.
fn partial_trace_slot(rho: &DensityMatrix, slot: usize, dof: Option<usize>) -> Result<DensityMatrix> {
    let reduce = |t: &Tuple| -> (Tuple, Ket) {
        let k = &t[slot];
        let whole = match dof {
            None => true,
            Some(j) => k.live_dofs().len() == 1 && k.value(j).is_some(),
        };
        let mut out = t.clone();
        if whole {
            out.remove(slot);
            (out, k.clone())
        } else {
            let j = dof.unwrap();
            out[slot] = k.without(j);
            (out, k.clone())
        }
    };
    let reduced: Vec<(Tuple, Ket)> = rho.basis.iter().map(reduce).collect();
    let set: BTreeSet<&Tuple> = reduced.iter().map(|r| &r.0).collect();
    let basis: Vec<Tuple> = set.into_iter().cloned().collect();
    let pos: BTreeMap<&Tuple, usize> = basis.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut data = CMat::zeros(basis.len(), basis.len());
    for a in 0..rho.dim() {
        for b in 0..rho.dim() {
            let (ka, kb) = (&reduced[a].1, &reduced[b].1);
            let whole = dof.is_none() || reduced[a].0.len() < rho.basis[a].len();
            let traced_equal = if whole { ka == kb } else { ka.value(dof.unwrap()) == kb.value(dof.unwrap()) };
            if traced_equal {
                data[(pos[&reduced[a].0], pos[&reduced[b].0])] += rho.data[(a, b)];
            }
        }
    }
    let out = DensityMatrix::new(rho.kind, rho.dofs.clone(), basis, data)?;
    if !(out.trace() > 1e-14) {
        return Err(Error::Degenerate("partial trace left no weight".into()));
    }
    out.normalized()
}

/// Standard partial trace of DoF `dof_index` of labeled particle `particle`
/// (its slot in the basis tuples).
pub fn trace_dof_dist(rho: &DensityMatrix, particle: usize, dof_index: usize) -> Result<DensityMatrix> {
    if rho.kind != ParticleKind::Distinguishable {
        return Err(Error::InvalidParam("trace_dof_dist needs labeled particles".into()));
    }
    if dof_index >= rho.dofs.len() {
        return Err(Error::DofOutOfRange(dof_index));
    }
    if rho.basis.iter().any(|t| t.len() <= particle) {
        return Err(Error::InvalidParam(format!("no particle {particle}")));
    }
    if rho.basis.iter().any(|t| t[particle].value(dof_index).is_none()) {
        return Err(Error::InvalidParam(format!("dof {dof_index} of particle {particle} is already traced")));
    }
    partial_trace_slot(rho, particle, Some(dof_index))
}

/// Lo Franco partial trace of a two-particle single-DoF pure state,
/// `sum_k <k|Phi><Phi|k>`, globally or restricted to the modes of `region`.
pub fn particle_trace_lofranco(state: &SymState, region: Option<&str>) -> Result<DensityMatrix> {
    let eta = state
        .kind()
        .eta()
        .ok_or_else(|| Error::InvalidParam("Lo Franco trace needs identical particles".into()))?;
    if state.n_particles() != 2 || state.dofs().len() != 1 {
        return Err(Error::Shape("Lo Franco trace takes two particles with one DoF each".into()));
    }
    let modes: BTreeSet<Ket> = state
        .terms()
        .keys()
        .flat_map(|t| t.iter().cloned())
        .filter(|k| region.is_none_or(|r| k.region == r))
        .collect();
    if modes.is_empty() {
        return Err(Error::UnknownRegion(region.unwrap_or("").to_string()));
    }
    let mut vecs: Vec<BTreeMap<Ket, C64>> = Vec::new();
    for k in &modes {
        let mut v: BTreeMap<Ket, C64> = BTreeMap::new();
        for (t, a) in state.terms() {
            if &t[0] == k {
                *v.entry(t[1].clone()).or_insert(c(0.0, 0.0)) += *a;
            }
            if &t[1] == k {
                *v.entry(t[0].clone()).or_insert(c(0.0, 0.0)) += *a * eta;
            }
        }
        vecs.push(v);
    }
    let set: BTreeSet<&Ket> = vecs.iter().flat_map(|v| v.keys()).collect();
    let basis: Vec<Tuple> = set.iter().map(|k| vec![(*k).clone()]).collect();
    let mut data = CMat::zeros(basis.len(), basis.len());
    for v in &vecs {
        let col = CVec::from_iterator(basis.len(), set.iter().map(|k| v.get(*k).copied().unwrap_or(c(0.0, 0.0))));
        data += &col * col.adjoint();
    }
    let out = DensityMatrix::new(state.kind(), state.dofs().to_vec(), basis, data)?;
    if !(out.trace() > 1e-14) {
        return Err(Error::Degenerate("zero localized norm".into()));
    }
    out.normalized()
}

fn keep_map(keep: &[(String, usize)]) -> BTreeMap<&str, Vec<usize>> {
    let mut m: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (r, j) in keep {
        m.entry(r.as_str()).or_default().push(*j);
    }
    m
}

/// Trace every DoF outside `keep` with the rule that fits the particle kind
/// and return the reduced operator on the kept qubits, in `keep` order.
pub fn reduce_to_qubits(rho: &DensityMatrix, keep: &[(String, usize)]) -> Result<CMat> {
    let km = keep_map(keep);
    let mut cur = rho.clone();
    for region in rho.regions() {
        if let Some(js) = km.get(region.as_str()) {
            for j in 0..rho.dofs.len() {
                if js.contains(&j) {
                    continue;
                }
                cur = match cur.kind {
                    ParticleKind::Distinguishable => {
                        let slot = slot_of_region(&cur, &region)?;
                        trace_dof_dist(&cur, slot, j)?
                    }
                    _ => trace_dof_indist(&cur, &Subsystem::dof(&region, j))?,
                };
            }
        }
    }
    for region in rho.regions() {
        if !km.contains_key(region.as_str()) {
            cur = trace_region(&cur, &region)?;
        }
    }
    cur.qubit_matrix(keep)
}

/// Pure-state counterpart of [`reduce_to_qubits`] for identical particles
/// where only coherent deletions are needed.
pub fn reduce_state_to_qubits(s: &SymState, keep: &[(String, usize)]) -> Result<CVec> {
    let km = keep_map(keep);
    let mut cur = s.clone();
    let regions: BTreeSet<String> = s.terms().keys().flat_map(|t| t.iter().map(|k| k.region.clone())).collect();
    for region in &regions {
        let js = km
            .get(region.as_str())
            .ok_or_else(|| Error::InvalidParam(format!("region `{region}` would need an incoherent trace")))?;
        for j in 0..s.dofs().len() {
            if !js.contains(&j) {
                cur = delete_dof_state(&cur, &Subsystem::dof(region, j))?;
            }
        }
    }
    let basis: Vec<Tuple> = cur.terms().keys().cloned().collect();
    let v = cur.fock_vector(&basis);
    let dm = DensityMatrix::new(cur.kind(), cur.dofs().to_vec(), basis, CMat::zeros(v.len(), v.len()))?;
    let idx = dm.qubit_indices(keep)?;
    let mut out = CVec::zeros(1 << keep.len());
    for (a, &i) in idx.iter().enumerate() {
        out[i] += v[a];
    }
    Ok(out)
}
