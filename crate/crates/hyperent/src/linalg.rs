//! Small dense complex linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitize(m);
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(m.nrows(), m.ncols());
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    herm_eig(m).0
}

/// Square root of a PSD matrix; negative eigenvalues from round-off are clipped.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eig(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&x| c(x.max(0.0).sqrt(), 0.0)),
    ));
    &vecs * d * vecs.adjoint()
}

pub fn trace_norm(m: &CMat) -> f64 {
    herm_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Partial trace over qubits of an `n`-qubit operator. Qubit 0 is the most
/// significant bit. The kept qubits appear in the order given by `keep`.
pub fn ptrace_qubits(rho: &CMat, n: usize, keep: &[usize]) -> CMat {
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let mut out = CMat::zeros(1 << k, 1 << k);
    let compose = |kept: usize, tr: usize| {
        let mut x = 0usize;
        for (i, &q) in keep.iter().enumerate() {
            x |= ((kept >> (k - 1 - i)) & 1) << (n - 1 - q);
        }
        for (i, &q) in traced.iter().enumerate() {
            x |= ((tr >> (traced.len() - 1 - i)) & 1) << (n - 1 - q);
        }
        x
    };
    for a in 0..(1 << k) {
        for b in 0..(1 << k) {
            let mut s = C64::new(0.0, 0.0);
            for t in 0..(1 << traced.len()) {
                s += rho[(compose(a, t), compose(b, t))];
            }
            out[(a, b)] = s;
        }
    }
    out
}

/// Partial transpose on the second factor of a `da x db` bipartite operator.
pub fn partial_transpose_b(rho: &CMat, da: usize, db: usize) -> CMat {
    let mut out = CMat::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    out[(i * db + j, k * db + l)] = rho[(i * db + l, k * db + j)];
                }
            }
        }
    }
    out
}

pub fn pauli(k: usize) -> CMat {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match k {
        0 => CMat::from_row_slice(2, 2, &[l, o, o, l]),
        1 => CMat::from_row_slice(2, 2, &[o, l, l, o]),
        2 => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
        3 => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => panic!("pauli index {k}"),
    }
}

pub fn basis_vec(dim: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[k] = c(1.0, 0.0);
    v
}

pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVec {
    let v = CVec::from_iterator(
        dim,
        (0..dim).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))),
    );
    let n = v.norm();
    v / c(n, 0.0)
}

/// Haar-random unitary via QR of a complex Ginibre matrix with phase fix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q.clone();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / c(d.norm(), 0.0) } else { c(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] = q[(i, j)] * ph;
        }
    }
    u
}

pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMat {
    let mut rho = CMat::zeros(dim, dim);
    for _ in 0..rank {
        let v = random_state(dim, rng);
        rho += outer(&v) * c(rng.random::<f64>(), 0.0);
    }
    let t = trace(&rho);
    rho / t
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn fidelity_pure(psi: &CVec, rho: &CMat) -> f64 {
    (psi.adjoint() * rho * psi)[(0, 0)].re
}
