//! Liouvillian assembly and time evolution, plus the closed-form
//! decoherence factors used as references.
//!
//! Density matrices are vectorised row-major, `vec(rho)[i*d + j] = rho[i, j]`,
//! so that `-i[H, .]` reads `-i(H (x) 1 - 1 (x) H^T)`.

use std::f64::consts::PI;

use crate::dissipation::LindbladChannel;
use crate::error::{Error, Result};
use crate::fock::{Operator, State, StateTolerances, Tensor};
use crate::linalg::{self, CMatrix, CVector, C64, I, ZERO};

/// Compressed-row sparse matrix.
#[derive(Debug, Clone)]
struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    fn mul_vec(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    fn inf_norm(&self) -> f64 {
        (0..self.n).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }
}

type SparseRows = Vec<Vec<(usize, C64)>>;

fn sparse_rows(m: &CMatrix) -> SparseRows {
    (0..m.nrows()).map(|i| (0..m.ncols()).filter(|&k| m[(i, k)] != ZERO).map(|k| (k, m[(i, k)])).collect()).collect()
}

/// Generator of `d rho/dt = -i[H, rho] + sum_c c (2 J rho J+ - {J+J, rho})`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dims: Vec<usize>,
    hamiltonian: CMatrix,
    /// `(coefficient, jump)` embedded in the full space.
    jumps: Vec<(f64, CMatrix)>,
    generator: Csr,
}

pub fn build_liouvillian(h: &Operator, channels: &[LindbladChannel]) -> Result<Liouvillian> {
    let d = h.dim();
    let mut jumps = Vec::with_capacity(channels.len());
    for ch in channels {
        let j = ch.jump();
        let embedded = if j.dim() == d {
            j.matrix().clone()
        } else if h.dims().last() == Some(&j.dim()) {
            let rest = Operator::identity(h.dims()[..h.dims().len() - 1].to_vec())?;
            rest.tensor(j).into_matrix()
        } else {
            return Err(Error::DimMismatch { expected: *h.dims().last().unwrap_or(&d), found: j.dim() });
        };
        jumps.push((ch.coefficient(), embedded));
    }
    Ok(Liouvillian::assemble(h.dims().to_vec(), h.matrix().clone(), jumps))
}

impl Liouvillian {
    fn assemble(dims: Vec<usize>, hamiltonian: CMatrix, jumps: Vec<(f64, CMatrix)>) -> Self {
        let d = hamiltonian.nrows();
        // rho' = K rho + rho K+ + sum 2c J rho J+, with K = -iH - sum c J+J
        let mut k = hamiltonian.map(|z| -I * z);
        for (c, j) in &jumps {
            k -= linalg::matmul(&j.adjoint(), j).scale(*c);
        }
        let k_rows = sparse_rows(&k);
        let jump_rows: Vec<(f64, SparseRows)> = jumps.iter().map(|(c, j)| (*c, sparse_rows(j))).collect();

        let n = d * d;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        let mut scratch: Vec<(usize, C64)> = Vec::new();
        for i in 0..d {
            for j in 0..d {
                scratch.clear();
                for &(kk, v) in &k_rows[i] {
                    scratch.push((kk * d + j, v));
                }
                for &(l, v) in &k_rows[j] {
                    scratch.push((i * d + l, v.conj()));
                }
                for (c, rows) in &jump_rows {
                    for &(kk, a) in &rows[i] {
                        for &(l, b) in &rows[j] {
                            scratch.push((kk * d + l, a * b.conj() * (2.0 * c)));
                        }
                    }
                }
                scratch.sort_by_key(|e| e.0);
                let mut last: Option<usize> = None;
                for &(col, v) in &scratch {
                    if last == Some(col) {
                        *vals.last_mut().expect("entry exists") += v;
                    } else {
                        cols.push(col);
                        vals.push(v);
                        last = Some(col);
                    }
                }
                row_ptr.push(cols.len());
            }
        }
        Self { dims, hamiltonian, jumps, generator: Csr { n, row_ptr, cols, vals } }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn is_unitary(&self) -> bool {
        self.jumps.iter().all(|(c, _)| *c == 0.0)
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    /// Number of stored generator entries.
    pub fn nnz(&self) -> usize {
        self.generator.vals.len()
    }

    /// Infinity norm of the generator.
    pub fn norm_inf(&self) -> f64 {
        self.generator.inf_norm()
    }

    /// Dense `d^2 x d^2` generator.
    pub fn dense_generator(&self) -> CMatrix {
        let n = self.generator.n;
        let mut m = CMatrix::zeros(n, n);
        for r in 0..n {
            for (c, v) in self.generator.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Apply the generator to an arbitrary (not necessarily Hermitian) matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.dim();
        let x = vectorize(rho);
        let mut y = vec![ZERO; d * d];
        self.generator.mul_vec(&x, &mut y);
        unvectorize(&y, d)
    }

    /// Invariant subspaces of the generator: connected components of its
    /// sparsity graph, each as a sorted list of vectorised indices.
    pub fn invariant_blocks(&self) -> Vec<Vec<usize>> {
        let n = self.generator.n;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for r in 0..n {
            for (c, _) in self.generator.row(r) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let root = find(&mut parent, x);
            if label[root] == usize::MAX {
                label[root] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[label[root]].push(x);
        }
        blocks
    }

    fn dense_block(&self, idx: &[usize], scale: f64) -> CMatrix {
        let mut local = std::collections::HashMap::with_capacity(idx.len());
        for (p, &g) in idx.iter().enumerate() {
            local.insert(g, p);
        }
        let mut m = CMatrix::zeros(idx.len(), idx.len());
        for (p, &g) in idx.iter().enumerate() {
            for (c, v) in self.generator.row(g) {
                m[(p, local[&c])] = v * scale;
            }
        }
        m
    }
}

fn vectorize(rho: &CMatrix) -> Vec<C64> {
    let d = rho.nrows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            v.push(rho[(i, j)]);
        }
    }
    v
}

fn unvectorize(v: &[C64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Exponentiate the generator on each of its invariant blocks
    /// (scaling and squaring).
    Exact,
    /// Classical fourth-order Runge-Kutta with a fixed step.
    Rk4 { dt: f64 },
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Exact => "exact".into(),
            Method::Rk4 { dt } => format!("rk4(dt={dt:e})"),
        }
    }
}

/// `min(1e-3/|chi|, 0.1/||L||_inf)`.
pub fn default_rk4_dt(l: &Liouvillian, chi: f64) -> f64 {
    let base = if chi != 0.0 { 1e-3 / chi.abs() } else { 1e-3 };
    let norm = l.norm_inf();
    if norm > 0.0 {
        base.min(0.1 / norm)
    } else {
        base
    }
}

// Largest |lambda dt| on the imaginary axis for which RK4 is stable.
const RK4_STABILITY: f64 = 2.8;
const RK4_TRACE_DRIFT: f64 = 1e-8;

#[derive(Debug, Clone)]
struct Block {
    idx: Vec<usize>,
    prop: CMatrix,
}

#[derive(Debug, Clone)]
enum Kernel {
    Unitary(CMatrix),
    Blocks(Vec<Block>),
    Rk4 { generator: Csr, dt: f64, steps: usize },
}

/// The evolution map over a fixed time step, reusable across initial states.
#[derive(Debug, Clone)]
pub struct Propagator {
    dims: Vec<usize>,
    dim: usize,
    step: f64,
    kernel: Kernel,
}

impl Propagator {
    pub fn new(l: &Liouvillian, step: f64, method: Method) -> Result<Self> {
        if !(step >= 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("evolution time must be finite and >= 0, got {step}")));
        }
        let d = l.dim();
        let kernel = match method {
            Method::Rk4 { dt } => {
                if !(dt > 0.0) {
                    return Err(Error::InvalidParameter(format!("RK4 step must be positive, got {dt}")));
                }
                if dt * l.norm_inf() > RK4_STABILITY {
                    return Err(Error::StepTooLarge { dt, drift: f64::INFINITY });
                }
                let steps = (step / dt).ceil().max(if step > 0.0 { 1.0 } else { 0.0 }) as usize;
                let dt = if steps > 0 { step / steps as f64 } else { dt };
                Kernel::Rk4 { generator: l.generator.clone(), dt, steps }
            }
            Method::Exact if l.is_unitary() => {
                let u = match crate::fock::Operator::new(l.dims.clone(), l.hamiltonian.clone())?.real_diagonal() {
                    Some(diag) => CMatrix::from_diagonal(&CVector::from_iterator(
                        d,
                        diag.iter().map(|e| C64::from_polar(1.0, -e * step)),
                    )),
                    None => linalg::expm(&l.hamiltonian.map(|z| -I * z * step)),
                };
                Kernel::Unitary(u)
            }
            Method::Exact => {
                let blocks = l
                    .invariant_blocks()
                    .into_iter()
                    .map(|idx| {
                        let gen = l.dense_block(&idx, step);
                        let prop = linalg::expm(&gen);
                        Block { idx, prop }
                    })
                    .collect();
                Kernel::Blocks(blocks)
            }
        };
        Ok(Self { dims: l.dims.clone(), dim: d, step, kernel })
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    /// Evolve a state over one step. Pure states stay vectors under unitary
    /// dynamics and become density matrices otherwise.
    pub fn apply(&self, state: &State) -> Result<State> {
        if state.dims() != self.dims.as_slice() {
            return Err(Error::DimMismatch { expected: self.dim, found: state.dim() });
        }
        if let (Kernel::Unitary(u), Some(psi)) = (&self.kernel, state.vector()) {
            let out = u * psi;
            return State::pure(self.dims.clone(), out);
        }
        let rho = self.apply_matrix(&state.density_matrix())?;
        State::mixed_unchecked(self.dims.clone(), rho)
    }

    /// Evolve an arbitrary operator; no state invariants are assumed or
    /// enforced, so non-Hermitian cross terms `|a><b|` may be propagated.
    pub fn apply_matrix(&self, rho: &CMatrix) -> Result<CMatrix> {
        let d = self.dim;
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimMismatch { expected: d, found: rho.nrows() });
        }
        match &self.kernel {
            Kernel::Unitary(u) => Ok(linalg::matmul(&linalg::matmul(u, rho), &u.adjoint())),
            Kernel::Blocks(blocks) => {
                let x = vectorize(rho);
                let mut y = vec![ZERO; d * d];
                for b in blocks {
                    let local = CVector::from_iterator(b.idx.len(), b.idx.iter().map(|&g| x[g]));
                    let out = &b.prop * local;
                    for (p, &g) in b.idx.iter().enumerate() {
                        y[g] = out[p];
                    }
                }
                Ok(unvectorize(&y, d))
            }
            Kernel::Rk4 { generator, dt, steps } => {
                let mut x = vectorize(rho);
                let trace0 = linalg::trace(rho);
                let n = x.len();
                let (mut k1, mut k2, mut k3, mut k4) = (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
                let mut tmp = vec![ZERO; n];
                let h = *dt;
                for _ in 0..*steps {
                    generator.mul_vec(&x, &mut k1);
                    for i in 0..n {
                        tmp[i] = x[i] + k1[i] * (h / 2.0);
                    }
                    generator.mul_vec(&tmp, &mut k2);
                    for i in 0..n {
                        tmp[i] = x[i] + k2[i] * (h / 2.0);
                    }
                    generator.mul_vec(&tmp, &mut k3);
                    for i in 0..n {
                        tmp[i] = x[i] + k3[i] * h;
                    }
                    generator.mul_vec(&tmp, &mut k4);
                    for i in 0..n {
                        x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
                    }
                }
                let out = unvectorize(&x, d);
                let drift = (linalg::trace(&out) - trace0).norm();
                if drift > RK4_TRACE_DRIFT {
                    return Err(Error::StepTooLarge { dt: h, drift });
                }
                Ok(out)
            }
        }
    }
}

/// Evolve `state` to time `t`.
pub fn evolve(state: &State, l: &Liouvillian, t: f64, method: Method) -> Result<State> {
    Propagator::new(l, t, method)?.apply(state)
}

/// Evolve an arbitrary operator (for instance a coherent cross term) to time `t`.
pub fn evolve_matrix(rho: &CMatrix, l: &Liouvillian, t: f64, method: Method) -> Result<CMatrix> {
    Propagator::new(l, t, method)?.apply_matrix(rho)
}

/// Worst invariant violations seen along a sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantLog {
    /// Evolutions merged into this log.
    pub runs: usize,
    /// Fewest checkpoints taken by any single evolution.
    pub min_run_samples: usize,
    pub samples: usize,
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub positivity_ok: bool,
}

impl InvariantLog {
    pub fn merge(&mut self, other: &InvariantLog) {
        if self.runs == 0 {
            *self = *other;
            return;
        }
        if other.runs == 0 {
            return;
        }
        self.runs += other.runs;
        self.min_run_samples = self.min_run_samples.min(other.min_run_samples);
        self.samples += other.samples;
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.positivity_ok &= other.positivity_ok;
    }

    pub fn passes(&self, tol: &StateTolerances) -> bool {
        self.runs > 0
            && self.max_trace_error <= tol.trace
            && self.max_hermiticity_error <= tol.hermiticity
            && self.positivity_ok
    }
}

/// Evolve to `t` in `samples` equal steps, checking the state invariants at
/// every sample. A violation aborts with [`Error::InvalidState`].
pub fn evolve_checked(
    state: &State,
    l: &Liouvillian,
    t: f64,
    samples: usize,
    method: Method,
    tol: &StateTolerances,
) -> Result<(State, InvariantLog)> {
    let samples = samples.max(1);
    let prop = Propagator::new(l, t / samples as f64, method)?;
    evolve_with(&prop, state, samples, tol)
}

/// Apply `prop` `samples` times, checking invariants after each application.
pub fn evolve_with(
    prop: &Propagator,
    state: &State,
    samples: usize,
    tol: &StateTolerances,
) -> Result<(State, InvariantLog)> {
    let mut log = InvariantLog {
        runs: 1,
        min_run_samples: samples,
        samples: 0,
        max_trace_error: 0.0,
        max_hermiticity_error: 0.0,
        positivity_ok: true,
    };
    let mut current = state.clone();
    for _ in 0..samples {
        current = prop.apply(&current)?;
        current.check(tol)?;
        log.samples += 1;
        log.max_trace_error = log.max_trace_error.max((current.trace() - linalg::ONE).norm());
        log.max_hermiticity_error = log.max_hermiticity_error.max(current.hermiticity_error());
    }
    Ok((current, log))
}

/// Coefficient `exp(-|a|^2 (1 - e^{i theta}) (1 - e^{-Gamma t}))` of the
/// rotated cross term. Starting from `|a e^{i theta}><a|` under amplitude
/// damping with `a -> a e^{-Gamma t/2}`, the state is this coefficient times
/// `|a e^{i theta - Gamma t/2}><a e^{-Gamma t/2}|`; the mirrored term
/// `|a><a e^{i theta}|` carries the complex conjugate.
pub fn analytic_cross_coefficient(alpha: C64, theta: f64, gamma: f64, t: f64) -> C64 {
    let a2 = alpha.norm_sqr();
    let rot = linalg::ONE - C64::from_polar(1.0, theta);
    (-(rot * a2 * (1.0 - (-gamma * t).exp()))).exp()
}

/// A cross term together with its closed-form coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticCrossTerm {
    pub alpha: C64,
    pub theta: f64,
    pub gamma: f64,
    pub t: f64,
    pub coefficient: C64,
}

impl AnalyticCrossTerm {
    pub fn new(alpha: C64, theta: f64, gamma: f64, t: f64) -> Self {
        Self { alpha, theta, gamma, t, coefficient: analytic_cross_coefficient(alpha, theta, gamma, t) }
    }
}

/// `2 pi Gamma |a|^2 / chi`: the instantaneous rate `Gamma D(t)^2` with
/// `D = 2|a| sin(chi t)` integrated over one probe period `pi/chi`.
pub fn analytic_gamma_bar(alpha_sq: f64, gamma: f64, chi: f64) -> Result<f64> {
    if chi == 0.0 {
        return Err(Error::ZeroChi);
    }
    Ok(2.0 * PI * gamma * alpha_sq / chi.abs())
}

/// `1 / (1 + 2 pi Gamma nbar / chi)`: `e^{-2 pi Gamma |a|^2/chi}` averaged
/// over the thermal Glauber-Sudarshan weight `exp(-|a|^2/nbar)/(pi nbar)`.
pub fn analytic_thermal_visibility(nbar: f64, gamma: f64, chi: f64) -> Result<f64> {
    if chi == 0.0 {
        return Err(Error::ZeroChi);
    }
    if !(nbar >= 0.0) {
        return Err(Error::InvalidOscState(format!("thermal occupation must be >= 0, got {nbar}")));
    }
    Ok(1.0 / (1.0 + 2.0 * PI * gamma * nbar / chi.abs()))
}

/// Heuristic thermal-bath decoherence rate `2 Gamma (nbar + 1/2) D^2`.
pub fn heuristic_rate(gamma: f64, nbar: f64, distance: f64) -> f64 {
    2.0 * gamma * (nbar + 0.5) * distance * distance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::{make_channel, ChannelKind};
    use crate::fock::{self, qubit, FockCutoff};
    use crate::model::{build_hamiltonian, ModelParams};
    use nalgebra::Schur;

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    fn random_density(n: usize, seed: u64) -> CMatrix {
        let a = random_matrix(n, seed);
        let p = linalg::matmul(&a, &a.adjoint());
        let tr = linalg::trace(&p);
        p.map(|z| z / tr)
    }

    #[test]
    fn vectorised_action_matches_direct_formula() {
        let c = FockCutoff::with_n_max(4).unwrap();
        let h = build_hamiltonian(&ModelParams { omega0: 0.3, omega: 0.7, kappa: 0.1, chi: 1.0 }, c);
        let ch = make_channel(ChannelKind::OneBody, 0.2, c).unwrap();
        let l = build_liouvillian(&h, std::slice::from_ref(&ch)).unwrap();
        let j = qubit::identity().tensor(ch.jump()).into_matrix();
        let jd = j.adjoint();
        let jdj = &jd * &j;
        let hm = h.matrix();
        for seed in 0..5 {
            let rho = random_matrix(10, seed);
            let direct = (hm * &rho - &rho * hm).map(|z| -I * z)
                + ((&j * &rho * &jd).scale(2.0) - &jdj * &rho - &rho * &jdj).scale(0.2);
            assert!(linalg::frobenius(&(l.apply(&rho) - &direct)) < 1e-12);
            // dense generator agrees with the sparse one
            let v = CVector::from_vec(vectorize(&rho));
            let dense = l.dense_generator() * v;
            assert!(linalg::frobenius(&(unvectorize(dense.as_slice(), 10) - &direct)) < 1e-12);
        }
    }

    #[test]
    fn generator_preserves_hermiticity_and_trace() {
        let c = FockCutoff::with_n_max(5).unwrap();
        let h = build_hamiltonian(&ModelParams { omega0: 0.1, omega: 0.4, kappa: 0.05, chi: 1.0 }, c);
        let chans = [
            make_channel(ChannelKind::OneBody, 0.1, c).unwrap(),
            make_channel(ChannelKind::ThreeBody, 0.3, c).unwrap(),
            make_channel(ChannelKind::Dephasing, 0.05, c).unwrap(),
        ];
        let l = build_liouvillian(&h, &chans).unwrap();
        for seed in 0..5 {
            let rho = linalg::hermitian_part(&random_matrix(12, seed));
            let out = l.apply(&rho);
            assert!(linalg::hermiticity_error(&out) < 1e-12);
            assert!(linalg::trace(&out).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_generator_has_imaginary_spectrum() {
        // non-diagonal Hermitian H so the check is not structural
        let h = Operator::new(vec![4], linalg::hermitian_part(&random_matrix(4, 42))).unwrap();
        let l = build_liouvillian(&h, &[]).unwrap();
        let schur = Schur::new(l.dense_generator());
        let (_, t) = schur.unpack();
        for i in 0..16 {
            assert!(t[(i, i)].re.abs() < 1e-12);
        }
    }

    #[test]
    fn pure_damping_relaxes_to_vacuum() {
        let c = FockCutoff::with_n_max(4).unwrap();
        let h = Operator::new(vec![5], CMatrix::zeros(5, 5)).unwrap();
        let l = build_liouvillian(&h, &[make_channel(ChannelKind::OneBody, 0.3, c).unwrap()]).unwrap();
        let schur = Schur::new(l.dense_generator());
        let (_, t) = schur.unpack();
        let max_re = (0..25).map(|i| t[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
        assert!(max_re.abs() < 1e-12);
        let zeros = (0..25).filter(|&i| t[(i, i)].norm() < 1e-10).count();
        assert_eq!(zeros, 1);
        // the vacuum is stationary
        let mut vac = CMatrix::zeros(5, 5);
        vac[(0, 0)] = linalg::ONE;
        assert_eq!(linalg::frobenius(&l.apply(&vac)), 0.0);
    }

    #[test]
    fn invariant_blocks_cover_space() {
        let c = FockCutoff::with_n_max(6).unwrap();
        let h = build_hamiltonian(&ModelParams::unit_coupling(), c);
        let l = build_liouvillian(&h, &[make_channel(ChannelKind::OneBody, 0.1, c).unwrap()]).unwrap();
        let blocks = l.invariant_blocks();
        let total: usize = blocks.iter().map(Vec::len).sum();
        assert_eq!(total, 14 * 14);
        // four qubit blocks times 13 Fock offsets
        assert_eq!(blocks.len(), 4 * 13);
    }

    #[test]
    fn zero_time_is_identity() {
        let c = FockCutoff::with_n_max(5).unwrap();
        let h = build_hamiltonian(&ModelParams::unit_coupling(), c);
        let l = build_liouvillian(&h, &[make_channel(ChannelKind::OneBody, 0.1, c).unwrap()]).unwrap();
        let rho = random_density(12, 7);
        let s = State::mixed(vec![2, 6], rho.clone()).unwrap();
        for m in [Method::Exact, Method::Rk4 { dt: 1e-3 }] {
            let out = evolve(&s, &l, 0.0, m).unwrap();
            assert!(linalg::frobenius(&(&*out.density_matrix() - &rho)) < 1e-15);
        }
    }

    #[test]
    fn closed_evolution_preserves_purity() {
        let c = FockCutoff::with_n_max(20).unwrap();
        let h = build_hamiltonian(&ModelParams { omega0: 0.2, omega: 0.5, kappa: 0.03, chi: 1.0 }, c);
        let l = build_liouvillian(&h, &[]).unwrap();
        let psi = qubit::equatorial(0.4).tensor(&fock::coherent_state(C64::new(1.5, 0.5), c).unwrap());
        let mixed = State::mixed(vec![2, 21], psi.density_matrix().into_owned()).unwrap();
        for s in [&psi, &mixed] {
            let out = evolve(s, &l, 2.3, Method::Exact).unwrap();
            assert!((out.purity() - 1.0).abs() < 1e-10);
        }
        let rk = evolve(&mixed, &l, 0.5, Method::Rk4 { dt: 1e-3 }).unwrap();
        assert!((rk.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn one_body_mean_number_decays_at_twice_the_rate() {
        let gamma = 0.05;
        let c = FockCutoff::with_n_max(30).unwrap();
        let h = Operator::new(vec![31], CMatrix::zeros(31, 31)).unwrap();
        let l = build_liouvillian(&h, &[make_channel(ChannelKind::OneBody, gamma, c).unwrap()]).unwrap();
        let s = fock::coherent_state(C64::new(2.0, 0.0), c).unwrap();
        let n = fock::number(c);
        for t in [0.5, 2.0, 5.0] {
            let out = evolve(&s, &l, t, Method::Exact).unwrap();
            let expected = 4.0 * (-2.0 * gamma * t).exp();
            assert!((out.expectation(&n).re - expected).abs() < 1e-9);
            // amplitude damping maps |a> to |a e^{-Gamma t}>
            let target = fock::coherent_state(C64::new(2.0 * (-gamma * t).exp(), 0.0), c).unwrap();
            assert!(fock::fidelity(&out, &target).unwrap() > 1.0 - 1e-6);
        }
    }

    #[test]
    fn dephasing_conserves_populations() {
        let c = FockCutoff::with_n_max(25).unwrap();
        let h = build_hamiltonian(&ModelParams::unit_coupling(), c);
        let l = build_liouvillian(&h, &[make_channel(ChannelKind::Dephasing, 0.05, c).unwrap()]).unwrap();
        let s = qubit::equatorial(0.0).tensor(&fock::coherent_state(C64::new(2.0, 0.0), c).unwrap());
        let out = evolve(&s, &l, 3.0, Method::Exact).unwrap();
        let before = s.density_matrix();
        let after = out.density_matrix();
        for i in 0..52 {
            assert!((before[(i, i)] - after[(i, i)]).norm() < 1e-12);
        }
    }

    #[test]
    fn rk4_rejects_unstable_step() {
        let c = FockCutoff::with_n_max(10).unwrap();
        let h = build_hamiltonian(&ModelParams { omega0: 0.0, omega: 10.0, kappa: 0.0, chi: 1.0 }, c);
        let l = build_liouvillian(&h, &[]).unwrap();
        let s = State::basis(vec![2, 11], 0).unwrap();
        assert!(matches!(evolve(&s, &l, 1.0, Method::Rk4 { dt: 0.5 }), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn build_rejects_mismatched_channel() {
        let h = build_hamiltonian(&ModelParams::unit_coupling(), FockCutoff::with_n_max(4).unwrap());
        let ch = make_channel(ChannelKind::OneBody, 0.1, FockCutoff::with_n_max(6).unwrap()).unwrap();
        assert!(matches!(build_liouvillian(&h, &[ch]), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn cross_coefficient_examples() {
        let a = C64::new(2.0, 0.0);
        assert_eq!(analytic_cross_coefficient(a, 0.0, 0.3, 1.0), linalg::ONE);
        assert_eq!(analytic_cross_coefficient(a, 1.2, 0.0, 1.0), linalg::ONE);
        let c = analytic_cross_coefficient(a, PI, 0.1, 1.0);
        let exponent = -4.0 * 2.0 * (1.0 - (-0.1f64).exp());
        assert!((exponent + 0.7613).abs() < 1e-4);
        assert!((c.re - exponent.exp()).abs() < 1e-14);
        assert!((c.re - 0.4670).abs() < 1e-4);
        assert!(c.im.abs() < 1e-15);
        let t = AnalyticCrossTerm::new(a, 0.7, 0.2, 0.5);
        assert!(t.coefficient.norm() <= 1.0);
    }

    #[test]
    fn short_time_limit() {
        for &a2 in &[1.0f64, 4.0, 9.0] {
            for &theta in &[0.3, 1.5, PI] {
                for &gt in &[1e-4, 1e-3, 1e-2] {
                    let exact = analytic_cross_coefficient(C64::new(a2.sqrt(), 0.0), theta, gt, 1.0);
                    let rot = linalg::ONE - C64::from_polar(1.0, theta);
                    let approx = (-(rot * a2 * gt)).exp();
                    assert!((exact - approx).norm() <= 1e-3 * a2);
                }
            }
        }
    }

    #[test]
    fn gamma_bar_examples() {
        assert_eq!(analytic_gamma_bar(9.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(analytic_gamma_bar(0.0, 0.005, 1.0).unwrap(), 0.0);
        assert_eq!(analytic_gamma_bar(9.0, 0.005, 0.0), Err(Error::ZeroChi));
        let g = analytic_gamma_bar(9.0, 0.005, 1.0).unwrap();
        assert!((g - 0.09 * PI).abs() < 1e-15);
        assert!((g - 0.28274).abs() < 1e-5);
        // independent route: Simpson integration of Gamma D(t)^2 over [0, pi/chi]
        let (gamma, chi, alpha) = (0.005, 1.0, 3.0);
        let n = 2000;
        let h = PI / chi / n as f64;
        let f = |t: f64| gamma * (2.0 * alpha * (chi * t).sin()).powi(2);
        let mut s = f(0.0) + f(PI / chi);
        for k in 1..n {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        assert!((s * h / 3.0 - g).abs() < 1e-12);
    }

    #[test]
    fn thermal_visibility_examples() {
        assert_eq!(analytic_thermal_visibility(0.0, 0.01, 1.0).unwrap(), 1.0);
        assert_eq!(analytic_thermal_visibility(3.0, 0.0, 1.0).unwrap(), 1.0);
        let v = analytic_thermal_visibility(4.0, 0.01, 1.0).unwrap();
        assert!((v - 1.0 / (1.0 + 0.08 * PI)).abs() < 1e-15);
        assert!((v - 0.7992).abs() < 1e-4);
        // brute-force 2-D quadrature of p(a) e^{-2 pi Gamma |a|^2/chi} on a polar grid
        let (nbar, c) = (4.0f64, 2.0 * PI * 0.01);
        let (nr, rmax) = (20000, 12.0 * nbar.sqrt());
        let dr = rmax / nr as f64;
        let mut acc = 0.0;
        for k in 0..nr {
            let r = (k as f64 + 0.5) * dr;
            // angular integral contributes 2 pi
            acc += 2.0 * PI * r * dr * (-r * r / nbar).exp() / (PI * nbar) * (-c * r * r).exp();
        }
        assert!((acc - v).abs() < 1e-6);
        assert_eq!(analytic_thermal_visibility(1.0, 0.1, 0.0), Err(Error::ZeroChi));
    }

    #[test]
    fn heuristic_rate_formula() {
        assert!((heuristic_rate(0.01, 0.0, 2.0) - 0.04).abs() < 1e-15);
        assert!((heuristic_rate(0.01, 1.5, 2.0) - 0.16).abs() < 1e-15);
    }
}
