//! Truncated Fock spaces, composite operators and density matrices.
//!
//! Composite spaces are ordered qubit first: index `q * m + n` for qubit
//! level `q` (0 = `|e>`, 1 = `|g>`) and oscillator level `n`.

use std::borrow::Cow;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Highest retained Fock level plus the tail mass allowed above it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockCutoff {
    n_max: usize,
    tail_tol: f64,
}

impl FockCutoff {
    pub fn new(n_max: usize, tail_tol: f64) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidCutoff(format!("n_max must be >= 1, got {n_max}")));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::InvalidCutoff(format!("tail_tol must lie in (0, 1), got {tail_tol}")));
        }
        Ok(Self { n_max, tail_tol })
    }

    pub fn with_n_max(n_max: usize) -> Result<Self> {
        Self::new(n_max, DEFAULT_TAIL_TOL)
    }

    /// `ceil(|a|^2 + 6 sqrt(|a|^2 + 1)) + 10`, raised further if needed so
    /// that the Poisson tail stays within the default tolerance (the rule
    /// alone falls short for `|a|^2` above roughly 14).
    pub fn for_coherent(alpha_sq: f64) -> Self {
        let mut n_max = (alpha_sq + 6.0 * (alpha_sq + 1.0).sqrt()).ceil() as usize + 10;
        while poisson_tail(alpha_sq, n_max + 1) > DEFAULT_TAIL_TOL {
            n_max += 1;
        }
        Self { n_max, tail_tol: DEFAULT_TAIL_TOL }
    }

    /// Smallest cutoff whose geometric tail `(nbar/(1+nbar))^(n_max+1)` is
    /// at most `tail_tol`.
    pub fn for_thermal(nbar: f64, tail_tol: f64) -> Result<Self> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::InvalidOscState(format!("thermal occupation must be finite and >= 0, got {nbar}")));
        }
        let n_max = if nbar == 0.0 {
            1
        } else {
            let ratio = nbar / (1.0 + nbar);
            let levels = (tail_tol.ln() / ratio.ln()).ceil() as usize;
            levels.saturating_sub(1).max(1)
        };
        Self::new(n_max, tail_tol)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// Dense operator on a composite space with declared subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let total = total_dim(&dims)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimMismatch { expected: total, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { dims, matrix })
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let n = total_dim(&dims)?;
        Ok(Self { dims, matrix: CMatrix::identity(n, n) })
    }

    pub fn from_diagonal(dims: Vec<usize>, diag: &[f64]) -> Result<Self> {
        let diag = CVector::from_iterator(diag.len(), diag.iter().map(|&d| C64::new(d, 0.0)));
        Self::new(dims, CMatrix::from_diagonal(&diag))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { dims: self.dims.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { dims: self.dims.clone(), matrix: self.matrix.scale(factor) }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self { dims: self.dims.clone(), matrix: CMatrix::identity(self.dim(), self.dim()) };
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::hermiticity_error(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Real diagonal if every off-diagonal entry is exactly zero.
    pub fn real_diagonal(&self) -> Option<Vec<f64>> {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                if i != j && self.matrix[(i, j)] != ZERO {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.matrix[(i, i)].re).collect())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.matrix).0
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "operator product across different spaces");
        Operator { dims: self.dims.clone(), matrix: linalg::matmul(&self.matrix, &rhs.matrix) }
    }
}

impl Add<&Operator> for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "operator sum across different spaces");
        Operator { dims: self.dims.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub<&Operator> for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dims, rhs.dims, "operator difference across different spaces");
        Operator { dims: self.dims.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

fn total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::BadDims(format!("subsystem dimensions must be nonempty and positive: {dims:?}")));
    }
    Ok(dims.iter().product())
}

/// Tolerances applied when validating a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    pub positivity: f64,
}

impl StateTolerances {
    /// Checks applied when a state is constructed.
    pub const CONSTRUCTION: Self = Self { trace: 1e-10, hermiticity: 1e-12, positivity: 1e-8 };
    /// Checks applied along a propagated trajectory.
    pub const EVOLUTION: Self = Self { trace: 1e-8, hermiticity: 1e-10, positivity: 1e-8 };
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(CVector),
    Mixed(CMatrix),
}

/// A normalised quantum state. Pure states are kept as vectors until a
/// dissipative evolution forces a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    dims: Vec<usize>,
    repr: Repr,
}

impl State {
    pub fn pure(dims: Vec<usize>, psi: CVector) -> Result<Self> {
        let n = total_dim(&dims)?;
        if psi.len() != n {
            return Err(Error::DimMismatch { expected: n, found: psi.len() });
        }
        let norm = psi.norm();
        if (norm * norm - 1.0).abs() > StateTolerances::CONSTRUCTION.trace {
            return Err(Error::InvalidState(format!("vector norm^2 {} differs from 1", norm * norm)));
        }
        Ok(Self { dims, repr: Repr::Pure(psi) })
    }

    pub fn mixed(dims: Vec<usize>, rho: CMatrix) -> Result<Self> {
        let state = Self::mixed_unchecked(dims, rho)?;
        state.check(&StateTolerances::CONSTRUCTION)?;
        Ok(state)
    }

    /// Dimension checks only; trace, Hermiticity and positivity are left to
    /// the caller (see [`State::check`]).
    pub fn mixed_unchecked(dims: Vec<usize>, rho: CMatrix) -> Result<Self> {
        let n = total_dim(&dims)?;
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimMismatch { expected: n, found: rho.nrows().max(rho.ncols()) });
        }
        Ok(Self { dims, repr: Repr::Mixed(rho) })
    }

    /// `|k><k|` in a space of the given dimensions.
    pub fn basis(dims: Vec<usize>, k: usize) -> Result<Self> {
        let n = total_dim(&dims)?;
        if k >= n {
            return Err(Error::DimMismatch { expected: n, found: k + 1 });
        }
        let mut psi = CVector::zeros(n);
        psi[k] = ONE;
        Ok(Self { dims, repr: Repr::Pure(psi) })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_pure_vector(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn vector(&self) -> Option<&CVector> {
        match &self.repr {
            Repr::Pure(psi) => Some(psi),
            Repr::Mixed(_) => None,
        }
    }

    pub fn density_matrix(&self) -> Cow<'_, CMatrix> {
        match &self.repr {
            Repr::Pure(psi) => Cow::Owned(psi * psi.adjoint()),
            Repr::Mixed(rho) => Cow::Borrowed(rho),
        }
    }

    pub fn into_density_matrix(self) -> CMatrix {
        match self.repr {
            Repr::Pure(psi) => &psi * psi.adjoint(),
            Repr::Mixed(rho) => rho,
        }
    }

    pub fn trace(&self) -> C64 {
        match &self.repr {
            Repr::Pure(psi) => C64::new(psi.norm_squared(), 0.0),
            Repr::Mixed(rho) => linalg::trace(rho),
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(psi) => psi.norm_squared().powi(2),
            // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
            Repr::Mixed(rho) => rho.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        assert_eq!(op.dim(), self.dim(), "expectation: dimension mismatch");
        match &self.repr {
            Repr::Pure(psi) => psi.dotc(&(op.matrix() * psi)),
            Repr::Mixed(rho) => {
                let m = op.matrix();
                let n = self.dim();
                let mut acc = ZERO;
                for i in 0..n {
                    for k in 0..n {
                        acc += m[(i, k)] * rho[(k, i)];
                    }
                }
                acc
            }
        }
    }

    pub fn hermiticity_error(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 0.0,
            Repr::Mixed(rho) => linalg::hermiticity_error(rho),
        }
    }

    /// Validate trace, Hermiticity and positivity.
    pub fn check(&self, tol: &StateTolerances) -> Result<()> {
        let tr = self.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} deviates from 1 by more than {:e}", tol.trace)));
        }
        if let Repr::Mixed(rho) = &self.repr {
            let herm = linalg::hermiticity_error(rho);
            if herm > tol.hermiticity {
                return Err(Error::InvalidState(format!("Hermiticity error {herm:.3e} above {:e}", tol.hermiticity)));
            }
            if !linalg::is_psd_within(rho, tol.positivity) {
                let min = linalg::min_eigenvalue(rho);
                return Err(Error::InvalidState(format!("minimum eigenvalue {min:.3e} below -{:e}", tol.positivity)));
            }
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 0.0,
            Repr::Mixed(rho) => linalg::min_eigenvalue(rho),
        }
    }

    pub fn tensor(&self, other: &State) -> State {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Pure(a), Repr::Pure(b)) => {
                let n = b.len();
                Repr::Pure(CVector::from_fn(a.len() * n, |i, _| a[i / n] * b[i % n]))
            }
            _ => Repr::Mixed(linalg::kron(&self.density_matrix(), &other.density_matrix())),
        };
        State { dims, repr }
    }

    /// Convex combination of states on the same space.
    pub fn mixture(parts: &[(f64, State)]) -> Result<State> {
        let first = parts.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let dims = first.1.dims.clone();
        let n = first.1.dim();
        let mut rho = CMatrix::zeros(n, n);
        for (w, s) in parts {
            if s.dims != dims {
                return Err(Error::BadDims(format!("mixture of {:?} and {:?}", dims, s.dims)));
            }
            rho += s.density_matrix().scale(*w);
        }
        State::mixed(dims, rho)
    }
}

/// Kronecker composition of operators or states.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Operator { dims, matrix: linalg::kron(&self.matrix, &other.matrix) }
    }
}

impl Tensor for State {
    fn tensor(&self, other: &Self) -> Self {
        State::tensor(self, other)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Lowering operator with `sqrt(n)` on the first superdiagonal.
pub fn annihilator(cutoff: FockCutoff) -> Operator {
    let d = cutoff.dim();
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator { dims: vec![d], matrix: m }
}

pub fn creator(cutoff: FockCutoff) -> Operator {
    annihilator(cutoff).adjoint()
}

pub fn number(cutoff: FockCutoff) -> Operator {
    let diag: Vec<f64> = (0..cutoff.dim()).map(|n| n as f64).collect();
    Operator::from_diagonal(vec![cutoff.dim()], &diag).expect("cutoff dimension is positive")
}

/// Qubit operators in the `(|e>, |g>)` basis, so `sigma_z = diag(1, -1)`.
pub mod qubit {
    use super::*;

    pub const EXCITED: usize = 0;
    pub const GROUND: usize = 1;

    fn op(entries: [[C64; 2]; 2]) -> Operator {
        Operator { dims: vec![2], matrix: CMatrix::from_fn(2, 2, |i, j| entries[i][j]) }
    }

    pub fn sigma_z() -> Operator {
        op([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn sigma_x() -> Operator {
        op([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> Operator {
        op([[ZERO, -linalg::I], [linalg::I, ZERO]])
    }

    /// `|e><g|`
    pub fn sigma_plus() -> Operator {
        op([[ZERO, ONE], [ZERO, ZERO]])
    }

    /// `|g><e|`
    pub fn sigma_minus() -> Operator {
        op([[ZERO, ZERO], [ONE, ZERO]])
    }

    pub fn identity() -> Operator {
        op([[ONE, ZERO], [ZERO, ONE]])
    }

    /// `(|g> + e^{i delta}|e>)/sqrt 2`
    pub fn equatorial(delta: f64) -> State {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = CVector::zeros(2);
        psi[EXCITED] = C64::from_polar(s, delta);
        psi[GROUND] = C64::new(s, 0.0);
        State::pure(vec![2], psi).expect("normalised by construction")
    }
}

/// Poisson mass `sum_{n >= dim} e^{-mean} mean^n / n!`.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    coherent_amplitudes(C64::new(mean.sqrt(), 0.0), dim).1
}

/// Unnormalised truncated amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)` together
/// with the Poisson mass lying above the cutoff.
fn coherent_amplitudes(alpha: C64, dim: usize) -> (CVector, f64) {
    let mean = alpha.norm_sqr();
    let mut amp = C64::new((-mean / 2.0).exp(), 0.0);
    let mut psi = CVector::zeros(dim);
    for n in 0..dim {
        if n > 0 {
            amp *= alpha / (n as f64).sqrt();
        }
        psi[n] = amp;
    }
    // Poisson tail: keep summing p(n) beyond the cutoff until the terms are
    // negligible (they decrease geometrically once n > mean).
    let mut p = amp.norm_sqr();
    let mut tail = 0.0;
    let mut n = dim;
    loop {
        p *= mean / n as f64;
        tail += p;
        if (n as f64 > mean && p < tail * 1e-17) || p == 0.0 || n > dim + 100_000 {
            break;
        }
        n += 1;
    }
    (psi, tail)
}

/// Normalised truncated coherent state `|alpha>`.
pub fn coherent_state(alpha: C64, cutoff: FockCutoff) -> Result<State> {
    let (psi, tail) = coherent_amplitudes(alpha, cutoff.dim());
    if tail > cutoff.tail_tol {
        return Err(Error::CutoffTooSmall { n_max: cutoff.n_max, tail, tol: cutoff.tail_tol });
    }
    let norm = psi.norm();
    State::pure(vec![cutoff.dim()], psi.unscale(norm))
}

/// Bose-Einstein diagonal state `p(n) = nbar^n / (1+nbar)^(n+1)`,
/// renormalised after truncation.
pub fn thermal_state(nbar: f64, cutoff: FockCutoff) -> Result<State> {
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::InvalidOscState(format!("thermal occupation must be finite and >= 0, got {nbar}")));
    }
    let d = cutoff.dim();
    if nbar == 0.0 {
        return State::basis(vec![d], 0);
    }
    let ratio = nbar / (1.0 + nbar);
    let tail = ratio.powi(d as i32);
    if tail > cutoff.tail_tol {
        return Err(Error::CutoffTooSmall { n_max: cutoff.n_max, tail, tol: cutoff.tail_tol });
    }
    let weights: Vec<f64> = (0..d).map(|n| ratio.powi(n as i32) / (1.0 + nbar)).collect();
    let total: f64 = weights.iter().sum();
    let diag: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let rho = CMatrix::from_diagonal(&CVector::from_iterator(d, diag.iter().map(|&p| C64::new(p, 0.0))));
    State::mixed(vec![d], rho)
}

/// Initial oscillator state of a probe run.
#[derive(Debug, Clone, PartialEq)]
pub enum OscState {
    Coherent(C64),
    Thermal(f64),
    /// `(weight, alpha)` pairs; weights nonnegative and summing to one.
    Mixture(Vec<(f64, C64)>),
}

impl OscState {
    pub fn validate(&self) -> Result<()> {
        match self {
            OscState::Coherent(alpha) if !(alpha.re.is_finite() && alpha.im.is_finite()) => {
                Err(Error::InvalidOscState(format!("non-finite amplitude {alpha}")))
            }
            OscState::Coherent(_) => Ok(()),
            OscState::Thermal(nbar) if !(nbar.is_finite() && *nbar >= 0.0) => {
                Err(Error::InvalidOscState(format!("thermal occupation must be finite and >= 0, got {nbar}")))
            }
            OscState::Thermal(_) => Ok(()),
            OscState::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidOscState("mixture has no components".into()));
                }
                if let Some((w, _)) = parts.iter().find(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::InvalidOscState(format!("mixture weight {w} is negative or non-finite")));
                }
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidOscState(format!("mixture weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    pub fn mean_occupation(&self) -> f64 {
        match self {
            OscState::Coherent(alpha) => alpha.norm_sqr(),
            OscState::Thermal(nbar) => *nbar,
            OscState::Mixture(parts) => parts.iter().map(|(w, a)| w * a.norm_sqr()).sum(),
        }
    }

    /// Default cutoff from the truncation rules.
    pub fn default_cutoff(&self) -> Result<FockCutoff> {
        self.validate()?;
        Ok(match self {
            OscState::Coherent(alpha) => FockCutoff::for_coherent(alpha.norm_sqr()),
            OscState::Thermal(nbar) => FockCutoff::for_thermal(*nbar, DEFAULT_TAIL_TOL)?,
            OscState::Mixture(parts) => {
                let worst = parts.iter().map(|(_, a)| a.norm_sqr()).fold(0.0, f64::max);
                FockCutoff::for_coherent(worst)
            }
        })
    }

    pub fn realize(&self, cutoff: FockCutoff) -> Result<State> {
        self.validate()?;
        let check_coherent = |alpha: &C64| -> Result<()> {
            let a2 = alpha.norm_sqr();
            let needed = a2 + 6.0 * (a2 + 1.0).sqrt();
            if needed > cutoff.n_max() as f64 {
                return Err(Error::CutoffTooSmall { n_max: cutoff.n_max(), tail: f64::NAN, tol: cutoff.tail_tol() });
            }
            Ok(())
        };
        match self {
            OscState::Coherent(alpha) => {
                check_coherent(alpha)?;
                coherent_state(*alpha, cutoff)
            }
            OscState::Thermal(nbar) => thermal_state(*nbar, cutoff),
            OscState::Mixture(parts) => {
                let d = cutoff.dim();
                let mut rho = CMatrix::zeros(d, d);
                for (w, alpha) in parts {
                    check_coherent(alpha)?;
                    let psi = coherent_state(*alpha, cutoff)?;
                    let v = psi.vector().expect("coherent states are pure");
                    rho += (v * v.adjoint()).scale(*w);
                }
                State::mixed(vec![d], rho)
            }
        }
    }
}

fn split_qubit(s: &State) -> Result<usize> {
    let dims = s.dims();
    if dims.len() != 2 || dims[0] != 2 {
        return Err(Error::BadDims(format!("expected [2, m] composite, found {dims:?}")));
    }
    Ok(dims[1])
}

/// Reduced qubit state `tr_osc(rho)`.
pub fn partial_trace_oscillator(s: &State) -> Result<State> {
    let m = split_qubit(s)?;
    let mut out = CMatrix::zeros(2, 2);
    match &s.repr {
        Repr::Pure(psi) => {
            for a in 0..2 {
                for b in 0..2 {
                    out[(a, b)] = (0..m).map(|n| psi[a * m + n] * psi[b * m + n].conj()).sum();
                }
            }
        }
        Repr::Mixed(rho) => {
            for a in 0..2 {
                for b in 0..2 {
                    out[(a, b)] = (0..m).map(|n| rho[(a * m + n, b * m + n)]).sum();
                }
            }
        }
    }
    State::mixed_unchecked(vec![2], out)
}

/// Reduced oscillator state `tr_qubit(rho)`.
pub fn partial_trace_qubit(s: &State) -> Result<State> {
    let m = split_qubit(s)?;
    let rho = s.density_matrix();
    let out = CMatrix::from_fn(m, m, |i, j| rho[(i, j)] + rho[(m + i, m + j)]);
    State::mixed_unchecked(vec![m], out)
}

/// Uhlmann root fidelity `tr sqrt(sqrt(rho) sigma sqrt(rho))`, equal to
/// `|<psi|phi>|` for pure states.
pub fn fidelity(a: &State, b: &State) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::BadDims(format!("fidelity between {:?} and {:?}", a.dims(), b.dims())));
    }
    let f = match (&a.repr, &b.repr) {
        (Repr::Pure(x), Repr::Pure(y)) => x.dotc(y).norm(),
        (Repr::Pure(x), Repr::Mixed(rho)) | (Repr::Mixed(rho), Repr::Pure(x)) => x.dotc(&(rho * x)).re.max(0.0).sqrt(),
        (Repr::Mixed(r), Repr::Mixed(s)) => {
            // ||sqrt(r) sqrt(s)||_* keeps small eigenvalues well conditioned.
            let prod = linalg::matmul(&linalg::psd_sqrt(r), &linalg::psd_sqrt(s));
            linalg::nuclear_norm(&prod)
        }
    };
    Ok(f.min(1.0))
}
