//! Qubit-oscillator Hamiltonians for the single- and two-component
//! condensate realisations, plus the physical parameter helpers.
//!
//! Sign convention: `sigma_z |e> = +|e>`. The coupling `chi (sigma_z - 1) n`
//! vanishes on `|e>` and shifts the `|g>` branch frequency by `-2 chi`, so
//! the branches rotate relative to each other at `2 chi`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{self, qubit, FockCutoff, Operator, Tensor};

/// Oscillator-picture parameters (hbar = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Qubit splitting; enters as `omega0 sigma_z`.
    pub omega0: f64,
    /// Oscillator frequency.
    pub omega: f64,
    /// Kerr nonlinearity, coefficient of `n^2`.
    pub kappa: f64,
    /// Qubit-oscillator coupling.
    pub chi: f64,
}

impl ModelParams {
    /// `chi = 1`, everything else zero.
    pub fn unit_coupling() -> Self {
        Self { omega0: 0.0, omega: 0.0, kappa: 0.0, chi: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega0", self.omega0), ("omega", self.omega), ("kappa", self.kappa), ("chi", self.chi)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Diagonal of the oscillator block for qubit level `q`.
    pub fn branch_energies(&self, q: usize, dim: usize) -> Vec<f64> {
        let (sz, shift) = if q == qubit::EXCITED { (1.0, 0.0) } else { (-1.0, -2.0 * self.chi) };
        (0..dim)
            .map(|n| {
                let n = n as f64;
                self.omega0 * sz + (self.omega + shift) * n + self.kappa * n * n
            })
            .collect()
    }
}

/// `H = omega0 sigma_z + omega n + kappa n^2 + chi (sigma_z - 1) n` on
/// qubit (x) oscillator.
pub fn build_hamiltonian(params: &ModelParams, cutoff: FockCutoff) -> Operator {
    let n = fock::number(cutoff);
    let n2 = &n * &n;
    let id_q = qubit::identity();
    let id_o = Operator::identity(vec![cutoff.dim()]).expect("positive dimension");
    let sz = qubit::sigma_z();

    let free =
        &sz.scale(params.omega0).tensor(&id_o) + &id_q.tensor(&(&n.scale(params.omega) + &n2.scale(params.kappa)));
    let coupling = (&sz - &id_q).scale(params.chi).tensor(&n);
    &free + &coupling
}

/// Raw two-component condensate parameters with a probe atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoComponentParams {
    /// Total atom number; the collective spin is `J = N/2`.
    pub n_atoms: usize,
    pub omega0: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa12: f64,
    pub kappa1e: f64,
    pub kappa2e: f64,
}

impl TwoComponentParams {
    /// Coefficient of `J_z` once `n1 = N/2 + J_z`, `n2 = N/2 - J_z` are
    /// substituted: `(omega1 - omega2) + N (kappa1 - kappa2)`.
    pub fn omega_tilde(&self) -> f64 {
        (self.omega1 - self.omega2) + self.n_atoms as f64 * (self.kappa1 - self.kappa2)
    }

    /// Coefficient of `J_z^2`: `kappa1 + kappa2 - kappa12`.
    pub fn kappa_tilde(&self) -> f64 {
        self.kappa1 + self.kappa2 - self.kappa12
    }

    pub fn chi(&self) -> f64 {
        self.kappa1e - self.kappa2e
    }

    pub fn spin_dim(&self) -> usize {
        self.n_atoms + 1
    }
}

/// `J_z` in the `(N+1)`-dimensional fixed-N representation, basis index
/// `k = J_z + N/2` (number of atoms in the first component).
pub fn spin_jz(n_atoms: usize) -> Operator {
    let half = n_atoms as f64 / 2.0;
    let diag: Vec<f64> = (0..=n_atoms).map(|k| k as f64 - half).collect();
    Operator::from_diagonal(vec![n_atoms + 1], &diag).expect("positive dimension")
}

/// `J_+ |J, m> = sqrt(J(J+1) - m(m+1)) |J, m+1>`.
pub fn spin_jplus(n_atoms: usize) -> Operator {
    let d = n_atoms + 1;
    let j = n_atoms as f64 / 2.0;
    let mut m = crate::linalg::CMatrix::zeros(d, d);
    for k in 0..n_atoms {
        let mz = k as f64 - j;
        m[(k + 1, k)] = crate::linalg::C64::new((j * (j + 1.0) - mz * (mz + 1.0)).sqrt(), 0.0);
    }
    Operator::new(vec![d], m).expect("square by construction")
}

pub fn spin_jminus(n_atoms: usize) -> Operator {
    spin_jplus(n_atoms).adjoint()
}

/// `H = omega0 sigma_z + omega~ J_z + kappa~ J_z^2 + chi (sigma_z - 1) J_z`
/// with the constant energy offsets dropped.
pub fn build_two_mode_hamiltonian(params: &TwoComponentParams) -> Result<Operator> {
    if params.n_atoms < 1 {
        return Err(Error::InvalidParameter("two-component model needs N >= 1".into()));
    }
    let jz = spin_jz(params.n_atoms);
    let jz2 = &jz * &jz;
    let id_q = qubit::identity();
    let id_s = Operator::identity(vec![params.spin_dim()])?;
    let sz = qubit::sigma_z();
    let spin = &jz.scale(params.omega_tilde()) + &jz2.scale(params.kappa_tilde());
    let free = &sz.scale(params.omega0).tensor(&id_s) + &id_q.tensor(&spin);
    let coupling = (&sz - &id_q).scale(params.chi()).tensor(&jz);
    Ok(&free + &coupling)
}

/// Oscillator-picture parameters from the Holstein-Primakoff map
/// `J_z = c+c - N/2`, `J_+ ~ sqrt(N) c+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpReduction {
    pub params: ModelParams,
    pub n_atoms: usize,
    /// `kappa1e == kappa2e`: the probe does not couple.
    pub degenerate: bool,
}

impl HpReduction {
    /// `<c+c>/N`; the map is trustworthy only while this is small.
    pub fn validity_ratio(&self, excitations: f64) -> f64 {
        excitations / self.n_atoms as f64
    }
}

/// Expanding `omega~ J_z + kappa~ J_z^2 + chi (sigma_z - 1) J_z` in `c+c`
/// gives `omega = omega~ - N kappa~`, `kappa = kappa~`, `chi = kappa1e - kappa2e`
/// and a qubit shift `omega0 - chi N / 2`; scalar offsets are dropped.
pub fn hp_reduce(params: &TwoComponentParams) -> Result<HpReduction> {
    if params.n_atoms < 1 {
        return Err(Error::InvalidParameter("two-component model needs N >= 1".into()));
    }
    let n = params.n_atoms as f64;
    let chi = params.chi();
    Ok(HpReduction {
        params: ModelParams {
            omega0: params.omega0 - chi * n / 2.0,
            omega: params.omega_tilde() - n * params.kappa_tilde(),
            kappa: params.kappa_tilde(),
            chi,
        },
        n_atoms: params.n_atoms,
        degenerate: chi == 0.0,
    })
}

/// Magnetic Feshbach resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeshbachParams {
    pub a_bg: f64,
    pub b0: f64,
    pub width: f64,
}

pub const DEFAULT_RESONANCE_GUARD: f64 = 1e-9;

/// `a = a_bg (1 + width / (b0 - b))`.
pub fn feshbach_length(b: f64, p: &FeshbachParams) -> Result<f64> {
    feshbach_length_guarded(b, p, DEFAULT_RESONANCE_GUARD)
}

pub fn feshbach_length_guarded(b: f64, p: &FeshbachParams, guard: f64) -> Result<f64> {
    if p.width == 0.0 || p.a_bg == 0.0 {
        return Err(Error::InvalidParameter("Feshbach width and background length must be nonzero".into()));
    }
    if (b - p.b0).abs() < guard {
        return Err(Error::OnResonance { field: b, resonance: p.b0, guard });
    }
    Ok(p.a_bg * (1.0 + p.width / (p.b0 - b)))
}

/// Contact coupling `2 pi a / (m V)` for a probe overlapping a condensate
/// mode of effective volume `V` (hbar = 1).
pub fn coupling_from_geometry(a_scatt: f64, mass: f64, volume: f64) -> Result<f64> {
    for (name, value) in [("scattering length", a_scatt), ("mass", mass), ("volume", volume)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveInput { name, value });
        }
    }
    Ok(2.0 * PI * a_scatt / (mass * volume))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, CMatrix};

    fn params(omega0: f64, omega: f64, kappa: f64, chi: f64) -> ModelParams {
        ModelParams { omega0, omega, kappa, chi }
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn decoupled_spectrum() {
        let c = FockCutoff::with_n_max(6).unwrap();
        let h = build_hamiltonian(&params(0.7, 1.3, 0.0, 0.0), c);
        let mut expected = Vec::new();
        for n in 0..7 {
            expected.push(0.7 + 1.3 * n as f64);
            expected.push(-0.7 + 1.3 * n as f64);
        }
        let got = h.eigenvalues();
        for (a, b) in got.iter().zip(sorted(expected)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn branch_blocks() {
        let c = FockCutoff::with_n_max(9).unwrap();
        let p = params(0.0, 0.8, 0.05, 0.3);
        let h = build_hamiltonian(&p, c);
        let d = c.dim();
        // e block (top-left) and g block (bottom-right), each diagonalised
        for n in 0..d {
            let nf = n as f64;
            assert!((h.matrix()[(n, n)].re - (0.8 * nf + 0.05 * nf * nf)).abs() < 1e-12);
            assert!((h.matrix()[(d + n, d + n)].re - ((0.8 - 0.6) * nf + 0.05 * nf * nf)).abs() < 1e-12);
        }
        assert!(h.is_hermitian(1e-12));
        let sz = qubit::sigma_z().tensor(&Operator::identity(vec![d]).unwrap());
        assert_eq!(linalg::frobenius(h.commutator(&sz).matrix()), 0.0);
        // full diagonalisation agrees with the block formulas
        let mut expected = p.branch_energies(qubit::EXCITED, d);
        expected.extend(p.branch_energies(qubit::GROUND, d));
        for (a, b) in h.eigenvalues().iter().zip(sorted(expected)) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    fn two(n: usize) -> TwoComponentParams {
        TwoComponentParams {
            n_atoms: n,
            omega0: 0.0,
            omega1: 0.0,
            omega2: 0.0,
            kappa1: 0.0,
            kappa2: 0.0,
            kappa12: 0.0,
            kappa1e: 0.0,
            kappa2e: 0.0,
        }
    }

    fn spin_block(h: &Operator, dim: usize) -> Vec<f64> {
        let m = CMatrix::from_fn(dim, dim, |i, j| h.matrix()[(i, j)]);
        sorted((0..dim).map(|i| m[(i, i)].re).collect())
    }

    #[test]
    fn two_mode_spin_one_examples() {
        // omega~ = omega1 - omega2 = 1 with kappas zero
        let mut p = two(2);
        p.omega1 = 1.0;
        let h = build_two_mode_hamiltonian(&p).unwrap();
        assert_eq!(spin_block(&h, 3), vec![-1.0, 0.0, 1.0]);

        let mut p = two(2);
        p.kappa1 = 1.0;
        p.kappa2 = 1.0;
        p.kappa12 = 1.0;
        assert_eq!(p.kappa_tilde(), 1.0);
        assert_eq!(p.omega_tilde(), 0.0);
        let h = build_two_mode_hamiltonian(&p).unwrap();
        assert_eq!(spin_block(&h, 3), vec![0.0, 1.0, 1.0]);
    }

    /// Brute-force construction in the two-mode Fock basis |n1, N - n1>.
    fn brute_two_mode(p: &TwoComponentParams) -> Vec<f64> {
        let n = p.n_atoms;
        let mut energies = Vec::new();
        for q in [qubit::EXCITED, qubit::GROUND] {
            let sz: f64 = if q == qubit::EXCITED { 1.0 } else { -1.0 };
            for n1 in 0..=n {
                let (a, b) = (n1 as f64, (n - n1) as f64);
                let h2 = p.omega1 * a + p.omega2 * b + p.kappa1 * a * a + p.kappa2 * b * b + p.kappa12 * a * b;
                let jz = (a - b) / 2.0;
                energies.push(p.omega0 * sz + h2 + p.chi() * (sz - 1.0) * jz);
            }
        }
        sorted(energies)
    }

    #[test]
    fn two_mode_spectrum_matches_fock_construction() {
        for n in 1..=6 {
            let p = TwoComponentParams {
                n_atoms: n,
                omega0: 0.31,
                omega1: 1.7,
                omega2: 0.4,
                kappa1: 0.13,
                kappa2: 0.07,
                kappa12: 0.05,
                kappa1e: 0.9,
                kappa2e: 0.2,
            };
            let h = build_two_mode_hamiltonian(&p).unwrap();
            assert!(h.is_hermitian(1e-12));
            let spin = sorted(h.eigenvalues());
            let brute = brute_two_mode(&p);
            // equal up to the dropped scalar offset
            let offset = brute[0] - spin[0];
            for (a, b) in spin.iter().zip(&brute) {
                assert!((a + offset - b).abs() < 1e-10, "N={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn two_mode_commutes_with_sigma_z() {
        let mut p = two(5);
        p.omega1 = 0.3;
        p.kappa1 = 0.2;
        p.kappa1e = 1.0;
        let h = build_two_mode_hamiltonian(&p).unwrap();
        let sz = qubit::sigma_z().tensor(&Operator::identity(vec![6]).unwrap());
        assert_eq!(linalg::frobenius(h.commutator(&sz).matrix()), 0.0);
    }

    #[test]
    fn spin_ladder_algebra() {
        let n = 4;
        let jz = spin_jz(n);
        let jp = spin_jplus(n);
        let jm = spin_jminus(n);
        // [J+, J-] = 2 J_z
        let comm = jp.commutator(&jm);
        assert!(linalg::frobenius(&(comm.matrix() - jz.scale(2.0).matrix())) < 1e-12);
    }

    #[test]
    fn hp_reduction_coupling() {
        let mut p = two(50);
        p.kappa1e = 3.0;
        p.kappa2e = 1.0;
        let red = hp_reduce(&p).unwrap();
        assert_eq!(red.params.chi, 2.0);
        assert!(!red.degenerate);
        assert_eq!(red.validity_ratio(2.0), 0.04);

        p.kappa2e = 3.0;
        let red = hp_reduce(&p).unwrap();
        assert_eq!(red.params.chi, 0.0);
        assert!(red.degenerate);
    }

    #[test]
    fn hp_reduced_interaction_block() {
        let mut p = two(10);
        p.kappa1e = 3.0;
        p.kappa2e = 1.0;
        let red = hp_reduce(&p).unwrap();
        let c = FockCutoff::with_n_max(10).unwrap();
        let mut only_coupling = red.params;
        only_coupling.omega0 = 0.0;
        only_coupling.omega = 0.0;
        only_coupling.kappa = 0.0;
        let h = build_hamiltonian(&only_coupling, c);
        let expected = (&qubit::sigma_z() - &qubit::identity()).scale(2.0).tensor(&fock::number(c));
        assert_eq!(h.matrix(), expected.matrix());
    }

    #[test]
    fn hp_reduced_spectrum_matches_low_spin_levels() {
        // without the Kerr term the map J_z = c+c - N/2 is exact level by level
        let p = TwoComponentParams {
            n_atoms: 8,
            omega0: 0.2,
            omega1: 1.0,
            omega2: 0.5,
            kappa1: 0.0,
            kappa2: 0.0,
            kappa12: 0.0,
            kappa1e: 0.6,
            kappa2e: 0.1,
        };
        let exact = build_two_mode_hamiltonian(&p).unwrap();
        let red = hp_reduce(&p).unwrap();
        let h = build_hamiltonian(&red.params, FockCutoff::with_n_max(8).unwrap());
        let offset = exact.matrix()[(0, 0)].re - h.matrix()[(0, 0)].re;
        for i in 0..18 {
            assert!((exact.matrix()[(i, i)].re - h.matrix()[(i, i)].re - offset).abs() < 1e-12);
        }
    }

    #[test]
    fn feshbach_examples() {
        let p = FeshbachParams { a_bg: 2.5, b0: 100.0, width: 3.0 };
        assert!((feshbach_length(97.0, &p).unwrap() - 5.0).abs() < 1e-12);
        assert!((feshbach_length(1e12, &p).unwrap() - 2.5).abs() < 1e-9);
        assert!(matches!(feshbach_length(100.0, &p), Err(Error::OnResonance { .. })));
        assert!(feshbach_length_guarded(100.5, &p, 1.0).is_err());
    }

    #[test]
    fn geometric_coupling() {
        let k = coupling_from_geometry(1.0, 2.0, 3.0).unwrap();
        assert!((k - 2.0 * PI / 6.0).abs() < 1e-15);
        assert!((coupling_from_geometry(2.0, 2.0, 3.0).unwrap() - 2.0 * k).abs() < 1e-15);
        assert!((coupling_from_geometry(1.0, 2.0, 6.0).unwrap() - k / 2.0).abs() < 1e-15);
        assert!(matches!(coupling_from_geometry(-1.0, 2.0, 3.0), Err(Error::NonPositiveInput { .. })));
        assert!(matches!(coupling_from_geometry(1.0, 0.0, 3.0), Err(Error::NonPositiveInput { .. })));

        let p = FeshbachParams { a_bg: 1.0, b0: 10.0, width: 0.5 };
        let near = coupling_from_geometry(feshbach_length(9.5, &p).unwrap(), 1.0, 1.0).unwrap();
        let far = coupling_from_geometry(feshbach_length(1e15, &p).unwrap(), 1.0, 1.0).unwrap();
        assert!((near / far - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_entries_are_real() {
        let h = build_hamiltonian(&params(0.1, 0.2, 0.3, 0.4), FockCutoff::with_n_max(5).unwrap());
        assert!(h.matrix().iter().all(|z| z.im == 0.0));
        assert!(h.real_diagonal().is_some());
    }
}
