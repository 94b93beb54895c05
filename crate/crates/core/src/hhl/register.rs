//! Full statevector register for the HHL circuit and the gate primitives it
//! is built from.
//!
//! Basis ordering is (ancilla ⊗ clock ⊗ system): amplitude index
//! `a * 2^(m+q) + c * 2^q + s` with the system in the lowest `q` bits, the
//! clock value `c` in bits `q..q+m` (bit `l` of `c` at global qubit `q + l`),
//! and the single ancilla on top.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::{czero, Scalar, C};

/// Register widths of a prepared HHL state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitLayout {
    /// System qubits `q = ceil(log2(block dimension))`.
    pub system: usize,
    /// Clock qubits `m`.
    pub clock: usize,
}

impl QubitLayout {
    pub fn total_qubits(&self) -> usize {
        1 + self.clock + self.system
    }

    pub fn state_len(&self) -> usize {
        1 << self.total_qubits()
    }

    /// Global qubit index of clock bit `l`.
    pub fn clock_qubit(&self, l: usize) -> usize {
        self.system + l
    }

    pub fn ancilla_qubit(&self) -> usize {
        self.system + self.clock
    }
}

/// Statevector over (ancilla ⊗ clock ⊗ system).
#[derive(Clone, Debug)]
pub struct RegisterState<T> {
    amplitudes: Vec<C<T>>,
    layout: QubitLayout,
}

impl<T: Scalar> RegisterState<T> {
    /// All-zeros basis state except the given system amplitudes on the
    /// (ancilla = 0, clock = 0) branch. The amplitudes must be normalized.
    pub fn with_system_amplitudes(system_amps: &[C<T>], clock: usize) -> Self {
        let dim = system_amps.len();
        let system = ceil_log2(dim);
        let layout = QubitLayout { system, clock };
        let mut amplitudes = vec![czero(); layout.state_len()];
        amplitudes[..dim].copy_from_slice(system_amps);
        Self { amplitudes, layout }
    }

    pub fn layout(&self) -> QubitLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitude at (ancilla, clock, system).
    pub fn amplitude(&self, ancilla: usize, clock_value: usize, system_index: usize) -> C<T> {
        let q = self.layout.system;
        let m = self.layout.clock;
        self.amplitudes[(ancilla << (m + q)) | (clock_value << q) | system_index]
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Check the unit-norm invariant.
    pub fn validate_norm(&self) -> Result<()> {
        let n = self.norm();
        if (n - T::one()).abs() > T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) {
            return Err(Error::NumericalBreakdown(format!(
                "register norm drifted to {n}"
            )));
        }
        Ok(())
    }

    /// Total probability of measuring the ancilla in |1>.
    pub fn ancilla_one_probability(&self) -> T {
        let half = self.len() / 2;
        self.amplitudes[half..]
            .iter()
            .map(|c| c.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
    }

    /// Probability mass at a given clock value across both ancilla branches.
    pub fn clock_value_mass(&self, clock_value: usize) -> T {
        let q = self.layout.system;
        let m = self.layout.clock;
        let mut mass = T::zero();
        for a in 0..2usize {
            let base = (a << (m + q)) | (clock_value << q);
            for s in 0..(1 << q) {
                mass += self.amplitudes[base | s].norm_sqr();
            }
        }
        mass
    }

    /// Hadamard on one qubit.
    pub fn apply_hadamard(&mut self, qubit: usize) {
        let mask = 1usize << qubit;
        let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | mask];
                self.amplitudes[i] = (a0 + a1).scale(inv_sqrt2);
                self.amplitudes[i | mask] = (a0 - a1).scale(inv_sqrt2);
            }
        }
    }

    /// Controlled phase `diag(1, 1, 1, e^{i angle})` on a control/target pair.
    pub fn apply_controlled_phase(&mut self, control: usize, target: usize, angle: T) {
        let mask = (1usize << control) | (1usize << target);
        let phase = C::from_polar(T::one(), angle);
        for (i, amp) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *amp *= phase;
            }
        }
    }

    /// Swap two qubits.
    pub fn apply_swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let ma = 1usize << a;
        let mb = 1usize << b;
        for i in 0..self.amplitudes.len() {
            if i & ma != 0 && i & mb == 0 {
                let j = (i & !ma) | mb;
                self.amplitudes.swap(i, j);
            }
        }
    }

    /// Apply a dense unitary on the system register, controlled on one clock
    /// qubit. The matrix must be `2^q x 2^q`.
    pub fn apply_controlled_system_unitary(&mut self, control: usize, u: &DenseMatrix<T>) {
        let q = self.layout.system;
        let d = 1usize << q;
        debug_assert_eq!(u.nrows(), d);
        debug_assert!(control >= q, "control must be a clock or ancilla qubit");
        let control_super_bit = control - q;
        let supers = self.amplitudes.len() / d;
        let mut scratch = vec![czero(); d];
        for h in 0..supers {
            if (h >> control_super_bit) & 1 == 0 {
                continue;
            }
            let base = h * d;
            let seg = &self.amplitudes[base..base + d];
            for (r, slot) in scratch.iter_mut().enumerate() {
                let mut acc = czero();
                for (c, &amp) in seg.iter().enumerate() {
                    acc += u.get(r, c) * amp;
                }
                *slot = acc;
            }
            self.amplitudes[base..base + d].copy_from_slice(&scratch);
        }
    }

    /// Rotate the ancilla on every branch with the given clock value:
    /// |0> -> sqrt(1-r^2)|0> + r|1>, |1> -> -r|0> + sqrt(1-r^2)|1>.
    pub fn apply_ancilla_rotation(&mut self, clock_value: usize, ratio: T) {
        let q = self.layout.system;
        let m = self.layout.clock;
        let half = 1usize << (m + q);
        let cos_part = (T::one() - ratio * ratio).max(T::zero()).sqrt();
        let base = clock_value << q;
        for s in 0..(1 << q) {
            let i0 = base | s;
            let i1 = half | i0;
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = a0.scale(cos_part) - a1.scale(ratio);
            self.amplitudes[i1] = a0.scale(ratio) + a1.scale(cos_part);
        }
    }

    /// Quantum Fourier transform on the clock register
    /// (`|k> -> M^{-1/2} sum_c e^{2 pi i k c / M} |c>`), or its inverse.
    pub fn apply_clock_qft(&mut self, inverse: bool) {
        let m = self.layout.clock;
        let gates = qft_gate_sequence::<T>(m);
        if inverse {
            for g in gates.iter().rev() {
                self.apply_clock_gate(&g.inverted());
            }
        } else {
            for g in &gates {
                self.apply_clock_gate(g);
            }
        }
    }

    fn apply_clock_gate(&mut self, gate: &ClockGate<T>) {
        match *gate {
            ClockGate::Hadamard(l) => self.apply_hadamard(self.layout.clock_qubit(l)),
            ClockGate::Phase { control, target, angle } => self.apply_controlled_phase(
                self.layout.clock_qubit(control),
                self.layout.clock_qubit(target),
                angle,
            ),
            ClockGate::Swap(a, b) => {
                self.apply_swap(self.layout.clock_qubit(a), self.layout.clock_qubit(b))
            }
        }
    }
}

/// One gate of the clock-register QFT, in clock-local qubit indices.
#[derive(Clone, Debug)]
enum ClockGate<T> {
    Hadamard(usize),
    Phase { control: usize, target: usize, angle: T },
    Swap(usize, usize),
}

impl<T: Scalar> ClockGate<T> {
    fn inverted(&self) -> Self {
        match *self {
            ClockGate::Hadamard(l) => ClockGate::Hadamard(l),
            ClockGate::Phase { control, target, angle } => ClockGate::Phase {
                control,
                target,
                angle: -angle,
            },
            ClockGate::Swap(a, b) => ClockGate::Swap(a, b),
        }
    }
}

/// Textbook QFT circuit on `m` qubits, bit `l` carrying weight `2^l`.
fn qft_gate_sequence<T: Scalar>(m: usize) -> Vec<ClockGate<T>> {
    let mut gates = Vec::new();
    for j in (0..m).rev() {
        gates.push(ClockGate::Hadamard(j));
        for k in (0..j).rev() {
            let angle = T::PI() / T::lit((1usize << (j - k)) as f64);
            gates.push(ClockGate::Phase {
                control: k,
                target: j,
                angle,
            });
        }
    }
    for i in 0..m / 2 {
        gates.push(ClockGate::Swap(i, m - 1 - i));
    }
    gates
}

/// Smallest `q` with `2^q >= dim`.
pub fn ceil_log2(dim: usize) -> usize {
    debug_assert!(dim >= 1);
    dim.next_power_of_two().trailing_zeros() as usize
}
