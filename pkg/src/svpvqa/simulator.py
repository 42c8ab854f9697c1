"""Exact statevector simulation of the HEA and QAOA circuit families.

Basis-state index bit ``j`` is the value of qubit ``j``. Gate kernels are
compiled with numba; a plan is lowered once to flat opcode arrays so one cost
evaluation is a single compiled call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .encoding import IsingModel


class Op(enum.IntEnum):
    RY = 0
    RX = 1
    RZ = 2
    CX = 3
    H = 4
    DIAG = 5
    BARRIER = 6


@dataclass(frozen=True)
class Gate:
    op: Op
    qubits: tuple[int, ...] = ()
    slot: int = -1  # parameter index; angle = scale * params[slot]
    scale: float = 1.0


@dataclass(frozen=True, eq=False)
class CircuitPlan:
    family: str
    num_qubits: int
    num_params: int
    gates: tuple[Gate, ...]
    model: IsingModel | None = None
    depth: int = field(init=False)
    cnot_count: int = field(init=False)

    def __post_init__(self) -> None:
        acct = self.accounting_gates()
        object.__setattr__(self, "depth", asap_depth(acct, self.num_qubits))
        object.__setattr__(self, "cnot_count", sum(1 for g in acct if g.op is Op.CX))

    def accounting_gates(self) -> list[Gate]:
        """Gate list with every DIAG expanded into its RZ / CNOT-RZ-CNOT form."""
        out: list[Gate] = []
        for g in self.gates:
            if g.op is Op.DIAG:
                out.extend(diag_decomposition(self.model, g.slot))
            else:
                out.append(g)
        return out


def diag_decomposition(model: IsingModel, slot: int) -> list[Gate]:
    """``exp(-i gamma E)`` up to global phase: RZ(2 gamma h_a), then CX RZ(2 gamma J_ab) CX."""
    gates = [Gate(Op.RZ, (a,), slot, 2.0 * h) for a, h in model.fields()]
    for a, b, j in model.couplings():
        gates += [Gate(Op.CX, (a, b)), Gate(Op.RZ, (b,), slot, 2.0 * j), Gate(Op.CX, (a, b))]
    return gates


def asap_depth(gates: Sequence[Gate], num_qubits: int) -> int:
    """Greedy earliest-layer depth; barriers synchronize without adding a layer."""
    front = [0] * num_qubits
    for g in gates:
        if g.op is Op.BARRIER:
            top = max(front, default=0)
            front = [top] * num_qubits
            continue
        level = max(front[q] for q in g.qubits) + 1
        for q in g.qubits:
            front[q] = level
    return max(front, default=0)


def build_hea(q: int, p: int) -> CircuitPlan:
    """``p`` blocks of [RY layer, CNOT chain] and a closing RY layer, from |0...0>."""
    if q < 1 or p < 1:
        raise ValueError("need q >= 1 and p >= 1")
    gates: list[Gate] = []
    slot = 0
    for _ in range(p):
        for j in range(q):
            gates.append(Gate(Op.RY, (j,), slot))
            slot += 1
        gates.extend(Gate(Op.CX, (j, j + 1)) for j in range(q - 1))
        gates.append(Gate(Op.BARRIER))
    for j in range(q):
        gates.append(Gate(Op.RY, (j,), slot))
        slot += 1
    return CircuitPlan("hea", q, slot, tuple(gates))


def build_qaoa(q: int, p: int, model: IsingModel, tie_params: bool = False) -> CircuitPlan:
    """Hadamard layer, then ``p`` rounds of cost phase ``gamma_l`` and RX(2 beta_l) mixer.

    With ``tie_params`` each round uses one parameter for both angles.
    """
    if q < 1 or p < 1:
        raise ValueError("need q >= 1 and p >= 1")
    if model.num_qubits != q:
        raise ValueError("model qubit count does not match circuit")
    gates = [Gate(Op.H, (j,)) for j in range(q)]
    gates.append(Gate(Op.BARRIER))
    for layer in range(p):
        gamma, beta = (layer, layer) if tie_params else (2 * layer, 2 * layer + 1)
        gates.append(Gate(Op.DIAG, (), gamma))
        gates.extend(Gate(Op.RX, (j,), beta, 2.0) for j in range(q))
        gates.append(Gate(Op.BARRIER))
    return CircuitPlan("qaoa", q, p if tie_params else 2 * p, tuple(gates), model)


# ---------------------------------------------------------------- kernels

@numba.njit(cache=True)
def _rot_real(state, q, a00, a01, a10, a11):
    stride = 1 << q
    for base in range(0, state.shape[0], 2 * stride):
        for k in range(base, base + stride):
            x0 = state[k]
            x1 = state[k + stride]
            state[k] = a00 * x0 + a01 * x1
            state[k + stride] = a10 * x0 + a11 * x1


@numba.njit(cache=True)
def _cx(state, c, t):
    cm = 1 << c
    tm = 1 << t
    for k in range(state.shape[0]):
        if (k & cm) and not (k & tm):
            x = state[k]
            state[k] = state[k | tm]
            state[k | tm] = x


@numba.njit(cache=True)
def _run_real(state, ops, qa, qb, slots, scales, params):
    r2 = 1.0 / math.sqrt(2.0)
    for g in range(ops.shape[0]):
        op = ops[g]
        if op == 0:
            th = 0.5 * scales[g] * params[slots[g]]
            c = math.cos(th)
            s = math.sin(th)
            _rot_real(state, qa[g], c, -s, s, c)
        elif op == 3:
            _cx(state, qa[g], qb[g])
        elif op == 4:
            _rot_real(state, qa[g], r2, r2, r2, -r2)


@numba.njit(cache=True)
def _run_complex(state, ops, qa, qb, slots, scales, params, energies):
    r2 = 1.0 / math.sqrt(2.0)
    for g in range(ops.shape[0]):
        op = ops[g]
        if op == 0:
            th = 0.5 * scales[g] * params[slots[g]]
            c = math.cos(th)
            s = math.sin(th)
            _rot_real(state, qa[g], c, -s, s, c)
        elif op == 1:
            th = 0.5 * scales[g] * params[slots[g]]
            c = math.cos(th) + 0j
            s = -1j * math.sin(th)
            _rot_real(state, qa[g], c, s, s, c)
        elif op == 2:
            th = 0.5 * scales[g] * params[slots[g]]
            ph0 = complex(math.cos(th), -math.sin(th))
            ph1 = complex(math.cos(th), math.sin(th))
            m = 1 << qa[g]
            for k in range(state.shape[0]):
                if k & m:
                    state[k] *= ph1
                else:
                    state[k] *= ph0
        elif op == 3:
            _cx(state, qa[g], qb[g])
        elif op == 4:
            _rot_real(state, qa[g], r2, r2, r2, -r2)
        elif op == 5:
            gam = scales[g] * params[slots[g]]
            for k in range(state.shape[0]):
                ang = gam * energies[k]
                state[k] *= complex(math.cos(ang), -math.sin(ang))


@numba.njit(cache=True)
def _expect(state, energies):
    acc = 0.0
    for k in range(state.shape[0]):
        x = state[k]
        acc += (x.real * x.real + x.imag * x.imag) * energies[k]
    return acc


class _Program:
    """A plan lowered to flat arrays for the compiled kernels."""

    def __init__(self, plan: CircuitPlan, decompose: bool = False):
        gates = plan.accounting_gates() if decompose else list(plan.gates)
        gates = [g for g in gates if g.op is not Op.BARRIER]
        self.num_qubits = plan.num_qubits
        self.num_params = plan.num_params
        self.ops = np.array([int(g.op) for g in gates], dtype=np.int64)
        self.qa = np.array([g.qubits[0] if g.qubits else 0 for g in gates], dtype=np.int64)
        self.qb = np.array([g.qubits[1] if len(g.qubits) > 1 else 0 for g in gates], dtype=np.int64)
        self.slots = np.array([max(g.slot, 0) for g in gates], dtype=np.int64)
        self.scales = np.array([g.scale for g in gates], dtype=np.float64)
        self.real = all(g.op in (Op.RY, Op.CX, Op.H) for g in gates)
        if plan.model is not None:
            self.energies = np.ascontiguousarray(plan.model.energy_table, dtype=np.float64)
        else:
            self.energies = np.zeros(1 << plan.num_qubits)

    def run(self, params: np.ndarray, real_ok: bool = True) -> np.ndarray:
        dtype = np.float64 if (self.real and real_ok) else np.complex128
        state = np.zeros(1 << self.num_qubits, dtype=dtype)
        state[0] = 1.0
        if dtype is np.float64:
            _run_real(state, self.ops, self.qa, self.qb, self.slots, self.scales, params)
        else:
            _run_complex(state, self.ops, self.qa, self.qb, self.slots, self.scales, params, self.energies)
        return state


def _check_params(plan: CircuitPlan, params) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (plan.num_params,):
        raise ValueError(f"expected {plan.num_params} parameters, got shape {params.shape}")
    if not np.all(np.isfinite(params)):
        raise ValueError("non-finite circuit parameter")
    return params


def execute(plan: CircuitPlan, params: Sequence[float], decompose: bool = False) -> np.ndarray:
    """Final statevector (complex128) of ``plan`` at ``params``.

    ``decompose=True`` runs every cost layer through its CNOT/RZ expansion
    instead of the direct phase; the two agree up to a global phase.
    """
    params = _check_params(plan, params)
    return _Program(plan, decompose).run(params, real_ok=False)


def expectation(state: np.ndarray, model: IsingModel) -> float:
    """``<psi| diag(E) |psi>`` using the model's energy table."""
    if state.shape[0] != model.energy_table.shape[0]:
        raise ValueError("state and model sizes differ")
    return float(_expect(np.ascontiguousarray(state, dtype=np.complex128), model.energy_table))


def sample(state: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``shots`` basis-state indices from ``|amplitude|^2``."""
    if shots < 1:
        raise ValueError("shots must be positive")
    probs = np.abs(state) ** 2
    probs = probs / probs.sum()
    return rng.choice(probs.shape[0], size=shots, p=probs)


class CostFunction:
    """``params -> <psi(params)| H |psi(params)>`` for a fixed plan and model."""

    def __init__(self, plan: CircuitPlan, model: IsingModel):
        if model.num_qubits != plan.num_qubits:
            raise ValueError("model qubit count does not match circuit")
        self.plan = plan
        self.program = _Program(plan)
        self.energies = np.ascontiguousarray(model.energy_table, dtype=np.float64)

    def state(self, params) -> np.ndarray:
        params = _check_params(self.plan, params)
        return self.program.run(params).astype(np.complex128, copy=False)

    def __call__(self, params) -> float:
        state = self.program.run(np.asarray(params, dtype=np.float64))
        if state.dtype == np.float64:
            return float(np.dot(state * state, self.energies))
        return float(_expect(state, self.energies))
