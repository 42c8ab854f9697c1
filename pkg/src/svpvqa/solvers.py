"""IPSA, IQOAP and k-PSA built on a single VQA execution primitive."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np

from .encoding import (
    MAX_QUBITS,
    EncodingError,
    PartitionKind,
    PartitionSpec,
    build_hamiltonian,
    build_partition,
    ipsa_bits,
    parse_psa_k,
)
from .lattice import (
    LatticeBasis,
    LatticeInvariantError,
    LatticeVector,
    coordinates_of,
    lattice_equal,
    lll_reduce,
    replace_preserving_lattice,
    shortest_vector_oracle,
    sort_basis,
)
from .optimizer import OptimizeConfig, init_params, powell_minimize
from .simulator import CircuitPlan, CostFunction, build_hea, build_qaoa, sample

CIRCUITS = ("hea", "qaoa", "qaoa_tied")


@dataclass(frozen=True)
class SolverConfig:
    circuit: str = "hea"
    layers: int = 2
    shots: int = 1024
    optimizer: OptimizeConfig = OptimizeConfig()
    bits: int | None = None  # qubits per free coefficient; None -> algorithm default
    max_vqa_runs: int = 500
    iterations: int = 50  # IQOAP only
    readout: str = "mode"  # "mode": most frequent sample, "min": least-norm sample
    check_lattice: bool = True

    def __post_init__(self) -> None:
        if self.circuit not in CIRCUITS:
            raise ValueError(f"unknown circuit {self.circuit!r}")
        if self.readout not in ("mode", "min"):
            raise ValueError(f"unknown readout {self.readout!r}")
        if self.layers < 1 or self.shots < 1:
            raise ValueError("layers and shots must be positive")


def default_config(algorithm: str, **overrides: Any) -> SolverConfig:
    """Per-algorithm defaults: IPSA HEA p=2, IPSA-QAOA p=4, IQOAP tied QAOA p=1, k-PSA HEA p=2."""
    tag = algorithm.lower()
    if tag in ("ipsa", "lll") or parse_psa_k(tag) is not None or tag == "psa":
        base = SolverConfig("hea", 2)
    elif tag == "ipsa-qaoa":
        base = SolverConfig("qaoa", 4)
    elif tag == "iqoap":
        base = SolverConfig("qaoa_tied", 1, bits=2)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(base, **overrides)


@dataclass
class VqaOutcome:
    candidate: LatticeVector | None
    evals: int
    depth_used: int
    cnots_used: int
    shots: int
    plan_depth: int
    plan_cnots: int
    num_qubits: int
    best_value: float


@dataclass
class RunLog:
    """One VQA execution inside a solve."""

    partition: int
    num_qubits: int
    evals: int
    plan_depth: int
    plan_cnots: int
    depth_used: int
    cnots_used: int
    candidate_norm_sq: int | None
    accepted: bool


@dataclass
class SolveRecord:
    algorithm: str
    instance_id: str
    set_name: str
    dim: int
    lambda1_sq: int
    found: tuple[int, ...] | None
    found_norm_sq: int | None
    success: bool
    approx_ratio: float
    depth_total: int
    cnot_total: int
    vqa_runs: int
    evals_total: int
    basis_updates: int
    ineffective_iterations: int = 0
    lattice_violations: int = 0
    cap_breached: bool = False
    error: str | None = None
    seeds: dict[str, int] = field(default_factory=dict)
    runs: list[RunLog] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["found"] = list(self.found) if self.found is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SolveRecord":
        d = dict(d)
        d["found"] = tuple(d["found"]) if d.get("found") is not None else None
        d["runs"] = [RunLog(**r) for r in d.get("runs", [])]
        return cls(**d)


def build_circuit(spec: PartitionSpec, model, cfg: SolverConfig) -> CircuitPlan:
    q = spec.num_qubits
    if cfg.circuit == "hea":
        return build_hea(q, cfg.layers)
    return build_qaoa(q, cfg.layers, model, tie_params=cfg.circuit == "qaoa_tied")


def run_vqa(
    basis: LatticeBasis,
    spec: PartitionSpec,
    cfg: SolverConfig,
    rng: np.random.Generator,
) -> VqaOutcome:
    """Optimize one circuit on ``spec``, sample it and decode a candidate.

    Zero vectors are dropped from the samples first. The candidate is then the
    most frequent outcome (``readout="mode"``) or the one of least squared
    norm (``readout="min"``); ties go to the lowest basis-state index.
    ``depth_used`` and ``cnots_used`` count every optimizer evaluation plus
    the final sampling execution.
    """
    q = spec.num_qubits
    if q < 1:
        raise EncodingError("partition has no qubits; nothing to optimize")
    if q > MAX_QUBITS:
        raise EncodingError(f"{q} qubits exceeds the simulation guard of {MAX_QUBITS}")
    model = build_hamiltonian(basis, spec)
    plan = build_circuit(spec, model, cfg)
    cost = CostFunction(plan, model)
    x0 = init_params(plan.num_params, rng)
    res = powell_minimize(cost, x0, cfg.optimizer)
    state = cost.state(res.best_params)
    shots = sample(state, cfg.shots, rng)

    uniq, counts = np.unique(shots, return_counts=True)
    energies = model.energy_table[uniq]
    if spec.kind is PartitionKind.FULL_CUBE:
        keep = np.any(spec.coefficient_table[uniq] != 0, axis=1)
        uniq, energies, counts = uniq[keep], energies[keep], counts[keep]
    candidate = None
    if uniq.size:
        # argmin/argmax take the lowest index on ties
        pick = np.argmax(counts) if cfg.readout == "mode" else np.argmin(energies)
        best = int(uniq[int(pick)])
        candidate = basis.vector(spec.coefficient_table[best].tolist())
    runs = res.num_evals + 1
    return VqaOutcome(
        candidate,
        res.num_evals,
        runs * plan.depth,
        runs * plan.cnot_count,
        cfg.shots,
        plan.depth,
        plan.cnot_count,
        q,
        res.best_value,
    )


def _finish(
    algorithm: str,
    basis: LatticeBasis,
    found: tuple[int, ...] | None,
    lambda1_sq: int | None,
    runs: list[RunLog],
    **extra: Any,
) -> SolveRecord:
    if lambda1_sq is None:
        lambda1_sq = shortest_vector_oracle(basis).norm_sq
    if found is None:
        norm_sq, success, ar = None, False, 0.0
    else:
        norm_sq = sum(x * x for x in found)
        if norm_sq < lambda1_sq:
            raise LatticeInvariantError(
                f"found vector of squared norm {norm_sq} below lambda1^2 = {lambda1_sq}"
            )
        success = norm_sq == lambda1_sq
        ar = math.sqrt(lambda1_sq / norm_sq)
    return SolveRecord(
        algorithm=algorithm,
        instance_id=extra.pop("instance_id", ""),
        set_name=extra.pop("set_name", ""),
        dim=basis.dim,
        lambda1_sq=lambda1_sq,
        found=found,
        found_norm_sq=norm_sq,
        success=success,
        approx_ratio=ar,
        depth_total=sum(r.depth_used for r in runs),
        cnot_total=sum(r.cnots_used for r in runs),
        vqa_runs=len(runs),
        evals_total=sum(r.evals for r in runs),
        runs=runs,
        **extra,
    )


def _log(i: int, out: VqaOutcome, accepted: bool) -> RunLog:
    return RunLog(
        i,
        out.num_qubits,
        out.evals,
        out.plan_depth,
        out.plan_cnots,
        out.depth_used,
        out.cnots_used,
        out.candidate.norm_sq if out.candidate is not None else None,
        accepted,
    )


def ipsa(
    basis: LatticeBasis,
    cfg: SolverConfig | None = None,
    rng: np.random.Generator | None = None,
    lambda1_sq: int | None = None,
    algorithm: str = "ipsa",
) -> SolveRecord:
    """Iterative partition search over the 1-tailed spaces Y_i.

    A stack of partition indices drives the search. Whenever the VQA on Y_i
    returns a vector shorter than b_i, that vector replaces b_i (its
    coefficient on b_i is 1, so the lattice is unchanged), the basis is
    re-sorted and Y_i down to Y_r are pushed, r being the vector's new
    position, so the smaller partitions are revisited first.
    """
    if basis.dim < 2:
        raise ValueError("IPSA needs dim >= 2")
    cfg = cfg or default_config(algorithm)
    rng = rng if rng is not None else np.random.default_rng()
    n = basis.dim
    bits = cfg.bits or ipsa_bits(n)
    original = basis
    current, _ = sort_basis(basis)
    stack = list(range(n, 0, -1))  # top of stack is the end of the list
    runs: list[RunLog] = []
    updates = violations = 0
    breached = False
    while stack:
        i = stack.pop()
        if i == 1:
            continue
        if len(runs) >= cfg.max_vqa_runs:
            breached = True
            break
        spec = build_partition(PartitionKind.TAILED_Y, i, n, bits)
        out = run_vqa(current, spec, cfg, rng)
        v = out.candidate
        accepted = v is not None and v.norm_sq < current.norms_sq[i - 1]
        runs.append(_log(i, out, accepted))
        if not accepted:
            continue
        current = replace_preserving_lattice(current, i - 1, v)
        updates += 1
        if cfg.check_lattice and not lattice_equal(original, current):
            violations += 1
            raise LatticeInvariantError("IPSA basis update changed the lattice")
        current, _ = sort_basis(current)
        r = current.rows.index(v.embedding) + 1
        stack.extend(range(i, r - 1, -1))
    return _finish(
        algorithm,
        original,
        current.rows[0],
        lambda1_sq,
        runs,
        basis_updates=updates,
        lattice_violations=violations,
        cap_breached=breached,
        error=f"VQA run cap of {cfg.max_vqa_runs} reached" if breached else None,
    )


def iqoap(
    basis: LatticeBasis,
    cfg: SolverConfig | None = None,
    rng: np.random.Generator | None = None,
    lambda1_sq: int | None = None,
) -> SolveRecord:
    """Fixed-iteration refinement over the full coefficient cube.

    Each round's vector may replace the longest row b_j that it beats in norm
    and on which its coefficient is +-1 (lowest index on ties). Rounds without
    such a row are counted as ineffective.
    """
    if basis.dim < 2:
        raise ValueError("IQOAP needs dim >= 2")
    cfg = cfg or default_config("iqoap")
    rng = rng if rng is not None else np.random.default_rng()
    n = basis.dim
    spec = build_partition(PartitionKind.FULL_CUBE, n, n, cfg.bits or 2)
    original = current = basis
    runs: list[RunLog] = []
    updates = ineffective = violations = 0
    for _ in range(cfg.iterations):
        out = run_vqa(current, spec, cfg, rng)
        v = out.candidate
        target = None
        if v is not None:
            c = coordinates_of(current, v.embedding)
            eligible = [
                j for j in range(n) if v.norm_sq < current.norms_sq[j] and abs(c[j]) == 1
            ]
            if eligible:
                target = max(eligible, key=lambda j: (current.norms_sq[j], -j))
        runs.append(_log(n, out, target is not None))
        if target is None:
            ineffective += 1
            continue
        current = replace_preserving_lattice(current, target, v)
        updates += 1
        if cfg.check_lattice and not lattice_equal(original, current):
            violations += 1
            raise LatticeInvariantError("IQOAP basis update changed the lattice")
    return _finish(
        "iqoap",
        original,
        current.shortest_row(),
        lambda1_sq,
        runs,
        basis_updates=updates,
        ineffective_iterations=ineffective,
        lattice_violations=violations,
    )


def psa(
    basis: LatticeBasis,
    k: int,
    cfg: SolverConfig | None = None,
    rng: np.random.Generator | None = None,
    lambda1_sq: int | None = None,
) -> SolveRecord:
    """Non-iterative k-PSA: one VQA per partition X_1..X_n, global minimum wins."""
    n = basis.dim
    if n < 2:
        raise ValueError("PSA needs dim >= 2")
    need = (n - 1) * k + (k - 1)
    if need > MAX_QUBITS:
        raise EncodingError(f"{k}-PSA at n={n} needs {need} qubits (> {MAX_QUBITS})")
    cfg = cfg or default_config(f"{k}-psa")
    rng = rng if rng is not None else np.random.default_rng()
    runs: list[RunLog] = []
    best: LatticeVector | None = None
    for i in range(1, n + 1):
        spec = build_partition(PartitionKind.PSA_X, i, n, k)
        if spec.num_qubits == 0:
            cand = basis.vector(spec.coefficient_table[0].tolist())
            better = best is None or cand.norm_sq < best.norm_sq
            best = cand if better else best
            continue
        out = run_vqa(basis, spec, cfg, rng)
        v = out.candidate
        better = v is not None and (best is None or v.norm_sq < best.norm_sq)
        runs.append(_log(i, out, better))
        if better:
            best = v
    return _finish(
        f"{k}-psa",
        basis,
        best.embedding if best is not None else None,
        lambda1_sq,
        runs,
        basis_updates=0,
    )


def lll_baseline(basis: LatticeBasis, lambda1_sq: int | None = None) -> SolveRecord:
    """Classical reference: shortest row of the LLL-reduced basis."""
    red = lll_reduce(basis)
    return _finish("lll", basis, red.shortest_row(), lambda1_sq, [], basis_updates=0)


def solve(
    algorithm: str,
    basis: LatticeBasis,
    rng: np.random.Generator,
    cfg: SolverConfig | None = None,
    lambda1_sq: int | None = None,
) -> SolveRecord:
    """Dispatch on an algorithm tag: ipsa, ipsa-qaoa, iqoap, k-psa or lll."""
    tag = algorithm.lower()
    if tag == "lll":
        return lll_baseline(basis, lambda1_sq)
    cfg = cfg or default_config(tag)
    if tag in ("ipsa", "ipsa-qaoa"):
        return ipsa(basis, cfg, rng, lambda1_sq, algorithm=tag)
    if tag == "iqoap":
        return iqoap(basis, cfg, rng, lambda1_sq)
    k = parse_psa_k(tag)
    if k is not None:
        return psa(basis, k, cfg, rng, lambda1_sq)
    raise ValueError(f"unknown algorithm {algorithm!r}")
