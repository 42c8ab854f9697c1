"""Instance sets, experiment orchestration and metric summaries."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .encoding import parse_psa_k, qubit_requirement
from .lattice import (
    LatticeBasis,
    LatticeError,
    lattice_equal,
    lll_reduce,
    random_unimodular,
    shortest_vector_oracle,
    sort_basis,
)
from .optimizer import OptimizeConfig
from .solvers import SolveRecord, default_config, solve

log = logging.getLogger(__name__)

INSTANCE_SCHEMA = "svpvqa-instance/1"
RECORD_SCHEMA = "svpvqa-record/1"
CSV_COLUMNS = (
    "set", "algorithm", "dim", "sr", "aar",
    "d_total_med", "d_total_q1", "d_total_q3",
    "c_total_med", "c_total_q1", "c_total_q3", "n_instances",
)


class VerificationError(RuntimeError):
    pass


def mix_seed(*parts: Any) -> int:
    """Stable 64-bit seed from arbitrary printable parts."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class GenParams:
    sample_bound: int = 10
    lll_delta: str = "3/4"
    uni_ops: int = 20
    entry_bound: int = 150
    max_ratio: str = "0.05"
    max_attempts: int = 200_000


@dataclass
class InstanceFile:
    set_name: str
    instance_id: str
    dim: int
    seed: int
    basis: list[list[int]]
    lambda1_sq: int
    params: dict[str, Any]
    reduced_basis: list[list[int]] | None = None
    lll_min_norm_sq: int | None = None
    schema: str = INSTANCE_SCHEMA

    @property
    def lattice(self) -> LatticeBasis:
        return LatticeBasis.from_rows(self.basis)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "InstanceFile":
        d = json.loads(text)
        if d.get("schema") != INSTANCE_SCHEMA:
            raise ValueError(f"unexpected instance schema {d.get('schema')!r}")
        return cls(**d)

    def verify(self) -> None:
        """Re-run the oracle and the set-specific checks; raise VerificationError on mismatch."""
        lat = self.lattice
        sv = shortest_vector_oracle(lat)
        if sv.norm_sq != self.lambda1_sq:
            raise VerificationError(
                f"{self.instance_id}: stored lambda1^2={self.lambda1_sq}, oracle gives {sv.norm_sq}"
            )
        if self.reduced_basis is not None and not lattice_equal(
            LatticeBasis.from_rows(self.reduced_basis), lat
        ):
            raise VerificationError(f"{self.instance_id}: scrambled basis changed the lattice")
        if self.lll_min_norm_sq is not None:
            ratio = Fraction(self.params["max_ratio"])
            lm = self.lll_min_norm_sq
            if not (lm > self.lambda1_sq and lm <= (1 + ratio) ** 2 * self.lambda1_sq):
                raise VerificationError(f"{self.instance_id}: LLL gap outside (0, {ratio}]")


def _random_basis(dim: int, bound: int, rng: np.random.Generator) -> LatticeBasis:
    while True:
        m = rng.integers(-bound, bound + 1, size=(dim, dim))
        try:
            return LatticeBasis.from_rows(m.tolist())
        except LatticeError:
            continue


def _params_dict(params: GenParams, keys: Sequence[str]) -> dict[str, Any]:
    d = asdict(params)
    return {k: d[k] for k in keys}


def gen_benchmark(dim: int, count: int, seed: int, params: GenParams = GenParams()) -> list[InstanceFile]:
    """Random lattices, LLL-reduced and then scrambled by a random unimodular map."""
    if not 2 <= dim <= 8:
        raise ValueError("benchmark dimension must be in [2, 8]")
    if count < 1:
        raise ValueError("count must be positive")
    out = []
    for idx in range(count):
        inst_seed = mix_seed(seed, "benchmark", dim, idx)
        rng = np.random.default_rng(inst_seed)
        lat = _random_basis(dim, params.sample_bound, rng)
        lam = shortest_vector_oracle(lat).norm_sq
        red = lll_reduce(lat, params.lll_delta)
        red_sorted = sort_basis(red)[0].rows
        for _ in range(params.max_attempts):
            u = random_unimodular(dim, params.uni_ops, rng, params.entry_bound)
            scr = u.apply(red)
            # never hand out a basis that is already the sorted reduced one
            if sort_basis(scr)[0].rows != red_sorted:
                break
        else:
            raise RuntimeError("could not draw a nontrivial scrambling")
        out.append(
            InstanceFile(
                set_name="benchmark",
                instance_id=f"benchmark-n{dim}-{idx:04d}",
                dim=dim,
                seed=inst_seed,
                basis=[list(r) for r in scr.rows],
                lambda1_sq=lam,
                params=_params_dict(params, ("sample_bound", "lll_delta", "uni_ops", "entry_bound")),
                reduced_basis=[list(r) for r in red.rows],
            )
        )
    return out


def gen_challenging(dim: int, count: int, seed: int, params: GenParams = GenParams()) -> list[InstanceFile]:
    """Random lattices whose LLL basis misses the shortest vector by a small margin.

    Kept instances satisfy ``lambda1 < min ||b_LLL|| <= (1 + max_ratio) lambda1``.
    The stored basis is the LLL-reduced one; no scrambling is applied.
    """
    if count < 1:
        raise ValueError("count must be positive")
    ratio = Fraction(params.max_ratio)
    bound = (1 + ratio) ** 2
    out: list[InstanceFile] = []
    attempts = 0
    while len(out) < count:
        if attempts >= params.max_attempts:
            raise RuntimeError(
                f"acceptance rate too low: {len(out)} of {count} instances after {attempts} attempts"
            )
        inst_seed = mix_seed(seed, "challenging", dim, attempts)
        attempts += 1
        rng = np.random.default_rng(inst_seed)
        lat = _random_basis(dim, params.sample_bound, rng)
        red = lll_reduce(lat, params.lll_delta)
        lam = shortest_vector_oracle(red).norm_sq
        lm = red.min_norm_sq()
        if not (lm > lam and lm <= bound * lam):
            continue
        out.append(
            InstanceFile(
                set_name="lll-challenging",
                instance_id=f"lll-challenging-n{dim}-{len(out):04d}",
                dim=dim,
                seed=inst_seed,
                basis=[list(r) for r in red.rows],
                lambda1_sq=lam,
                params=_params_dict(params, ("sample_bound", "lll_delta", "max_ratio")),
                lll_min_norm_sq=lm,
            )
        )
    log.info("challenging set: %d instances from %d attempts", count, attempts)
    return out


def write_instances(instances: Iterable[InstanceFile], out_dir: str | os.PathLike) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for inst in instances:
        p = out / f"{inst.instance_id}.json"
        p.write_text(inst.to_json(), encoding="utf-8")
        paths.append(p)
    return paths


def load_instance(path: str | os.PathLike) -> InstanceFile:
    return InstanceFile.from_json(Path(path).read_text(encoding="utf-8"))


def load_instances(in_dir: str | os.PathLike) -> list[InstanceFile]:
    return [load_instance(p) for p in sorted(Path(in_dir).glob("*.json"))]


# ---------------------------------------------------------------- experiments

@dataclass(frozen=True)
class AlgorithmSpec:
    """An algorithm tag plus optional solver overrides (layers, shots, ...)."""

    tag: str
    overrides: tuple[tuple[str, Any], ...] = ()

    @classmethod
    def make(cls, tag: str, **overrides: Any) -> "AlgorithmSpec":
        return cls(tag.lower(), tuple(sorted((k, v) for k, v in overrides.items() if v is not None)))

    def config(self):
        if self.tag == "lll":
            return None
        kw = dict(self.overrides)
        opt = {k: kw.pop(k) for k in ("xtol", "ftol", "max_evals") if k in kw}
        if opt:
            kw["optimizer"] = OptimizeConfig(**opt)
        return default_config(self.tag, **kw)


def parse_algorithms(text: str) -> list[AlgorithmSpec]:
    specs = []
    for tag in (t.strip().lower() for t in text.split(",") if t.strip()):
        if tag not in ("ipsa", "ipsa-qaoa", "iqoap", "lll") and parse_psa_k(tag) is None:
            raise ValueError(f"unknown algorithm {tag!r}")
        specs.append(AlgorithmSpec.make(tag))
    return specs


def run_pair(inst: InstanceFile, algo: AlgorithmSpec, master_seed: int) -> SolveRecord:
    """Solve one (instance, algorithm) pair; exceptions become flagged records."""
    pair_seed = mix_seed(master_seed, inst.instance_id, algo.tag)
    try:
        rec = solve(
            algo.tag,
            inst.lattice,
            np.random.default_rng(pair_seed),
            algo.config(),
            lambda1_sq=inst.lambda1_sq,
        )
    except Exception as exc:  # isolate per-pair failures
        log.warning("pair (%s, %s) failed: %s", inst.instance_id, algo.tag, exc)
        rec = SolveRecord(
            algorithm=algo.tag, instance_id=inst.instance_id, set_name=inst.set_name,
            dim=inst.dim, lambda1_sq=inst.lambda1_sq, found=None, found_norm_sq=None,
            success=False, approx_ratio=0.0, depth_total=0, cnot_total=0, vqa_runs=0,
            evals_total=0, basis_updates=0,
            error=f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}",
        )
    rec.instance_id = inst.instance_id
    rec.set_name = inst.set_name
    rec.seeds = {"master": master_seed, "pair": pair_seed}
    return rec


def _run_pair_args(args):
    return run_pair(*args)


def run_experiment(
    instances: Sequence[InstanceFile],
    algorithms: Sequence[AlgorithmSpec],
    jobs: int = 1,
    seed: int = 0,
) -> list[SolveRecord]:
    """All (instance, algorithm) pairs, sorted by (instance id, algorithm)."""
    pairs = sorted(
        ((inst, algo, seed) for inst in instances for algo in algorithms),
        key=lambda t: (t[0].instance_id, t[1].tag, t[1].overrides),
    )
    if jobs <= 1 or len(pairs) <= 1:
        return [run_pair(*p) for p in pairs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_pair_args, pairs, chunksize=1))


def record_to_json(rec: SolveRecord) -> str:
    d = rec.to_dict()
    d["schema"] = RECORD_SCHEMA
    return json.dumps(d, indent=1, sort_keys=True) + "\n"


def record_from_json(text: str) -> SolveRecord:
    d = json.loads(text)
    if d.pop("schema", None) != RECORD_SCHEMA:
        raise ValueError("unexpected record schema")
    return SolveRecord.from_dict(d)


def write_records(records: Iterable[SolveRecord], out_dir: str | os.PathLike) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for rec in records:
        p = out / f"{rec.instance_id}__{rec.algorithm}.json"
        p.write_text(record_to_json(rec), encoding="utf-8")
        paths.append(p)
    return paths


def load_records(in_dir: str | os.PathLike) -> list[SolveRecord]:
    return [record_from_json(p.read_text(encoding="utf-8")) for p in sorted(Path(in_dir).glob("*__*.json"))]


def recompute_totals(rec: SolveRecord) -> tuple[int, int]:
    """D_total and C_total rebuilt from the per-run log."""
    d = sum((r.evals + 1) * r.plan_depth for r in rec.runs)
    c = sum((r.evals + 1) * r.plan_cnots for r in rec.runs)
    return d, c


# ---------------------------------------------------------------- summaries

@dataclass
class MetricsRow:
    set: str
    algorithm: str
    dim: int
    sr: float
    aar: float
    d_total_med: float
    d_total_q1: float
    d_total_q3: float
    c_total_med: float
    c_total_q1: float
    c_total_q3: float
    n_instances: int


@dataclass
class MetricsSummary:
    rows: list[MetricsRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_table(self) -> str:
        head = f"{'set':<16} {'algorithm':<10} {'n':>2} {'SR':>6} {'AAR':>7} {'D_med':>10} {'C_med':>10} {'N':>4}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(
                f"{r.set:<16} {r.algorithm:<10} {r.dim:>2} {r.sr:>6.3f} {r.aar:>7.4f} "
                f"{r.d_total_med:>10.0f} {r.c_total_med:>10.0f} {r.n_instances:>4}"
            )
        return "\n".join(lines) + "\n"

    def plot_series(self) -> dict[str, Any]:
        """Per (set, algorithm): metric arrays indexed by dimension."""
        series: dict[str, Any] = {}
        for r in self.rows:
            s = series.setdefault(f"{r.set}/{r.algorithm}", {k: [] for k in CSV_COLUMNS[2:]})
            for k in CSV_COLUMNS[2:]:
                s[k].append(getattr(r, k))
        return series

    def get(self, set_name: str, algorithm: str, dim: int) -> MetricsRow:
        for r in self.rows:
            if (r.set, r.algorithm, r.dim) == (set_name, algorithm, dim):
                return r
        raise KeyError((set_name, algorithm, dim))


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return repr(round(x, 10))
    return str(x)


def summarize(records: Sequence[SolveRecord]) -> MetricsSummary:
    """SR, AAR and median/quartiles of D_total and C_total per (set, algorithm, dim).

    Records carrying an error and no vector are left out of the metrics.
    """
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple[str, str, int], list[SolveRecord]] = {}
    for rec in records:
        if rec.found is None and rec.error is not None:
            continue
        groups.setdefault((rec.set_name, rec.algorithm, rec.dim), []).append(rec)
    rows = []
    for key in sorted(groups):
        recs = sorted(groups[key], key=lambda r: r.instance_id)
        succ = sum(r.success for r in recs)
        ars = np.array([r.approx_ratio for r in recs], dtype=np.float64)
        d = np.array([r.depth_total for r in recs], dtype=np.float64)
        c = np.array([r.cnot_total for r in recs], dtype=np.float64)
        dq = np.percentile(d, [50, 25, 75], method="linear")
        cq = np.percentile(c, [50, 25, 75], method="linear")
        rows.append(
            MetricsRow(
                key[0], key[1], key[2], succ / len(recs), float(np.sort(ars).mean()),
                float(dq[0]), float(dq[1]), float(dq[2]),
                float(cq[0]), float(cq[1]), float(cq[2]), len(recs),
            )
        )
    return MetricsSummary(rows)


# ---------------------------------------------------------------- qubit table

QUBIT_CONFIGS = {
    "ipsa": (4, 5, 6),
    "ipsa-qaoa": (4, 5, 6),
    "iqoap": (4, 5, 6),
    "3-psa": (4, 5, 6),
    "4-psa": (4, 5),
    "5-psa": (4,),
}


def qubit_table(max_dim: int = 8) -> dict[str, Any]:
    """Max-qubit counts for each configured (algorithm, n) and the two scaling curves."""
    return {
        "configurations": {
            algo: {n: qubit_requirement(algo, n) for n in dims} for algo, dims in QUBIT_CONFIGS.items()
        },
        "curves": {
            "ipsa": {n: qubit_requirement("ipsa", n) for n in range(2, max_dim + 1)},
            "psa-lll": {n: qubit_requirement("psa-lll", n) for n in range(2, max_dim + 1)},
        },
    }
