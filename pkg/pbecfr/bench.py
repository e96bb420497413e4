"""Benchmark suites: CFR vs PBE-CFR wall time and worst-case local regret.

Each instance builds its own game and runs every (algorithm, T) pair, so
instances are independent and can be spread over worker processes.
Failures are recorded per instance and the suite carries on.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from tqdm import tqdm

from .calculus import regret
from .errors import EfgError
from .game import Game
from .games import GenGoofParams, bargain_game, gen_goof, private_gen_goof, random_game, tiny_preset
from .solvers import ALGORITHMS, SolveConfig, solve
from .verify import worst_case_local_regret

log = logging.getLogger(__name__)

GENERATORS = ("gengoof", "private-gengoof", "random", "bargain-tiny")

ROW_COLUMNS = (
    "instance", "seed", "generator", "algorithm", "iterations",
    "infosets", "nodes", "wall_ms", "worst_case_local_regret", "exploitability",
    "status", "error",
)


@dataclass(frozen=True)
class SuiteSpec:
    generator: str = "private-gengoof"
    k: int = 3
    instances: int = 10
    seed: int = 0
    iterations: Tuple[int, ...] = (500,)
    u_max: float = 10.0
    algorithms: Tuple[str, ...] = ALGORITHMS
    random_nodes: int = 200

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise EfgError(f"unknown generator {self.generator!r}, expected one of {GENERATORS}")
        if self.instances < 1:
            raise EfgError(f"instances must be >= 1, got {self.instances}")
        if not self.iterations or min(self.iterations) < 1:
            raise EfgError("iterations must be a non-empty list of positive counts")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise EfgError(f"unknown algorithms {sorted(unknown)}")


@dataclass
class BenchRow:
    instance: int
    seed: int
    generator: str
    algorithm: str
    iterations: int
    infosets: int = 0
    nodes: int = 0
    wall_ms: float = 0.0
    worst_case_local_regret: float = float("nan")
    exploitability: float = float("nan")
    status: str = "ok"
    error: str = ""


@dataclass
class BenchReport:
    suite: SuiteSpec
    rows: List[BenchRow] = field(default_factory=list)

    def summary(self) -> Dict[str, Dict[str, Dict[str, float]]]:
        """Means of the ok rows, keyed by algorithm then T."""
        out: Dict[str, Dict[str, Dict[str, float]]] = {}
        for alg in self.suite.algorithms:
            per_t: Dict[str, Dict[str, float]] = {}
            for t in self.suite.iterations:
                ok = [r for r in self.rows if r.algorithm == alg and r.iterations == t and r.status == "ok"]
                if not ok:
                    continue
                per_t[str(t)] = {
                    "instances": len(ok),
                    "wall_ms": sum(r.wall_ms for r in ok) / len(ok),
                    "worst_case_local_regret": sum(r.worst_case_local_regret for r in ok) / len(ok),
                    "exploitability": sum(r.exploitability for r in ok) / len(ok),
                    "infosets": sum(r.infosets for r in ok) / len(ok),
                }
            out[alg] = per_t
        return out

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r.status != "ok")

    def to_json(self) -> Dict[str, Any]:
        from . import __version__

        suite = asdict(self.suite)
        return {
            "version": __version__,
            "suite": suite,
            "summary": self.summary(),
            "failures": self.failures,
            "rows": [asdict(r) for r in self.rows],
        }

    def write_json(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n", encoding="utf-8")

    def write_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(ROW_COLUMNS)
            for r in self.rows:
                w.writerow([
                    r.instance, r.seed, r.generator, r.algorithm, r.iterations,
                    r.infosets, r.nodes, f"{r.wall_ms:.3f}", repr(r.worst_case_local_regret),
                    repr(r.exploitability), r.status, r.error,
                ])


def read_csv(path: Union[str, Path]) -> List[BenchRow]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    return [
        BenchRow(
            instance=int(r["instance"]),
            seed=int(r["seed"]),
            generator=r["generator"],
            algorithm=r["algorithm"],
            iterations=int(r["iterations"]),
            infosets=int(r["infosets"]),
            nodes=int(r["nodes"]),
            wall_ms=float(r["wall_ms"]),
            worst_case_local_regret=float(r["worst_case_local_regret"]),
            exploitability=float(r["exploitability"]),
            status=r["status"],
            error=r["error"],
        )
        for r in rows
    ]


def build_instance(suite: SuiteSpec, seed: int) -> Game:
    if suite.generator == "gengoof":
        return gen_goof(GenGoofParams(k=suite.k, u_max=suite.u_max, seed=seed))
    if suite.generator == "private-gengoof":
        return private_gen_goof(GenGoofParams(k=suite.k, u_max=suite.u_max, seed=seed))
    if suite.generator == "bargain-tiny":
        return bargain_game(tiny_preset(seed))
    return random_game(seed, max_nodes=suite.random_nodes)


def run_instance(suite: SuiteSpec, instance: int) -> List[BenchRow]:
    seed = suite.seed + instance
    base = dict(instance=instance, seed=seed, generator=suite.generator)
    try:
        game = build_instance(suite, seed)
    except EfgError as e:
        return [
            BenchRow(algorithm=alg, iterations=t, status="error", error=str(e), **base)
            for t in suite.iterations for alg in suite.algorithms
        ]

    rows = []
    for t in suite.iterations:
        for alg in suite.algorithms:
            row = BenchRow(algorithm=alg, iterations=t, infosets=len(game.infosets), nodes=game.num_nodes, **base)
            try:
                result = solve(game, SolveConfig(iterations=t, seed=seed, algorithm=alg))
                # solver time only; checkpoint evaluation is excluded
                row.wall_ms = result.log.final.wall_ms
                row.worst_case_local_regret = worst_case_local_regret(game, result.assessment)
                row.exploitability = regret(game, result.profile).total
            except EfgError as e:
                row.status, row.error = "error", str(e)
                log.warning("instance %d (%s, T=%d) failed: %s", instance, alg, t, e)
            rows.append(row)
    return rows


def run_suite(suite: SuiteSpec, jobs: int = 1, progress: bool = False) -> BenchReport:
    report = BenchReport(suite)
    indices = range(suite.instances)
    bar = tqdm(total=suite.instances, desc=f"bench {suite.generator}", leave=False, disable=not progress)
    if jobs <= 1:
        for i in indices:
            report.rows.extend(run_instance(suite, i))
            bar.update(1)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(run_instance, suite, i): i for i in indices}
            for fut in as_completed(futures):
                try:
                    report.rows.extend(fut.result())
                except Exception as e:  # worker crashed outside solver code
                    i = futures[fut]
                    log.warning("instance %d crashed: %s", i, e)
                    report.rows.extend(
                        BenchRow(i, suite.seed + i, suite.generator, alg, t, status="error", error=repr(e))
                        for t in suite.iterations for alg in suite.algorithms
                    )
                bar.update(1)
    bar.close()
    report.rows.sort(key=lambda r: (r.instance, r.iterations, r.algorithm))
    log.info("bench %s: %d rows, %d failures", suite.generator, len(report.rows), report.failures)
    return report
