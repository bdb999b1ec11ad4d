"""Command line entry point: ``treecoh run --config cfg.json --out report.json``.

A config is one JSON document::

    {
      "d": 2, "q": 2, "N": 3,                 # q may be a list, one per factor
      "weights": ["1", "1"], "ring": "Z",
      "horoballs": [{"ends": ["up", "up"], "r": "1"},
                    {"ends": ["lowest", "lowest"], "r": "1"}],
      "margin": 2,
      "windows": {"death": 2, "persistence": 1, "stages": [1, 2]},
      "r_values": [-1, 0, 1], "primes": [2, 3], "samples": null,
      "checks": ["horoball_vanishing", "corner_model"]
    }

An end is ``"up"`` (the distinguished end), ``"lowest"``/``"highest"``
(descend from x_0), or ``{"spine": h, "rule": ..., "choices": [...]}``
anchored at x_h.  Exit status: 0 when every record passes or is not
applicable, 1 on any failure, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .errors import ConfigError, TreecohError, TruncationDepthError
from .exactalg import ZZ, CoefficientRing, SparseIntMatrix, minor_divisors, smith

REPORT_SCHEMA = 1


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


@dataclass
class Config:
    d: int
    q: List[int]
    N: int
    weights: List[Fraction]
    ring: CoefficientRing = ZZ
    horoballs: List[dict] = field(default_factory=list)
    margin: Fraction = Fraction(0)
    death_window: int = 2
    persistence_window: int = 1
    stages: Optional[List[int]] = None
    r_values: List[int] = field(default_factory=lambda: [-1, 0, 1])
    primes: List[int] = field(default_factory=lambda: [2, 3])
    samples: Optional[int] = None
    checks: List[str] = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Config":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = {"d", "q", "N", "weights", "ring", "horoballs", "margin", "windows", "r_values", "primes",
                 "samples", "checks"}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            d = int(obj.get("d", 2))
            q = obj.get("q", 2)
            q = [int(x) for x in q] if isinstance(q, list) else [int(q)] * d
            N = int(obj.get("N", 3))
            weights = [Fraction(str(w)) for w in obj.get("weights", [1] * d)]
            ring = CoefficientRing.parse(str(obj.get("ring", "Z")))
            win = obj.get("windows", {})
            cfg = cls(
                d=d, q=q, N=N, weights=weights, ring=ring,
                horoballs=list(obj.get("horoballs", [])),
                margin=Fraction(str(obj.get("margin", 0))),
                death_window=int(win.get("death", 2)),
                persistence_window=int(win.get("persistence", 1)),
                stages=[int(s) for s in win["stages"]] if "stages" in win else None,
                r_values=[int(r) for r in obj.get("r_values", [-1, 0, 1])],
                primes=[int(p) for p in obj.get("primes", [2, 3])],
                samples=None if obj.get("samples") is None else int(obj["samples"]),
                checks=[str(c) for c in obj.get("checks", [])],
                raw=obj,
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.d < 1 or len(self.q) != self.d or len(self.weights) != self.d:
            raise ConfigError("d, q and weights must agree in length")
        if any(x < 2 for x in self.q):
            raise ConfigError("every branching number q must be at least 2")
        if any(w <= 0 for w in self.weights):
            raise ConfigError("weights must be positive")
        if self.N < 1:
            raise ConfigError("depth N must be at least 1")
        for h in self.horoballs:
            ends = h.get("ends") if isinstance(h, dict) else None
            if not isinstance(ends, list) or len(ends) != self.d:
                raise ConfigError("each horoball needs one end per factor")
            for e in ends:
                if not (e in ("up", "lowest", "highest") or isinstance(e, dict)):
                    raise ConfigError(f"cannot parse end {e!r}")
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks: {unknown}; known: {sorted(CHECKS)}")
        for c in self.checks:
            need, why = CHECKS[c].required_depth(self)
            if need > self.N:
                raise TruncationDepthError(f"check {c!r} needs depth N >= {need} ({why}); got N = {self.N}")

    def canonical(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    # builders ------------------------------------------------------------
    def complex(self, N: Optional[int] = None):
        from .prodcomplex import ProductComplex
        from .treegeo import build_regular

        N = self.N if N is None else N
        return ProductComplex([build_regular(q, N) for q in self.q], self.weights)

    def horoball_specs(self, pc) -> list:
        return [parse_horoball(pc, h) for h in self.horoballs]


def parse_end(tree, obj):
    from .treegeo import RayEnd, distinguished_end

    if obj == "up":
        return distinguished_end(tree)
    if obj in ("lowest", "highest"):
        return RayEnd(tree.x(0), obj)
    if isinstance(obj, dict):
        return RayEnd(tree.x(int(obj.get("spine", 0))), obj.get("rule", "lowest"), tuple(obj.get("choices", ())))
    raise ConfigError(f"cannot parse end {obj!r}")


def parse_horoball(pc, obj):
    from .prodcomplex import HoroballSpec

    ends = obj.get("ends")
    if not isinstance(ends, list) or len(ends) != pc.d:
        raise ConfigError("each horoball needs one end per factor")
    return HoroballSpec(tuple(parse_end(t, e) for t, e in zip(pc.factors, ends)), Fraction(str(obj.get("r", 0))))


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    run: Callable[["Config", int], Tuple[str, dict]]
    required_depth: Callable[["Config"], Tuple[int, str]]


def _verdict(ok: Optional[bool]) -> str:
    return "not-applicable" if ok is None else ("pass" if ok else "fail")


def run_exactalg_oracle(cfg: Config, seed: int) -> Tuple[str, dict]:
    rng = random.Random(seed)
    n = cfg.samples or 500
    bad = []
    for k in range(n):
        r, c = rng.randint(1, 12), rng.randint(1, 12)
        dens = rng.uniform(0.1, 0.9)
        rows = [[rng.randint(-6, 6) if rng.random() < dens else 0 for _ in range(c)] for _ in range(r)]
        A = SparseIntMatrix.from_dense(rows)
        if smith(A).divisors != minor_divisors(A):
            bad.append(k)
    return _verdict(not bad), {"matrices": n, "mismatches": bad[:5]}


def run_horoball_vanishing(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .cohomo import corner_block_cohomology, corner_depth, eventual_death_check
    from .prodcomplex import Superlevel

    pc = cfg.complex()
    deaths, blocks = [], []
    ok = True
    for r in cfg.r_values:
        for k in range(cfg.d + 1):
            rep = eventual_death_check(pc, Superlevel(r), k, cfg.death_window, cfg.ring)
            ok &= rep.ok
            deaths.append(rep.to_json_obj())
        for m in range(0, cfg.N + 1):
            depth = corner_depth(cfg.d, m, r)
            g = corner_block_cohomology(cfg.complex(max(depth, 1)), m, r, cfg.ring)
            ok &= g.is_zero
            blocks.append({"m": m, "r": r, "depth": depth, "zero": g.is_zero})
    return _verdict(ok), {"deaths": deaths, "corner_blocks": blocks}


def run_sublevel_vanishing(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .cohomo import eventual_death_check
    from .prodcomplex import Sublevel

    pc = cfg.complex()
    out = []
    ok = True
    for r in cfg.r_values:
        for k in range(cfg.d):
            rep = eventual_death_check(pc, Sublevel(r), k, cfg.persistence_window, cfg.ring)
            ok &= rep.ok
            out.append(rep.to_json_obj())
        top = eventual_death_check(pc, Sublevel(r), cfg.d, cfg.persistence_window, cfg.ring)
        ok &= top.persists
        out.append(top.to_json_obj())
    return _verdict(ok), {"deaths": out}


def run_multi_horoball(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .cohomo import eventual_death_check
    from .prodcomplex import MultiComplement, check_disjointness

    pc = cfg.complex()
    specs = cfg.horoball_specs(pc)
    if not specs:
        return "not-applicable", {"reason": "no horoballs configured"}
    data: dict = {}
    ok = True
    if len(specs) > 1:
        disj = check_disjointness(pc, specs, cfg.margin)
        data["disjointness"] = disj.to_json_obj()
        ok &= disj.ok
    region = MultiComplement(specs)
    out = []
    for k in range(cfg.d):
        rep = eventual_death_check(pc, region, k, cfg.persistence_window, cfg.ring)
        ok &= rep.ok
        out.append(rep.to_json_obj())
    top = eventual_death_check(pc, region, cfg.d, cfg.persistence_window, cfg.ring)
    ok &= top.persists
    out.append(top.to_json_obj())
    data["deaths"] = out
    return _verdict(ok), data


def run_corner_model(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .cohomo import corner_crosscheck

    pc = cfg.complex()
    stages = cfg.stages or [n for n in (1, 2) if n < cfg.N]
    reps = [corner_crosscheck(pc, n, cfg.ring, seed=seed) for n in stages]
    return _verdict(all(r.ok for r in reps)), {"stages": [r.to_json_obj() for r in reps]}


def run_horosphere_tower(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .horosys import YSystem, default_m_values, window_lim_check

    pc = cfg.complex()
    sys_ = YSystem(pc, cfg.N).compute(default_m_values(pc, cfg.N))
    nested = sys_.nested()
    lim = window_lim_check(sys_)
    ok = all(nested.values()) and all(s.agree for s in sys_.members.values()) and lim.ok
    return _verdict(ok), {"system": sys_.to_json_obj(), "window_lim": lim.to_json_obj()}


def run_zero_chain(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .horosys import zero_chain_sweep

    rep = zero_chain_sweep(cfg.complex(), sample=cfg.samples, seed=seed)
    return _verdict(rep.ok), rep.to_json_obj()


def run_purity_division(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .horosys import YSystem, default_m_values, division_check

    pc = cfg.complex()
    sys_ = YSystem(pc, cfg.N).compute(default_m_values(pc, cfg.N), derivation="supported")
    purity = sys_.purity()
    div = [division_check(s.module, m, r) for m, s in sorted(sys_.members.items()) for r in cfg.primes]
    ok = all(purity.values()) and all(x.ok for x in div)
    return _verdict(ok), {"purity": {str(k): v for k, v in purity.items()}, "division": [x.to_json_obj() for x in div]}


def run_fiber_machinery(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .horosys import fiber_kernel_check
    from .prodcomplex import MultiComplement, fiber_cover

    pc = cfg.complex()
    specs = cfg.horoball_specs(pc)
    if not specs or cfg.d < 2:
        return "not-applicable", {"reason": "needs horoballs and at least two factors"}
    region = MultiComplement(specs)
    data = {"cover": [], "kernel": []}
    ok = True
    for w in range(cfg.d):
        cov = fiber_cover(pc, w, region)
        ok &= cov.ok
        data["cover"].append({"w": w, "ok": cov.ok, "uncovered": len(cov.uncovered),
                              "intersection_failures": len(cov.intersection_failures),
                              "dichotomy_failures": len(cov.dichotomy_failures)})
        if cfg.d == 2:
            ker = fiber_kernel_check(pc, w, region, cfg.ring, seed=seed)
            ok &= ker.ok
            data["kernel"].append({"w": w, **ker.to_json_obj()})
    return _verdict(ok), data


def run_diestel_leader(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .dl import check_action, dl_isomorphism, slab_cocompactness

    if cfg.d != 2 or cfg.q[0] != cfg.q[1]:
        return "not-applicable", {"reason": "needs two factors with equal branching"}
    q = cfg.q[0]
    iso = dl_isomorphism(q, cfg.N)
    act = check_action(q, cfg.samples or 10000, seed)
    slabs = {str(I): slab_cocompactness(q, I, cfg.N).to_json_obj() for I in [(0, 0), (0, 2), (1, 0)]}
    expected = {"(0, 0)": 1, "(0, 2)": 3, "(1, 0)": 0}
    slab_ok = all(slabs[k]["total"] == v for k, v in expected.items())
    ok = iso.ok and act.ok and slab_ok
    return _verdict(ok), {"isomorphism": iso.to_json_obj(), "action": act.to_json_obj(), "slabs": slabs}


def run_hcu_assembly(cfg: Config, seed: int) -> Tuple[str, dict]:
    from .cohomo import TowerWindow, hcu_assemble, w_space_tower

    pc = cfg.complex()
    specs = cfg.horoball_specs(pc)
    one = SparseIntMatrix.identity(1)
    two = SparseIntMatrix(1, 1, {(0, 0): 2})
    ident = hcu_assemble(TowerWindow.constant(1, 3, one))
    times2 = hcu_assemble(TowerWindow.constant(1, 3, two))
    oracle_ok = (ident.lim_rank == 1 and ident.lim_index.is_zero and ident.lim1_window.is_zero
                 and times2.lim_rank == 1 and times2.lim_index.invariant_factors == (4,)
                 and times2.lim1_window.invariant_factors == (2, 2))
    data = {"identity_tower": ident.to_json_obj(), "times_two_tower": times2.to_json_obj()}
    ok = oracle_ok
    if specs:
        rep = w_space_tower(pc, specs, [0, 1, 2], cfg.N, cfg.ring, cfg.death_window)
        data["w_space"] = rep.to_json_obj()
        ok &= rep.ok
    return _verdict(ok), data


def _depth(n: int, why: str) -> Callable[[Config], Tuple[int, str]]:
    return lambda cfg: (n, why)


CHECKS: Dict[str, Check] = {
    c.name: c
    for c in [
        Check("exactalg_oracle", run_exactalg_oracle, _depth(1, "no tree is built")),
        Check("horoball_vanishing", run_horoball_vanishing,
              lambda cfg: (cfg.death_window, "the death window must fit below the depth")),
        Check("sublevel_vanishing", run_sublevel_vanishing,
              lambda cfg: (cfg.persistence_window, "the persistence window must fit below the depth")),
        Check("multi_horoball", run_multi_horoball,
              lambda cfg: (cfg.persistence_window, "the persistence window must fit below the depth")),
        Check("corner_model", run_corner_model,
              lambda cfg: (max(cfg.stages or [1]) + 1, "corner stages need a later stage for f")),
        Check("horosphere_tower", run_horosphere_tower, _depth(3, "m > max beta(K_1) must meet stage N")),
        Check("zero_chain", run_zero_chain, _depth(3, "admissible m exist only from N = 3")),
        Check("purity_division", run_purity_division, _depth(1, "S_m lives at stage N >= 1")),
        Check("fiber_machinery", run_fiber_machinery, _depth(2, "fiber kernels need interior vertices")),
        Check("diestel_leader", run_diestel_leader, _depth(1, "the coded graph needs one level")),
        Check("hcu_assembly", run_hcu_assembly,
              lambda cfg: (cfg.death_window, "stable parts use stage N - window")),
    ]
}


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------


def _run_one(args) -> dict:
    obj, name, seed, timing = args
    cfg = Config.from_json_obj(obj)
    t0 = time.perf_counter()
    try:
        result, data = CHECKS[name].run(cfg, seed)
    except TreecohError as exc:
        result, data = "fail", {"error": {"type": type(exc).__name__, "message": str(exc)}}
    ms = round((time.perf_counter() - t0) * 1000) if timing else 0
    params = {"d": cfg.d, "q": cfg.q, "N": cfg.N, "weights": [str(w) for w in cfg.weights], "ring": str(cfg.ring),
              "seed": seed}
    return {"id": name, "params": params, "result": result, "data": data, "ms": ms}


def run(cfg: Config, seed: int = 0, threads: int = 1, timing: bool = True) -> dict:
    jobs = [(cfg.raw, name, seed, timing) for name in cfg.checks]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    return {"version": __version__, "schema": REPORT_SCHEMA, "config_hash": cfg.hash(), "records": records}


def exit_code(report: dict) -> int:
    return 1 if any(r["result"] == "fail" for r in report["records"]) else 0


def _error(kind: str, exc: Exception) -> int:
    json.dump({"error": kind, "type": type(exc).__name__, "reason": str(exc)}, sys.stderr)
    sys.stderr.write("\n")
    return 2


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="treecoh", description="Exact cohomology checks on products of trees.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the checks listed in a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="-")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--seed", type=int, default=0, help="affects sampling-based checks only")
    p_run.add_argument("--no-timing", action="store_true", help="write ms = 0 so reports are byte-identical")
    p_dl = sub.add_parser("dl-graph", help="export the coded Diestel-Leader graph as an edge-list CSV")
    p_dl.add_argument("--q", type=int, required=True)
    p_dl.add_argument("--N", type=int, required=True)
    p_dl.add_argument("--out", default="-")
    sub.add_parser("checks", help="list the known check ids")
    args = parser.parse_args(argv)

    if args.command == "checks":
        for name in CHECKS:
            print(name)
        return 0
    if args.command == "dl-graph":
        from .dl import dl_graph, edge_list_csv

        try:
            text = edge_list_csv(dl_graph(args.q, args.N))
        except TreecohError as exc:
            return _error("input", exc)
        _write(args.out, text)
        return 0

    try:
        with open(args.config) as fh:
            obj = json.load(fh)
        cfg = Config.from_json_obj(obj)
    except (OSError, json.JSONDecodeError, TreecohError) as exc:
        return _error("config", exc)
    if args.threads < 1:
        return _error("config", ConfigError("--threads must be at least 1"))
    report = run(cfg, args.seed, args.threads, not args.no_timing)
    _write(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return exit_code(report)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    sys.exit(main())
