"""Command-line front end: experiment campaigns, reports, verification.

Subcommands: volume, count, dirichlet, asymptotic, dichotomy, verify,
report.  Campaigns are pure functions of (config, seed): reruns are
bit-identical, and the CSV output contains no timing or environment data
so its bytes reproduce exactly.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import statistics
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .approx import ApproxCollection, integral_diverges, psi_one
from .counting import (
    CountRequest,
    InsufficientPrecision,
    count_solutions,
    default_dirichlet_constants,
    dirichlet_solve,
    verify_dirichlet,
)
from .sampler import SamplerConfig, deepen, sample_matrix
from .sring import REAL_PLACE, NormProfile, PlaceSet
from .volume import Region, volume_exact, volume_monte_carlo

MODES = ("volume", "count", "dirichlet", "asymptotic", "dichotomy", "verify", "report")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Schedule:
    """Geometric ladder at the real place, exponent-linear at finite places
    (T_p = p**(n * t_p) keeps the profile inside p**(nZ) by construction).

    Finite-place increments are discrete factors of p**n, so a place may
    pause for ``finite_every[p] - 1`` steps between increments; every place
    still grows without bound across the schedule, which is what the
    T -> infinity ordering needs.
    """

    real_start: Fraction
    real_factor: Fraction
    steps: int
    finite_start: tuple[tuple[int, int], ...]
    finite_step: tuple[tuple[int, int], ...]
    finite_every: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("schedule needs at least one step")
        if self.real_start < 1:
            raise ConfigError("real ladder must start at T_inf >= 1")
        if self.steps > 1 and self.real_factor <= 1:
            raise ConfigError("real ladder factor must exceed 1")
        if self.steps > 1 and any(s < 1 for _, s in self.finite_step):
            raise ConfigError("finite ladders must grow (step >= 1)")
        if any(e < 1 for _, e in self.finite_every):
            raise ConfigError("finite_every must be >= 1")

    def profile(self, n: int, index: int) -> NormProfile:
        t_inf = self.real_start * self.real_factor**index
        step = dict(self.finite_step)
        every = dict(self.finite_every)
        exps = {
            p: n * (t0 + step[p] * (index // every.get(p, 1)))
            for p, t0 in self.finite_start
        }
        return NormProfile.of(t_inf, exps)

    def profiles(self, n: int, max_product: Fraction | None = None) -> list[NormProfile]:
        out = []
        for i in range(self.steps):
            prof = self.profile(n, i)
            if max_product is not None and prof.product() > max_product and out:
                break
            out.append(prof)
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    places: PlaceSet
    dims: tuple[int, int]
    psi: ApproxCollection
    schedule: Schedule
    modulus: int = 1
    shift: tuple[Fraction, ...] = ()
    seed: int = 20260810
    precision: tuple[tuple[int, int], ...] = ()
    real_resolution: int = 2**64
    sample_count: int = 20
    mc_samples: int = 100_000
    dirichlet_constants: tuple[tuple[object, Fraction], ...] | None = None
    out: str = "out"
    formats: tuple[str, ...] = ("csv", "json")

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if (self.psi.m, self.psi.n) != tuple(self.dims):
            raise ConfigError("psi dimensions disagree with dims")
        self.psi.check_places(self.places)

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "places": list(self.places.primes),
            "dims": list(self.dims),
            "psi": self.psi.to_json(),
            "schedule": {
                "real_start": str(self.schedule.real_start),
                "real_factor": str(self.schedule.real_factor),
                "steps": self.schedule.steps,
                "finite_start": {str(p): t for p, t in self.schedule.finite_start},
                "finite_step": {str(p): s for p, s in self.schedule.finite_step},
                "finite_every": {str(p): e for p, e in self.schedule.finite_every},
            },
            "congruence": {
                "modulus": self.modulus,
                "shift": [str(c) for c in self.shift],
            },
            "sampler": {
                "seed": self.seed,
                "precision": {str(p): k for p, k in self.precision},
                "real_resolution": self.real_resolution,
            },
            "sample_count": self.sample_count,
            "mc_samples": self.mc_samples,
            "dirichlet_constants": (
                None
                if self.dirichlet_constants is None
                else {str(k): str(v) for k, v in self.dirichlet_constants}
            ),
            "out": self.out,
            "formats": list(self.formats),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ExperimentConfig":
        places = PlaceSet(tuple(sorted(obj.get("places", []))))
        dims = tuple(obj["dims"])
        psi = ApproxCollection.from_json(obj["psi"])
        sch = obj["schedule"]
        schedule = Schedule(
            Fraction(sch["real_start"]),
            Fraction(sch["real_factor"]),
            int(sch["steps"]),
            tuple(sorted((int(p), int(t)) for p, t in sch.get("finite_start", {}).items())),
            tuple(sorted((int(p), int(s)) for p, s in sch.get("finite_step", {}).items())),
            tuple(sorted((int(p), int(e)) for p, e in sch.get("finite_every", {}).items())),
        )
        cong = obj.get("congruence", {})
        sampler = obj.get("sampler", {})
        consts = obj.get("dirichlet_constants")
        return cls(
            mode=obj["mode"],
            places=places,
            dims=dims,
            psi=psi,
            schedule=schedule,
            modulus=int(cong.get("modulus", 1)),
            shift=tuple(Fraction(c) for c in cong.get("shift", [])),
            seed=int(sampler.get("seed", 20260810)),
            precision=tuple(
                sorted((int(p), int(k)) for p, k in sampler.get("precision", {}).items())
            ),
            real_resolution=int(sampler.get("real_resolution", 2**64)),
            sample_count=int(obj.get("sample_count", 20)),
            mc_samples=int(obj.get("mc_samples", 100_000)),
            dirichlet_constants=(
                None
                if consts is None
                else tuple(
                    sorted(
                        ((k if k == REAL_PLACE else int(k)), Fraction(v))
                        for k, v in consts.items()
                    ),
                    key=str,
                )
            ),
            out=obj.get("out", "out"),
            formats=tuple(obj.get("formats", ("csv", "json"))),
        )


@dataclass(frozen=True)
class RunRecord:
    sample: int
    seed: int
    step: int
    t_inf: str
    t_fin: tuple[tuple[int, str], ...]
    volume: str
    count: int
    ratio: float
    elapsed: float
    events: tuple[str, ...] = ()


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[RunRecord]
    summary: dict

    @property
    def exit_code(self) -> int:
        return 0 if self.summary.get("passed", True) else 1


def _derive(seed: int, *tags) -> int:
    text = "/".join(str(t) for t in (seed,) + tags)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _sampler_config(config: ExperimentConfig, sample_index: int) -> SamplerConfig:
    precision = dict(config.precision) or {p: 16 for p in config.places.primes}
    return SamplerConfig.of(
        _derive(config.seed, "sample", sample_index),
        config.dims,
        config.places,
        precision,
        config.real_resolution,
    )


def _count_with_recovery(req: CountRequest, retries: int = 8):
    """Count, deepening the matrix on InsufficientPrecision.  Returns the
    count, the recovery events, and the (possibly deepened) matrix so later
    ladder steps reuse the extra digits."""
    events: list[str] = []
    last = None
    for _ in range(retries):
        try:
            return count_solutions(req), events, req.matrix
        except InsufficientPrecision as exc:
            last = exc
            new_k = exc.needed + 4
            events.append(f"deepen p={exc.place} K={exc.available}->{new_k}")
            req = dataclasses.replace(req, matrix=deepen(req.matrix, exc.place, new_k))
    raise last  # pragma: no cover


def _sample_records(args) -> list[RunRecord]:
    """Counts for one A-sample along the ladder (worker for the sample pool)."""
    config, sample_index, profiles, volumes = args
    scfg = _sampler_config(config, sample_index)
    A = sample_matrix(scfg)
    N = config.modulus
    d = sum(config.dims)
    records = []
    for step, (prof, vol) in enumerate(zip(profiles, volumes)):
        req = CountRequest(config.places, A, config.psi, prof, N, config.shift)
        start = time.perf_counter()
        cnt, events, A = _count_with_recovery(req)
        elapsed = time.perf_counter() - start
        ratio = cnt * N**d / float(vol) if float(vol) else math.inf
        records.append(
            RunRecord(
                sample=sample_index,
                seed=scfg.seed,
                step=step,
                t_inf=str(prof.t_inf),
                t_fin=tuple((p, str(prof.finite_value(p))) for p in config.places.primes),
                volume=str(vol),
                count=cnt,
                ratio=ratio,
                elapsed=elapsed,
                events=tuple(events),
            )
        )
    return records


def _ladder_volumes(config: ExperimentConfig, profiles) -> list:
    vols = []
    for prof in profiles:
        res = volume_exact(Region(config.psi, prof, config.places))
        vols.append(res.total)
    return vols


def _run_samples(config: ExperimentConfig, profiles, volumes, jobs: int) -> list[RunRecord]:
    tasks = [(config, i, profiles, volumes) for i in range(config.sample_count)]
    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            chunks = pool.map(_sample_records, tasks)
    else:
        chunks = [_sample_records(t) for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.sample, r.step))
    return records


def run(config: ExperimentConfig, jobs: int = 1, max_product=None) -> RunResult:
    mode = config.mode
    if mode == "verify":
        return _run_verify(config)
    if mode == "asymptotic":
        return _run_asymptotic(config, jobs, max_product)
    if mode == "dichotomy":
        return _run_dichotomy(config, jobs, max_product)
    if mode == "volume":
        return _run_volume(config)
    if mode == "count":
        return _run_count(config, jobs)
    if mode == "dirichlet":
        return _run_dirichlet(config)
    raise ConfigError(f"mode {mode!r} is not runnable; use report for re-emission")


def _run_asymptotic(config, jobs, max_product) -> RunResult:
    div = integral_diverges(config.psi, config.places)
    if not div.divergent:
        raise ConfigError(
            "the defining integral converges, so the count/volume ratio has no "
            "limit to verify; use dichotomy mode for the convergent case"
        )
    warnings = []
    d = sum(config.dims)
    if d < 3:
        warnings.append(
            f"d = m + n = {d} < 3: the equidistribution input behind the "
            "asymptotic needs d >= 3; results are exploratory"
        )
    profiles = config.schedule.profiles(config.dims[1], max_product)
    volumes = _ladder_volumes(config, profiles)
    records = _run_samples(config, profiles, volumes, jobs)

    steps = len(profiles)
    per_step_median = [
        statistics.median(r.ratio for r in records if r.step == s) for s in range(steps)
    ]
    per_step_err = [
        statistics.median(abs(r.ratio - 1) for r in records if r.step == s)
        for s in range(steps)
    ]
    drift = per_step_err[-3:]
    summary = {
        "mode": "asymptotic",
        "d": d,
        "modulus": config.modulus,
        "steps": steps,
        "final_product": str(profiles[-1].product()),
        "per_step_median_ratio": per_step_median,
        "per_step_median_abs_err": per_step_err,
        "final_median_ratio": per_step_median[-1],
        "drift_non_increasing": all(a >= b for a, b in zip(drift, drift[1:])),
        "warnings": warnings,
    }
    if config.modulus > 1:
        # the empirically observed normalization exponent: V / count = N^x
        finals = [r for r in records if r.step == steps - 1 and r.count > 0]
        if finals:
            exps = [
                math.log(float(Fraction(r.volume)) / r.count) / math.log(config.modulus)
                for r in finals
            ]
            summary["empirical_modulus_exponent"] = statistics.median(exps)
    return RunResult(config, records, summary)


def _run_dichotomy(config, jobs, max_product) -> RunResult:
    """Track counts along the ladder: a convergent defining integral makes
    them plateau over the ladder tail, a divergent one makes them track the
    growing volume (measured against the mid-ladder count)."""
    profiles = config.schedule.profiles(config.dims[1], max_product)
    if len(profiles) < 4:
        raise ConfigError("dichotomy mode needs at least four ladder steps")
    volumes = _ladder_volumes(config, profiles)
    records = _run_samples(config, profiles, volumes, jobs)
    div = integral_diverges(config.psi, config.places)
    last = len(profiles) - 1
    tail_start = max(last - 2, 1)
    mid = len(profiles) // 2
    plateau = growth = 0
    for i in range(config.sample_count):
        mine = {r.step: r.count for r in records if r.sample == i}
        if mine[last] == mine[tail_start]:
            plateau += 1
        if mine[last] >= 10 * max(mine[mid], 1):
            growth += 1
    summary = {
        "mode": "dichotomy",
        "integral": div.verdict,
        "tail_start_step": tail_start,
        "mid_step": mid,
        "plateau_fraction": plateau / config.sample_count,
        "growth_fraction": growth / config.sample_count,
        "classification": (
            "convergent-like (counts plateau)"
            if plateau > growth
            else "divergent-like (counts track the volume)"
        ),
    }
    return RunResult(config, records, summary)


def _run_volume(config) -> RunResult:
    prof = config.schedule.profiles(config.dims[1])[-1]
    region = Region(config.psi, prof, config.places)
    res = volume_exact(region)
    mc = volume_monte_carlo(region, config.mc_samples, _derive(config.seed, "mc"))
    agrees = abs(float(res.total) - mc.estimate) <= 4 * mc.std_error + float(res.total_error) + 1e-9
    summary = {
        "mode": "volume",
        "exact": str(res.total),
        "exact_float": float(res.total),
        "is_exact": res.is_exact,
        "real_factor": str(res.real_factor),
        "finite_factors": {str(p): str(f) for p, f in res.finite_factors},
        "mc_estimate": mc.estimate,
        "mc_std_error": mc.std_error,
        "mc_samples": mc.samples,
        "agrees_within_4se": agrees,
        "passed": agrees,
    }
    record = RunRecord(
        sample=0,
        seed=config.seed,
        step=0,
        t_inf=str(prof.t_inf),
        t_fin=tuple((p, str(prof.finite_value(p))) for p in config.places.primes),
        volume=str(res.total),
        count=0,
        ratio=float("nan"),
        elapsed=0.0,
    )
    return RunResult(config, [record], summary)


def _run_count(config, jobs) -> RunResult:
    profiles = [config.schedule.profiles(config.dims[1])[-1]]
    volumes = _ladder_volumes(config, profiles)
    records = _run_samples(config, profiles, volumes, jobs)
    summary = {
        "mode": "count",
        "counts": [r.count for r in records],
        "volume": str(volumes[0]),
        "modulus": config.modulus,
    }
    return RunResult(config, records, summary)


def _run_dirichlet(config) -> RunResult:
    # here the schedule exponents bound the norms themselves
    exps = {p: t for p, t in config.schedule.finite_start}
    prof = NormProfile.of(config.schedule.real_start, exps)
    constants = None
    if config.dirichlet_constants is not None:
        constants = dict(config.dirichlet_constants)
    records = []
    solved = 0
    for i in range(config.sample_count):
        scfg = _sampler_config(config, i)
        A = sample_matrix(scfg)
        start = time.perf_counter()
        pvec, qvec = dirichlet_solve(A, prof, config.places, constants)
        elapsed = time.perf_counter() - start
        consts = dict(default_dirichlet_constants(config.places, config.dims[0]))
        if constants:
            consts.update(constants)
        verify_dirichlet(A, prof, config.places, consts, pvec, qvec)
        solved += 1
        records.append(
            RunRecord(
                sample=i,
                seed=scfg.seed,
                step=0,
                t_inf=str(prof.t_inf),
                t_fin=tuple((p, str(prof.finite_value(p))) for p in config.places.primes),
                volume="0",
                count=1,
                ratio=1.0,
                elapsed=elapsed,
                events=(f"p={_vec(pvec)}", f"q={_vec(qvec)}"),
            )
        )
    summary = {
        "mode": "dirichlet",
        "instances": config.sample_count,
        "solved_and_verified": solved,
        "passed": solved == config.sample_count,
    }
    return RunResult(config, records, summary)


def _run_verify(config) -> RunResult:
    from . import checks

    results = []
    passed = True
    for name, ok, detail in checks.run_all(config.seed):
        results.append({"suite": name, "passed": ok, "detail": detail})
        passed &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    summary = {"mode": "verify", "suites": results, "passed": passed}
    return RunResult(config, [], summary)


def _vec(v) -> str:
    return "(" + ", ".join(str(c) for c in v) + ")"


# --------------------------------------------------------------------------
# report emission


def records_to_csv(config: ExperimentConfig, records: Sequence[RunRecord]) -> str:
    """RFC-4180-style CSV with a mandatory header; no timing columns, so the
    bytes are reproducible across reruns."""
    if not records:
        raise ValueError("no records to report")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    t_cols = [f"T_{p}" for p in config.places.primes]
    writer.writerow(["seed", "step", "T_inf", *t_cols, "V", "N", "ratio"])
    for r in records:
        fins = dict(r.t_fin)
        writer.writerow(
            [
                r.seed,
                r.step,
                r.t_inf,
                *[fins[p] for p in config.places.primes],
                r.volume,
                r.count,
                repr(r.ratio),
            ]
        )
    return buf.getvalue()


def csv_to_rows(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    return list(reader)


def records_to_json(result: RunResult) -> str:
    payload = {
        "config": result.config.to_json(),
        "summary": result.summary,
        "records": [dataclasses.asdict(r) for r in result.records],
    }
    return json.dumps(payload, indent=2, default=str, sort_keys=True)


def result_from_json(text: str) -> RunResult:
    obj = json.loads(text)
    config = ExperimentConfig.from_json(obj["config"])
    records = [
        RunRecord(
            sample=r["sample"],
            seed=r["seed"],
            step=r["step"],
            t_inf=r["t_inf"],
            t_fin=tuple((int(p), s) for p, s in r["t_fin"]),
            volume=r["volume"],
            count=r["count"],
            ratio=float(r["ratio"]),
            elapsed=float(r["elapsed"]),
            events=tuple(r.get("events", ())),
        )
        for r in obj["records"]
    ]
    return RunResult(config, records, obj.get("summary", {}))


def records_to_svg(config: ExperimentConfig, records: Sequence[RunRecord]) -> str:
    """Ratio against log10 |T|, one polyline per A-sample, reference at 1."""
    if not records:
        raise ValueError("no records to report")
    width, height, margin = 640, 400, 48
    xs = {}
    for r in records:
        t = float(Fraction(r.t_inf))
        for _, tv in r.t_fin:
            t *= float(Fraction(tv))
        xs[r.step] = math.log10(t) if t > 0 else 0.0
    ratios = [r.ratio for r in records if not math.isnan(r.ratio)]
    lo = min(ratios + [0.8])
    hi = max(ratios + [1.2])
    x_lo, x_hi = min(xs.values()), max(xs.values())
    span_x = (x_hi - x_lo) or 1.0
    span_y = (hi - lo) or 1.0

    def px(v):
        return margin + (v - x_lo) / span_x * (width - 2 * margin)

    def py(v):
        return height - margin - (v - lo) / span_y * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{py(1.0):.2f}" x2="{width - margin}" y2="{py(1.0):.2f}" '
        'stroke="#888" stroke-dasharray="6 3"/>',
        f'<text x="{margin}" y="{margin - 16}" font-size="13">count / (volume / N^d) '
        "against log10 |T|</text>",
    ]
    samples = sorted({r.sample for r in records})
    for s in samples:
        pts = [
            f"{px(xs[r.step]):.2f},{py(r.ratio):.2f}"
            for r in records
            if r.sample == s and not math.isnan(r.ratio)
        ]
        if pts:
            parts.append(
                f'<polyline class="sample" fill="none" stroke="#1f6fb2" '
                f'stroke-opacity="0.55" points="{" ".join(pts)}"/>'
            )
    parts.append(
        f'<text x="{margin}" y="{height - 12}" font-size="11">log10 |T| from '
        f"{x_lo:.2f} to {x_hi:.2f}; ratio from {lo:.3f} to {hi:.3f}</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts)


def emit_report(result: RunResult, out_dir: str, formats: Sequence[str]) -> list[str]:
    if not result.records and "json" not in formats:
        raise ValueError("no records to report")
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            path = os.path.join(out_dir, "records.csv")
            with open(path, "w", newline="") as fh:
                fh.write(records_to_csv(result.config, result.records))
        elif fmt == "json":
            path = os.path.join(out_dir, "records.json")
            with open(path, "w") as fh:
                fh.write(records_to_json(result))
        elif fmt == "svg":
            path = os.path.join(out_dir, "ratio.svg")
            with open(path, "w") as fh:
                fh.write(records_to_svg(result.config, result.records))
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        written.append(path)
    return written


# --------------------------------------------------------------------------
# built-in configurations


def default_config(mode: str, seed: int = 20260810) -> ExperimentConfig:
    """Sensible campaign defaults; the headline asymptotic system is
    S = {inf, 2}, (m, n) = (2, 1), psi = 1."""
    places = PlaceSet((2,))
    if mode in ("asymptotic", "count", "volume"):
        dims = (2, 1)
        return ExperimentConfig(
            mode=mode,
            places=places,
            dims=dims,
            psi=psi_one(places, *dims),
            schedule=Schedule(Fraction(4), Fraction(2), 8, ((2, 1),), ((2, 1),)),
            seed=seed,
            precision=((2, 24),),
            sample_count=20,
            mc_samples=100_000,
        )
    if mode == "dichotomy":
        dims = (1, 1)
        return ExperimentConfig(
            mode=mode,
            places=places,
            dims=dims,
            psi=psi_one(places, *dims),
            schedule=Schedule(
                Fraction(2), Fraction(2), 12, ((2, 0),), ((2, 1),), ((2, 3),)
            ),
            seed=seed,
            precision=((2, 30),),
            sample_count=20,
        )
    if mode == "dirichlet":
        dims = (1, 1)
        return ExperimentConfig(
            mode=mode,
            places=places,
            dims=dims,
            psi=psi_one(places, *dims),
            schedule=Schedule(Fraction(4), Fraction(2), 1, ((2, 1),), ((2, 1),)),
            seed=seed,
            precision=((2, 16),),
            sample_count=20,
        )
    if mode == "verify":
        places0 = PlaceSet(())
        return ExperimentConfig(
            mode=mode,
            places=places0,
            dims=(1, 1),
            psi=psi_one(places0, 1, 1),
            schedule=Schedule(Fraction(2), Fraction(2), 2, (), ()),
            seed=seed,
        )
    raise ConfigError(f"no default configuration for mode {mode!r}")


# --------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sapprox",
        description="Exact S-arithmetic approximation counting experiments",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", help="experiment configuration (JSON)")
        sp.add_argument("--seed", type=int, help="override the campaign seed")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--samples", type=int, help="override the A-sample count")
        sp.add_argument(
            "--max-T",
            type=float,
            help="truncate the ladder once prod T_p exceeds this",
        )
        sp.add_argument(
            "--format",
            choices=["csv", "json", "svg", "all"],
            help="report format(s) to write",
        )
        sp.add_argument("--jobs", type=int, default=1, help="parallel A-sample workers")
        if mode == "report":
            sp.add_argument("--records", help="records.json from a previous run")
    return parser


def load_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            config = ExperimentConfig.from_json(json.load(fh))
        if config.mode != args.mode:
            config = dataclasses.replace(config, mode=args.mode)
    else:
        config = default_config(args.mode)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.samples is not None:
        config = dataclasses.replace(config, sample_count=args.samples)
    if args.out:
        config = dataclasses.replace(config, out=args.out)
    if args.format:
        formats = ("csv", "json", "svg") if args.format == "all" else (args.format,)
        config = dataclasses.replace(config, formats=formats)
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.mode == "report":
        path = args.records or os.path.join(args.out or "out", "records.json")
        with open(path) as fh:
            result = result_from_json(fh.read())
        if args.format:
            formats = ("csv", "json", "svg") if args.format == "all" else (args.format,)
        else:
            formats = result.config.formats
        written = emit_report(result, args.out or result.config.out, formats)
        for path in written:
            print(f"wrote {path}")
        return 0

    config = load_config(args)
    max_product = Fraction(args.max_T) if args.max_T else None
    result = run(config, jobs=args.jobs, max_product=max_product)
    if result.records:
        written = emit_report(result, config.out, config.formats)
        for path in written:
            print(f"wrote {path}")
    for key, value in result.summary.items():
        if key not in ("suites",):
            print(f"{key}: {value}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
