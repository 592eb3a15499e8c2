"""Scenario orchestration and CSV/JSON report emission.

A scenario evaluates one model on one device: a baseline row plus one
row per delay target, each target resolved to its minimal reuse count
and a concrete reuse pattern picked by the configured scorer. Rows
carry the headline metrics and EDAP reduction against baseline;
per-block breakdown shares are emitted alongside (separate CSV, and
inline in the JSON document).

Emission is deterministic: fixed column order, fixed float formatting,
no timestamps, so identical scenarios and seeds produce byte-identical
files. The JSON meta block records the calibration conventions
(accuracy is intentionally absent: it is not computable here).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from . import config as cfgmod
from .cost import ModelCost, breakdown, model_cost
from .mapping import hybrid_assignment
from .optimize import (
    Scorer,
    load_external_scorer,
    make_cka_scorer,
    optimize,
    synthetic_attention_outputs,
)
from .patterns import PatternKind, explicit_pattern
from .workload import ModelConfig

CSV_HEADER = (
    "scenario,model,device,n_reuse,pattern,energy_mJ,delay_ms,area_mm2,"
    "edap,tops_per_w,tops_per_mm2,edap_reduction"
)

BREAKDOWN_HEADER = "scenario,pattern,block,e_share,d_share,a_share,edap_share"


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    device: str  # preset name, or "hybrid" for FeFET weights + SRAM matmuls
    target_delays_ms: tuple[float, ...] = ()
    patterns: str = "all"  # strided | continuous | pyramid | all | explicit:i,j,k
    scorer: str = "cka"  # cka | external:<path>
    seed: int = 0
    config_path: str | None = None

    def __post_init__(self) -> None:
        if any(t <= 0 for t in self.target_delays_ms):
            raise ValueError("target delays must be positive")


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    model: str
    device: str
    n_reuse: int | None
    pattern: str
    energy_mj: float | None
    delay_ms: float | None
    area_mm2: float | None
    edap: float | None
    tops_per_w: float | None
    tops_per_mm2: float | None
    edap_reduction: float | None
    target_delay_ms: float | None = None
    feasible: bool = True
    breakdown: dict | None = None


def pattern_families(spec: str) -> tuple[PatternKind, ...]:
    table = {
        "all": (PatternKind.STRIDED, PatternKind.CONTINUOUS, PatternKind.PYRAMID),
        "strided": (PatternKind.STRIDED,),
        "continuous": (PatternKind.CONTINUOUS,),
        "pyramid": (PatternKind.PYRAMID,),
    }
    if spec not in table:
        raise ValueError(f"unknown pattern family {spec!r}")
    return table[spec]


def make_scorer(scenario: Scenario, cfg: ModelConfig) -> Scorer:
    if scenario.scorer == "cka":
        acts = synthetic_attention_outputs(cfg.n_encoders, seed=scenario.seed)
        return make_cka_scorer(acts)
    if scenario.scorer.startswith("external:"):
        return load_external_scorer(scenario.scorer.split(":", 1)[1])
    raise ValueError(f"unknown scorer {scenario.scorer!r}")


def resolve_device(name: str, scenario_cfg: cfgmod.ScenarioConfig):
    if name == "hybrid":
        return hybrid_assignment(
            cfgmod.load_device_params("FeFET"), cfgmod.load_device_params("SRAM")
        )
    return scenario_cfg.device(name)


def _row(
    scenario: Scenario,
    mc: ModelCost,
    pattern: str,
    base_edap: float,
    target: float | None = None,
) -> ReportRow:
    return ReportRow(
        scenario=scenario.name,
        model=scenario.model,
        device=scenario.device,
        n_reuse=mc.n_reuse,
        pattern=pattern,
        energy_mj=mc.e_vit_mj,
        delay_ms=mc.d_vit_ms,
        area_mm2=mc.a_vit_mm2,
        edap=mc.edap,
        tops_per_w=mc.tops_per_w,
        tops_per_mm2=mc.tops_per_mm2,
        edap_reduction=base_edap / mc.edap,
        target_delay_ms=target,
        breakdown=breakdown(mc),
    )


def run_scenario(scenario: Scenario) -> list[ReportRow]:
    """Baseline row plus one row per delay target, in input order."""
    sc = cfgmod.ScenarioConfig(scenario.config_path)
    cfg = sc.model(scenario.model)
    dev = resolve_device(scenario.device, sc)
    tiles = sc.tiles()
    sp = sc.softmax()
    opts = sc.cost_options()

    base = model_cost(cfg, 0, dev, tiles, sp, opts)
    rows = [_row(scenario, base, "none", base.edap)]

    if scenario.patterns.startswith("explicit:"):
        indices = tuple(
            int(i) for i in scenario.patterns.split(":", 1)[1].split(",") if i
        )
        pat = explicit_pattern(cfg.n_encoders, indices)
        mc = model_cost(cfg, pat.n_reuse, dev, tiles, sp, opts)
        rows.append(_row(scenario, mc, pat.label(), base.edap))
        return rows

    scorer = make_scorer(scenario, cfg)
    families = pattern_families(scenario.patterns)
    for target in scenario.target_delays_ms:
        found = optimize(cfg, dev, tiles, sp, target, scorer, opts, families)
        if not found.feasible:
            rows.append(
                ReportRow(
                    scenario=scenario.name,
                    model=scenario.model,
                    device=scenario.device,
                    n_reuse=None,
                    pattern="infeasible",
                    energy_mj=None,
                    delay_ms=None,
                    area_mm2=None,
                    edap=None,
                    tops_per_w=None,
                    tops_per_mm2=None,
                    edap_reduction=None,
                    target_delay_ms=target,
                    feasible=False,
                )
            )
            continue
        mc = model_cost(cfg, found.optimal_n_reuse, dev, tiles, sp, opts)
        label = found.best.label() if found.best is not None else "none"
        rows.append(_row(scenario, mc, label, base.edap, target))
    return rows


def report_meta(scenario: Scenario | None = None) -> dict:
    """Report-header facts: conventions of the shipped calibration."""
    meta = {
        "accuracy_note": (
            "accuracy columns are intentionally absent: classification "
            "accuracy is not computable by this cost model"
        ),
        "area_convention": (
            "per-layer areas rounded up to whole tiles (pad_to_tiles), "
            "stem excluded in the calibrated model presets"
        ),
        "serialization_convention": (
            "device read constants cover one full input presentation; "
            "input_split_bits equals input_bits in the calibrated presets"
        ),
        "tb_convention": (
            "transformation blocks charged as calibrated digital constants "
            "(zero by default), not as mapped crossbar FCs"
        ),
        "units": {
            "energy_mJ": "millijoule",
            "delay_ms": "millisecond",
            "area_mm2": "square millimetre",
            "edap": "mJ*ms*mm2",
        },
    }
    if scenario is not None:
        meta["scenario"] = {
            "name": scenario.name,
            "model": scenario.model,
            "device": scenario.device,
            "target_delays_ms": list(scenario.target_delays_ms),
            "patterns": scenario.patterns,
            "scorer": scenario.scorer,
            "seed": scenario.seed,
        }
    return meta


def _fmt(value: float | int | None, decimals: int) -> str:
    if value is None:
        return ""
    return f"{value:.{decimals}f}"


def format_csv(rows: "list[ReportRow]") -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.scenario,
                    r.model,
                    r.device,
                    "" if r.n_reuse is None else str(r.n_reuse),
                    r.pattern,
                    _fmt(r.energy_mj, 4),
                    _fmt(r.delay_ms, 2),
                    _fmt(r.area_mm2, 2),
                    _fmt(r.edap, 2),
                    _fmt(r.tops_per_w, 2),
                    _fmt(r.tops_per_mm2, 6),
                    _fmt(r.edap_reduction, 2),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def format_breakdown_csv(rows: "list[ReportRow]") -> str:
    lines = [BREAKDOWN_HEADER]
    for r in rows:
        if not r.breakdown:
            continue
        for block in sorted(r.breakdown["e"]):
            lines.append(
                ",".join(
                    [
                        r.scenario,
                        r.pattern,
                        block,
                        _fmt(r.breakdown["e"][block], 4),
                        _fmt(r.breakdown["d"][block], 4),
                        _fmt(r.breakdown["a"][block], 4),
                        _fmt(r.breakdown["edap"][block], 4),
                    ]
                )
            )
    return "\n".join(lines) + "\n"


def rows_to_json(rows: "list[ReportRow]", meta: dict | None = None) -> str:
    doc = {
        "meta": meta or report_meta(),
        "rows": [
            {
                "scenario": r.scenario,
                "model": r.model,
                "device": r.device,
                "n_reuse": r.n_reuse,
                "pattern": r.pattern,
                "energy_mJ": r.energy_mj,
                "delay_ms": r.delay_ms,
                "area_mm2": r.area_mm2,
                "edap": r.edap,
                "tops_per_w": r.tops_per_w,
                "tops_per_mm2": r.tops_per_mm2,
                "edap_reduction": r.edap_reduction,
                "target_delay_ms": r.target_delay_ms,
                "feasible": r.feasible,
                "breakdown": r.breakdown,
            }
            for r in rows
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def rows_from_json(text: str) -> "list[ReportRow]":
    doc = json.loads(text)
    rows = []
    for r in doc["rows"]:
        rows.append(
            ReportRow(
                scenario=r["scenario"],
                model=r["model"],
                device=r["device"],
                n_reuse=r["n_reuse"],
                pattern=r["pattern"],
                energy_mj=r["energy_mJ"],
                delay_ms=r["delay_ms"],
                area_mm2=r["area_mm2"],
                edap=r["edap"],
                tops_per_w=r["tops_per_w"],
                tops_per_mm2=r["tops_per_mm2"],
                edap_reduction=r["edap_reduction"],
                target_delay_ms=r["target_delay_ms"],
                feasible=r["feasible"],
                breakdown=r["breakdown"],
            )
        )
    return rows


def emit(
    rows: "list[ReportRow]",
    out_dir: str,
    basename: str,
    formats: "tuple[str, ...]" = ("csv", "json"),
    meta: dict | None = None,
) -> list[str]:
    """Write the report files; returns the paths written.

    The XBARSIM_OUT_DIR environment variable overrides ``out_dir``.
    """
    out_dir = os.environ.get("XBARSIM_OUT_DIR", out_dir)
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "csv":
            path = os.path.join(out_dir, f"{basename}.csv")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(format_csv(rows))
            written.append(path)
            bpath = os.path.join(out_dir, f"{basename}_breakdown.csv")
            with open(bpath, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(format_breakdown_csv(rows))
            written.append(bpath)
        elif fmt == "json":
            path = os.path.join(out_dir, f"{basename}.json")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(rows_to_json(rows, meta))
            written.append(path)
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    return written
