"""Cost and resilience measurement over a corpus of programs.

Execution time is the deterministic interpreter step count, heap usage is
peak live node count plus total allocations, and code size is the byte
length of the canonical serialization; the report carries WM vs TP values
and deltas per program plus attack verdicts, and checks that the code-size
delta decomposes into one corpus-wide support constant plus per-site terms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import ppct
from .attacks import ATTACK_KINDS, assess
from .encoder import (
    EncodingPlan,
    SelectionPolicy,
    gen_runtime_support,
    render_plan_expr,
    plan_encoding,
    select_constants,
    rewrite,
)
from .minilang import (
    IntLit,
    Limits,
    Program,
    code_size,
    interpret,
    serialize,
    serialize_expr,
    serialize_function,
)
from .watermark import WatermarkSpec, embed, extract_tree


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class Metrics:
    code_size_bytes: int
    steps: int
    peak_live_nodes: int
    total_allocations: int

    def to_dict(self) -> dict:
        return {
            "code_size_bytes": self.code_size_bytes,
            "steps": self.steps,
            "peak_live_nodes": self.peak_live_nodes,
            "total_allocations": self.total_allocations,
        }

    def delta(self, other: "Metrics") -> dict:
        mine, theirs = self.to_dict(), other.to_dict()
        return {k: mine[k] - theirs[k] for k in mine}


def measure(p: Program, inputs, limits: Limits = None) -> Metrics:
    """Deterministic metrics; steps and heap figures summed over inputs."""
    if not inputs:
        raise BenchError("at least one input vector is required")
    steps = peak = allocs = 0
    for vec in inputs:
        r = interpret(p, vec, limits=limits)
        if not r.ok:
            raise BenchError(
                f"run failed on input {list(vec)}: {r.status} ({r.error})"
            )
        steps += r.steps
        peak += r.peak_live_nodes
        allocs += r.total_allocations
    return Metrics(
        code_size_bytes=code_size(p),
        steps=steps,
        peak_live_nodes=peak,
        total_allocations=allocs,
    )


def support_code_bytes(anchor: str) -> int:
    """Byte cost of appending the runtime support functions."""
    text = "\n\n".join(serialize_function(f) for f in gen_runtime_support(anchor))
    # appended with a separating blank line
    return len(text.encode("utf-8")) + 2


def site_byte_delta(entry) -> int:
    """Byte growth from replacing one literal with its plan expression."""
    new = serialize_expr(render_plan_expr(entry.expr, entry.site.negative))
    old = serialize_expr(IntLit(entry.site.signed_value))
    return len(new.encode("utf-8")) - len(old.encode("utf-8"))


def plan_byte_delta(plan: EncodingPlan) -> int:
    delta = sum(site_byte_delta(e) for e in plan.entries)
    if plan.lookup_count:
        delta += support_code_bytes(plan.anchor)
    return delta


def compare(
    corpus: dict,
    watermark_value: int,
    trigger,
    policy: SelectionPolicy = None,
    inputs: dict = None,
    seed: int = 0,
    limits: Limits = None,
) -> dict:
    """Build WM and TP for every corpus program, measure, attack, report.

    corpus maps name -> Program; inputs maps name -> list of argument
    vectors.  Per-program pipeline failures are recorded in the report
    rather than raised.
    """
    policy = policy or SelectionPolicy()
    inputs = inputs or {}
    spec = WatermarkSpec(watermark_value, tuple(trigger))

    programs: dict = {}
    support_values = set()
    for name in sorted(corpus):
        entry: dict = {"error": None}
        programs[name] = entry
        try:
            p = corpus[name]
            vecs = inputs.get(name)
            if not vecs:
                raise BenchError(f"no input vectors for {name!r}")
            p_wm = embed(p, spec)
            wm_tree = extract_tree(p_wm, spec.trigger, limits=limits)
            if wm_tree is None:
                raise BenchError("watermark tree not recoverable after embed")
            sites = select_constants(p_wm, policy)
            plan = plan_encoding(p_wm, wm_tree, sites, anchor=spec.anchor)
            p_tp = rewrite(p_wm, plan)

            wm_metrics = measure(p_wm, vecs, limits=limits)
            tp_metrics = measure(p_tp, vecs, limits=limits)
            delta = tp_metrics.delta(wm_metrics)

            site_sum = sum(site_byte_delta(e) for e in plan.entries)
            support = delta["code_size_bytes"] - site_sum
            overhead_ok = delta["code_size_bytes"] == plan_byte_delta(plan)
            if plan.lookup_count:
                support_values.add(support)

            attacks: dict = {}
            for kind in ATTACK_KINDS:
                wm_out, tp_out = assess(
                    p_wm, p_tp, watermark_value, spec.trigger, vecs,
                    kind, seed=seed, limits=limits,
                )
                attacks[kind] = {"wm": wm_out.to_dict(), "tp": tp_out.to_dict()}

            entry.update(
                {
                    "wm": wm_metrics.to_dict(),
                    "tp": tp_metrics.to_dict(),
                    "delta": delta,
                    "sites": len(plan.entries),
                    "lookups": plan.lookup_count,
                    "site_bytes": site_sum,
                    "support_bytes": support if plan.lookup_count else 0,
                    "fixed_overhead_ok": overhead_ok,
                    "attacks": attacks,
                }
            )
        except (BenchError, ValueError) as exc:
            entry["error"] = str(exc)

    report = {
        "watermark": watermark_value,
        "trigger": list(trigger),
        "policy": policy.render(),
        "seed": seed,
        "support_bytes": (
            sorted(support_values)[0] if len(support_values) == 1 else None
        ),
        "support_uniform": len(support_values) <= 1,
        "programs": programs,
    }
    return report


# --- rendering ----------------------------------------------------------

_METRIC_TABLES = (
    ("Heap Space Usage (peak live nodes)", "peak_live_nodes"),
    ("Execution Time (interpreter steps)", "steps"),
    ("Code Size (canonical bytes)", "code_size_bytes"),
)


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt in ("md", "markdown"):
        return _render_markdown(report)
    raise BenchError(f"unknown report format {fmt!r}")


def _render_markdown(report: dict) -> str:
    lines = ["# Watermark vs. tamper-proof comparison", ""]
    lines.append(f"- watermark: {report['watermark']}")
    lines.append(f"- trigger: {','.join(str(t) for t in report['trigger'])}")
    lines.append(f"- policy: {report['policy']}")
    lines.append(f"- seed: {report['seed']}")
    lines.append(f"- support bytes (corpus-wide): {report['support_bytes']}")
    lines.append("")

    names = sorted(report["programs"])
    ok_names = [n for n in names if not report["programs"][n]["error"]]

    for title, key in _METRIC_TABLES:
        lines.append(f"## {title}")
        lines.append("")
        lines.append("| Program | Watermark | Tamper-proof | Difference |")
        lines.append("| --- | --- | --- | --- |")
        for name in ok_names:
            row = report["programs"][name]
            lines.append(
                f"| {name} | {row['wm'][key]} | {row['tp'][key]} "
                f"| {row['delta'][key]} |"
            )
        lines.append("")

    for kind in ATTACK_KINDS:
        lines.append(f"## Attack: {kind}")
        lines.append("")
        lines.append("| Program | Watermark | Tamper-proof |")
        lines.append("| --- | --- | --- |")
        for name in ok_names:
            cell = report["programs"][name]["attacks"][kind]
            lines.append(
                f"| {name} | {cell['wm']['verdict']} | {cell['tp']['verdict']} |"
            )
        lines.append("")

    failed = [n for n in names if report["programs"][n]["error"]]
    if failed:
        lines.append("## Failures")
        lines.append("")
        for name in failed:
            lines.append(f"- {name}: {report['programs'][name]['error']}")
        lines.append("")
    return "\n".join(lines)
