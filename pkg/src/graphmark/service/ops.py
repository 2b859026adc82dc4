"""Handlers shared by the HTTP app and the in-process CLI client.

Every handler takes a request model and returns a response model;
domain failures surface as ValueError subclasses from the core modules,
which the app maps to HTTP 400 and the CLI maps to exit code 1.
"""

from __future__ import annotations

from .. import bench as bench_mod
from ..attacks import apply_attack
from ..encoder import SelectionPolicy, plan_encoding, rewrite, select_constants
from ..minilang import Limits, interpret, parse, serialize
from ..watermark import WatermarkSpec, embed, extract, extract_tree
from . import models


def _limits(m: models.LimitsModel) -> Limits:
    return Limits(
        max_steps=m.max_steps,
        max_allocs=m.max_allocs,
        max_call_depth=m.max_call_depth,
    )


def run(req: models.RunRequest) -> models.RunResponse:
    p = parse(req.source)
    r = interpret(p, req.args, limits=_limits(req.limits))
    return models.RunResponse(
        output=list(r.output),
        status=r.status,
        error=r.error,
        steps=r.steps,
        peak_live_nodes=r.peak_live_nodes,
        total_allocations=r.total_allocations,
    )


def embed_op(req: models.EmbedRequest) -> models.EmbedResponse:
    p = parse(req.source)
    spec = WatermarkSpec(
        req.watermark, tuple(req.trigger), anchor=req.anchor,
        max_leaves=req.max_leaves,
    )
    return models.EmbedResponse(source=serialize(embed(p, spec)))


def extract_op(req: models.ExtractRequest) -> models.ExtractResponse:
    p = parse(req.source)
    value = extract(
        p, req.trigger, limits=_limits(req.limits), anchor=req.anchor
    )
    return models.ExtractResponse(found=value is not None, watermark=value)


def protect_op(req: models.ProtectRequest) -> models.ProtectResponse:
    p = parse(req.source)
    tree = extract_tree(p, req.trigger, limits=_limits(req.limits))
    if tree is None:
        raise ValueError("no watermark tree found; embed before protecting")
    policy = SelectionPolicy.parse(req.policy)
    sites = select_constants(p, policy)
    plan = plan_encoding(
        p, tree, sites, anchor=req.anchor, max_depth=req.max_depth
    )
    p_tp = rewrite(p, plan)
    return models.ProtectResponse(source=serialize(p_tp), plan=plan.to_dict())


def attack_op(req: models.AttackRequest) -> models.AttackResponse:
    p = parse(req.source)
    return models.AttackResponse(
        source=serialize(apply_attack(p, req.kind, req.seed))
    )


def bench_op(req: models.BenchRequest) -> models.BenchResponse:
    corpus = {name: parse(text) for name, text in req.corpus.items()}
    report = bench_mod.compare(
        corpus,
        req.watermark,
        req.trigger,
        policy=SelectionPolicy.parse(req.policy),
        inputs=req.inputs,
        seed=req.seed,
        limits=_limits(req.limits),
    )
    return models.BenchResponse(report=report)


def report_op(req: models.ReportRequest) -> models.ReportResponse:
    return models.ReportResponse(text=bench_mod.render(req.report, req.format))
