"""Report emission: aligned plain-text tables plus a machine-readable form."""

from __future__ import annotations

from typing import Optional

from bsm.runner import RunManifest

TABLE = "table"
RECORDS = "records"


def _fmt(value: Optional[float], digits: int) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}f}"


def _judge_table(manifest: RunManifest) -> str:
    report = manifest.metrics.get("report", {})
    method = manifest.metrics.get("method", "?")
    slices = [report.get(k, {}) for k in ("overall", "turn_1", "turn_2")]

    lines = []
    lines.append("pairwise judging report")
    lines.append(
        f"samples: {manifest.counts['total']} "
        f"(ok {manifest.counts['ok']}, failed {manifest.counts['failed']})"
    )
    lines.append("")
    header_groups = "".join(f"{name:<24}" for name in ("Overall", "Turn-1", "Turn-2"))
    lines.append(f"{'Method':<20}{header_groups}")
    sub = "".join(f"{'Ag':<8}{'PB':<8}{'LB':<8}" for _ in range(3))
    lines.append(f"{'':<20}{sub}")
    row = f"{method:<20}"
    for s in slices:
        row += f"{_fmt(s.get('ag'), 3):<8}{_fmt(s.get('pb'), 2):<8}{_fmt(s.get('lb'), 2):<8}"
    lines.append(row)
    lines.append("")
    lines.append(f"{'slice':<10}{'Ag-majority':<14}{'LB+ties':<10}{'votes':<8}{'compared':<10}")
    for name, s in zip(("overall", "turn-1", "turn-2"), slices):
        lines.append(
            f"{name:<10}{_fmt(s.get('ag_majority'), 3):<14}"
            f"{_fmt(s.get('lb_including_ties'), 2):<10}"
            f"{s.get('n_votes', 0):<8}{s.get('n_votes_compared', 0):<10}"
        )
    sb = report.get("sb")
    if sb:
        lines.append("")
        lines.append(
            f"self-enhancement subset (judge={sb.get('judge_model_id')}): "
            f"Ag {_fmt(sb.get('ag'), 3)} over {sb.get('subset_size', 0)} samples"
        )
    lines.append("")
    lines.append(
        f"backend calls: {manifest.backend_calls.get('total', 0)} "
        f"(cached {manifest.backend_calls.get('cached', 0)})"
    )
    return "\n".join(lines) + "\n"


def _story_table(manifest: RunManifest) -> str:
    metrics = manifest.metrics
    lines = []
    lines.append("constrained story generation report")
    lines.append(
        f"samples: {manifest.counts['total']} "
        f"(ok {manifest.counts['ok']}, failed {manifest.counts['failed']})"
    )
    lines.append("")
    lines.append(f"{'Method':<14}{'AP':<10}{'MC':<10}")
    for name in ("bsm", "zeroshot"):
        block = metrics.get(name)
        if block:
            lines.append(f"{name:<14}{_fmt(block.get('ap'), 2):<10}{_fmt(block.get('mc'), 2):<10}")
    bsm_block = metrics.get("bsm") or {}
    if "missing_solve_stage" in bsm_block:
        lines.append("")
        lines.append(
            f"missing-concept attribution: solve stage {bsm_block['missing_solve_stage']}, "
            f"merge stage {bsm_block['missing_merge_stage']}"
        )
    preference = metrics.get("preference")
    if preference:
        lines.append("")
        lines.append(
            "story preference (bsm vs zeroshot): "
            f"bsm {_fmt(preference['bsm_pct'], 2)}%, "
            f"zeroshot {_fmt(preference['zeroshot_pct'], 2)}%, "
            f"tie {_fmt(preference['tie_pct'], 2)}% "
            f"over {preference['judged']} judged"
        )
    lines.append("")
    lines.append(
        f"backend calls: {manifest.backend_calls.get('total', 0)} "
        f"(cached {manifest.backend_calls.get('cached', 0)})"
    )
    return "\n".join(lines) + "\n"


def emit_report(manifest: RunManifest, fmt: str = TABLE) -> str:
    """Render a manifest as an aligned table or as schema-versioned records."""
    if fmt == RECORDS:
        return manifest.canonical_json()
    if fmt != TABLE:
        raise ValueError(f"unknown report format {fmt!r}")
    if manifest.task == "judge":
        return _judge_table(manifest)
    return _story_table(manifest)


def parse_report(text: str) -> RunManifest:
    """Parse the records format back into a manifest (round-trip identity)."""
    return RunManifest.model_validate_json(text)
