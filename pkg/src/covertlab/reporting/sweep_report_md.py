from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from ..errors import ConfigError
from ..simulator import SWEEP_COLUMNS

REPORT_NAME = "sweep_report.md"

SCOPE_BLOCK = (
    "This report summarises a Monte Carlo sweep of the random-coding covert scheme over a ladder of "
    "blocklengths. Each row is one experiment: the tilt parameter is set from the covertness budget, "
    "codebooks are drawn from the synthesized input law, and messages are decoded with an "
    "information-density threshold.\n\n"
    "Asymptotic message-length results are **not** reproducible at desk scale. The checks below are the "
    "finite-n trends the achievability argument relies on, not a measurement of the scaling constant."
)

VERDICT_ORDER = ["OVER_BUDGET", "OK", "INFO"]


@dataclass(frozen=True)
class ReportContext:
    prepared_as_at: date
    sweep_csv: Path
    output_dir: Path
    model: Optional[str]
    delta: Optional[float]


def load_sweep(sweep_csv: Path) -> pd.DataFrame:
    frame = pd.read_csv(sweep_csv)
    missing = [c for c in SWEEP_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(f"{sweep_csv} is missing sweep column(s) {missing}.")
    return frame.sort_values("n").reset_index(drop=True)


def _row_verdict(row: Dict[str, Any], delta: Optional[float]) -> str:
    if delta is None:
        return "INFO"
    return "OK" if float(row["covert_div"]) < delta else "OVER_BUDGET"


def _strictly_decreasing(values: List[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _non_increasing(values: List[float]) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def summarise(frame: pd.DataFrame, delta: Optional[float]) -> Dict[str, Any]:
    rows = frame.to_dict(orient="records")
    by_verdict: Dict[str, int] = {v: 0 for v in VERDICT_ORDER}
    for r in rows:
        by_verdict[_row_verdict(r, delta)] += 1

    errors = [float(r["error_rate"]) for r in rows]
    variances = [float(r["idensity_var"]) for r in rows]

    key_messages: List[str] = []
    if rows:
        key_messages.append(
            f"The sweep covers **{len(rows)}** blocklength(s), n = {int(rows[0]['n'])} to {int(rows[-1]['n'])}."
        )
        key_messages.append(
            "Empirical error rate is "
            + ("**non-increasing**" if _non_increasing(errors) else "**not monotone**")
            + f" in n (from {errors[0]:.4f} to {errors[-1]:.4f})."
        )
        key_messages.append(
            "Variance of the normalized information density is "
            + ("**strictly decreasing**" if _strictly_decreasing(variances) else "**not strictly decreasing**")
            + " in n."
        )
    if delta is not None and rows:
        over = by_verdict["OVER_BUDGET"]
        if over:
            key_messages.append(f"**{over}** experiment(s) exceed the covertness budget delta = {delta:g} nats.")
        else:
            key_messages.append(f"Every experiment keeps n·D below the covertness budget delta = {delta:g} nats.")

    return {
        "total": len(rows),
        "by_verdict": by_verdict,
        "error_non_increasing": _non_increasing(errors),
        "variance_decreasing": _strictly_decreasing(variances),
        "key_messages": key_messages,
    }


def _md_table(headers: List[str], rows: List[List[str]]) -> str:
    out = ["| " + " | ".join(headers) + " |", "| " + " | ".join(["---"] * len(headers)) + " |"]
    out += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(out)


def render_markdown(ctx: ReportContext, frame: pd.DataFrame, summary: Dict[str, Any]) -> str:
    bullets = "\n".join(f"- {m}" for m in summary["key_messages"]) or "- The sweep CSV has no rows."

    table_rows = []
    for r in frame.to_dict(orient="records"):
        table_rows.append([
            str(int(r["n"])),
            f"{r['gamma']:.6g}",
            f"{r['rate']:.6g}",
            f"{r['error_rate']:.4f} [{r['ci_lo']:.4f}, {r['ci_hi']:.4f}]",
            f"{r['idensity_mean']:.6g}",
            f"{r['idensity_var']:.6g}",
            f"{r['covert_div']:.6g}",
            _row_verdict(r, ctx.delta),
        ])

    verdict_rows = [[k, str(v)] for k, v in summary["by_verdict"].items() if v]

    parts = [
        "# Covert Communication Sweep",
        "",
        f"**Report prepared as at:** {ctx.prepared_as_at.strftime('%d %b %Y')}  ",
        f"**Noise model:** {ctx.model or '—'}  ",
        f"**Covertness budget:** {f'{ctx.delta:g} nats' if ctx.delta is not None else '—'}",
        "",
        "## Scope",
        "",
        SCOPE_BLOCK,
        "",
        "## Data sources",
        "",
        f"- Sweep CSV: `{ctx.sweep_csv.name}`",
        "",
        "## Summary",
        "",
        bullets,
        "",
        "## Results by blocklength",
        "",
        _md_table(
            ["n", "gamma", "rate (nats/use)", "error rate [95% CI]", "mean i/√n", "Var(i/√n)", "n·D (nats)", "verdict"],
            table_rows,
        ),
        "",
        "### Verdicts",
        "",
        _md_table(["Verdict", "Count"], verdict_rows) if verdict_rows else "_No experiments._",
        "",
        "## Column notes",
        "",
        "- `rate`: target ln|M| divided by n, nats per channel use.",
        "- `error_rate`: fraction of trials decoded to the wrong message or erased; Wilson 95% interval.",
        "- `idensity_mean`, `idensity_var`: mean and variance of the information density divided by √n.",
        "- `covert_div`: n·D(P_Z~ ‖ P_Z), the analytic divergence seen by the warden, nats.",
    ]
    return "\n".join(parts).strip() + "\n"


def write_report_markdown(md: str, output_dir: Path) -> Path:
    output_dir.mkdir(parents=True, exist_ok=True)
    out_path = output_dir / REPORT_NAME
    out_path.write_text(md, encoding="utf-8")
    return out_path


def generate_sweep_report(
    sweep_csv: Path,
    output_dir: Path,
    *,
    model: Optional[str] = None,
    delta: Optional[float] = None,
) -> Path:
    ctx = ReportContext(
        prepared_as_at=date.today(),
        sweep_csv=sweep_csv,
        output_dir=output_dir,
        model=model,
        delta=delta,
    )
    frame = load_sweep(sweep_csv)
    summary = summarise(frame, delta)
    return write_report_markdown(render_markdown(ctx, frame, summary), output_dir)
