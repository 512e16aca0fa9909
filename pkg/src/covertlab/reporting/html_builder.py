from __future__ import annotations

import html
import re
from pathlib import Path

import markdown

REPORT_HTML_NAME = "report.html"

# verdict cells are bare words in the rendered table
_VERDICT_CELL = re.compile(r"<td>(OK|OVER_BUDGET|INFO)</td>")

SWEEP_CSS = """
body { font: 15px/1.55 Georgia, "Times New Roman", serif; color: #222; max-width: 60rem; margin: 2.5rem auto; padding: 0 1.25rem; }
h1, h2 { font-family: Helvetica, Arial, sans-serif; font-weight: 600; }
h2 { margin-top: 2.25rem; padding-bottom: .2rem; border-bottom: 2px solid #cbd5e1; }
table { border-collapse: collapse; margin: 1rem 0; font: 13px/1.4 "DejaVu Sans Mono", monospace; }
th { text-align: left; border-bottom: 2px solid #334155; padding: .3rem .7rem; }
td { border-bottom: 1px solid #e2e8f0; padding: .3rem .7rem; text-align: right; }
td.verdict-OK { color: #166534; }
td.verdict-OVER_BUDGET { color: #b91c1c; font-weight: 700; }
td.verdict-INFO { color: #64748b; }
footer { margin-top: 3rem; font-size: 12px; color: #64748b; }
"""


def _mark_verdicts(body: str) -> str:
    return _VERDICT_CELL.sub(lambda m: f'<td class="verdict-{m.group(1)}">{m.group(1)}</td>', body)


def build_html(md_path: Path, out_dir: Path, title: str = "Covert Sweep Report") -> Path:
    """Markdown sweep report -> one self-contained HTML page next to it."""
    out_dir.mkdir(parents=True, exist_ok=True)
    body = markdown.markdown(md_path.read_text(encoding="utf-8"), extensions=["tables", "sane_lists"])

    page = "\n".join(
        [
            "<!DOCTYPE html>",
            '<html lang="en"><head><meta charset="utf-8">',
            f"<title>{html.escape(title)}</title>",
            f"<style>{SWEEP_CSS}</style>",
            "</head><body>",
            _mark_verdicts(body),
            f"<footer>Rendered from {html.escape(md_path.name)}. Information quantities in nats.</footer>",
            "</body></html>",
            "",
        ]
    )
    html_path = out_dir / REPORT_HTML_NAME
    html_path.write_text(page, encoding="utf-8")
    return html_path
