"""Ratio tables as CSV, JSON or XLSX."""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence

import pandas as pd

from auctions.errors import ReportError
from auctions.experiments.sweep import RatioReport

logger = logging.getLogger(__name__)

COLUMNS = ["family", "params", "rule", "alpha", "beta", "welfare", "opt", "ratio", "guarantee_ok"]
FORMATS = ("csv", "json", "xlsx")


def _params_text(params: Dict[str, Any]) -> str:
    return json.dumps(params, sort_keys=True, separators=(",", ":"))


def _json_float(value: float) -> Any:
    return None if isinstance(value, float) and not math.isfinite(value) else value


def reports_to_frame(reports: Sequence[RatioReport]) -> pd.DataFrame:
    rows = [
        {
            "family": r.family,
            "params": _params_text(r.params),
            "rule": r.rule,
            "alpha": r.alpha,
            "beta": r.beta,
            "welfare": r.welfare,
            "opt": r.opt,
            "ratio": r.ratio,
            "guarantee_ok": r.guarantee_ok,
        }
        for r in reports
    ]
    return pd.DataFrame(rows, columns=COLUMNS)


def reports_to_records(reports: Sequence[RatioReport]) -> List[Dict[str, Any]]:
    """JSON rows: non-finite floats become null."""
    return [
        {
            "family": r.family,
            "params": r.params,
            "rule": r.rule,
            "alpha": _json_float(r.alpha),
            "beta": _json_float(r.beta),
            "welfare": _json_float(r.welfare),
            "opt": _json_float(r.opt),
            "ratio": _json_float(r.ratio),
            "guarantee_ok": r.guarantee_ok,
            "failed": r.failed,
            "error": r.error,
        }
        for r in reports
    ]


def render_csv(reports: Sequence[RatioReport]) -> str:
    frame = reports_to_frame(reports)
    frame["guarantee_ok"] = frame["guarantee_ok"].map(lambda ok: "true" if ok else "false")
    return frame.to_csv(index=False, float_format="%.9g", lineterminator="\n")


def _float17(value: float) -> str:
    if not math.isfinite(value):
        return "null"
    text = format(value, ".17g")
    return text + ".0" if text.lstrip("-").isdigit() else text


class Float17Encoder(json.JSONEncoder):
    """JSONEncoder writing every float with 17 significant digits."""

    def iterencode(self, o: Any, _one_shot: bool = False):
        indent = self.indent if self.indent is None or isinstance(self.indent, str) else " " * self.indent
        encoder = json.encoder.encode_basestring_ascii if self.ensure_ascii else json.encoder.encode_basestring
        return json.encoder._make_iterencode(
            {} if self.check_circular else None,
            self.default,
            encoder,
            indent,
            _float17,
            self.key_separator,
            self.item_separator,
            self.sort_keys,
            self.skipkeys,
            _one_shot,
        )(o, 0)


def render_json(reports: Sequence[RatioReport]) -> str:
    return json.dumps(reports_to_records(reports), cls=Float17Encoder, indent=2, ensure_ascii=False) + "\n"


def report_emit(reports: Sequence[RatioReport], path: str | Path, fmt: str = "csv") -> Path:
    """Write ``reports`` to ``path``; ReportError on an unknown format or I/O failure."""
    if fmt not in FORMATS:
        raise ReportError(f"unknown report format {fmt!r} (expected one of {', '.join(FORMATS)})")
    target = Path(path).expanduser()
    try:
        if target.parent and not target.parent.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            target.write_text(render_csv(reports), encoding="utf-8")
        elif fmt == "json":
            target.write_text(render_json(reports), encoding="utf-8")
        else:
            reports_to_frame(reports).to_excel(target, index=False, engine="openpyxl", sheet_name="ratios")
    except OSError as exc:
        raise ReportError(f"could not write report {target}: {exc}") from exc
    logger.info("wrote %d report rows to %s", len(reports), target)
    return target
