"""Fixed-schema CSV writers for analysis results."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable

from .efficiency import EfficiencyReport
from .experiments import SuccessEstimate
from .fidelity import FidelityRow

FIDELITY_COLUMNS = ("protocol", "channel", "eta", "closed_form", "numeric", "abs_diff")
EFFICIENCY_COLUMNS = ("protocol", "n", "l", "delta0", "delta1", "m", "q", "b", "c", "eta_num", "eta_den")
SUCCESS_COLUMNS = ("protocol", "n", "k", "l", "trials", "successes", "rate", "expected", "ci_low", "ci_high")


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def fidelity_rows(rows: Iterable[FidelityRow]) -> list[list[str]]:
    return [[r.protocol, r.channel, _num(r.eta), _num(r.closed_form), _num(r.numeric), _num(r.abs_diff)]
            for r in rows]


def efficiency_rows(reports: Iterable[EfficiencyReport]) -> list[list[str]]:
    out = []
    for r in reports:
        i = r.inputs
        out.append([i.protocol, str(i.n), str(i.l), str(i.delta0), str(i.delta1),
                    "" if i.m is None else str(i.m), str(r.q), str(r.b), str(r.c),
                    str(r.eta.numerator), str(r.eta.denominator)])
    return out


def success_rows(estimates: Iterable[SuccessEstimate]) -> list[list[str]]:
    out = []
    for e in estimates:
        lo, hi = e.ci()
        out.append([e.protocol, str(e.n), str(e.k), str(e.l), str(e.trials), str(e.successes),
                    _num(e.rate), _num(e.expected), _num(lo), _num(hi)])
    return out


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    try:
        path.write_text(to_csv(columns, rows))
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror}") from err
    return path
