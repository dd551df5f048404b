import csv
import io
import logging
import math
import re
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import orjson
from pydantic import ValidationError

from assembly.assembly_models import EventKind
from assembly.errors import HarnessError
from execution.trace_io import read_trace

from .bench_models import BenchmarkReport, Summary

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2
REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.csv"
AGGREGATE_ROW = "all"
TRACE_NAME = re.compile(r"^(?P<goal>.+)-r(?P<repeat>\d+)\.jsonl$")


def curve_file(goal_id: str) -> str:
    return f"curve-{goal_id}.csv"


def _csv(header: List[str], rows: List[list]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


def report_bytes(report: BenchmarkReport) -> bytes:
    return orjson.dumps(report.model_dump(mode="json"), option=JSON_OPTIONS) + b"\n"


def summary_bytes(report: BenchmarkReport) -> bytes:
    rows = [
        [goal.goal_id, goal.mean_success_pct, goal.mean_time_s, goal.best_trial]
        for goal in report.goals
    ]
    rows.append([AGGREGATE_ROW, report.summary.mean_success_pct, report.summary.mean_time_s, ""])
    return _csv(["goal_id", "mean_success_pct", "mean_time_s", "best_trial"], rows)


def curve_bytes(report: BenchmarkReport, goal_id: str) -> bytes:
    goal = next(g for g in report.goals if g.goal_id == goal_id)
    curves = goal.curves
    rows = [
        list(row)
        for row in zip(curves.time_s, curves.mean_pct, curves.std_pct, curves.best_pct)
    ]
    return _csv(["time_s", "mean_pct", "std_pct", "best_pct"], rows)


def emit_report(report: BenchmarkReport, out_dir: Union[str, Path]) -> List[Path]:
    """Write report.json, summary.csv and one curve CSV per goal."""
    out_dir = Path(out_dir)
    files = {REPORT_FILE: report_bytes(report), SUMMARY_FILE: summary_bytes(report)}
    for goal in report.goals:
        files[curve_file(goal.goal_id)] = curve_bytes(report, goal.goal_id)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, data in files.items():
            (out_dir / name).write_bytes(data)
            written.append(out_dir / name)
    except OSError as e:
        raise HarnessError("IO_ERROR", f"cannot write report to {out_dir}: {e}", path=str(out_dir)) from e
    logger.debug("Wrote %d report files to %s", len(written), out_dir)
    return written


def load_report(out_dir: Union[str, Path]) -> BenchmarkReport:
    path = Path(out_dir) / REPORT_FILE
    try:
        return BenchmarkReport.model_validate(orjson.loads(path.read_bytes()))
    except FileNotFoundError as e:
        raise HarnessError("MISSING_FILE", f"no report at {path}", path=str(path)) from e
    except OSError as e:
        raise HarnessError("IO_ERROR", f"cannot read {path}: {e}", path=str(path)) from e
    except (orjson.JSONDecodeError, ValidationError) as e:
        raise HarnessError("MALFORMED_REPORT", f"{path} is not a benchmark report: {e}") from e


def recompute_summary(out_dir: Union[str, Path]) -> Summary:
    """
    Rebuild the class summary from the trace files alone: completion is the
    share of the goal's pegs inserted, time is the run_ended timestamp.
    """
    trace_dir = Path(out_dir) / "traces"
    if not trace_dir.is_dir():
        raise HarnessError("MISSING_FILE", f"no traces under {out_dir}", path=str(trace_dir))

    by_goal: Dict[str, List[Tuple[int, float, float]]] = defaultdict(list)
    for path in sorted(trace_dir.iterdir()):
        match = TRACE_NAME.match(path.name)
        if match is None:
            continue
        trace = read_trace(path)
        inserted = sum(1 for e in trace.events if e.kind == EventKind.PEG_INSERTED)
        pegs = trace.header.peg_count
        completion = 100.0 * inserted / pegs if pegs else 100.0
        by_goal[match["goal"]].append((int(match["repeat"]), completion, trace.end_time_s))
    if not by_goal:
        raise HarnessError("MISSING_FILE", f"no trace files under {trace_dir}")

    success, times = [], []
    for goal_id in sorted(by_goal):
        trials = sorted(by_goal[goal_id])
        success.append(float(np.mean([completion for _, completion, _ in trials])))
        times.append(float(np.mean([end for _, _, end in trials])))
    return Summary(mean_success_pct=float(np.mean(success)), mean_time_s=float(np.mean(times)))


def summaries_agree(
    a: Summary, b: Summary, rel_tol: float = 1e-9, abs_tol: float = 1e-9
) -> bool:
    return math.isclose(
        a.mean_success_pct, b.mean_success_pct, rel_tol=rel_tol, abs_tol=abs_tol
    ) and math.isclose(a.mean_time_s, b.mean_time_s, rel_tol=rel_tol, abs_tol=abs_tol)
