"""Text report tables: AUC summaries, p-values, regression, Welch tests.

One text format is both written and parsed, so a summary table produced
by a run (or transcribed from elsewhere) can be fed back through the
statistical layer without the underlying raw data.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import DataFormatError
from .stats import RegressionResult, TTestResult, linregress_summary, t_test_vs_random, welch_t_test

_CELL_RE = re.compile(r"(-?\d+\.\d+)\s+\((\d+\.\d+(?:e-?\d+)?)\)")
START_ROW = "unsuccessful_start"
CONTINUE_ROW = "unsuccessful_continue"


def format_mean_std(mean: float, std: float) -> str:
    return f"{mean:.4f} ({std:.3f})"


def format_p(p: float) -> str:
    return f"{p:.3e}" if p < 1e-4 else f"{p:.4f}"


@dataclass(frozen=True)
class SummaryTable:
    """Rows of (mean, std) cells, one column per window size."""

    windows: tuple[float, ...]
    rows: dict[str, tuple[tuple[float, float], ...]]

    def __post_init__(self):
        for name, cells in self.rows.items():
            if len(cells) != len(self.windows):
                raise ValueError(f"row {name!r} has {len(cells)} cells for {len(self.windows)} windows")


def write_auc_table(table: SummaryTable, path) -> None:
    name_w = max([len("experiment")] + [len(n) for n in table.rows]) + 2
    lines = ["experiment".ljust(name_w) + "".join(f"{f'{w:g}s':<18}" for w in table.windows)]
    for name, cells in table.rows.items():
        lines.append(name.ljust(name_w) + "".join(f"{format_mean_std(m, s):<18}" for m, s in cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_auc_table(path) -> SummaryTable:
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].split() or lines[0].split()[0] != "experiment":
        raise DataFormatError(f"{path}: expected header line starting with 'experiment'")
    header = lines[0].split()[1:]
    try:
        windows = tuple(float(tok.rstrip("s")) for tok in header)
    except ValueError:
        raise DataFormatError(f"{path}: malformed window columns {header!r}")
    if not windows:
        raise DataFormatError(f"{path}: no window columns")
    rows: dict[str, tuple[tuple[float, float], ...]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        name = line.split()[0]
        cells = [(float(m), float(s)) for m, s in _CELL_RE.findall(line)]
        if len(cells) != len(windows):
            raise DataFormatError(
                f"{path}:{lineno}: row {name!r} has {len(cells)} 'mean (std)' cells, expected {len(windows)}"
            )
        rows[name] = tuple(cells)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return SummaryTable(windows=windows, rows=rows)


@dataclass(frozen=True)
class StatsReport:
    """Everything the statistical layer derives from a summary table."""

    table: SummaryTable
    n: int
    alpha: float
    t_tests: dict[str, tuple[TTestResult, ...]]
    regressions: dict[str, RegressionResult]
    welch: dict[float, TTestResult]


def stats_from_summary(table: SummaryTable, n: int = 100, alpha: float = 0.001) -> StatsReport:
    """t-tests against chance, per-row regression, start-vs-continue Welch."""
    t_tests = {
        name: tuple(t_test_vs_random(m, s, n=n, alpha=alpha) for m, s in cells)
        for name, cells in table.rows.items()
    }
    regressions = {}
    if len(table.windows) >= 2:
        for name, cells in table.rows.items():
            regressions[name] = linregress_summary(
                table.windows, [m for m, _ in cells], [s for _, s in cells], n=n
            )
    welch = {}
    if START_ROW in table.rows and CONTINUE_ROW in table.rows:
        for i, w in enumerate(table.windows):
            m1, s1 = table.rows[START_ROW][i]
            m2, s2 = table.rows[CONTINUE_ROW][i]
            welch[w] = welch_t_test(m1, s1, n, m2, s2, n, alpha=alpha)
    return StatsReport(table=table, n=n, alpha=alpha, t_tests=t_tests, regressions=regressions, welch=welch)


def write_p_table(report: StatsReport, path) -> None:
    table = report.table
    name_w = max([len("experiment")] + [len(n) for n in table.rows]) + 2
    lines = [
        f"# one-sided t-test vs chance level 0.5, n={report.n}, '*' marks p < alpha={report.alpha:g}",
        "experiment".ljust(name_w) + "".join(f"{f'{w:g}s':<18}" for w in table.windows),
    ]
    for name in table.rows:
        cells = []
        for res in report.t_tests[name]:
            mark = " *" if res.significant else ""
            cells.append(f"{format_p(res.p_value)}{mark}")
        lines.append(name.ljust(name_w) + "".join(f"{c:<18}" for c in cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_regression_table(report: StatsReport, path) -> None:
    name_w = max([len("experiment")] + [len(n) for n in report.table.rows]) + 2
    lines = [
        f"# least squares over window size, pooled across the {report.n} repetitions per cell",
        "experiment".ljust(name_w) + f"{'slope':<12}{'intercept':<12}{'r_squared':<12}",
    ]
    for name, reg in report.regressions.items():
        lines.append(
            name.ljust(name_w) + f"{reg.slope:<+12.4f}{reg.intercept:<12.4f}{reg.r_squared:<12.4f}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_welch_table(report: StatsReport, path) -> None:
    lines = [
        f"# Welch's t-test, {START_ROW} vs {CONTINUE_ROW}, one-sided on the observed difference",
        f"{'window':<10}{'t':<12}{'df':<10}{'p':<16}{'log10_p':<12}significant",
    ]
    for w, res in report.welch.items():
        lines.append(
            f"{f'{w:g}s':<10}{res.t_statistic:<12.3f}{res.degrees_of_freedom:<10.2f}"
            f"{format_p(res.p_value):<16}{res.log10_p:<12.3f}{'yes' if res.significant else 'no'}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_stats_reports(report: StatsReport, out_dir) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "pvalues": out_dir / "pvalues_table.txt",
        "regression": out_dir / "regression_table.txt",
        "welch": out_dir / "welch_table.txt",
    }
    write_p_table(report, paths["pvalues"])
    write_regression_table(report, paths["regression"])
    write_welch_table(report, paths["welch"])
    return paths
