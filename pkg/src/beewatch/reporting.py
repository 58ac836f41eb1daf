"""Stakeholder reports: per-second CSV rows, summaries, and chart data.

The CSV layout is fixed: header
``D,H,M,S,Video Time,Time (formatted),DD_HH_MM_SS,Detected``, LF endings,
UTF-8. The formatted-time string always uses plural unit words
("1 mins", "1 secs") and the colon form zero-pads each field to 2 digits,
which caps reportable videos below 100 days.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

from .errors import ReportError

__all__ = [
    "ReportRow",
    "ReportSummary",
    "decompose_time",
    "build_report",
    "write_csv",
    "parse_csv",
    "summarize",
    "CSV_HEADER",
]

CSV_HEADER = "D,H,M,S,Video Time,Time (formatted),DD_HH_MM_SS,Detected"
MAX_DAYS = 99


def decompose_time(video_time: int) -> tuple[int, int, int, int]:
    """Canonical days/hours/minutes/seconds decomposition."""
    if video_time < 0:
        raise ReportError(f"negative video time {video_time}")
    minutes, s = divmod(video_time, 60)
    hours, m = divmod(minutes, 60)
    d, h = divmod(hours, 24)
    return d, h, m, s


@dataclass(frozen=True)
class ReportRow:
    """One per-second record with every derived time field populated."""

    d: int
    h: int
    m: int
    s: int
    video_time: int
    time_formatted: str
    dd_hh_mm_ss: str
    detected: int

    @classmethod
    def at(cls, video_time: int, detected: int) -> "ReportRow":
        if detected < 0:
            raise ReportError(f"negative detection count {detected}")
        d, h, m, s = decompose_time(video_time)
        if d > MAX_DAYS:
            raise ReportError(f"video time {video_time}s exceeds the {MAX_DAYS}-day format limit")
        return cls(
            d=d,
            h=h,
            m=m,
            s=s,
            video_time=video_time,
            time_formatted=f"{d} days {h} hours {m} mins {s} secs",
            dd_hh_mm_ss=f"{d:02d}:{h:02d}:{m:02d}:{s:02d}",
            detected=detected,
        )


def build_report(series: Sequence[tuple[int, int]]) -> list[ReportRow]:
    """Rows for a contiguous per-second (time, count) series."""
    rows: list[ReportRow] = []
    for position, (second, count) in enumerate(series):
        if position > 0 and second != series[position - 1][0] + 1:
            raise ReportError(
                f"series not contiguous: {series[position - 1][0]} followed by {second}"
            )
        rows.append(ReportRow.at(second, count))
    return rows


def write_csv(rows: Sequence[ReportRow]) -> bytes:
    """Render rows to the canonical CSV byte stream."""
    buffer = io.StringIO()
    buffer.write(CSV_HEADER + "\n")
    for row in rows:
        buffer.write(
            f"{row.d},{row.h},{row.m},{row.s},{row.video_time},"
            f"{row.time_formatted},{row.dd_hh_mm_ss},{row.detected}\n"
        )
    return buffer.getvalue().encode("utf-8")


def parse_csv(data: bytes | str) -> list[ReportRow]:
    """Inverse of :func:`write_csv`; validates header and row invariants."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise ReportError(f"unexpected CSV header: {lines[0] if lines else ''!r}")
    rows: list[ReportRow] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise ReportError(f"line {line_no}: expected 8 fields, got {len(parts)}")
        row = ReportRow.at(int(parts[4]), int(parts[7]))
        rendered = (
            f"{row.d},{row.h},{row.m},{row.s},{row.video_time},"
            f"{row.time_formatted},{row.dd_hh_mm_ss},{row.detected}"
        )
        if rendered != line:
            raise ReportError(f"line {line_no}: derived fields do not match: {line!r}")
        rows.append(row)
    return rows


@dataclass(frozen=True)
class ReportSummary:
    """Aggregates over a row set plus the per-minute chart payload."""

    total_seconds: int
    detection_seconds: int
    max_simultaneous: int
    first_detection: str | None
    last_detection: str | None
    per_minute_series: tuple[tuple[int, int], ...]

    def to_json(self) -> dict:
        return {
            "total_seconds": self.total_seconds,
            "detection_seconds": self.detection_seconds,
            "max_simultaneous": self.max_simultaneous,
            "first_detection": self.first_detection,
            "last_detection": self.last_detection,
            "per_minute_series": [list(pair) for pair in self.per_minute_series],
        }


def summarize(rows: Sequence[ReportRow]) -> ReportSummary:
    """Summary statistics and the (minute, detection-seconds) chart series."""
    if not rows:
        return ReportSummary(0, 0, 0, None, None, ())

    detected_rows = [row for row in rows if row.detected > 0]
    first_minute = rows[0].video_time // 60
    last_minute = rows[-1].video_time // 60
    per_minute = {minute: 0 for minute in range(first_minute, last_minute + 1)}
    for row in detected_rows:
        per_minute[row.video_time // 60] += 1

    return ReportSummary(
        total_seconds=len(rows),
        detection_seconds=len(detected_rows),
        max_simultaneous=max(row.detected for row in rows),
        first_detection=detected_rows[0].dd_hh_mm_ss if detected_rows else None,
        last_detection=detected_rows[-1].dd_hh_mm_ss if detected_rows else None,
        per_minute_series=tuple(sorted(per_minute.items())),
    )
