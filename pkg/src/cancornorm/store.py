"""Persistence of calibrated null tables and power reports.

A null-table file is a single JSON header line followed by the raw table
payload as little-endian 64-bit floats.  The header stays human-inspectable
(``head -1 file``) while the payload is compact and exact; a SHA-256 over
the payload guards against corruption.  Unknown format versions are a hard
error rather than a silent migration.
"""

from __future__ import annotations

import csv
import hashlib
import json
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .montecarlo import NullTable, PowerReport
from .stats import StatisticId

FORMAT_VERSION = 1


class NullTableFormatError(ValueError):
    """Unparseable header or unsupported format version."""


class NullTableLengthError(ValueError):
    """Payload length disagrees with the replication count in the header."""


class NullTableIntegrityError(ValueError):
    """Payload checksum does not match the header."""


def _library_version() -> str:
    try:
        return version("cancornorm")
    except PackageNotFoundError:
        return "unknown"


def save_null(table: NullTable, path) -> None:
    payload = np.ascontiguousarray(table.values, dtype="<f8").tobytes()
    header = {
        "format_version": FORMAT_VERSION,
        "statistic": table.statistic.name,
        "n": table.n,
        "p": table.p,
        "replications": table.replications,
        "seed": table.seed,
        "stream": list(table.stream),
        "created_at": table.created_at,
        "library_version": _library_version(),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        fh.write(payload)


def load_null(path) -> NullTable:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise NullTableFormatError(f"{path}: unreadable header ({exc})") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise NullTableFormatError(
            f"{path}: format version {header.get('format_version')!r} not supported "
            f"(expected {FORMAT_VERSION})"
        )
    replications = int(header["replications"])
    if len(payload) != 8 * replications:
        raise NullTableLengthError(
            f"{path}: payload holds {len(payload) // 8} values, header says {replications}"
        )
    if hashlib.sha256(payload).hexdigest() != header["payload_sha256"]:
        raise NullTableIntegrityError(f"{path}: payload checksum mismatch")
    values = np.frombuffer(payload, dtype="<f8").astype(float)
    return NullTable(
        statistic=StatisticId.parse(header["statistic"]),
        n=int(header["n"]),
        p=int(header["p"]),
        replications=replications,
        seed=int(header["seed"]),
        stream=tuple(int(s) for s in header.get("stream", ())),
        values=values,
        created_at=str(header["created_at"]),
    )


def null_table_filename(statistic: StatisticId, n: int, p: int) -> str:
    return f"{statistic.name}_n{n}_p{p}.null"


def find_null(directory, statistic: StatisticId, n: int, p: int) -> NullTable:
    path = Path(directory) / null_table_filename(statistic, n, p)
    if not path.exists():
        raise FileNotFoundError(
            f"no null table for {statistic.name} at (n={n}, p={p}); expected {path}"
        )
    return load_null(path)


def report_rows(report: PowerReport) -> list[dict]:
    return [
        {
            "alternative": report.alternative,
            "n": report.n,
            "p": report.p,
            "statistic": cell.statistic.name,
            "power": cell.power,
            "se": cell.se,
            "reps": cell.replications,
        }
        for cell in report.cells
    ]


def export_report(report: PowerReport, format: str, path) -> None:
    """Write a power report as CSV rows or as a JSON document."""
    format = format.lower()
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["alternative", "n", "p", "statistic", "power", "se", "reps"]
            )
            writer.writeheader()
            for row in report_rows(report):
                row["power"] = repr(row["power"])
                row["se"] = repr(row["se"])
                writer.writerow(row)
    elif format == "json":
        doc = {
            "alternative": report.alternative,
            "n": report.n,
            "p": report.p,
            "alpha": report.alpha,
            "cells": [
                {
                    "statistic": cell.statistic.name,
                    "power": cell.power,
                    "se": cell.se,
                    "replications": cell.replications,
                }
                for cell in report.cells
            ],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format {format!r} (use 'csv' or 'json')")
