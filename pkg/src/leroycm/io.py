"""Persistence: curve CSVs, versioned JSON records, atomic writes and a content-addressed cache."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .errors import SchemaError
from .mlr import MLRParams

SCHEMA_VERSION = 1
CACHE_ENV = "LEROYCM_CACHE_DIR"
CSV_HEADER = ("y", "m", "abs_err")


def tool_version() -> str:
    from . import __version__
    return __version__


def fmt(v: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(v), ".17g")


def created_at() -> str:
    """Timestamp for records.

    Taken from SOURCE_DATE_EPOCH (default 0) so that identical runs produce
    identical bytes.
    """
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return _dt.datetime.fromtimestamp(epoch, _dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# ---------------------------------------------------------------------------
# CSV curves


def curve_filename(params: MLRParams) -> str:
    b = params.beta
    beta = f"{b.numerator}" if b.denominator == 1 else f"{b.numerator}-{b.denominator}"
    return f"m_{params.l}-{params.k}_{beta}_{params.n}.csv"


def curve_csv(rows: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for y, m, e in rows:
        w.writerow((fmt(y), fmt(m), fmt(e)))
    return buf.getvalue()


def read_curve_csv(path) -> list[tuple[float, float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != CSV_HEADER:
            raise SchemaError(f"{path}: expected header {','.join(CSV_HEADER)}, got {','.join(header)}")
        return [tuple(float(v) for v in row) for row in r]


def write_curve_csv(directory, params: MLRParams, rows) -> Path:
    return atomic_write(Path(directory) / curve_filename(params), curve_csv(rows))


# ---------------------------------------------------------------------------
# JSON records


@dataclass(frozen=True)
class CurveArtifactRecord:
    generator: str
    params: dict
    columns: tuple
    rows: tuple
    schema_version: int = SCHEMA_VERSION
    created_at: str = field(default_factory=created_at)
    tool_version: str = field(default_factory=tool_version)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        d = asdict(self)
        d["columns"] = list(self.columns)
        d["rows"] = [list(r) for r in self.rows]
        return json.dumps(d, sort_keys=True, indent=1, allow_nan=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "CurveArtifactRecord":
        v = d.get("schema_version")
        if v != SCHEMA_VERSION:
            raise SchemaError(f"unsupported schema_version {v!r} (this reader knows {SCHEMA_VERSION})")
        return cls(
            generator=d["generator"],
            params=d["params"],
            columns=tuple(d["columns"]),
            rows=tuple(tuple(r) for r in d["rows"]),
            schema_version=v,
            created_at=d["created_at"],
            tool_version=d["tool_version"],
            extra=d.get("extra", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "CurveArtifactRecord":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError(f"not a JSON record: {e}") from None
        if not isinstance(d, dict):
            raise SchemaError("record must be a JSON object")
        return cls.from_dict(d)


def write_record(path, record: CurveArtifactRecord) -> Path:
    return atomic_write(path, record.to_json())


def read_record(path) -> CurveArtifactRecord:
    return CurveArtifactRecord.from_json(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# cache


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "leroycm"


class ResultCache:
    """JSON records stored under the sha256 of their key."""

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()

    @staticmethod
    def digest(key: dict) -> str:
        payload = json.dumps({**key, "tool_version": tool_version()}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()

    def path(self, key: dict) -> Path:
        return self.directory / f"{self.digest(key)}.json"

    def get(self, key: dict) -> Optional[CurveArtifactRecord]:
        p = self.path(key)
        if not p.exists():
            return None
        try:
            return read_record(p)
        except (SchemaError, KeyError, TypeError):
            # stale or foreign entry: treat as a miss, it will be overwritten
            return None

    def put(self, key: dict, record: CurveArtifactRecord) -> Path:
        return write_record(self.path(key), record)
