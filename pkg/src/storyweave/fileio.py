"""Small shared helpers for line-delimited record files and atomic writes."""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Iterator

logger = logging.getLogger(__name__)


def iter_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) for each parseable JSON object line.

    Blank lines are ignored. Malformed lines are skipped with a warning;
    callers that need the skip count should use :func:`read_jsonl`.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                logger.warning("%s:%d: malformed JSON record skipped (%s)", path, lineno, exc.msg)
                continue
            if not isinstance(record, dict):
                logger.warning("%s:%d: record is not an object, skipped", path, lineno)
                continue
            yield lineno, record


def read_jsonl(path: Path, parse: Callable[[dict], Any]) -> tuple[list, int]:
    """Parse every line of ``path`` with ``parse``; return (records, skipped).

    ``parse`` should raise ValueError for records violating the schema;
    those records are skipped with a warning naming the line.
    """
    path = Path(path)
    records = []
    skipped = 0
    total_lines = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            total_lines += 1
            try:
                raw = json.loads(line)
                if not isinstance(raw, dict):
                    raise ValueError("record is not a JSON object")
                records.append(parse(raw))
            except (json.JSONDecodeError, ValueError) as exc:
                skipped += 1
                logger.warning("%s:%d: skipping malformed record: %s", path, lineno, exc)
    return records, skipped


def dumps_record(record: dict) -> str:
    """Serialize one record deterministically (sorted keys, compact)."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def atomic_write_text(path: Path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file + rename in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_jsonl(path: Path, records: list[dict]) -> None:
    atomic_write_text(path, "".join(dumps_record(r) + "\n" for r in records))
