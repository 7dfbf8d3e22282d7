"""Offline cache export: score a whole dataset file and write the polarity
cache consumed by the analysis toolkit's file providers.

The dataset format is the toolkit's external JSONL contract (id, text,
aspect_term, aspect_start, aspect_end, ...); this module parses it on its
own so the service stays decoupled from the toolkit's code.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .scoring import Scorer


class ExportError(RuntimeError):
    pass


def _read_instances(path: Path) -> list[dict]:
    instances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ExportError(f"{path}:{lineno}: not valid JSON ({e})") from None
            for field in ("id", "text", "aspect_term", "aspect_start", "aspect_end"):
                if field not in rec:
                    raise ExportError(f"{path}:{lineno}: missing field {field!r}")
            start, end = rec["aspect_start"], rec["aspect_end"]
            if not (
                isinstance(start, int)
                and isinstance(end, int)
                and 0 <= start < end <= len(rec["text"])
                and rec["text"][start:end] == rec["aspect_term"]
            ):
                raise ExportError(f"{path}:{lineno}: invalid aspect span")
            instances.append(rec)
    return instances


def export_cache(dataset_path: str | Path, out_path: str | Path, scorer: Scorer) -> int:
    """Write one cache line per dataset instance, atomically.

    Returns the number of lines written. On any failure the output path is
    left untouched (no partial file).
    """
    dataset_path = Path(dataset_path)
    out_path = Path(out_path)
    instances = _read_instances(dataset_path)
    tmp_path = out_path.with_name(out_path.name + ".tmp")
    try:
        with open(tmp_path, "w", encoding="utf-8") as fh:
            for rec in instances:
                p, n, g = scorer.score(
                    rec["text"], rec["aspect_term"], rec["aspect_start"], rec["aspect_end"]
                )
                fh.write(
                    json.dumps(
                        {"id": rec["id"], "provider_id": scorer.model_id,
                         "scores": [p, n, g]},
                        ensure_ascii=False,
                    )
                )
                fh.write("\n")
        os.replace(tmp_path, out_path)
    except BaseException:
        tmp_path.unlink(missing_ok=True)
        raise
    return len(instances)
