import json
from pathlib import Path

from pabsa.corpus import AspectInstance, Polarity

DATA_DIR = Path(__file__).parent / "data"

# Small Persian/ASCII word pool for building random instances. The ZWNJ word
# exercises word-internal joining.
WORD_POOL = [
    "گوشی",
    "خوب",
    "بد",
    "قیمت",
    "کیفیت",
    "عالی",
    "ضعیف",
    "می‌رود",
    "ارسال",
    "باتری",
    "تهران",
    "سریع",
    "phone",
    "ok",
]


def make_instance(words, aspect_idx, label=Polarity.POSITIVE, iid="x"):
    """Instance whose text is the space-joined words and whose aspect is one
    whole word of it."""
    text = " ".join(words)
    start = sum(len(w) + 1 for w in words[:aspect_idx])
    end = start + len(words[aspect_idx])
    return AspectInstance(
        id=iid,
        text=text,
        aspect_term=words[aspect_idx],
        aspect_start=start,
        aspect_end=end,
        label=label,
    )


def write_jsonl(path: Path, records) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return path
