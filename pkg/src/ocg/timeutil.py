from __future__ import annotations

from datetime import datetime, timezone

_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime(_FORMAT)


def parse_ts(text: str) -> datetime:
    """Parse ``YYYY-MM-DDTHH:MM:SSZ`` (offsets like ``+00:00`` are accepted too)."""
    text = text.strip()
    try:
        if text.endswith("Z"):
            ts = datetime.strptime(text, _FORMAT).replace(tzinfo=timezone.utc)
        else:
            ts = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"bad timestamp {text!r}") from exc
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no timezone")
    return normalize_ts(ts)


def normalize_ts(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        raise ValueError("naive datetime; timestamps must be timezone-aware")
    return ts.astimezone(timezone.utc).replace(microsecond=0)
