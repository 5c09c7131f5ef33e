"""Leader (top-layer) selection criteria."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .ingest import DebateDataset, posts_repost_counts

DEFAULT_HINDEX_THRESHOLD = 3


class LeaderError(ValueError):
    pass


@dataclass(frozen=True)
class LeaderCriterion:
    """One of ``verified``, ``influential``, ``hindex`` or ``file``."""

    kind: str = "verified"
    threshold: int = DEFAULT_HINDEX_THRESHOLD
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("verified", "influential", "hindex", "file"):
            raise ValueError(f"unknown leader criterion {self.kind!r}")
        if self.kind == "hindex" and self.threshold < 1:
            raise ValueError("h-index threshold must be >= 1")
        if self.kind == "file" and not self.path:
            raise ValueError("file criterion needs a path")

    @classmethod
    def parse(cls, text: str, threshold: int = DEFAULT_HINDEX_THRESHOLD) -> "LeaderCriterion":
        if text.startswith("file:"):
            return cls("file", threshold, text[5:])
        return cls(text, threshold)

    def select(self, d: DebateDataset) -> list[str]:
        """Selected leaders; raises :class:`LeaderError` when there are none."""
        if self.kind == "verified":
            return select_verified(d)
        if self.kind == "influential":
            out = select_influential(d)
        elif self.kind == "hindex":
            out = select_h_users(d, self.threshold)
        else:
            wanted = set(read_leaders(self.path))
            out = d.user_order(u for u in d.active_users if u in wanted)
        if not out:
            raise LeaderError(f"the {self.kind} criterion selects no active user")
        return out


def select_verified(d: DebateDataset) -> list[str]:
    active = set(d.active_users)
    out = [u for u, m in d.users.items() if m.verified and u in active]
    if not out:
        raise LeaderError("no active verified users")
    return out


def _follow_ratio(followers: int, followees: int) -> float:
    if followees == 0:
        return math.inf if followers > 0 else math.nan
    return followers / followees


def select_influential(d: DebateDataset) -> list[str]:
    """Follower/followee ratio > 1 and more mentions received than made.

    Zero followees count as an infinite ratio when the user has followers.
    """
    active = set(d.active_users)
    out = []
    for u, m in d.users.items():
        if u not in active:
            continue
        r = _follow_ratio(m.follower_count, m.followee_count)
        if r > 1 and m.mentions_received > m.mentions_made:
            out.append(u)
    return out


def hindex(counts: Iterable[int]) -> int:
    c = sorted(counts, reverse=True)
    h = 0
    for rank, x in enumerate(c, 1):
        if x >= rank:
            h = rank
        else:
            break
    return h


def hindex_table(d: DebateDataset) -> dict[str, int]:
    return {u: hindex(c) for u, c in posts_repost_counts(d).items()}


def select_h_users(d: DebateDataset, threshold: int = DEFAULT_HINDEX_THRESHOLD) -> list[str]:
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    table = hindex_table(d)
    return d.user_order(u for u, h in table.items() if h >= threshold)


def read_leaders(path) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]


def write_leaders(users: Iterable[str], path) -> None:
    Path(path).write_text("".join(f"{u}\n" for u in users), encoding="utf-8")
