"""Event-log ingestion and the network views derived from it.

File formats
------------
events
    JSON lines with keys ``post_id``, ``author_id``, ``repost_of`` (null for
    original posts) and ``ts`` (integer epoch seconds).
users
    CSV with header ``user_id,followers,followees,verified,mentions_made,mentions_received``.
annotations
    CSV with header ``user_id,party,coalition``.
"""
from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .graphs import BipartiteGraph, DirectedBipartiteGraph, GraphError, WeightedDigraph

log = logging.getLogger(__name__)

USER_FIELDS = ["user_id", "followers", "followees", "verified", "mentions_made", "mentions_received"]
ANNOTATION_FIELDS = ["user_id", "party", "coalition"]


class IngestError(ValueError):
    def __init__(self, message: str, errors: Sequence[str] = ()):
        super().__init__(message)
        self.errors = list(errors)


@dataclass(frozen=True)
class PostEvent:
    post_id: str
    author_id: str
    repost_of: str | None = None
    timestamp: int = 0

    @property
    def is_repost(self) -> bool:
        return self.repost_of is not None


@dataclass(frozen=True)
class UserMeta:
    user_id: str
    follower_count: int = 0
    followee_count: int = 0
    verified: bool = False
    mentions_made: int = 0
    mentions_received: int = 0

    def __post_init__(self):
        for name in ("follower_count", "followee_count", "mentions_made", "mentions_received"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class DebateDataset:
    """Cleaned event log plus user metadata and optional annotations.

    Build it with :meth:`from_events` (or :func:`load_dataset`) so that the
    cleaning rules are applied.  ``quarantine`` counts dropped events by reason.
    """

    posts: tuple[PostEvent, ...]
    users: dict[str, UserMeta]
    annotations: dict[str, tuple[str, str]] | None = None
    quarantine: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_events(cls, events: Iterable[PostEvent], users: Iterable[UserMeta] = (),
                    annotations: dict[str, tuple[str, str]] | None = None) -> "DebateDataset":
        events = list(events)
        originals: dict[str, PostEvent] = {}
        quarantine: Counter[str] = Counter()
        clean: list[PostEvent] = []
        for ev in events:
            if ev.repost_of is None:
                if ev.post_id in originals:
                    quarantine["duplicate_post"] += 1
                    continue
                originals[ev.post_id] = ev
        seen_reposts: set[tuple[str, str]] = set()
        seen_originals: set[str] = set()
        for ev in events:
            if ev.repost_of is None:
                if ev.post_id in seen_originals:
                    continue
                seen_originals.add(ev.post_id)
                clean.append(ev)
                continue
            if ev.repost_of not in originals:
                quarantine["dangling_repost"] += 1
                continue
            key = (ev.author_id, ev.repost_of)
            if key in seen_reposts:
                quarantine["duplicate_repost"] += 1
                continue
            seen_reposts.add(key)
            clean.append(ev)

        table: dict[str, UserMeta] = {}
        for u in users:
            table[u.user_id] = u
        for ev in clean:
            if ev.author_id not in table:
                table[ev.author_id] = UserMeta(ev.author_id)
        if quarantine:
            log.info("quarantined events: %s", dict(quarantine))
        return cls(tuple(clean), table, annotations, dict(quarantine))

    @cached_property
    def author_of(self) -> dict[str, str]:
        return {p.post_id: p.author_id for p in self.posts if p.repost_of is None}

    @cached_property
    def originals(self) -> list[PostEvent]:
        return [p for p in self.posts if p.repost_of is None]

    @cached_property
    def reposts(self) -> list[tuple[str, str, str]]:
        """``(reposter, post_id, author)`` for every clean repost, self-reposts included."""
        a = self.author_of
        return [(p.author_id, p.repost_of, a[p.repost_of]) for p in self.posts if p.repost_of is not None]

    @cached_property
    def active_users(self) -> tuple[str, ...]:
        """Users with at least one event, in first-seen order."""
        return tuple(dict.fromkeys(p.author_id for p in self.posts))

    @property
    def n_self_reposts(self) -> int:
        return sum(1 for r, _, a in self.reposts if r == a)

    def user_order(self, users: Iterable[str]) -> list[str]:
        """Sort ``users`` by position in the user table."""
        pos = {u: i for i, u in enumerate(self.users)}
        return sorted(set(users), key=lambda u: pos.get(u, len(pos)))


def _parse_bool(x: str) -> bool:
    v = x.strip().lower()
    if v in ("1", "true", "t", "yes", "y"):
        return True
    if v in ("0", "false", "f", "no", "n", ""):
        return False
    raise ValueError(f"not a boolean: {x!r}")


def _parse_event(line: str) -> PostEvent:
    obj = json.loads(line)
    repost = obj.get("repost_of")
    return PostEvent(
        post_id=str(obj["post_id"]),
        author_id=str(obj["author_id"]),
        repost_of=None if repost is None else str(repost),
        timestamp=int(obj.get("ts", 0)),
    )


def read_events(path: str | Path) -> tuple[list[PostEvent], list[str], int]:
    events, errors, total = [], [], 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            total += 1
            try:
                events.append(_parse_event(line))
            except (ValueError, KeyError, TypeError) as exc:
                errors.append(f"{path}:{lineno}: {exc!r}")
    return events, errors, total


def read_users(path: str | Path) -> tuple[list[UserMeta], list[str], int]:
    users, errors, total = [], [], 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(USER_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise IngestError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            total += 1
            try:
                users.append(UserMeta(
                    user_id=row["user_id"],
                    follower_count=int(row["followers"]),
                    followee_count=int(row["followees"]),
                    verified=_parse_bool(row["verified"]),
                    mentions_made=int(row["mentions_made"]),
                    mentions_received=int(row["mentions_received"]),
                ))
            except (ValueError, TypeError) as exc:
                errors.append(f"{path}:{reader.line_num}: {exc!r}")
    return users, errors, total


def read_annotations(path: str | Path) -> dict[str, tuple[str, str]]:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(ANNOTATION_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise IngestError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out[row["user_id"]] = (row["party"], row["coalition"])
    return out


def load_dataset(events_path, users_path, annotations_path=None,
                 max_malformed: float = 0.01) -> DebateDataset:
    """Parse the three input files into a :class:`DebateDataset`.

    Malformed lines are skipped and collected; if they exceed ``max_malformed``
    of all lines the load fails with :class:`IngestError` carrying the report.
    """
    events, ev_err, ev_total = read_events(events_path)
    users, us_err, us_total = read_users(users_path)
    errors = ev_err + us_err
    total = ev_total + us_total
    if total == 0:
        raise IngestError("no records found")
    if errors and len(errors) / total > max_malformed:
        raise IngestError(f"{len(errors)} of {total} lines malformed", errors)
    for e in errors:
        log.warning("skipped malformed line %s", e)
    ann = read_annotations(annotations_path) if annotations_path else None
    d = DebateDataset.from_events(events, users, ann)
    if errors:
        d.quarantine["malformed"] = len(errors)
    return d


def write_dataset(d: DebateDataset, events_path, users_path, annotations_path=None) -> None:
    """Write a dataset back out in the ingest formats."""
    with open(events_path, "w", encoding="utf-8") as fh:
        for p in d.posts:
            fh.write(json.dumps({"post_id": p.post_id, "author_id": p.author_id,
                                 "repost_of": p.repost_of, "ts": p.timestamp}) + "\n")
    with open(users_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(USER_FIELDS)
        for u in d.users.values():
            w.writerow([u.user_id, u.follower_count, u.followee_count, int(u.verified),
                        u.mentions_made, u.mentions_received])
    if annotations_path is not None and d.annotations is not None:
        with open(annotations_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ANNOTATION_FIELDS)
            for u, (party, coalition) in d.annotations.items():
                w.writerow([u, party, coalition])


def build_retweet_network(d: DebateDataset) -> WeightedDigraph:
    """Arc i -> j weighted by the number of j's posts that i reposted.

    Nodes are all active users; self-reposts are dropped.
    """
    ids = d.active_users
    pos = {u: i for i, u in enumerate(ids)}
    counts: Counter[tuple[int, int]] = Counter()
    for reposter, _, author in d.reposts:
        if reposter != author:
            counts[pos[reposter], pos[author]] += 1
    return WeightedDigraph.from_arcs(ids, ((s, t, w) for (s, t), w in counts.items()))


def build_user_post_digraph(d: DebateDataset, scope: Iterable[str] | None = None) -> DirectedBipartiteGraph:
    """Users x posts graph with authorship and engagement layers.

    Only posts authored by in-scope users are kept, and only reposts made by
    in-scope users.  ``scope=None`` means every active user.
    """
    users = list(d.active_users) if scope is None else d.user_order(scope)
    if not users:
        raise GraphError("empty scope")
    upos = {u: i for i, u in enumerate(users)}
    posts = [p.post_id for p in d.originals if p.author_id in upos]
    if not posts:
        raise GraphError("scope yields zero posts")
    ppos = {p: a for a, p in enumerate(posts)}
    auth_rows = [upos[d.author_of[p]] for p in posts]
    eng_rows, eng_cols = [], []
    for reposter, post, author in d.reposts:
        if reposter != author and reposter in upos and post in ppos:
            eng_rows.append(upos[reposter])
            eng_cols.append(ppos[post])
    shape = (len(users), len(posts))
    auth = sp.coo_matrix((np.ones(len(posts), dtype=np.int64), (auth_rows, np.arange(len(posts)))), shape=shape)
    eng = sp.coo_matrix((np.ones(len(eng_rows), dtype=np.int64), (eng_rows, eng_cols)), shape=shape)
    return DirectedBipartiteGraph(
        BipartiteGraph.from_matrix(auth, users, posts),
        BipartiteGraph.from_matrix(eng, users, posts),
    )


def build_leader_audience_bipartite(d: DebateDataset, leaders: Iterable[str]) -> BipartiteGraph:
    """Leaders x audience: edge (i, u) iff u reposted at least one post by i.

    The audience layer holds every user with at least one repost of a leader,
    leaders included.  Self pairs are excluded.
    """
    tops = d.user_order(leaders)
    if not tops:
        raise GraphError("empty leader set")
    tpos = {u: i for i, u in enumerate(tops)}
    bots: dict[str, int] = {}
    pairs: set[tuple[int, int]] = set()
    for reposter, _, author in d.reposts:
        if author in tpos and reposter != author:
            b = bots.setdefault(reposter, len(bots))
            pairs.add((tpos[author], b))
    if not pairs:
        raise GraphError("no leader received any repost")
    rows, cols = zip(*sorted(pairs))
    m = sp.coo_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(len(tops), len(bots)))
    return BipartiteGraph.from_matrix(m, tops, list(bots))


def posts_repost_counts(d: DebateDataset) -> dict[str, list[int]]:
    """Per author, the repost count of each of their original posts (self-reposts excluded)."""
    per_post = Counter(post for r, post, a in d.reposts if r != a)
    out: dict[str, list[int]] = {}
    for p in d.originals:
        out.setdefault(p.author_id, []).append(per_post.get(p.post_id, 0))
    return out
