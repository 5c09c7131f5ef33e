"""Planted-partition debate generator.

Leaders belong to parties, parties to coalitions.  Leaders author posts and
repost each other with party discipline; audience users repost leaders.

Every repost picks a target party first and then a uniformly random post of
that party the user has not reposted yet:

* with probability ``1 - epsilon`` the user's home unit.  For leaders that is
  their own party.  Audience users pick a uniformly random party of their
  home coalition with probability ``audience_coalition_share``, and their
  home party otherwise.
* with probability ``epsilon * gamma`` another party of the home coalition;
* with probability ``epsilon * (1 - gamma)`` a party of another coalition.

A ``broadcaster_share`` of the audience are hyperactive accounts with no
allegiance: they repost posts of uniformly random parties.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .graphs import Partition
from .ingest import DebateDataset, PostEvent, UserMeta, write_dataset


@dataclass(frozen=True)
class SynthConfig:
    n_parties: int = 6
    coalitions: tuple[int, ...] | None = None  # party -> coalition; default pairs parties up
    leaders_per_party: int = 10
    n_audience: int = 5000
    posts_exponent: float = 1.5
    posts_min: int = 5
    posts_max: int = 200
    leader_reposts_min: int = 40
    leader_reposts_max: int = 120
    audience_exponent: float = 2.0
    audience_reposts_max: int = 50
    epsilon: float = 0.1
    gamma: float = 0.8
    audience_coalition_share: float = 0.5
    influential_extra: float = 0.01
    broadcaster_share: float = 0.02
    broadcaster_reposts_min: int = 100
    broadcaster_reposts_max: int = 300
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1 or not 0 <= self.gamma <= 1:
            raise ValueError("epsilon and gamma must lie in [0, 1]")
        if not 0 <= self.audience_coalition_share <= 1:
            raise ValueError("audience_coalition_share must lie in [0, 1]")
        if self.n_parties < 1 or self.leaders_per_party < 1:
            raise ValueError("need at least one party with one leader")
        if self.posts_max < 1 or self.posts_min > self.posts_max:
            raise ValueError("infeasible post-count range")
        if len(self.party_coalition) != self.n_parties:
            raise ValueError("coalition map must cover every party")

    @property
    def party_coalition(self) -> tuple[int, ...]:
        if self.coalitions is not None:
            return tuple(self.coalitions)
        return tuple(p // 2 for p in range(self.n_parties))


@dataclass
class SynthResult:
    dataset: DebateDataset
    party: dict[str, int]
    coalition: dict[str, int]
    leaders: list[str]
    audit: dict = field(default_factory=dict)

    def truth(self, level: str = "party", users=None) -> Partition:
        table = self.party if level == "party" else self.coalition
        ids = list(table) if users is None else [u for u in users if u in table]
        return Partition.from_mapping(table, ids)

    def write(self, out_dir) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "events": out / "events.jsonl",
            "users": out / "users.csv",
            "annotations": out / "annotations.csv",
            "ground_truth": out / "ground_truth.csv",
        }
        write_dataset(self.dataset, paths["events"], paths["users"], paths["annotations"])
        with open(paths["ground_truth"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["user_id", "party", "coalition"])
            for u in self.party:
                w.writerow([u, f"P{self.party[u]}", f"C{self.coalition[u]}"])
        return paths


def _zipf_counts(rng, n, exponent, lo, hi) -> np.ndarray:
    support = np.arange(lo, hi + 1)
    w = support.astype(float) ** -exponent
    return rng.choice(support, size=n, p=w / w.sum())


def generate(cfg: SynthConfig = SynthConfig()) -> SynthResult:
    rng = np.random.default_rng(cfg.seed)
    K = cfg.n_parties
    pc = np.asarray(cfg.party_coalition)
    coal_parties = {c: np.flatnonzero(pc == c) for c in np.unique(pc)}

    leaders, party = [], {}
    for p in range(K):
        for j in range(cfg.leaders_per_party):
            u = f"L{p:02d}{j:03d}"
            leaders.append(u)
            party[u] = p
    audience = [f"u{a:06d}" for a in range(cfg.n_audience)]
    home = rng.integers(0, K, size=cfg.n_audience)
    for u, p in zip(audience, home):
        party[u] = int(p)

    posts_per_leader = _zipf_counts(rng, len(leaders), cfg.posts_exponent, cfg.posts_min, cfg.posts_max)
    events: list[PostEvent] = []
    party_posts: list[list[int]] = [[] for _ in range(K)]
    post_author: list[str] = []
    ts = 1_600_000_000
    for u, n_posts in zip(leaders, posts_per_leader):
        for _ in range(int(n_posts)):
            pid = len(post_author)
            post_author.append(u)
            party_posts[party[u]].append(pid)
            events.append(PostEvent(f"p{pid:07d}", u, None, ts))
            ts += 1
    n_total = len(post_author)
    if n_total == 0:
        raise ValueError("configuration yields zero posts")

    def pick_party(p: int, kind: str) -> int:
        if kind == "broadcaster":
            return int(rng.integers(K))
        is_leader = kind == "leader"
        c = pc[p]
        r = rng.random()
        if r >= cfg.epsilon:
            if not is_leader and rng.random() < cfg.audience_coalition_share:
                return int(rng.choice(coal_parties[c]))
            return p
        same = coal_parties[c][coal_parties[c] != p]
        other = np.flatnonzero(pc != c)
        if (rng.random() < cfg.gamma and same.size) or other.size == 0:
            pool = same if same.size else np.array([p])
        else:
            pool = other
        return int(rng.choice(pool))

    def reachable(p: int, kind: str) -> list[int]:
        """Parties ``pick_party`` returns with nonzero probability."""
        if kind == "broadcaster":
            return list(range(K))
        c = pc[p]
        out = {p} if cfg.epsilon < 1 else set()
        if kind != "leader" and cfg.epsilon < 1 and cfg.audience_coalition_share > 0:
            out |= set(coal_parties[c].tolist())
        if cfg.epsilon > 0:
            same = coal_parties[c][coal_parties[c] != p]
            other = np.flatnonzero(pc != c)
            if same.size and (cfg.gamma > 0 or not other.size):
                out |= set(same.tolist())
            if other.size and (cfg.gamma < 1 or not same.size):
                out |= set(other.tolist())
            if not same.size and not other.size:
                out.add(p)
        return sorted(out)

    leader_reposts = rng.integers(cfg.leader_reposts_min, cfg.leader_reposts_max + 1, size=len(leaders))
    aud_reposts = _zipf_counts(rng, cfg.n_audience, cfg.audience_exponent, 1, cfg.audience_reposts_max)
    n_bc = int(round(cfg.broadcaster_share * cfg.n_audience))
    broadcasters = set(rng.choice(cfg.n_audience, size=n_bc, replace=False).tolist()) if n_bc else set()
    for a in sorted(broadcasters):
        aud_reposts[a] = rng.integers(cfg.broadcaster_reposts_min, cfg.broadcaster_reposts_max + 1)
    kinds = ["broadcaster" if a in broadcasters else "audience" for a in range(cfg.n_audience)]
    sampled: dict[str, int] = {}
    emitted: dict[str, int] = {}
    rid = 0
    for u, target, kind in ([(u, int(n), "leader") for u, n in zip(leaders, leader_reposts)]
                            + [(u, int(n), k) for u, n, k in zip(audience, aud_reposts, kinds)]):
        sampled[u] = target
        left = {q: [x for x in party_posts[q] if post_author[x] != u] for q in reachable(party[u], kind)}
        done: set[int] = set()
        for _ in range(min(target, sum(map(len, left.values())))):
            q = pick_party(party[u], kind)
            while not left[q]:  # exhausted: redraw among the parties still open
                q = pick_party(party[u], kind)
            x = left[q].pop(int(rng.integers(len(left[q]))))
            done.add(x)
            events.append(PostEvent(f"r{rid:08d}", u, f"p{x:07d}", ts))
            rid += 1
            ts += 1
        emitted[u] = len(done)

    users = []
    n_extra = int(round(cfg.influential_extra * cfg.n_audience))
    extra = set(rng.choice(cfg.n_audience, size=n_extra, replace=False).tolist()) if n_extra else set()
    for u in leaders:
        fol = int(rng.integers(5_000, 200_000))
        made = int(rng.integers(0, 50))
        users.append(UserMeta(u, fol, int(rng.integers(100, 2_000)), True, made,
                              made + int(rng.integers(1, 500))))
    for a, u in enumerate(audience):
        if a in extra:
            fee = int(rng.integers(50, 500))
            made = int(rng.integers(0, 20))
            users.append(UserMeta(u, fee + int(rng.integers(1, 2_000)), fee, False, made,
                                  made + int(rng.integers(1, 50))))
        else:
            fol = int(rng.integers(0, 500))
            recv = int(rng.integers(0, 20))
            users.append(UserMeta(u, fol, fol + int(rng.integers(0, 1_000)), False,
                                  recv + int(rng.integers(0, 30)), recv))

    coalition = {u: int(pc[p]) for u, p in party.items()}
    annotations = {u: (f"P{party[u]}", f"C{coalition[u]}") for u in leaders}
    d = DebateDataset.from_events(events, users, annotations)
    audit = {
        "posts_sampled": int(posts_per_leader.sum()),
        "posts_emitted": n_total,
        "reposts_sampled": int(sum(sampled.values())),
        "reposts_emitted": int(sum(emitted.values())),
        "reposts_short": {u: sampled[u] - emitted[u] for u in sampled if sampled[u] != emitted[u]},
        "config": asdict(cfg),
    }
    return SynthResult(d, party, coalition, leaders, audit)


def read_ground_truth(path) -> tuple[dict[str, str], dict[str, str]]:
    party, coalition = {}, {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            party[row["user_id"]] = row["party"]
            coalition[row["user_id"]] = row["coalition"]
    return party, coalition
