import pytest
from hypothesis import given, strategies as st

from discomm.ingest import DebateDataset, PostEvent, UserMeta
from discomm.leaders import (LeaderCriterion, LeaderError, hindex, read_leaders, select_h_users,
                             select_influential, select_verified, write_leaders)
from discomm.synth import SynthConfig, generate
from oracles import hindex_reference


def _dataset(users, active):
    events = [PostEvent(f"p_{u}", u) for u in active]
    return DebateDataset.from_events(events, users)


def test_verified_requires_activity():
    users = [UserMeta(f"u{i}", verified=i in (0, 1, 4)) for i in range(5)]
    d = _dataset(users, ["u0", "u1", "u2", "u3"])
    assert select_verified(d) == ["u0", "u1"]


def test_verified_empty_is_an_error():
    with pytest.raises(LeaderError):
        select_verified(_dataset([UserMeta("a")], ["a"]))


def test_synthetic_leaders_recovered():
    res = generate(SynthConfig(n_audience=500, seed=1))
    assert set(select_verified(res.dataset)) == set(res.leaders)


@pytest.mark.parametrize("fol,fee,recv,made,keep", [
    (100, 50, 10, 2, True),
    (50, 50, 10, 2, False),   # ratio exactly 1
    (100, 50, 5, 5, False),   # equal mentions
    (10, 0, 3, 1, True),      # zero followees: infinite ratio
    (0, 0, 3, 1, False),
])
def test_influential(fol, fee, recv, made, keep):
    d = _dataset([UserMeta("x", fol, fee, False, made, recv), UserMeta("y", 0, 0, False, 0, 0)], ["x", "y"])
    assert select_influential(d) == (["x"] if keep else [])


def test_influential_superset_in_synthetic():
    res = generate(SynthConfig(n_audience=1000, seed=2))
    chosen = set(select_influential(res.dataset))
    assert set(res.leaders) <= chosen
    assert len(chosen) > len(res.leaders)


@pytest.mark.parametrize("counts,h", [([], 0), ([5, 4, 2, 1], 2), ([3, 3, 3], 3), ([0, 0], 0), ([10], 1)])
def test_hindex_examples(counts, h):
    assert hindex(counts) == h


@given(st.lists(st.integers(0, 30), max_size=40))
def test_hindex_properties(counts):
    h = hindex(counts)
    assert h == hindex_reference(counts)
    assert h <= min(len(counts), max(counts, default=0))
    assert hindex(counts + [0]) == h


def _h_dataset():
    # a has three posts reposted 3 times each, b two posts reposted twice
    ev = []
    for author, n_posts, n_rep in (("a", 3, 3), ("b", 2, 2)):
        for p in range(n_posts):
            pid = f"{author}{p}"
            ev.append(PostEvent(pid, author))
            ev += [PostEvent(f"r{pid}{k}", f"fan{k}", pid) for k in range(n_rep)]
    ev.append(PostEvent("ra_self", "a", "a0"))  # self repost does not count
    return DebateDataset.from_events(ev)


def test_h_users_threshold():
    d = _h_dataset()
    assert select_h_users(d, 3) == ["a"]
    assert set(select_h_users(d, 2)) == {"a", "b"}
    assert set(select_h_users(d, 3)) <= set(select_h_users(d, 2))


def test_h_survivor_fraction():
    d = generate(SynthConfig(seed=0)).dataset
    frac = len(select_h_users(d, 3)) / len(d.active_users)
    assert 0.005 <= frac <= 0.04  # loose factor-2 band around 1-2%


def test_criterion_parsing(tmp_path):
    write_leaders(["a", "zz"], tmp_path / "l.txt")
    assert read_leaders(tmp_path / "l.txt") == ["a", "zz"]
    c = LeaderCriterion.parse(f"file:{tmp_path / 'l.txt'}")
    assert c.kind == "file" and c.select(_h_dataset()) == ["a"]
    assert LeaderCriterion.parse("hindex", 2).threshold == 2
    with pytest.raises(ValueError):
        LeaderCriterion.parse("popular")
    with pytest.raises(ValueError):
        LeaderCriterion("hindex", 0)


def test_empty_selection_raises():
    d = _dataset([UserMeta("x")], ["x"])
    for kind in ("verified", "influential", "hindex"):
        with pytest.raises(LeaderError):
            LeaderCriterion(kind).select(d)
