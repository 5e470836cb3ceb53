"""Text formats for match and network data, synthetic generators, trace CSVs.

Match files hold one match per line, ``w1 w2 ... | l1 l2 ...`` with 1-based
player indices. Edge files start with the node count ``m`` and then list
``i j y`` for observed pairs (``y`` in {0, 1}). ``#`` starts a comment in both.
"""

from __future__ import annotations

import csv
import itertools
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from geomc.errors import ConfigError, DomainError
from geomc.sampler import ChainTrace
from geomc.targets import EigenmodelData, EigenmodelState, MatchRecord

__all__ = [
    "load_matches",
    "write_matches",
    "generate_matches",
    "round_robin_matches",
    "volleyball_fixture",
    "ranking_fixture",
    "FIXTURE_P",
    "RANKING_FIXTURE_P",
    "make_fixtures",
    "load_edges",
    "save_edges",
    "planted_network",
    "write_trace",
    "read_trace",
    "coordinate_names",
]

# Generating strengths of the two shipped fixtures (normalised at use).
# Team fixture: 60 matches, teams of 2-4, p_i proportional to 1.5**(i-1).
FIXTURE_P = tuple(1.5**i for i in range(9))
# Ranking fixture: 40 singles matches (full round robin + 4), p_i ~ 10**(i-1).
RANKING_FIXTURE_P = tuple(10.0**i for i in range(9))


def _content_lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def _parse_ints(text, path, lineno):
    try:
        return [int(tok) for tok in text.split()]
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: expected integers, got {text!r}") from None


def load_matches(path) -> list[MatchRecord]:
    """Parse a match file into :class:`MatchRecord` objects."""
    matches = []
    for lineno, line in _content_lines(path):
        if line.count("|") != 1:
            raise ConfigError(f"{path}:{lineno}: expected exactly one '|' separator")
        left, right = line.split("|")
        w = _parse_ints(left, path, lineno)
        l = _parse_ints(right, path, lineno)
        if len(set(w)) != len(w) or len(set(l)) != len(l):
            raise ConfigError(f"{path}:{lineno}: repeated player within a team")
        try:
            matches.append(MatchRecord(frozenset(w), frozenset(l)))
        except DomainError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return matches


def write_matches(matches: Iterable[MatchRecord], path, header: str = "") -> None:
    with open(path, "w") as fh:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        for m in matches:
            fh.write(" ".join(map(str, sorted(m.winners))) + " | " + " ".join(map(str, sorted(m.losers))) + "\n")


def generate_matches(p, n_matches: int, rng, team_sizes: Sequence[int] = (1, 2, 3)) -> list[MatchRecord]:
    """Simulate matches: equal-sized random teams, winner drawn from the model."""
    p = np.asarray(p, dtype=float)
    d = p.size
    out = []
    for _ in range(n_matches):
        k = int(rng.choice(team_sizes))
        players = rng.choice(d, size=2 * k, replace=False)
        a, b = players[:k], players[k:]
        pa, pb = p[a].sum(), p[b].sum()
        if rng.random() < pa / (pa + pb):
            w, l = a, b
        else:
            w, l = b, a
        out.append(MatchRecord(frozenset(int(i) + 1 for i in w), frozenset(int(i) + 1 for i in l)))
    return out


def round_robin_matches(p, rng, n_extra: int = 0) -> list[MatchRecord]:
    """Every pair plays once as singles, plus ``n_extra`` replayed random pairs."""
    p = np.asarray(p, dtype=float)
    pairs = list(itertools.combinations(range(p.size), 2))
    extra = [pairs[k] for k in rng.choice(len(pairs), n_extra, replace=False)] if n_extra else []
    out = []
    for a, b in pairs + extra:
        w, l = (a, b) if rng.random() < p[a] / (p[a] + p[b]) else (b, a)
        out.append(MatchRecord(frozenset([w + 1]), frozenset([l + 1])))
    return out


def _fixture(name) -> Path:
    return Path(str(resources.files("geomc") / "fixtures" / name))


def volleyball_fixture() -> Path:
    """Synthetic 9-player team-match file (60 matches), used for benchmarks."""
    return _fixture("volleyball_synthetic.txt")


def ranking_fixture() -> Path:
    """Synthetic 9-player singles file (40 matches) with well separated strengths."""
    return _fixture("volleyball_ranking.txt")


def _p_line(p):
    p = np.asarray(p) / np.sum(p)
    return "true p = " + " ".join(f"{v:.6g}" for v in p)


def make_fixtures(directory) -> tuple[Path, Path]:
    """Regenerate both shipped fixtures (seed 0) into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    team = directory / "volleyball_synthetic.txt"
    p = np.asarray(FIXTURE_P) / sum(FIXTURE_P)
    write_matches(
        generate_matches(p, 60, np.random.default_rng(0), team_sizes=(2, 3, 4)),
        team,
        header="synthetic 9-player team matches, 60 matches, team sizes 2-4, seed 0\n"
        "p_i proportional to 1.5**(i-1)\n" + _p_line(p),
    )
    ranking = directory / "volleyball_ranking.txt"
    p = np.asarray(RANKING_FIXTURE_P) / sum(RANKING_FIXTURE_P)
    write_matches(
        round_robin_matches(p, np.random.default_rng(0), n_extra=4),
        ranking,
        header="synthetic 9-player singles, full round robin plus 4 replays (40 matches), seed 0\n"
        "p_i proportional to 10**(i-1)\n" + _p_line(p),
    )
    return team, ranking


def load_edges(path) -> EigenmodelData:
    """Read an edge file into signed adjacency form (+1 edge, -1 non-edge, 0 unobserved)."""
    lines = list(_content_lines(path))
    if not lines:
        raise ConfigError(f"{path}: empty edge file")
    lineno, head = lines[0]
    vals = _parse_ints(head, path, lineno)
    if len(vals) != 1 or vals[0] < 2:
        raise ConfigError(f"{path}:{lineno}: header must be a single node count >= 2")
    m = vals[0]
    y = np.zeros((m, m), dtype=int)
    seen = set()
    for lineno, line in lines[1:]:
        vals = _parse_ints(line, path, lineno)
        if len(vals) != 3:
            raise ConfigError(f"{path}:{lineno}: expected 'i j y'")
        i, j, obs = vals
        if not (1 <= i <= m and 1 <= j <= m):
            raise ConfigError(f"{path}:{lineno}: node index out of range 1..{m}")
        if i == j:
            raise ConfigError(f"{path}:{lineno}: self-loop {i}-{j}")
        if obs not in (0, 1):
            raise ConfigError(f"{path}:{lineno}: y must be 0 or 1")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ConfigError(f"{path}:{lineno}: duplicate pair {key}")
        seen.add(key)
        y[i - 1, j - 1] = y[j - 1, i - 1] = 1 if obs else -1
    return EigenmodelData(y)


def save_edges(data: EigenmodelData, path, header: str = "") -> None:
    y = data.ystar
    m = data.m
    with open(path, "w") as fh:
        for line in header.splitlines():
            fh.write(f"# {line}\n")
        fh.write(f"{m}\n")
        for i in range(m):
            for j in range(i + 1, m):
                if y[i, j] != 0:
                    fh.write(f"{i + 1} {j + 1} {1 if y[i, j] > 0 else 0}\n")


def planted_network(m: int, p: int, rng, lam=None, c: float = -0.5, observed_fraction: float = 1.0):
    """Sample a network from the probit eigenmodel with known parameters.

    Defaults plant ``Lambda = m * (1, -0.75, 0.5, ...)`` (first ``p`` entries of
    a decaying alternating pattern). Returns ``(EigenmodelData, EigenmodelState)``.
    """
    Q, R = np.linalg.qr(rng.standard_normal((m, p)))
    U = Q * np.where(np.diag(R) < 0.0, -1.0, 1.0)
    if lam is None:
        lam = m * np.array([(-1) ** r * (1.0 - 0.25 * r) for r in range(p)])
    lam = np.asarray(lam, dtype=float)
    truth = EigenmodelState(U, lam, float(c))
    eta = (U * lam) @ U.T + c
    y = np.zeros((m, m), dtype=int)
    for i in range(m):
        for j in range(i + 1, m):
            if rng.random() < observed_fraction:
                edge = rng.random() < ndtr(eta[i, j])
                y[i, j] = y[j, i] = 1 if edge else -1
    return EigenmodelData(y), truth


def coordinate_names(kind: str, dim: int, m: int | None = None, p: int | None = None) -> list[str]:
    if kind == "eigenmodel":
        names = [f"U{i + 1}_{r + 1}" for r in range(p) for i in range(m)]
        return names + [f"L{r + 1}" for r in range(p)] + ["c"]
    return [f"x{i + 1}" for i in range(dim)]


def _fmt(v) -> str:
    return repr(float(v))


def write_trace(trace: ChainTrace, path, columns: Sequence[str] | None = None) -> None:
    """Write a trace as CSV with shortest round-trip float formatting."""
    if len(trace) == 0:
        raise DomainError("refusing to write an empty trace")
    samples = np.asarray(trace.samples)
    columns = list(columns or trace.columns or coordinate_names("plain", samples.shape[1]))
    if len(columns) != samples.shape[1]:
        raise DomainError("column names do not match the sample dimension")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", *columns, "accepted", "delta_H", "log_density"])
        for i in range(len(trace)):
            w.writerow([i, *map(_fmt, samples[i]), int(trace.accepted[i]), _fmt(trace.delta_H[i]),
                        _fmt(trace.log_density[i])])


def read_trace(path) -> ChainTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    columns = header[1:-3]
    data = np.array([[float(v) for v in r[1:-3]] for r in body]).reshape(len(body), len(columns))
    return ChainTrace(
        samples=data,
        accepted=np.array([r[-3] == "1" for r in body], dtype=bool),
        delta_H=np.array([float(r[-2]) for r in body]),
        log_density=np.array([float(r[-1]) for r in body]),
        columns=columns,
    )
