"""Slot-hopping scheduler over a sensed q x p time-frequency grid.

Each base station senses all q frequency slots once per time slot
(imperfectly), folds the observation into a per-slot occupancy belief
with a two-state Markov prior, and then assigns one slot to each of its
users under the hopping rule that a user never repeats its previous
slot. Ground truth (jammer and external traffic) evolves independently
of what the stations believe, so sensing noise translates directly into
jammer hits and lost blocks.
"""

from dataclasses import dataclass

import numpy as np

from .montecarlo import RngSpec

FREE = "free"
JAMMER = "jammer"
EXTERNAL = "external"

GREEDY_BELIEF = "greedy_belief"
RANDOM_HOP = "random_hop"
POLICIES = (GREEDY_BELIEF, RANDOM_HOP)

_SRC_FREE = 0
_SRC_JAMMER = 1
_SRC_EXTERNAL = 2
_SRC_TAGS = (FREE, JAMMER, EXTERNAL)


class OverloadError(RuntimeError):
    """A station could not find admissible slots for all its users.

    assignment holds the partial allocation with -1 for the users that
    could not be placed.
    """

    def __init__(self, message, assignment=None):
        super().__init__(message)
        self.assignment = assignment


@dataclass(frozen=True)
class GridConfig:
    """Static description of one scheduling scenario."""

    q: int = 64
    p: int = 1000
    L: int = 8
    m: int = 4
    users_per_bs: tuple[int, ...] = (1, 1, 1, 1)
    jammed_slots: frozenset[int] = frozenset()
    external_occupancy_prob: float = 0.0
    sense_miss_prob: float = 0.0
    sense_fa_prob: float = 0.0
    belief_persistence: float = 0.8
    distinct_within_block: bool = False
    shared_control_matrix: bool = False

    def __post_init__(self):
        if self.q < 1 or self.p < 1 or self.L < 1 or self.m < 1:
            raise ValueError(
                f"grid dimensions must be >= 1, got q={self.q}, p={self.p}, "
                f"L={self.L}, m={self.m}"
            )
        users = tuple(int(u) for u in self.users_per_bs)
        object.__setattr__(self, "users_per_bs", users)
        if len(users) != self.m:
            raise ValueError(
                f"users_per_bs must list {self.m} stations, got {len(users)}"
            )
        if any(u < 0 for u in users):
            raise ValueError(f"user counts must be >= 0, got {users}")
        if sum(users) > self.q:
            raise ValueError(
                f"{sum(users)} users cannot fit {self.q} slots collision-free"
            )
        if self.L > self.p:
            raise ValueError(f"block length L={self.L} exceeds horizon p={self.p}")
        jam = frozenset(int(f) for f in self.jammed_slots)
        object.__setattr__(self, "jammed_slots", jam)
        if any(not 0 <= f < self.q for f in jam):
            raise ValueError(f"jammed slots out of range [0, {self.q}): {sorted(jam)}")
        for name in (
            "external_occupancy_prob",
            "sense_miss_prob",
            "sense_fa_prob",
            "belief_persistence",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def k(self) -> int:
        """Total served users, i.e. slots occupied per time slot."""
        return sum(self.users_per_bs)


@dataclass(frozen=True, eq=False)
class BeliefState:
    """Per-slot posterior probability of non-legitimate occupation."""

    probs: np.ndarray

    @staticmethod
    def uniform(q: int, prior: float = 0.5) -> "BeliefState":
        return BeliefState(probs=np.full(q, float(prior)))


@dataclass(frozen=True)
class EpisodeStats:
    """Aggregate outcome counters for one scheduled episode.

    collisions counts cells holding two or more legitimate users;
    jammer_hits counts user transmissions on cells a jammer or external
    device occupied; blocks_delivered counts completed runs of L
    consecutive clean transmissions (sole user on the slot, nothing
    hostile on it) per user. pattern_entropy is the mean over users of
    the Shannon entropy of their empirical slot histogram, in bits.
    """

    collisions: int
    jammer_hits: int
    hop_violations: int
    blocks_delivered: int
    overloads: int
    pattern_entropy: float

    def as_dict(self) -> dict:
        return {
            "collisions": self.collisions,
            "jammer_hits": self.jammer_hits,
            "hop_violations": self.hop_violations,
            "blocks_delivered": self.blocks_delivered,
            "overloads": self.overloads,
            "pattern_entropy": self.pattern_entropy,
        }


class OccupancyGrid:
    """Ground-truth record of one episode.

    source holds the non-legitimate occupation (free / jammer /
    external) per cell; assignments holds each user's slot per time slot
    with -1 for idle. Legitimate users are kept out of source so the
    background the stations were fighting stays visible after the fact.
    """

    def __init__(self, q: int, p: int, n_users: int):
        self.q = q
        self.p = p
        self.source = np.zeros((p, q), dtype=np.int8)
        self.assignments = np.full((p, n_users), -1, dtype=np.int32)

    def occupant(self, t: int, f: int) -> str:
        """Tag for one cell; the lowest-numbered user wins over background."""
        users = np.flatnonzero(self.assignments[t] == f)
        if users.size:
            return f"user{users[0]}"
        return _SRC_TAGS[self.source[t, f]]

    def rows(self):
        """Yield (t, f, tag) for every cell, in row-major order."""
        for t in range(self.p):
            for f in range(self.q):
                yield t, f, self.occupant(t, f)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngSpec):
        return rng.generator()
    return rng


def sense(truth: np.ndarray, cfg: GridConfig, rng) -> np.ndarray:
    """One noisy full-band observation: boolean occupied-or-not per slot.

    Occupied slots are seen with probability 1 - sense_miss_prob, free
    slots misread as occupied with probability sense_fa_prob. rng may be
    an RngSpec or a live numpy Generator.
    """
    gen = _as_generator(rng)
    truth = np.asarray(truth, dtype=bool)
    u = gen.random(truth.size)
    p_occ = np.where(truth, 1.0 - cfg.sense_miss_prob, cfg.sense_fa_prob)
    return u < p_occ


def update_beliefs(
    state: BeliefState, observed: np.ndarray, cfg: GridConfig
) -> BeliefState:
    """Bayes update of the occupancy beliefs for one observation round.

    The prior first mixes through the two-state persistence kernel
    (a slot keeps its state with probability belief_persistence), then
    the noisy observation reweights it through the sensor's likelihoods.
    """
    observed = np.asarray(observed, dtype=bool)
    pi = state.probs
    rho = cfg.belief_persistence
    prior = rho * pi + (1.0 - rho) * (1.0 - pi)
    like_occ = np.where(observed, 1.0 - cfg.sense_miss_prob, cfg.sense_miss_prob)
    like_free = np.where(observed, cfg.sense_fa_prob, 1.0 - cfg.sense_fa_prob)
    num = prior * like_occ
    den = num + (1.0 - prior) * like_free
    post = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), prior)
    return BeliefState(probs=post)


def _admissible(f, taken, prev_f, excluded):
    return f not in taken and f != prev_f and (excluded is None or f not in excluded)


def decide(
    beliefs: BeliefState,
    prev: np.ndarray,
    policy,
    rng,
    *,
    occupied=None,
    excluded=None,
) -> np.ndarray:
    """Assign one slot to each user of a station for the next time slot.

    prev holds each user's slot from the previous time slot (-1 if
    idle); no user is ever handed its own previous slot, and users of
    the same station never share a slot. occupied adds slots already
    claimed elsewhere this time slot (shared control matrix); excluded
    adds per-user forbidden sets (block-distinct hopping).

    policy is "greedy_belief" (fill users with the least-suspect slots,
    ties to the lowest index), "random_hop" (uniform over admissible
    slots, ignoring beliefs), or a callable (beliefs, prev, gen) ->
    assignment array that is given free rein.

    Raises OverloadError when some user cannot be placed; the partial
    assignment rides on the exception. rng may be an RngSpec or a live
    numpy Generator (only random_hop and custom policies consume it).
    """
    gen = _as_generator(rng)
    prev = np.asarray(prev, dtype=int)
    n = prev.size
    q = beliefs.probs.size
    if callable(policy):
        out = np.asarray(policy(beliefs, prev, gen), dtype=int)
        if out.shape != (n,):
            raise ValueError(
                f"custom policy returned shape {out.shape}, expected {(n,)}"
            )
        if np.any((out < -1) | (out >= q)):
            raise ValueError("custom policy assigned a slot outside [0, q)")
        return out
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}, expected one of {POLICIES}")

    taken: set[int] = set(occupied) if occupied else set()
    out = np.full(n, -1, dtype=int)
    if policy == GREEDY_BELIEF:
        order = np.argsort(beliefs.probs, kind="stable")
        for u in range(n):
            excl = excluded[u] if excluded is not None else None
            for f in order:
                f = int(f)
                if _admissible(f, taken, prev[u], excl):
                    out[u] = f
                    taken.add(f)
                    break
    else:
        for u in range(n):
            excl = excluded[u] if excluded is not None else None
            cand = [f for f in range(q) if _admissible(f, taken, prev[u], excl)]
            if cand:
                f = cand[int(gen.integers(len(cand)))]
                out[u] = f
                taken.add(f)
    if np.any(out < 0):
        raise OverloadError(
            f"{int(np.count_nonzero(out < 0))} of {n} users could not be placed",
            assignment=out,
        )
    return out


def _entropy_bits(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    pmf = counts[counts > 0] / total
    return float(-(pmf * np.log2(pmf)).sum())


def run_episode_trace(cfg: GridConfig, policy, rng: RngSpec):
    """Run one episode and return (EpisodeStats, OccupancyGrid).

    Stations act in index order within each time slot; with the shared
    control matrix enabled, later stations see the slots earlier ones
    claimed. Overloads are tolerated: the affected users stay idle for
    that time slot and the overload counter advances.
    """
    gen = rng.generator()
    n_users = cfg.k
    grid = OccupancyGrid(cfg.q, cfg.p, n_users)
    jam = np.zeros(cfg.q, dtype=bool)
    jam[list(cfg.jammed_slots)] = True

    beliefs = [BeliefState.uniform(cfg.q) for _ in range(cfg.m)]
    # user index ranges per station
    bounds = np.concatenate([[0], np.cumsum(cfg.users_per_bs)])
    prev = np.full(n_users, -1, dtype=int)
    block_used: list[set[int]] = [set() for _ in range(n_users)]

    collisions = 0
    jammer_hits = 0
    hop_violations = 0
    blocks = 0
    overloads = 0
    streak = np.zeros(n_users, dtype=int)
    slot_counts = np.zeros((n_users, cfg.q), dtype=np.int64)

    for t in range(cfg.p):
        ext = gen.random(cfg.q) < cfg.external_occupancy_prob
        row = np.zeros(cfg.q, dtype=np.int8)
        row[ext] = _SRC_EXTERNAL
        row[jam] = _SRC_JAMMER
        grid.source[t] = row
        truth = row > 0

        if cfg.distinct_within_block and t % cfg.L == 0:
            block_used = [set() for _ in range(n_users)]

        alloc = np.full(n_users, -1, dtype=int)
        claimed: set[int] = set()
        for b in range(cfg.m):
            obs = sense(truth, cfg, gen)
            beliefs[b] = update_beliefs(beliefs[b], obs, cfg)
            lo, hi = bounds[b], bounds[b + 1]
            if hi == lo:
                continue
            excl = block_used[lo:hi] if cfg.distinct_within_block else None
            occupied = claimed if cfg.shared_control_matrix else None
            try:
                got = decide(
                    beliefs[b], prev[lo:hi], policy, gen,
                    occupied=occupied, excluded=excl,
                )
            except OverloadError as err:
                got = err.assignment
                overloads += int(np.count_nonzero(got < 0))
            alloc[lo:hi] = got
            claimed.update(int(f) for f in got if f >= 0)

        grid.assignments[t] = alloc

        active = alloc >= 0
        occ_count = np.bincount(alloc[active], minlength=cfg.q)
        collisions += int(np.count_nonzero(occ_count >= 2))
        jammer_hits += int(np.count_nonzero(truth[alloc[active]]))
        hop_violations += int(
            np.count_nonzero(active & (prev >= 0) & (alloc == prev))
        )
        slot_counts[np.flatnonzero(active), alloc[active]] += 1
        if cfg.distinct_within_block:
            for u in np.flatnonzero(active):
                block_used[u].add(int(alloc[u]))

        # a transmission is clean when the user has the cell to itself
        # and no jammer or external source sits on it
        safe = np.where(active, alloc, 0)
        clean = active & ~truth[safe] & (occ_count[safe] == 1)
        streak = np.where(clean, streak + 1, 0)
        full = streak >= cfg.L
        blocks += int(np.count_nonzero(full))
        streak[full] = 0

        prev = alloc

    entropy = float(np.mean([_entropy_bits(slot_counts[u]) for u in range(n_users)]))
    stats = EpisodeStats(
        collisions=collisions,
        jammer_hits=jammer_hits,
        hop_violations=hop_violations,
        blocks_delivered=blocks,
        overloads=overloads,
        pattern_entropy=entropy,
    )
    return stats, grid


def run_episode(cfg: GridConfig, policy, rng: RngSpec) -> EpisodeStats:
    """Run one episode and return its aggregate statistics."""
    stats, _ = run_episode_trace(cfg, policy, rng)
    return stats
