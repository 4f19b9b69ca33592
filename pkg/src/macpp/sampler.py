"""Metropolis sampling of the weighted measures, with verification helpers.

Moves add or remove one cube at a uniformly chosen site (diagonal, row,
direction); invalid proposals are rejected in place, which keeps the
proposal symmetric and the chain exactly reversible for the target weights.
Weight ratios are recomputed only on the three diagonals a move can touch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backwall import DiscreteBackWall
from .partitions import SkewPlanePartition, part, support_from_wall
from .weights import WeightSpec, log_diagonal_turn_sum, log_measure_weight


@dataclass(frozen=True)
class ChainConfig:
    seed: int
    burn_in: int
    steps: int
    thin: int
    wall: DiscreteBackWall
    spec: WeightSpec

    def __post_init__(self):
        if self.steps <= self.burn_in or self.burn_in < 0 or self.thin < 1:
            raise ValueError("need steps > burn_in >= 0 and thin >= 1")


class ChainState:
    """Mutable diagonal-section state with cached per-diagonal turn sums."""

    def __init__(self, wall: DiscreteBackWall, spec: WeightSpec):
        self.wall = wall
        self.spec = spec
        self.vs = list(wall.interior_diagonals())
        support = support_from_wall(wall)
        shift = support.wall().v_min - wall.v_min
        self.maxlen = [support.max_length(v + shift) for v in self.vs]
        self.diag = [[0] * m for m in self.maxlen]
        self.logsr = [math.log(spec.s_at(v)) + math.log(spec.r) for v in self.vs]
        self.interacting = abs(spec.alpha - 1.0) > 1e-15
        self.volume = 0
        self.sites = [(i, j) for i, m in enumerate(self.maxlen) for j in range(m)]

    def parts(self, idx: int):
        """Diagonal partition at internal index idx ( [] outside )."""
        if 0 <= idx < len(self.diag):
            return self.diag[idx]
        return []

    def bit_left(self, idx: int) -> int:
        return self.wall.bit(self.vs[idx] - 0.5)

    def bit_right(self, idx: int) -> int:
        return self.wall.bit(self.vs[idx] + 0.5)

    def recompute_turn_sum(self, idx: int) -> float:
        lam = tuple(v for v in self.diag[idx] if v > 0)
        return log_diagonal_turn_sum(
            lam, tuple(v for v in self.parts(idx - 1) if v > 0),
            tuple(v for v in self.parts(idx + 1) if v > 0),
            self.bit_left(idx), self.bit_right(idx), self.spec)

    def move_allowed(self, idx: int, row: int, newval: int) -> bool:
        """Local interlacing check for setting part `row` (0-based) of one diagonal."""
        if newval < 0:
            return False
        lam = self.diag[idx]
        if row > 0 and lam[row - 1] < newval:
            return False
        if row + 1 < len(lam) and lam[row + 1] > newval:
            return False
        mu = self.parts(idx - 1)
        nu = self.parts(idx + 1)
        i = row + 1  # 1-based part index

        def pt(seq, k):
            return seq[k - 1] if 1 <= k <= len(seq) else 0

        if self.bit_left(idx) == 1:   # mu interlaces below lam
            if not (newval >= pt(mu, i) and (i == 1 or pt(mu, i - 1) >= newval)):
                return False
        else:                          # lam interlaces below mu
            if not (pt(mu, i) >= newval >= pt(mu, i + 1)):
                return False
        if self.bit_right(idx) == 1:   # lam interlaces below nu
            if not (pt(nu, i) >= newval >= pt(nu, i + 1)):
                return False
        else:                          # nu interlaces below lam
            if not (newval >= pt(nu, i) and (i == 1 or pt(nu, i - 1) >= newval)):
                return False
        return True

    def log_ratio(self, idx: int, row: int, delta: int) -> float:
        """log weight ratio of the one-cube move, touching <= 3 diagonals."""
        out = delta * self.logsr[idx]
        if not self.interacting:
            return out
        old = [self.recompute_turn_sum(j)
               for j in range(max(0, idx - 1), min(len(self.vs), idx + 2))]
        self.diag[idx][row] += delta
        new = [self.recompute_turn_sum(j)
               for j in range(max(0, idx - 1), min(len(self.vs), idx + 2))]
        self.diag[idx][row] -= delta
        return out + sum(new) - sum(old)

    def snapshot(self) -> SkewPlanePartition:
        support = support_from_wall(self.wall)
        return SkewPlanePartition(
            support, tuple(tuple(v for v in d if v > 0) for d in self.diag))


def prewarm(state: ChainState, sweeps: int, rng) -> None:
    """Equilibrate cheaply with exact heat-bath sweeps at matched scale.

    Site conditionals of the non-interacting proxy (alpha = 1, r -> r^alpha,
    whose typical heights agree with the target chain's) are truncated
    geometrics, so systematic sweeps converge in O(height) passes. The
    result is a valid start state; only burn-in time is affected.
    """
    spec = state.spec
    proxy_logr = [state.spec.alpha * lr for lr in state.logsr]
    for _ in range(sweeps):
        for idx, row in state.sites:
            lam = state.diag[idx]
            lo, hi = _site_bounds(state, idx, row)
            if hi is not None and hi <= lo:
                lam[row] = lo
                continue
            rr = math.exp(proxy_logr[idx])
            u = rng.random()
            if hi is None:
                m = lo + int(math.log1p(-u) / math.log(rr))
            else:
                span = hi - lo + 1
                m = lo + int(math.log1p(-u * (1.0 - rr ** span)) / math.log(rr))
                m = min(m, hi)
            state.volume += m - lam[row]
            lam[row] = m


def _site_bounds(state: ChainState, idx: int, row: int):
    """Allowed value interval [lo, hi] for one part; hi None means unbounded."""
    lam = state.diag[idx]
    i = row + 1
    mu = state.parts(idx - 1)
    nu = state.parts(idx + 1)

    def pt(seq, k):
        return seq[k - 1] if 1 <= k <= len(seq) else 0

    lo = 0 if row + 1 >= len(lam) else lam[row + 1]
    hi = None if row == 0 else lam[row - 1]
    if state.bit_left(idx) == 1:
        lo = max(lo, pt(mu, i))
        if i > 1:
            hi = pt(mu, i - 1) if hi is None else min(hi, pt(mu, i - 1))
    else:
        lo = max(lo, pt(mu, i + 1))
        hi = pt(mu, i) if hi is None else min(hi, pt(mu, i))
    if state.bit_right(idx) == 1:
        lo = max(lo, pt(nu, i + 1))
        hi = pt(nu, i) if hi is None else min(hi, pt(nu, i))
    else:
        lo = max(lo, pt(nu, i))
        if i > 1:
            hi = pt(nu, i - 1) if hi is None else min(hi, pt(nu, i - 1))
    return lo, hi


def site_resample_step(state: ChainState, idx: int, row: int, rng) -> bool:
    """Metropolis move that redraws one part from the proxy conditional.

    The proposal is the truncated-geometric heat-bath law of the alpha = 1
    proxy at matched scale; the acceptance ratio corrects by the turn
    weights, so the kernel is reversible for the target measure (and is the
    exact heat bath when alpha = 1). Mixes profiles much faster than
    single-cube moves.
    """
    lam = state.diag[idx]
    old = lam[row]
    lo, hi = _site_bounds(state, idx, row)
    if hi is not None and hi <= lo:
        if lam[row] != lo:
            state.volume += lo - old
            lam[row] = lo
        return False
    logrr = state.spec.alpha * state.logsr[idx]
    rr = math.exp(logrr)
    if rr >= 1.0 and hi is None:
        return False
    u = rng.random()
    if hi is None:
        new = lo + int(math.log1p(-u) / math.log(rr))
    else:
        new = min(hi, lo + int(math.log1p(-u * (1.0 - rr ** (hi - lo + 1)))
                               / math.log(rr)))
    if new == old:
        return False
    if state.interacting:
        # target/proposal ratio: (s r)^{(1 - alpha)(new - old)} times turns
        logacc = (new - old) * (state.logsr[idx] - logrr)
        lamold = old
        span = range(max(0, idx - 1), min(len(state.vs), idx + 2))
        before = [state.recompute_turn_sum(j) for j in span]
        lam[row] = new
        after = [state.recompute_turn_sum(j) for j in span]
        lam[row] = lamold
        logacc += sum(after) - sum(before)
        if logacc < 0 and rng.random() >= math.exp(logacc):
            return False
    state.volume += new - old
    lam[row] = new
    return True


def resample_sweep(state: ChainState, rng) -> None:
    for idx, row in state.sites:
        site_resample_step(state, idx, row, rng)


def mcmc_step(state: ChainState, rng) -> bool:
    """One symmetric-proposal Metropolis update; returns acceptance."""
    k = rng.integers(len(state.sites))
    idx, row = state.sites[k]
    delta = 1 if rng.integers(2) else -1
    newval = state.diag[idx][row] + delta
    if not state.move_allowed(idx, row, newval):
        return False
    logr = state.log_ratio(idx, row, delta)
    if logr < 0 and rng.random() >= math.exp(logr):
        return False
    state.diag[idx][row] = newval
    state.volume += delta
    return True


def run_chains(cfg: ChainConfig, n_chains: int, observables: dict,
               rhat_threshold: float = 1.05, init=None, sweep_every=None):
    """Independent seeded chains; per-observable means, errors, split R-hat.

    `observables` maps a name to a callable on the ChainState. `init`, when
    given, is applied to each fresh state (e.g. a prewarm) before stepping.
    Returns a dict name -> {mean, se, rhat, chains}; a `converged` flag
    collects the R-hat criterion.
    """
    per_chain = {name: [] for name in observables}
    for c in range(n_chains):
        rng = np.random.Generator(np.random.Philox(key=(cfg.seed, c)))
        state = ChainState(cfg.wall, cfg.spec)
        if init is not None:
            init(state, rng)
        for step in range(cfg.steps):
            mcmc_step(state, rng)
            if sweep_every is not None and step % sweep_every == 0:
                resample_sweep(state, rng)
            if step >= cfg.burn_in and (step - cfg.burn_in) % cfg.thin == 0:
                for name, fn in observables.items():
                    per_chain[name].append((c, fn(state)))
    out = {}
    converged = True
    for name in observables:
        rows = per_chain[name]
        chains = [np.array([v for c, v in rows if c == ci]) for ci in range(n_chains)]
        allv = np.concatenate(chains)
        if allv.ndim == 1:
            mean = float(np.mean(allv))
            se = batch_means_se(allv)
            rhat = split_rhat(chains)
        else:
            # vector observable: summarize convergence on the component mean
            mean = allv.mean(axis=0)
            se = allv.std(axis=0, ddof=1) / math.sqrt(allv.shape[0])
            rhat = split_rhat([c.mean(axis=1) for c in chains])
        converged &= (rhat < rhat_threshold) if not math.isnan(rhat) else True
        out[name] = {"mean": mean, "se": se, "rhat": rhat, "chains": chains}
    out["converged"] = converged
    return out


def batch_means_se(x: np.ndarray, n_batches: int = 32) -> float:
    """Standard error of the mean by non-overlapping batch means."""
    n = len(x)
    b = max(1, n // n_batches)
    k = n // b
    if k < 2:
        return float(np.std(x) / math.sqrt(max(1, n)))
    means = x[: k * b].reshape(k, b).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(k))


def split_rhat(chains) -> float:
    """Gelman-Rubin statistic on split half-chains."""
    halves = []
    for c in chains:
        h = len(c) // 2
        if h >= 2:
            halves.extend([c[:h], c[h:2 * h]])
    m = len(halves)
    if m < 2:
        return float("nan")
    n = min(len(h) for h in halves)
    halves = [h[:n] for h in halves]
    means = np.array([np.mean(h) for h in halves])
    vars_ = np.array([np.var(h, ddof=1) for h in halves])
    W = float(np.mean(vars_))
    B = n * float(np.var(means, ddof=1))
    if W == 0:
        return 1.0
    var_plus = (n - 1) / n * W + B / n
    return math.sqrt(var_plus / W)


def jackknife_se(values: np.ndarray, statistic) -> float:
    """Delete-one-batch jackknife standard error of `statistic`."""
    n = len(values)
    if n < 2:
        return float("nan")
    full = statistic(values)
    parts = []
    for i in range(n):
        parts.append(statistic(np.delete(values, i, axis=0)))
    parts = np.array(parts)
    return float(math.sqrt((n - 1) / n * np.sum((parts - np.mean(parts)) ** 2)))


def empirical_cumulants(samples: np.ndarray, order: int, n_batches: int = 24):
    """(value, jackknife SE) of the order-n cumulant of scalar samples."""
    from .oracle import cumulant_from_samples

    x = np.asarray(samples, dtype=float)
    b = max(1, len(x) // n_batches)
    k = len(x) // b
    batches = x[: k * b].reshape(k, b)

    def stat(rows):
        return cumulant_from_samples(rows.reshape(-1), order)

    val = stat(batches)
    se = jackknife_se(batches, stat)
    return val, se


def empirical_height_profile(cfg: ChainConfig, n_chains: int, x: int,
                             y_grid, alpha: float):
    """Mean rescaled height curve with a 2-sigma band at one diagonal.

    Returns (mean, band) arrays over y_grid of eps * h(x, y/eps) where
    eps = -log r of the chain's parameter set.
    """
    from .partitions import height_function

    spec = cfg.spec
    eps = spec.epsilon
    ys = np.asarray(y_grid, dtype=float)

    def h_curve(state: ChainState):
        pp = state.snapshot()
        return np.array([eps * height_function(pp, cfg.wall, alpha, x, float(y) / eps)
                         for y in ys])

    stats = run_chains(cfg, n_chains, {"h": h_curve})
    rows = np.vstack([np.vstack(c) for c in stats["h"]["chains"]])
    mean = rows.mean(axis=0)
    se = rows.std(axis=0, ddof=1) / math.sqrt(rows.shape[0])
    return mean, 2.0 * se


def stationary_distribution_check(wall: DiscreteBackWall, spec: WeightSpec,
                                  cap: int) -> float:
    """Exact detailed-balance residual of the chain on a capped state space.

    Builds the full transition matrix of the move kernel restricted to
    states with entries <= cap and returns max |pi P - pi| over the
    weight-proportional stationary vector.
    """
    from .partitions import enumerate_skew_pp

    support = support_from_wall(wall)
    states = list(enumerate_skew_pp(support, cap))
    index = {pp.diagonals: i for i, pp in enumerate(states)}
    logw = np.array([log_measure_weight(pp, wall, spec) for pp in states])
    w = np.exp(logw - logw.max())
    pi = w / w.sum()
    n = len(states)
    P = np.zeros((n, n))
    template = ChainState(wall, spec)
    n_sites = len(template.sites)
    for i, pp in enumerate(states):
        st = ChainState(wall, spec)
        for k, d in enumerate(pp.diagonals):
            for r, val in enumerate(d):
                st.diag[k][r] = val
        for (idx, row) in template.sites:
            for delta in (1, -1):
                newval = st.diag[idx][row] + delta
                prob = 1.0 / (2 * n_sites)
                if not st.move_allowed(idx, row, newval) or newval > cap:
                    P[i, i] += prob
                    continue
                logr = st.log_ratio(idx, row, delta)
                acc = min(1.0, math.exp(logr))
                st.diag[idx][row] = newval
                target = tuple(tuple(v for v in d if v > 0) for d in st.diag)
                st.diag[idx][row] -= delta
                j = index[target]
                P[i, j] += prob * acc
                P[i, i] += prob * (1.0 - acc)
    resid = np.abs(pi @ P - pi).max()
    return float(resid)
