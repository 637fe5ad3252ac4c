"""Pure-Python event loops (direct method).

These are the reference engines: they handle any chemistry, kernel and stop
condition. The compiled kernels in `_kernels` accelerate two hot cases (the
one-species birth/death compartment model and the one-enzyme projected
chain) and must reproduce these loops draw for draw, so every random choice
here is made in a fixed, documented order:

    u_time, u_channel, then any effect draws (inflow table scan, kernel
    sampling in coordinate order, coagulation partner picks).

Channel rates are accumulated in the canonical order of
`compartments.event_channels`, with coagulation folded into one aggregate
channel of rate kappa_C * C * (C - 1) / 2 (the per-pair rates are recovered
by picking an unordered compartment pair uniformly, which induces exactly
the per-pair channel rates).

Selection is a linear scan over per-content channels, O(distinct contents)
per event, which is ample at desk scale; if content diversity ever grows
past a few thousand, the scan slots straight into a sum-tree (store the
per-content subtotals in a binary-indexed tree and descend on the target)
without touching the draw order.
"""

from __future__ import annotations

import math
from collections import deque

from .compartments import CompartmentModel, total_compartments
from .crn import ReactionNetwork, falling_binomial
from .rng import Rng

WINDOW = 1000  # events per inter-event-time window
EMPTY_HITS_CAP = 100_000
MASS_GUARD = 1 << 53  # counts beyond this lose float precision; treat as overflow
CHAIN_GUARD = 1 << 31  # keeps x*(x-1) inside 64-bit range in the compiled twin


class RawResult:
    """Loop output shared by the pure and compiled engines."""

    __slots__ = (
        "final_state",
        "final_time",
        "event_count",
        "stop_code",  # 0 time, 1 budget, 2 absorbed, 3 bound, 4 overflow
        "first_window_mean",
        "last_window_mean",
        "grid_times",
        "grid_compartments",
        "grid_totals",
        "grid_shat",
        "empty_entry_times",
        "kind_counts",
        "event_log",
        "returns_below",
        "peak_value",
    )

    def __init__(self):
        self.final_state = None
        self.final_time = 0.0
        self.event_count = 0
        self.stop_code = 0
        self.first_window_mean = None
        self.last_window_mean = None
        self.grid_times = []
        self.grid_compartments = []
        self.grid_totals = []
        self.grid_shat = []
        self.empty_entry_times = []
        self.kind_counts = {}
        self.event_log = None
        self.returns_below = None
        self.peak_value = None


def _totals(n, d):
    out = [0] * d
    for x, c in n.items():
        for j in range(d):
            out[j] += x[j] * c
    return tuple(out)


def _shat(n, enzyme_idx, substrate_idx):
    return sum(x[substrate_idx] * c for x, c in n.items() if x[enzyme_idx] == 0)


def run_population_loop(
    model: CompartmentModel,
    initial,
    t_max,
    event_budget,
    seed,
    grid=(),
    absorbing_predicate=None,
    observable_bound=None,
    record_events=False,
):
    rng = Rng(seed)
    n = dict(initial)
    d = model.dimension
    reactions = model.chemistry.reactions
    nz = model.chemistry._sources_nz
    kI, kE, kF, kC = model.kappa_I, model.kappa_E, model.kappa_F, model.kappa_C
    s_idx = model.fragmentation_species
    enzyme = model.enzyme_indices()
    inflow_cum = model.inflow.cum
    inflow_support = model.inflow.support
    kernel = model.kernel

    res = RawResult()
    kind_counts = {}
    log = [] if record_events else None
    times = deque(maxlen=WINDOW + 1)
    grid = sorted(grid)
    gi = 0
    t = 0.0
    events = 0
    c_tot = total_compartments(n)
    mass_tot = sum(sum(x) * c for x, c in n.items())
    bound_obs = None
    if observable_bound is not None:
        bound_obs, bound_value = observable_bound

    def flush_grid(limit, strict):
        nonlocal gi
        while gi < len(grid) and (grid[gi] < limit if strict else grid[gi] <= limit):
            res.grid_times.append(grid[gi])
            res.grid_compartments.append(c_tot)
            res.grid_totals.append(_totals(n, d))
            res.grid_shat.append(_shat(n, *enzyme) if enzyme else None)
            gi += 1

    def finish(code):
        res.final_state = n
        res.final_time = t
        res.event_count = events
        res.stop_code = code
        if events >= 2 * WINDOW and len(times) == WINDOW + 1:
            res.last_window_mean = (times[-1] - times[0]) / WINDOW
        res.kind_counts = kind_counts
        res.event_log = log
        return res

    while True:
        if event_budget is not None and events >= event_budget:
            return finish(1)

        # pass 1: total rate, canonical order (matches event_channels)
        contents = sorted(n)
        total = 0.0
        if kI > 0.0:
            total += kI
        for x in contents:
            nf = float(n[x])
            for r, r_nz in zip(reactions, nz):
                lam = r.rate_constant
                for j, v in r_nz:
                    lam *= falling_binomial(x[j], v)
                    if lam == 0.0:
                        break
                if lam > 0.0:
                    total += nf * lam
            if kE > 0.0:
                total += nf * kE
            if kF > 0.0 and x[s_idx] > 0:
                total += (kF * x[s_idx]) * nf
        if kC > 0.0 and c_tot >= 2:
            total += kC * float(c_tot * (c_tot - 1) // 2)

        if total == 0.0:
            flush_grid(math.inf, strict=False)
            return finish(2)

        u1 = rng.random()
        dt = -math.log(1.0 - u1) / total
        t_next = t + dt
        if t_max is not None and t_next > t_max:
            flush_grid(t_max, strict=False)
            t = t_max
            return finish(0)
        flush_grid(t_next, strict=True)

        # pass 2: channel selection at target = u2 * total, same order
        u2 = rng.random()
        target = u2 * total
        acc = 0.0
        picked = None
        if kI > 0.0:
            acc += kI
            if target < acc:
                picked = ("inflow", None, None)
        if picked is None:
            for x in contents:
                nf = float(n[x])
                for i, (r, r_nz) in enumerate(zip(reactions, nz)):
                    lam = r.rate_constant
                    for j, v in r_nz:
                        lam *= falling_binomial(x[j], v)
                        if lam == 0.0:
                            break
                    if lam > 0.0:
                        acc += nf * lam
                        if target < acc:
                            picked = ("internal", x, i)
                            break
                if picked is not None:
                    break
                if kE > 0.0:
                    acc += nf * kE
                    if target < acc:
                        picked = ("exit", x, None)
                        break
                if kF > 0.0 and x[s_idx] > 0:
                    acc += (kF * x[s_idx]) * nf
                    if target < acc:
                        picked = ("fragmentation", x, None)
                        break
        if picked is None:
            # coagulation, or rounding pushed the target past the last channel
            if kC > 0.0 and c_tot >= 2:
                picked = ("coagulation", None, None)
            else:
                picked = _last_positive_channel(
                    contents, n, reactions, nz, kI, kE, kF, s_idx
                )

        kind, x, ridx = picked
        prev_c = c_tot
        if kind == "inflow":
            u3 = rng.random() * inflow_cum[-1]
            idx = len(inflow_support) - 1
            for i, cval in enumerate(inflow_cum):
                if u3 < cval:
                    idx = i
                    break
            y = inflow_support[idx]
            n[y] = n.get(y, 0) + 1
            c_tot += 1
            mass_tot += sum(y)
            log_key, log_edits = "inflow", ((y, 1),)
        elif kind == "internal":
            r = reactions[ridx]
            x2 = tuple(c + dc for c, dc in zip(x, r.delta))
            _dec(n, x)
            n[x2] = n.get(x2, 0) + 1
            mass_tot += sum(r.delta)
            log_key, log_edits = f"internal:{ridx}", ((x, -1), (x2, 1))
        elif kind == "exit":
            _dec(n, x)
            c_tot -= 1
            mass_tot -= sum(x)
            log_key, log_edits = "exit", ((x, -1),)
        elif kind == "fragmentation":
            y, co = kernel.sample(x, rng)
            _dec(n, x)
            n[y] = n.get(y, 0) + 1
            n[co] = n.get(co, 0) + 1
            c_tot += 1
            log_key, log_edits = "fragmentation", ((x, -1), (y, 1), (co, 1))
        else:  # coagulation: uniform unordered pair of compartments
            i = rng.uniform_index(c_tot)
            j = rng.uniform_index(c_tot - 1)
            if j >= i:
                j += 1
            xa = _locate(contents, n, i)
            xb = _locate(contents, n, j)
            merged = tuple(a + b for a, b in zip(xa, xb))
            _dec(n, xa)
            _dec(n, xb)
            n[merged] = n.get(merged, 0) + 1
            c_tot -= 1
            log_key, log_edits = "coagulation", ((xa, -1), (xb, -1), (merged, 1))

        t = t_next
        events += 1
        times.append(t)
        if events == WINDOW:
            res.first_window_mean = t / WINDOW
        kind_counts[log_key] = kind_counts.get(log_key, 0) + 1
        if record_events:
            log.append((t, log_key, log_edits))
        if c_tot == 0 and prev_c > 0 and len(res.empty_entry_times) < EMPTY_HITS_CAP:
            res.empty_entry_times.append(t)

        if mass_tot > MASS_GUARD or c_tot > MASS_GUARD:
            return finish(4)
        if absorbing_predicate is not None and absorbing_predicate(n):
            flush_grid(math.inf, strict=False)
            return finish(2)
        if bound_obs is not None and bound_obs(n) >= bound_value:
            return finish(3)


def _dec(n, x):
    c = n[x] - 1
    if c:
        n[x] = c
    else:
        del n[x]


def _locate(contents, n, index):
    """Content of the index-th compartment in canonical content order."""
    acc = 0
    for x in contents:
        acc += n[x]
        if index < acc:
            return x
    raise IndexError("compartment index out of range")


def _last_positive_channel(contents, n, reactions, nz, kI, kE, kF, s_idx):
    last = ("inflow", None, None) if kI > 0.0 else None
    for x in contents:
        for i, (r, r_nz) in enumerate(zip(reactions, nz)):
            lam = r.rate_constant
            for j, v in r_nz:
                lam *= falling_binomial(x[j], v)
                if lam == 0.0:
                    break
            if lam > 0.0:
                last = ("internal", x, i)
        if kE > 0.0:
            last = ("exit", x, None)
        if kF > 0.0 and x[s_idx] > 0:
            last = ("fragmentation", x, None)
    if last is None:
        raise RuntimeError("no positive channel to select")
    return last


def run_chain_loop(alpha, p, x0, t_max, event_budget, threshold, seed):
    """One-dimensional projected chain: up-steps at alpha*x*(x-1) + 1, and at
    rate x a jump to Binomial(x, p). Mirrors the compiled twin exactly."""
    rng = Rng(seed)
    x = int(x0)
    t = 0.0
    events = 0
    returns = 0
    peak = x
    times = deque(maxlen=WINDOW + 1)
    res = RawResult()
    while True:
        if event_budget is not None and events >= event_budget:
            res.stop_code = 1
            break
        up = alpha * (x * (x - 1)) + 1.0
        total = up + float(x) if x > 0 else up
        u1 = rng.random()
        dt = -math.log(1.0 - u1) / total
        t_next = t + dt
        if t_max is not None and t_next > t_max:
            t = t_max
            res.stop_code = 0
            break
        u2 = rng.random()
        if u2 * total < up or x == 0:
            x += 1
        else:
            new_x = rng.binomial(x, p)
            if threshold is not None and x >= threshold and new_x < threshold:
                returns += 1
            x = new_x
        t = t_next
        events += 1
        times.append(t)
        if events == WINDOW:
            res.first_window_mean = t / WINDOW
        if x > peak:
            peak = x
        if x > CHAIN_GUARD:
            res.stop_code = 4
            break
    res.final_state = x
    res.final_time = t
    res.event_count = events
    res.returns_below = returns
    res.peak_value = peak
    if events >= 2 * WINDOW and len(times) == WINDOW + 1:
        res.last_window_mean = (times[-1] - times[0]) / WINDOW
    return res


def run_crn_loop(
    network: ReactionNetwork,
    initial,
    t_max,
    event_budget,
    seed,
    grid=(),
    absorbing_predicate=None,
    observable_bound=None,
    record_events=False,
):
    """Direct-method loop for a plain reaction network.

    Reactions with rate constant exactly zero stay in the model description
    but are excluded from the channel list.
    """
    rng = Rng(seed)
    x = tuple(initial)
    channels = [
        (i, r, nz)
        for i, (r, nz) in enumerate(zip(network.reactions, network._sources_nz))
        if r.rate_constant > 0.0
    ]
    deltas = {i: r.delta for i, r, _ in channels}
    res = RawResult()
    kind_counts = {}
    log = [] if record_events else None
    times = deque(maxlen=WINDOW + 1)
    grid = sorted(grid)
    gi = 0
    t = 0.0
    events = 0
    bound_obs = None
    if observable_bound is not None:
        bound_obs, bound_value = observable_bound

    def flush_grid(limit, strict):
        nonlocal gi
        while gi < len(grid) and (grid[gi] < limit if strict else grid[gi] <= limit):
            res.grid_times.append(grid[gi])
            res.grid_totals.append(x)
            gi += 1

    def finish(code):
        res.final_state = x
        res.final_time = t
        res.event_count = events
        res.stop_code = code
        if events >= 2 * WINDOW and len(times) == WINDOW + 1:
            res.last_window_mean = (times[-1] - times[0]) / WINDOW
        res.kind_counts = kind_counts
        res.event_log = log
        return res

    rates = [0.0] * len(channels)
    while True:
        if event_budget is not None and events >= event_budget:
            return finish(1)
        total = 0.0
        for k, (i, r, r_nz) in enumerate(channels):
            lam = r.rate_constant
            for j, v in r_nz:
                lam *= falling_binomial(x[j], v)
                if lam == 0.0:
                    break
            rates[k] = lam
            total += lam
        if total == 0.0:
            flush_grid(math.inf, strict=False)
            return finish(2)
        u1 = rng.random()
        dt = -math.log(1.0 - u1) / total
        t_next = t + dt
        if t_max is not None and t_next > t_max:
            flush_grid(t_max, strict=False)
            t = t_max
            return finish(0)
        flush_grid(t_next, strict=True)
        u2 = rng.random()
        target = u2 * total
        acc = 0.0
        pick = None
        for k in range(len(channels)):
            if rates[k] > 0.0:
                acc += rates[k]
                if target < acc:
                    pick = k
                    break
        if pick is None:
            pick = max(k for k in range(len(channels)) if rates[k] > 0.0)
        ridx = channels[pick][0]
        x = tuple(c + dc for c, dc in zip(x, deltas[ridx]))
        t = t_next
        events += 1
        times.append(t)
        if events == WINDOW:
            res.first_window_mean = t / WINDOW
        key = f"internal:{ridx}"
        kind_counts[key] = kind_counts.get(key, 0) + 1
        if record_events:
            log.append((t, key, x))
        if sum(x) > MASS_GUARD:
            return finish(4)
        if absorbing_predicate is not None and absorbing_predicate(x):
            flush_grid(math.inf, strict=False)
            return finish(2)
        if bound_obs is not None and bound_obs(x) >= bound_value:
            return finish(3)
