# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled event-loop kernels for the two hot simulation paths.

Mirrors `_pyengine` draw for draw: same xoshiro256** stream, same canonical
channel order, same float expression shapes. Any change here must be made in
lockstep with the pure loops; the engine-equivalence tests compare the two.
"""

from libc.math cimport log, INFINITY
from libc.stdlib cimport malloc, realloc, free

ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 MASK64 = <u64>0xFFFFFFFFFFFFFFFF
cdef u64 GAMMA = <u64>0x9E3779B97F4A7C15
cdef u64 MIX_A = <u64>0xBF58476D1CE4E5B9
cdef u64 MIX_B = <u64>0x94D049BB133111EB
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef i64 MASS_GUARD = (<i64>1) << 53
cdef i64 CHAIN_GUARD = (<i64>1) << 31
cdef int WINDOW = 1000
cdef int EMPTY_HITS_CAP = 100000


cdef inline u64 _rotl(u64 x, int k) noexcept:
    return (x << k) | (x >> (64 - k))


cdef inline u64 _mix64(u64 z) noexcept:
    z = (z ^ (z >> 30)) * MIX_A
    z = (z ^ (z >> 27)) * MIX_B
    return z ^ (z >> 31)


cdef struct Rng:
    u64 s0
    u64 s1
    u64 s2
    u64 s3


cdef void rng_seed(Rng* r, u64 seed) noexcept:
    cdef u64 s = seed
    cdef u64 w[4]
    cdef int i
    for i in range(4):
        s = s + GAMMA
        w[i] = _mix64(s)
    if w[0] == 0 and w[1] == 0 and w[2] == 0 and w[3] == 0:
        w[0] = 1
    r.s0, r.s1, r.s2, r.s3 = w[0], w[1], w[2], w[3]


cdef inline u64 rng_next(Rng* r) noexcept:
    cdef u64 result = _rotl(r.s1 * <u64>5, 7) * <u64>9
    cdef u64 t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = _rotl(r.s3, 45)
    return result


cdef inline double rng_random(Rng* r) noexcept:
    return <double>(rng_next(r) >> 11) * INV_2_53


cdef i64 rng_binomial(Rng* r, i64 n, double p) noexcept:
    cdef double q, log1q, u
    cdef i64 count = 0
    cdef i64 y = 0
    if n <= 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    q = p if p <= 0.5 else 1.0 - p
    log1q = log(1.0 - q)
    while True:
        u = 1.0 - rng_random(r)
        y += <i64>(log(u) / log1q) + 1
        if y > n:
            break
        count += 1
    return count if p <= 0.5 else n - count


def rng_stream(u64 seed, int count):
    """Raw 64-bit outputs, for cross-checking against the Python generator."""
    cdef Rng r
    rng_seed(&r, seed)
    return [rng_next(&r) for _ in range(count)]


def binomial_stream(u64 seed, i64 n, double p, int count):
    cdef Rng r
    rng_seed(&r, seed)
    return [rng_binomial(&r, n, p) for _ in range(count)]


# ---------------------------------------------------------------------------
# sorted (content, count) table for the one-species population state

cdef struct Table:
    i64* xs
    i64* ns
    int size
    int cap


cdef int table_init(Table* tb, int cap) except -1:
    tb.cap = cap if cap > 8 else 8
    tb.size = 0
    tb.xs = <i64*>malloc(tb.cap * sizeof(i64))
    tb.ns = <i64*>malloc(tb.cap * sizeof(i64))
    if tb.xs == NULL or tb.ns == NULL:
        raise MemoryError()
    return 0


cdef void table_free(Table* tb) noexcept:
    free(tb.xs)
    free(tb.ns)


cdef int table_find(Table* tb, i64 x) noexcept:
    # lower bound in the sorted contents
    cdef int lo = 0, hi = tb.size, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if tb.xs[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef int table_add(Table* tb, i64 x, i64 cnt) except -1:
    cdef int idx = table_find(tb, x)
    cdef int i
    if idx < tb.size and tb.xs[idx] == x:
        tb.ns[idx] += cnt
        return 0
    if tb.size == tb.cap:
        tb.cap *= 2
        tb.xs = <i64*>realloc(tb.xs, tb.cap * sizeof(i64))
        tb.ns = <i64*>realloc(tb.ns, tb.cap * sizeof(i64))
        if tb.xs == NULL or tb.ns == NULL:
            raise MemoryError()
    for i in range(tb.size, idx, -1):
        tb.xs[i] = tb.xs[i - 1]
        tb.ns[i] = tb.ns[i - 1]
    tb.xs[idx] = x
    tb.ns[idx] = cnt
    tb.size += 1
    return 0


cdef void table_dec(Table* tb, int idx) noexcept:
    cdef int i
    tb.ns[idx] -= 1
    if tb.ns[idx] == 0:
        for i in range(idx, tb.size - 1):
            tb.xs[i] = tb.xs[i + 1]
            tb.ns[i] = tb.ns[i + 1]
        tb.size -= 1


def simulate_birth_death(
    double kb,
    double kd,
    double kI,
    double kE,
    double kF,
    double kC,
    object inflow_vals,
    object inflow_cum,
    int kernel_kind,  # 0 binomial_half, 1 uniform unordered pairs
    object init_contents,
    object init_counts,
    double t_max,
    i64 event_budget,
    u64 seed,
    object grid,
):
    """Direct-method loop for the one-species birth/death compartment model.

    Chemistry is fixed as (0 -> S at kb, S -> 0 at kd) in that declaration
    order. Returns the same raw fields as the pure loop.
    """
    cdef Rng rng
    rng_seed(&rng, seed)

    cdef Table tb
    table_init(&tb, len(init_contents) + 8)
    cdef int i, k
    cdef i64 c_tot = 0
    cdef i64 s_tot = 0
    for i in range(len(init_contents)):
        table_add(&tb, <i64>init_contents[i], <i64>init_counts[i])
        c_tot += <i64>init_counts[i]
        s_tot += <i64>init_contents[i] * <i64>init_counts[i]

    cdef int n_inflow = len(inflow_vals)
    cdef i64* iv = <i64*>malloc(n_inflow * sizeof(i64))
    cdef double* ic = <double*>malloc(n_inflow * sizeof(double))
    for i in range(n_inflow):
        iv[i] = <i64>inflow_vals[i]
        ic[i] = <double>inflow_cum[i]

    cdef int n_grid = len(grid)
    cdef double* gr = <double*>malloc((n_grid if n_grid else 1) * sizeof(double))
    for i in range(n_grid):
        gr[i] = <double>grid[i]
    grid_times = []
    grid_c = []
    grid_s = []
    empty_times = []

    cdef double rb[1001]
    cdef double t = 0.0
    cdef double total, u1, u2, u3, dt, t_next, acc, target, nf, first_mean
    cdef i64 events = 0
    cdef i64 x, xv, prev_c, nx, yv, m_label, pairs, kk, partner, label, ci, cj
    cdef int gi = 0
    cdef int stop_code = -1
    cdef int picked  # 0 inflow 1 birth 2 death 3 exit 4 frag 5 coag
    cdef i64 pick_x = 0
    cdef int idx
    cdef i64 kinds[6]
    cdef double flip
    for i in range(6):
        kinds[i] = 0
    first_mean = -1.0

    try:
        while True:
            if events >= event_budget:
                stop_code = 1
                break

            # pass 1: total rate in canonical order
            total = 0.0
            if kI > 0.0:
                total += kI
            for i in range(tb.size):
                nf = <double>tb.ns[i]
                x = tb.xs[i]
                if kb > 0.0:
                    total += nf * kb
                if kd > 0.0 and x > 0:
                    total += nf * (kd * <double>x)
                if kE > 0.0:
                    total += nf * kE
                if kF > 0.0 and x > 0:
                    total += (kF * <double>x) * nf
            if kC > 0.0 and c_tot >= 2:
                total += kC * <double>((c_tot * (c_tot - 1)) / 2)

            if total == 0.0:
                while gi < n_grid:
                    grid_times.append(gr[gi])
                    grid_c.append(c_tot)
                    grid_s.append(s_tot)
                    gi += 1
                stop_code = 2
                break

            u1 = rng_random(&rng)
            dt = -log(1.0 - u1) / total
            t_next = t + dt
            if t_next > t_max:
                while gi < n_grid and gr[gi] <= t_max:
                    grid_times.append(gr[gi])
                    grid_c.append(c_tot)
                    grid_s.append(s_tot)
                    gi += 1
                t = t_max
                stop_code = 0
                break
            while gi < n_grid and gr[gi] < t_next:
                grid_times.append(gr[gi])
                grid_c.append(c_tot)
                grid_s.append(s_tot)
                gi += 1

            # pass 2: channel selection, same order
            u2 = rng_random(&rng)
            target = u2 * total
            acc = 0.0
            picked = -1
            if kI > 0.0:
                acc += kI
                if target < acc:
                    picked = 0
            if picked < 0:
                for i in range(tb.size):
                    nf = <double>tb.ns[i]
                    x = tb.xs[i]
                    if kb > 0.0:
                        acc += nf * kb
                        if target < acc:
                            picked = 1
                            pick_x = x
                            break
                    if kd > 0.0 and x > 0:
                        acc += nf * (kd * <double>x)
                        if target < acc:
                            picked = 2
                            pick_x = x
                            break
                    if kE > 0.0:
                        acc += nf * kE
                        if target < acc:
                            picked = 3
                            pick_x = x
                            break
                    if kF > 0.0 and x > 0:
                        acc += (kF * <double>x) * nf
                        if target < acc:
                            picked = 4
                            pick_x = x
                            break
            if picked < 0:
                if kC > 0.0 and c_tot >= 2:
                    picked = 5
                else:
                    # rounding spill: take the last positive channel
                    picked = 0 if kI > 0.0 else -1
                    for i in range(tb.size):
                        x = tb.xs[i]
                        if kb > 0.0:
                            picked = 1
                            pick_x = x
                        if kd > 0.0 and x > 0:
                            picked = 2
                            pick_x = x
                        if kE > 0.0:
                            picked = 3
                            pick_x = x
                        if kF > 0.0 and x > 0:
                            picked = 4
                            pick_x = x

            prev_c = c_tot
            if picked == 0:  # inflow
                u3 = rng_random(&rng) * ic[n_inflow - 1]
                idx = n_inflow - 1
                for i in range(n_inflow):
                    if u3 < ic[i]:
                        idx = i
                        break
                xv = iv[idx]
                table_add(&tb, xv, 1)
                c_tot += 1
                s_tot += xv
            elif picked == 1:  # birth: x -> x + 1
                idx = table_find(&tb, pick_x)
                table_dec(&tb, idx)
                table_add(&tb, pick_x + 1, 1)
                s_tot += 1
            elif picked == 2:  # death: x -> x - 1
                idx = table_find(&tb, pick_x)
                table_dec(&tb, idx)
                table_add(&tb, pick_x - 1, 1)
                s_tot -= 1
            elif picked == 3:  # exit
                idx = table_find(&tb, pick_x)
                table_dec(&tb, idx)
                c_tot -= 1
                s_tot -= pick_x
            elif picked == 4:  # fragmentation
                x = pick_x
                if kernel_kind == 0:
                    yv = rng_binomial(&rng, x, 0.5)
                else:
                    m_label = x + 1
                    pairs = (m_label + 1) / 2
                    kk = <i64>(rng_random(&rng) * <double>pairs)
                    flip = rng_random(&rng)
                    partner = m_label - 1 - kk
                    label = kk
                    if partner != kk and flip >= 0.5:
                        label = partner
                    yv = label
                idx = table_find(&tb, x)
                table_dec(&tb, idx)
                table_add(&tb, yv, 1)
                table_add(&tb, x - yv, 1)
                c_tot += 1
            else:  # coagulation: uniform unordered compartment pair
                ci = <i64>(rng_random(&rng) * <double>c_tot)
                cj = <i64>(rng_random(&rng) * <double>(c_tot - 1))
                if cj >= ci:
                    cj += 1
                x = _locate(&tb, ci)
                xv = _locate(&tb, cj)
                idx = table_find(&tb, x)
                table_dec(&tb, idx)
                idx = table_find(&tb, xv)
                table_dec(&tb, idx)
                table_add(&tb, x + xv, 1)
                c_tot -= 1

            t = t_next
            events += 1
            rb[events % 1001] = t
            if events == WINDOW:
                first_mean = t / WINDOW
            kinds[picked] += 1
            if c_tot == 0 and prev_c > 0 and len(empty_times) < EMPTY_HITS_CAP:
                empty_times.append(t)
            if s_tot > MASS_GUARD or c_tot > MASS_GUARD:
                stop_code = 4
                break

        state = {}
        for i in range(tb.size):
            state[(tb.xs[i],)] = tb.ns[i]
        last_mean = None
        if events >= 2 * WINDOW:
            last_mean = (rb[events % 1001] - rb[(events - WINDOW) % 1001]) / WINDOW
        return (
            state,
            t,
            events,
            stop_code,
            first_mean if first_mean >= 0.0 else None,
            last_mean,
            grid_times,
            grid_c,
            grid_s,
            empty_times,
            (kinds[0], kinds[1], kinds[2], kinds[3], kinds[4], kinds[5]),
        )
    finally:
        table_free(&tb)
        free(iv)
        free(ic)
        free(gr)


cdef i64 _locate(Table* tb, i64 index) noexcept:
    cdef i64 acc = 0
    cdef int i
    for i in range(tb.size):
        acc += tb.ns[i]
        if index < acc:
            return tb.xs[i]
    return tb.xs[tb.size - 1]


def simulate_enzyme_chain(
    double alpha,
    double p,
    i64 x0,
    double t_max,
    i64 event_budget,
    i64 threshold,  # pass -1 to disable return counting
    u64 seed,
):
    """One-dimensional projected chain; see the pure twin for the law."""
    cdef Rng rng
    rng_seed(&rng, seed)
    cdef double rb[1001]
    cdef double t = 0.0
    cdef double up, total, u1, u2, dt, t_next, first_mean
    cdef i64 x = x0
    cdef i64 events = 0
    cdef i64 returns = 0
    cdef i64 peak = x0
    cdef i64 new_x
    cdef int stop_code = -1
    first_mean = -1.0

    while True:
        if events >= event_budget:
            stop_code = 1
            break
        up = alpha * <double>(x * (x - 1)) + 1.0
        total = up + <double>x if x > 0 else up
        u1 = rng_random(&rng)
        dt = -log(1.0 - u1) / total
        t_next = t + dt
        if t_next > t_max:
            t = t_max
            stop_code = 0
            break
        u2 = rng_random(&rng)
        if u2 * total < up or x == 0:
            x += 1
        else:
            new_x = rng_binomial(&rng, x, p)
            if threshold >= 0 and x >= threshold and new_x < threshold:
                returns += 1
            x = new_x
        t = t_next
        events += 1
        rb[events % 1001] = t
        if events == WINDOW:
            first_mean = t / WINDOW
        if x > peak:
            peak = x
        if x > CHAIN_GUARD:
            stop_code = 4
            break

    last_mean = None
    if events >= 2 * WINDOW:
        last_mean = (rb[events % 1001] - rb[(events - WINDOW) % 1001]) / WINDOW
    return (
        x,
        t,
        events,
        stop_code,
        first_mean if first_mean >= 0.0 else None,
        last_mean,
        returns,
        peak,
    )
