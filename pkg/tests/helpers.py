"""Instance builders and independent checkers shared by the test modules."""

from fractions import Fraction

from rental_harmony.domain import validate_instance
from rental_harmony.mesh import PriceMap, barycentric


def quasilinear_instance(values, rent, bound=None, mode="classic", n_rooms=None):
    n_rooms = n_rooms or len(values[0])
    raw = {
        "mode": mode,
        "totalRent": rent,
        "rooms": [{"name": f"room{j}"} for j in range(n_rooms)],
        "agents": [
            {"name": f"agent{i}", "oracle": {"type": "quasilinear", "values": list(v)}} for i, v in enumerate(values)
        ],
    }
    if bound is not None:
        raw["compensationBound"] = bound
    return validate_instance(raw)


def oracle_instance(mode, oracle_specs, capacities, rent, bound):
    return validate_instance(
        {
            "mode": mode,
            "totalRent": rent,
            "compensationBound": bound,
            "rooms": [{"name": f"room{j}", "capacity": c} for j, c in enumerate(capacities)],
            "agents": [{"name": f"agent{i}", "oracle": o} for i, o in enumerate(oracle_specs)],
        }
    )


def sperner_violations(solver, recheck_best=True):
    """Count labels that break the boundary condition or are not best rooms.

    Re-queries the oracles directly, without going through the solver.
    """
    inst = solver.instance
    pmap = PriceMap("compensable", inst.compensation_bound, inst.total_rent)
    bad = checked_boundary = 0
    for (k, y), labels in solver.labels.items():
        prices = pmap(barycentric(y, k)) if recheck_best else None
        for i, j in enumerate(labels):
            if 0 in y:
                checked_boundary += 1
            if y[j] <= 0:
                bad += 1
            elif recheck_best and j not in inst.oracles[i].best_rooms(prices):
                bad += 1
    return bad, checked_boundary


def brute_force_envy_free_assignments(values):
    """Assignments admitting envy-free prices, decided by an LP per assignment."""
    import itertools

    import numpy as np
    from scipy.optimize import linprog

    n = len(values)
    out = []
    for sigma in itertools.permutations(range(n)):
        rows, rhs = [], []
        for i in range(n):
            for r in range(n):
                if r == sigma[i]:
                    continue
                # p[sigma_i] - p[r] <= v[i][sigma_i] - v[i][r]
                row = np.zeros(n)
                row[sigma[i]] += 1
                row[r] -= 1
                rows.append(row)
                rhs.append(float(values[i][sigma[i]] - values[i][r]))
        res = linprog(
            np.zeros(n), A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=np.ones((1, n)), b_eq=[0.0],
            bounds=[(None, None)] * n, method="highs",
        )
        if res.status == 0:
            out.append(sigma)
    return out


def lp_price_extreme(values, sigma, rent, room, maximize=True):
    """Max (or min) price of `room` over all envy-free price vectors for sigma."""
    import numpy as np
    from scipy.optimize import linprog

    n = len(values)
    rows, rhs = [], []
    for i in range(n):
        for r in range(n):
            if r != sigma[i]:
                row = np.zeros(n)
                row[sigma[i]] += 1
                row[r] -= 1
                rows.append(row)
                rhs.append(float(values[i][sigma[i]] - values[i][r]))
    c = np.zeros(n)
    c[room] = -1.0 if maximize else 1.0
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=np.ones((1, n)), b_eq=[float(rent)],
                  bounds=[(None, None)] * n, method="highs")
    assert res.status == 0
    return res.x[room]


def as_fractions(xs):
    return tuple(Fraction(x) for x in xs)
