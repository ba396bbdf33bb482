import numpy as np
import pytest

from rcsurf import expr


# Pool of smooth building blocks used for randomized expression tests.
# Arguments stay bounded so log/sqrt never leave their domains.
_SAFE_FUNCS = ["sin", "cos", "sinh", "tanh", "sech", "exp"]


def random_expr(rng, names, depth=3):
    """Random smooth expression over the given variables (no kinks)."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.4:
            return expr.con(round(rng.uniform(-2.0, 2.0), 3))
        return expr.var(names[rng.integers(0, len(names))])
    pick = rng.random()
    if pick < 0.22:
        return expr.add(random_expr(rng, names, depth - 1), random_expr(rng, names, depth - 1))
    if pick < 0.42:
        return expr.sub(random_expr(rng, names, depth - 1), random_expr(rng, names, depth - 1))
    if pick < 0.62:
        return expr.mul(random_expr(rng, names, depth - 1), random_expr(rng, names, depth - 1))
    if pick < 0.72:
        # keep denominators away from zero
        den = expr.add(expr.con(2.0 + rng.random()),
                       expr.mul(expr.call("tanh", random_expr(rng, names, depth - 1)),
                                expr.con(0.5)))
        return expr.div(random_expr(rng, names, depth - 1), den)
    if pick < 0.82:
        base = expr.add(expr.con(1.5), expr.call("tanh", random_expr(rng, names, depth - 1)))
        return expr.pow_(base, expr.con(float(rng.integers(2, 4))))
    fn = _SAFE_FUNCS[rng.integers(0, len(_SAFE_FUNCS))]
    arg = random_expr(rng, names, depth - 1)
    # bound exp arguments
    if fn == "exp":
        arg = expr.call("tanh", arg)
    return expr.call(fn, arg)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
