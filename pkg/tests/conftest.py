import random

from ramseylab.forcing import Condition, validate_condition


def random_condition(seed, n):
    """Seeded valid condition: limits first, sigma filled to respect them."""
    rng = random.Random(seed)
    limit = {}
    for x in range(n):
        limit[x] = (rng.randint(0, 1), rng.randint(0, n))
    sigma = {}
    for x in range(n):
        i, z = limit[x]
        for y in range(x + 1, n):
            sigma[(x, y)] = i if y >= z else rng.randint(0, 1)
    cond = Condition(n, sigma, limit)
    assert not validate_condition(cond)
    return cond
