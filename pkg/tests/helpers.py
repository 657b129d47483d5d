"""Seeded families of simulations shared by property and acceptance tests."""
import numpy as np

from gptctx.core import make_simplex
from gptctx.simulation import (
    UnivalentSimulation,
    compose,
    identity_simulation,
    random_perturbation,
    simplex_inclusion,
    simplex_product_iso,
    tensor_with_classical,
)
from gptctx.zoo import bit_in_trit, make_noisy_bit, make_square_gbit, make_toy_bit_model


def noisy_into_bit(alpha=0.25):
    eye = np.eye(2)
    return UnivalentSimulation(make_noisy_bit(alpha), make_simplex(2), eye, eye, 0.0)


def exact_chains():
    """Pairs ``(f, g)`` of exact simulations with ``f.target`` equal to ``g.source``."""
    toy = make_toy_bit_model()
    iso, back = simplex_product_iso(2, 2)
    sq = identity_simulation(make_square_gbit())
    trit = bit_in_trit()
    return [
        (trit, simplex_inclusion(3, 4, source=trit.target)),
        (toy, simplex_inclusion(4, 5, source=toy.target)),
        (noisy_into_bit(), simplex_inclusion(2, 3)),
        (sq, sq),
        (iso, back),
    ]


def perturbed_chain(seed):
    rng = np.random.default_rng(seed)
    chains = exact_chains()
    f, g = chains[seed % len(chains)]
    return random_perturbation(f, rng), random_perturbation(g, rng)


def exact_composite_sources():
    """Exact simulations ``A (x) Delta_2 -> B``."""
    out = []
    for base in (bit_in_trit(), make_toy_bit_model(), noisy_into_bit(), identity_simulation(make_square_gbit())):
        ext = tensor_with_classical(base, 2)
        out.append(ext)
        if base.target.is_simplex:
            flat, _ = simplex_product_iso(base.target.dim, 2)
            out.append(compose(ext, flat))
    return out


def perturbed_composite(seed):
    rng = np.random.default_rng(1000 + seed)
    sims = exact_composite_sources()
    return random_perturbation(sims[seed % len(sims)], rng)
