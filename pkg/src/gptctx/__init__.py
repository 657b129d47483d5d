"""Resource theory of contextuality for finite-vertex GPT systems."""
from gptctx.core import (
    GptSystem,
    ValidationReport,
    effect_membership,
    minimal_tensor,
    make_simplex,
    pairing,
    state_membership,
    validate_system,
)
from gptctx.measures import (
    ExcessEstimate,
    HierarchyEvidence,
    classical_excess,
    compare,
    noisy_bit_pom_formula,
    pom_excess_witness,
    pom_value,
    pom_yield,
)
from gptctx.optimize.pom import PomStrategy, brute_force_pom_classical, seesaw_pom
from gptctx.optimize.seesaw import SeesawConfig, seesaw_excess
from gptctx.physical import (
    PhysicalMap,
    check_physical_map,
    check_surjectivity_and_iso,
    find_realisation,
    hbb_realisation,
)
from gptctx.simulation import (
    UnivalentSimulation,
    compose,
    reduce_composite,
    validate_simulation,
)
from gptctx.zoo import (
    bit_in_trit,
    hbb_model,
    make_noisy_bit,
    make_polygon,
    make_square_gbit,
    make_toy_bit,
    make_toy_bit_model,
)

__all__ = [name for name in dir() if not name.startswith("_")]
