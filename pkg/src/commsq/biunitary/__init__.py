"""Commuting-square specifications, bi-unitary verification and explicit constructions."""
from .core import (BlockUnitaryPair, Report, SquareSpec, StructuralError, block_shapes,
                   brute_force_shapes, inverse_transition, make_pair, pair_from_json, pair_to_json,
                   poly_square, transition_v, validate_spec, verify_pair)
from .al import build_al
from .e10 import build_e10, e10_spec, identities as e10_identities
from .star3 import build_three_star, star3_spec
from .hoffman import (build_thoffman, t12_identity_residual, t13_block_slack, t14_attempts,
                      t14_gamma3, t14_gamma3_sq, thoffman_spec)
