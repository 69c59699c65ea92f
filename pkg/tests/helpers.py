import functools
from pathlib import Path

from copula_tailrisk import PriorSpec, restricted_jeffreys_prior

ROOT = Path(__file__).resolve().parents[1]
FIXTURE_CSV = ROOT / "data" / "synthetic_glu_ghb.csv"


@functools.lru_cache(maxsize=None)
def default_prior(family: str):
    """Restricted Jeffreys prior at default settings, computed once per session."""
    return restricted_jeffreys_prior(family, PriorSpec.for_family(family))
