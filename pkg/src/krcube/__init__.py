"""Exact finite-resolution homeomorphism extension on Cantor cubes."""

from .errors import (
    CertificateInvalid,
    InvalidInput,
    KrCubeError,
    ResolutionInsufficiency,
    RestrictionError,
)
from .model import (
    Block,
    ClopenSet,
    ClosedSet,
    Cube,
    Point,
    SafetyAutomaton,
    block_interior,
    interior,
    is_negligible,
    project,
    set_support,
    single_block_cube,
)
from .homeo import (
    BlockMapChain,
    Matching,
    PartialHomeo,
    chain_from_mapping,
    clopen_homeo,
    clopen_retraction,
    compose,
    identity_chain,
    invert,
    project_tower,
    restrict,
    validate_chain,
    verify_extension,
)
from .kr import (
    NwdCertificate,
    NwdRefusal,
    certify_nwd,
    kr_extend,
    kr_extend_relative,
    validate_certificate,
)
from .factor import (
    AdmissibleSet,
    DefectBlocks,
    ProductMap,
    admissible_closure,
    common_admissible_chain,
    find_defect_blocks,
    is_admissible,
    map_support,
    union_admissible,
)
from .cube import (
    FiberFamily,
    HomeoValuedMap,
    assemble_product_homeo,
    cube_extend,
    extend_homeo_valued,
    fiberwise_extend,
)
from .report import Report

__version__ = "0.1.0"
