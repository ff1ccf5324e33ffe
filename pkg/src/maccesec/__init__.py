"""MAC-layer control element codecs, protection policy, and exposure analysis.

The package splits into five parts that can be used independently:

``maccesec.mac_codec``
    Bit-exact encoders and decoders for MAC CEs and multiplexed MAC PDUs.
``maccesec.policy``
    The sensitivity registry for control fields and the mechanism lattice
    that decides how strongly a frame must be protected.
``maccesec.protection``
    The secured-frame format: integrity tags, encryption, replay windows.
``maccesec.adversary``
    Passive and active attacker simulation against secured frames.
``maccesec.geo``
    Location inference from timing-advance and beam observations.
"""

from . import adversary, errors, geo, mac_codec, policy, protection
from .errors import MacCeSecError
from .mac_codec import (
    CRntiCe,
    FieldBagCe,
    LcidRegistry,
    LtmCellSwitchCe,
    MacPdu,
    ShortBsrCe,
    SpCsiPucchActDeactCe,
    TaCommandCe,
    TaReportCe,
    assemble_pdu,
    default_registry,
    parse_pdu,
)
from .policy import (
    CeFieldMap,
    Mechanism,
    PolicyRegistry,
    default_ce_field_map,
    default_policy,
    required_mechanism,
)
from .protection import (
    KeySlot,
    ReplayWindow,
    SecuredFrame,
    load_key_slots,
    protect,
    protect_per_policy,
    unprotect,
)

__version__ = "0.1.0"

__all__ = [
    "CRntiCe",
    "CeFieldMap",
    "FieldBagCe",
    "KeySlot",
    "LcidRegistry",
    "LtmCellSwitchCe",
    "MacCeSecError",
    "MacPdu",
    "Mechanism",
    "PolicyRegistry",
    "ReplayWindow",
    "SecuredFrame",
    "ShortBsrCe",
    "SpCsiPucchActDeactCe",
    "TaCommandCe",
    "TaReportCe",
    "adversary",
    "assemble_pdu",
    "default_ce_field_map",
    "default_policy",
    "default_registry",
    "errors",
    "geo",
    "load_key_slots",
    "mac_codec",
    "parse_pdu",
    "policy",
    "protect",
    "protect_per_policy",
    "protection",
    "required_mechanism",
    "unprotect",
    "__version__",
]
