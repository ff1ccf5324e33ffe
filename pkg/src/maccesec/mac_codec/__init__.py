"""Bit-exact MAC CE and MAC PDU codecs with a data-driven LCID registry."""

from .bits import BitReader, BitWriter
from .ce import (
    BagField,
    CE_CLASSES,
    CRntiCe,
    FieldBagCe,
    LtmCellSwitchCe,
    MacCe,
    ShortBsrCe,
    SpCsiPucchActDeactCe,
    TaCommandCe,
    TaReportCe,
    ce_from_dict,
    ce_to_dict,
)
from .pdu import (
    MacPdu,
    MacSubPdu,
    MacSubheader,
    assemble_pdu,
    decode_ce,
    encode_ce,
    ordering_violations,
    padding_subpdu,
    parse_pdu,
    subpdu_for_ce,
    subpdu_for_sdu,
)
from .registry import (
    CE_KINDS,
    DIR_DL,
    DIR_UL,
    LCID_PADDING,
    LcidEntry,
    LcidRegistry,
    SDU_LCID_MAX,
    default_registry,
)

__all__ = [
    "BagField",
    "BitReader",
    "BitWriter",
    "CE_CLASSES",
    "CE_KINDS",
    "CRntiCe",
    "DIR_DL",
    "DIR_UL",
    "FieldBagCe",
    "LCID_PADDING",
    "LcidEntry",
    "LcidRegistry",
    "LtmCellSwitchCe",
    "MacCe",
    "MacPdu",
    "MacSubPdu",
    "MacSubheader",
    "SDU_LCID_MAX",
    "ShortBsrCe",
    "SpCsiPucchActDeactCe",
    "TaCommandCe",
    "TaReportCe",
    "assemble_pdu",
    "ce_from_dict",
    "ce_to_dict",
    "decode_ce",
    "default_registry",
    "encode_ce",
    "ordering_violations",
    "padding_subpdu",
    "parse_pdu",
    "subpdu_for_ce",
    "subpdu_for_sdu",
]
