"""Request and response bodies for the HTTP service.

CE objects, observation events and reports cross the wire as plain JSON
objects in the same shape the library's ``to_dict``/``from_dict`` helpers
use, so scenario files, service payloads and CLI output stay identical.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


# --- codec ---------------------------------------------------------------


class EncodeCeRequest(BaseModel):
    ce: dict
    direction: str | None = None
    r_bit: int = 0


class EncodeCeResponse(BaseModel):
    kind: str
    lcid: int
    payload_hex: str
    subpdu_hex: str


class DecodeCeRequest(BaseModel):
    lcid: int
    payload_hex: str
    direction: str | None = None
    strict: bool = False


class DecodeCeResponse(BaseModel):
    ce: dict


class SduSpec(BaseModel):
    lcid: int = 1
    hex: str


class AssembleRequest(BaseModel):
    direction: str = "dl"
    ces: list[dict] = Field(default_factory=list)
    sdus: list[SduSpec] = Field(default_factory=list)
    target_size: int | None = None


class AssembleResponse(BaseModel):
    pdu_hex: str
    violations: list[str]


class ParseRequest(BaseModel):
    direction: str = "dl"
    pdu_hex: str
    strict: bool = False


class SubPduView(BaseModel):
    lcid: int
    kind: str
    ce: dict | None = None
    sdu_hex: str | None = None
    padding_len: int | None = None


class ParseResponse(BaseModel):
    direction: str
    subpdus: list[SubPduView]
    violations: list[str]


# --- policy --------------------------------------------------------------


class ClassifyRequest(BaseModel):
    field: str | None = None
    pdu_hex: str | None = None
    direction: str = "dl"


class ClassifyResponse(BaseModel):
    mechanism: str
    record: dict | None = None
    fields: list[dict] | None = None


# --- protection ----------------------------------------------------------


class ProtectRequest(BaseModel):
    pdu_hex: str
    mechanism: str = "auto"
    direction: str = "dl"
    key_id: int | None = None
    seq: int = 0


class ProtectResponse(BaseModel):
    frame_hex: str
    mechanism: str
    seq: int
    key_id: int


class UnprotectRequest(BaseModel):
    frame_hex: str
    # a channel name opts in to server-side replay tracking; None is stateless
    replay_channel: str | None = None


class UnprotectResponse(BaseModel):
    pdu_hex: str
    mechanism: str
    seq: int
    key_id: int


# --- adversary -----------------------------------------------------------


class EavesdropRequest(BaseModel):
    frame_hex: str
    direction: str | None = None


class TamperRequest(BaseModel):
    frame_hex: str
    field_name: str | None = None
    new_value: int | None = None
    bit_positions: list[int] | None = None
    seed: int | None = None
    direction: str | None = None


class CampaignRequest(BaseModel):
    scenario: list[dict] | None = None  # None runs the shipped demo scenario
    trials: int = 1000
    seed: int = 0
    key_id: int | None = None


class ServiceTypesRequest(BaseModel):
    observations: list[dict]
    service_map: dict | None = None


# --- geolocation ---------------------------------------------------------


class TaDistanceRequest(BaseModel):
    ta_index: int
    mu: int = 0


class TaDistanceResponse(BaseModel):
    ta_index: int
    mu: int
    step_m: float
    d_center_m: float
    d_min_m: float
    d_max_m: float


class SectorRequest(BaseModel):
    cell_id: int
    ssb_index: int


class SectorResponse(BaseModel):
    cell_id: int
    ssb_index: int
    az_min_deg: float
    az_max_deg: float


class EstimateRequest(BaseModel):
    event: dict
    default_radius_m: float = 5000.0


class TriangulateRequest(BaseModel):
    events: list[dict]
    grid_n: int = 192
    default_radius_m: float = 5000.0


class TrajectoryRequest(BaseModel):
    events: list[dict]
    bucket_s: float = 1.0
    grid_n: int = 192
    default_radius_m: float = 5000.0


class ProfileRequest(BaseModel):
    events: list[dict]
    local_tz_offset_h: float = 0.0
    min_days: int = 3
    grid_m: float = 100.0
    dwell_cap_s: float = 3600.0
    default_radius_m: float = 5000.0


class SketchRequest(BaseModel):
    events: list[dict]
    width: int = 640


class ErrorBody(BaseModel):
    kind: str
    code: str
    exit_code: int
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody
