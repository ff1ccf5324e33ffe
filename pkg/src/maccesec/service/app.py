"""HTTP facade over the library.

Every endpoint is a thin adapter: decode the request, call the library,
serialize the result. No domain logic lives here. The only server-side
state is the optional set of replay windows keyed by channel name, which
callers opt into per unprotect request.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .. import __version__
from ..adversary import (
    Scenario,
    ServiceMap,
    default_service_map,
    eavesdrop,
    infer_service_type,
    run_campaign,
    tamper,
)
from ..errors import MacCeSecError, OutOfRange, UnknownKeyId
from ..fixtures import data_path
from ..geo import (
    CellDb,
    ObservationEvent,
    estimate_region,
    long_term_profile,
    reconstruct_trajectory,
    render_svg,
    ssb_to_sector,
    ta_to_distance,
    triangulate,
)
from ..mac_codec import (
    LcidRegistry,
    MacSubPdu,
    assemble_pdu,
    ce_from_dict,
    ce_to_dict,
    decode_ce,
    default_registry,
    encode_ce,
    parse_pdu,
    subpdu_for_ce,
)
from ..policy import (
    CeFieldMap,
    Mechanism,
    PolicyRegistry,
    default_ce_field_map,
    default_policy,
    required_mechanism,
)
from ..protection import (
    KeySlot,
    ReplayWindow,
    SecuredFrame,
    load_key_slots,
    protect,
    unprotect,
)
from . import models

CONFIG_ENV = "MACCESEC_CONFIG"


@dataclass
class ServiceConfig:
    """File paths backing one service instance; None means shipped default."""

    registry_path: str | None = None
    policy_path: str | None = None
    ce_field_map_path: str | None = None
    key_file: str | None = None
    cell_db_path: str | None = None
    beam_map_path: str | None = None
    service_map_path: str | None = None
    scenario_path: str | None = None

    @classmethod
    def from_env(cls, environ=os.environ) -> "ServiceConfig":
        """Read the config file named by $MACCESEC_CONFIG, if any."""
        path = environ.get(CONFIG_ENV)
        if not path:
            return cls()
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in raw.items() if k in known})


@dataclass
class Runtime:
    registry: LcidRegistry
    policy: PolicyRegistry
    cefmap: CeFieldMap
    slots: dict[int, KeySlot]
    cell_db: CellDb
    service_map: ServiceMap
    scenario_path: str
    # replay windows: channel name -> key_id -> window
    windows: dict[str, dict[int, ReplayWindow]] = field(default_factory=dict)

    @classmethod
    def load(cls, cfg: ServiceConfig) -> "Runtime":
        registry = (
            LcidRegistry.load(cfg.registry_path) if cfg.registry_path else default_registry()
        )
        policy = PolicyRegistry.load(cfg.policy_path) if cfg.policy_path else default_policy()
        cefmap = (
            CeFieldMap.load(cfg.ce_field_map_path)
            if cfg.ce_field_map_path
            else default_ce_field_map()
        )
        slots = load_key_slots(cfg.key_file or data_path("keys_demo.json"))
        beam_map = cfg.beam_map_path
        if beam_map is None and cfg.cell_db_path is None:
            beam_map = data_path("beam_map_default.json")
        cell_db = CellDb.from_csv(
            cfg.cell_db_path or data_path("cells_default.csv"), beam_map
        )
        service_map = (
            ServiceMap.load(cfg.service_map_path)
            if cfg.service_map_path
            else default_service_map()
        )
        return cls(
            registry=registry,
            policy=policy,
            cefmap=cefmap,
            slots=slots,
            cell_db=cell_db,
            service_map=service_map,
            scenario_path=str(cfg.scenario_path or data_path("scenario_default.json")),
        )

    def slot_for(self, key_id: int | None) -> KeySlot:
        if key_id is None:
            return self.slots[min(self.slots)]
        if key_id not in self.slots:
            raise UnknownKeyId(f"no key slot {key_id} loaded")
        return self.slots[key_id]

    def window_for(self, channel: str, key_id: int) -> ReplayWindow:
        per_key = self.windows.setdefault(channel, {})
        return per_key.setdefault(key_id, ReplayWindow())


def _subpdu_view(sp: MacSubPdu) -> models.SubPduView:
    return models.SubPduView(
        lcid=sp.subheader.lcid,
        kind=sp.kind,
        ce=ce_to_dict(sp.ce) if sp.ce is not None else None,
        sdu_hex=sp.sdu.hex() if sp.sdu is not None else None,
        padding_len=len(sp.padding) if sp.padding is not None else None,
    )


def _events(raw: list[dict]) -> list[ObservationEvent]:
    return [ObservationEvent.from_dict(r) for r in raw]


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    cfg = config if config is not None else ServiceConfig.from_env()
    rt = Runtime.load(cfg)
    app = FastAPI(title="maccesec", version=__version__)
    app.state.runtime = rt

    @app.exception_handler(MacCeSecError)
    async def domain_error(_request: Request, exc: MacCeSecError) -> JSONResponse:
        body = models.ErrorResponse(
            error=models.ErrorBody(
                kind=exc.kind,
                code=type(exc).__name__,
                exit_code=exc.exit_code,
                message=str(exc),
            )
        )
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.exception_handler(ValueError)
    async def usage_error(_request: Request, exc: ValueError) -> JSONResponse:
        body = models.ErrorResponse(
            error=models.ErrorBody(
                kind="usage", code="ValueError", exit_code=1, message=str(exc)
            )
        )
        return JSONResponse(status_code=422, content=body.model_dump())

    @app.get("/health", response_model=models.HealthResponse)
    async def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", version=__version__)

    # --- codec ---------------------------------------------------------

    @app.post("/codec/encode-ce", response_model=models.EncodeCeResponse)
    async def codec_encode_ce(req: models.EncodeCeRequest) -> models.EncodeCeResponse:
        ce = ce_from_dict(req.ce)
        raw = encode_ce(ce, rt.registry, direction=req.direction, r_bit=req.r_bit)
        sp = subpdu_for_ce(ce, rt.registry, direction=req.direction, r_bit=req.r_bit)
        return models.EncodeCeResponse(
            kind=ce.KIND,
            lcid=sp.subheader.lcid,
            payload_hex=ce.to_payload().hex(),
            subpdu_hex=raw.hex(),
        )

    @app.post("/codec/decode-ce", response_model=models.DecodeCeResponse)
    async def codec_decode_ce(req: models.DecodeCeRequest) -> models.DecodeCeResponse:
        ce = decode_ce(
            req.lcid,
            bytes.fromhex(req.payload_hex),
            rt.registry,
            direction=req.direction,
            strict=req.strict,
        )
        return models.DecodeCeResponse(ce=ce_to_dict(ce))

    @app.post("/codec/assemble", response_model=models.AssembleResponse)
    async def codec_assemble(req: models.AssembleRequest) -> models.AssembleResponse:
        pdu = assemble_pdu(
            req.direction,
            [ce_from_dict(c) for c in req.ces],
            [(s.lcid, bytes.fromhex(s.hex)) for s in req.sdus],
            target_size=req.target_size,
            registry=rt.registry,
        )
        return models.AssembleResponse(
            pdu_hex=pdu.to_bytes().hex(), violations=list(pdu.violations)
        )

    @app.post("/codec/parse", response_model=models.ParseResponse)
    async def codec_parse(req: models.ParseRequest) -> models.ParseResponse:
        pdu = parse_pdu(
            req.direction, bytes.fromhex(req.pdu_hex), rt.registry, strict=req.strict
        )
        return models.ParseResponse(
            direction=pdu.direction,
            subpdus=[_subpdu_view(sp) for sp in pdu.subpdus],
            violations=list(pdu.violations),
        )

    # --- policy --------------------------------------------------------

    @app.get("/policy/fields")
    async def policy_fields() -> list[dict]:
        return [rt.policy.classify_field(n).to_dict() for n in rt.policy.field_names()]

    @app.post("/policy/classify", response_model=models.ClassifyResponse)
    async def policy_classify(req: models.ClassifyRequest) -> models.ClassifyResponse:
        if (req.field is None) == (req.pdu_hex is None):
            raise ValueError("pass exactly one of field, pdu_hex")
        if req.field is not None:
            rec = rt.policy.classify_field(req.field)
            return models.ClassifyResponse(
                mechanism=rec.mechanism.name, record=rec.to_dict()
            )
        pdu = parse_pdu(req.direction, bytes.fromhex(req.pdu_hex), rt.registry)
        mech = required_mechanism(pdu, rt.cefmap, rt.policy)
        per_field = [
            rt.policy.classify_field(name).to_dict()
            for ce in pdu.ces
            for name, _ in rt.cefmap.fields_for_ce(ce)
        ]
        return models.ClassifyResponse(mechanism=mech.name, fields=per_field)

    # --- protection ----------------------------------------------------

    @app.post("/protect", response_model=models.ProtectResponse)
    async def protect_frame(req: models.ProtectRequest) -> models.ProtectResponse:
        slot = rt.slot_for(req.key_id)
        pdu_bytes = bytes.fromhex(req.pdu_hex)
        if req.mechanism == "auto":
            pdu = parse_pdu(req.direction, pdu_bytes, rt.registry)
            mech = required_mechanism(pdu, rt.cefmap, rt.policy)
        else:
            mech = Mechanism.parse(req.mechanism)
        frame = protect(pdu_bytes, mech, slot, seq=req.seq)
        return models.ProtectResponse(
            frame_hex=frame.hex(), mechanism=mech.name, seq=req.seq, key_id=slot.key_id
        )

    @app.post("/unprotect", response_model=models.UnprotectResponse)
    async def unprotect_frame(req: models.UnprotectRequest) -> models.UnprotectResponse:
        raw = bytes.fromhex(req.frame_hex)
        sf = SecuredFrame.parse(raw)
        window = (
            rt.window_for(req.replay_channel, sf.key_id)
            if req.replay_channel is not None
            else None
        )
        mech, body = unprotect(raw, rt.slots, window=window)
        return models.UnprotectResponse(
            pdu_hex=body.hex(), mechanism=mech.name, seq=sf.seq, key_id=sf.key_id
        )

    # --- adversary -----------------------------------------------------

    @app.post("/attack/eavesdrop")
    async def attack_eavesdrop(req: models.EavesdropRequest) -> dict:
        report = eavesdrop(
            bytes.fromhex(req.frame_hex),
            rt.registry,
            rt.cefmap,
            rt.policy,
            direction=req.direction,
        )
        return report.to_dict()

    @app.post("/attack/tamper")
    async def attack_tamper(req: models.TamperRequest) -> dict:
        outcome = tamper(
            bytes.fromhex(req.frame_hex),
            rt.slots,
            rt.registry,
            rt.cefmap,
            rt.policy,
            field_name=req.field_name,
            new_value=req.new_value,
            bit_positions=req.bit_positions,
            seed=req.seed,
            direction=req.direction,
        )
        return outcome.to_dict()

    @app.post("/attack/campaign")
    async def attack_campaign(req: models.CampaignRequest) -> dict:
        if req.scenario is None:
            scenario = Scenario.load(rt.scenario_path, rt.registry)
        else:
            scenario = Scenario.from_json_obj(req.scenario, rt.registry)
        report = run_campaign(
            scenario,
            rt.registry,
            rt.cefmap,
            rt.policy,
            rt.slot_for(req.key_id),
            trials=req.trials,
            seed=req.seed,
        )
        return report.to_dict()

    @app.post("/attack/service-types")
    async def attack_service_types(req: models.ServiceTypesRequest) -> list[dict]:
        smap = (
            ServiceMap.from_json_obj(req.service_map)
            if req.service_map is not None
            else rt.service_map
        )
        return infer_service_type(req.observations, smap)

    # --- geolocation -----------------------------------------------------

    @app.post("/geo/ta-distance", response_model=models.TaDistanceResponse)
    async def geo_ta_distance(req: models.TaDistanceRequest) -> models.TaDistanceResponse:
        from ..geo import ta_step_m

        dist = ta_to_distance(req.ta_index, req.mu)
        return models.TaDistanceResponse(
            ta_index=req.ta_index,
            mu=req.mu,
            step_m=ta_step_m(req.mu),
            d_center_m=dist.d_center,
            d_min_m=dist.d_min,
            d_max_m=dist.d_max,
        )

    @app.post("/geo/sector", response_model=models.SectorResponse)
    async def geo_sector(req: models.SectorRequest) -> models.SectorResponse:
        cell = rt.cell_db.get(req.cell_id)
        if not 0 <= req.ssb_index < cell.beam_count:
            raise OutOfRange(
                f"ssb_index {req.ssb_index} outside cell {req.cell_id} "
                f"beam count {cell.beam_count}"
            )
        az_min, az_max = ssb_to_sector(req.ssb_index, cell)
        return models.SectorResponse(
            cell_id=req.cell_id,
            ssb_index=req.ssb_index,
            az_min_deg=az_min,
            az_max_deg=az_max,
        )

    @app.post("/geo/estimate")
    async def geo_estimate(req: models.EstimateRequest) -> dict:
        event = ObservationEvent.from_dict(req.event)
        region = estimate_region(event, rt.cell_db, default_radius_m=req.default_radius_m)
        return region.to_dict()

    @app.post("/geo/triangulate")
    async def geo_triangulate(req: models.TriangulateRequest) -> dict:
        region = triangulate(
            _events(req.events),
            rt.cell_db,
            grid_n=req.grid_n,
            default_radius_m=req.default_radius_m,
        )
        return region.to_dict()

    @app.post("/geo/trajectory")
    async def geo_trajectory(req: models.TrajectoryRequest) -> dict:
        report = reconstruct_trajectory(
            _events(req.events),
            rt.cell_db,
            bucket_s=req.bucket_s,
            grid_n=req.grid_n,
            default_radius_m=req.default_radius_m,
        )
        return report.to_dict()

    @app.post("/geo/profile")
    async def geo_profile(req: models.ProfileRequest) -> dict:
        report = long_term_profile(
            _events(req.events),
            rt.cell_db,
            local_tz_offset_h=req.local_tz_offset_h,
            min_days=req.min_days,
            grid_m=req.grid_m,
            dwell_cap_s=req.dwell_cap_s,
            default_radius_m=req.default_radius_m,
        )
        return report.to_dict()

    @app.post("/geo/sketch")
    async def geo_sketch(req: models.SketchRequest) -> Response:
        regions = [
            estimate_region(ev, rt.cell_db) for ev in _events(req.events)
        ]
        svg = render_svg(regions, rt.cell_db, width=req.width)
        return Response(content=svg, media_type="image/svg+xml")

    return app
