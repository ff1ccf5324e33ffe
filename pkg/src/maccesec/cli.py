"""Command-line client for the codec, policy, protection and inference stack.

The CLI is a thin client over the HTTP service. By default it instantiates
the ASGI app in-process (no socket, no server to start); ``--server URL``
points the same commands at a remote instance instead. Every command emits
JSON with ``--output json`` and a terse human rendering with the default
``--output text``.

Exit codes: 0 ok, 1 usage or transport, 2 parse, 3 ordering, 4 policy,
5 crypto, 6 geometry or data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

from .fixtures import data_path
from .service.app import CONFIG_ENV, ServiceConfig

EXIT_OK = 0
EXIT_USAGE = 1


@dataclass
class CliConfig:
    registry_path: str | None = None
    policy_path: str | None = None
    ce_field_map_path: str | None = None
    key_file: str | None = None
    cell_db_path: str | None = None
    beam_map_path: str | None = None
    service_map_path: str | None = None
    scenario_path: str | None = None
    seed: int = 0
    output_format: str = "text"
    server_url: str | None = None

    @classmethod
    def from_env(cls, environ=os.environ) -> "CliConfig":
        path = environ.get(CONFIG_ENV)
        if not path:
            return cls()
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in raw.items() if k in known})

    def service_config(self) -> ServiceConfig:
        return ServiceConfig(
            registry_path=self.registry_path,
            policy_path=self.policy_path,
            ce_field_map_path=self.ce_field_map_path,
            key_file=self.key_file,
            cell_db_path=self.cell_db_path,
            beam_map_path=self.beam_map_path,
            service_map_path=self.service_map_path,
            scenario_path=self.scenario_path,
        )


class _Client:
    """One .get/.post surface over either transport."""

    def __init__(self, cfg: CliConfig):
        if cfg.server_url:
            import httpx

            self._c = httpx.Client(base_url=cfg.server_url.rstrip("/"), timeout=60.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient

            from .service import create_app

            self._c = TestClient(create_app(cfg.service_config()))

    def get(self, path: str):
        return self._c.get(path)

    def post(self, path: str, payload: dict):
        return self._c.post(path, json=payload)


def _failure(resp) -> tuple[str, int]:
    """Extract (message, exit_code) from an error response."""
    try:
        body = resp.json()
    except ValueError:
        return f"http {resp.status_code}", EXIT_USAGE
    if isinstance(body, dict) and "error" in body:
        err = body["error"]
        return f"{err['code']}: {err['message']}", int(err["exit_code"])
    if isinstance(body, dict) and "detail" in body:
        return f"bad request: {body['detail']}", EXIT_USAGE
    return f"http {resp.status_code}: {body}", EXIT_USAGE


class _Emit:
    """stdout/stderr pair so tests can capture output without patching."""

    def __init__(self, out=None, err=None):
        self.out = out or sys.stdout
        self.err = err or sys.stderr

    def line(self, text: str = "") -> None:
        print(text, file=self.out)

    def json(self, obj) -> None:
        print(json.dumps(obj, indent=2, sort_keys=True), file=self.out)

    def note(self, text: str) -> None:
        print(text, file=self.err)

    def error(self, text: str) -> None:
        print(f"error: {text}", file=self.err)


# --- argument helpers --------------------------------------------------------


def _parse_ce_spec(spec: str) -> dict:
    """CE mini-grammar: ``kind``, ``kind=value``, or ``kind:f=v,f=v``.

    ``kind=value`` fills the single required field of that CE class;
    multi-field CEs spell fields out. Arbitrary CEs (field_bag, s_bits
    lists) use --ce-json instead.
    """
    from .mac_codec.ce import ce_class_for

    if ":" in spec:
        kind, _, rest = spec.partition(":")
        out: dict = {"kind": kind.strip()}
        for item in rest.split(","):
            name, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"bad CE field {item!r}, expected name=value")
            out[name.strip()] = int(value, 0)
        return out
    kind, eq, value = spec.partition("=")
    kind = kind.strip()
    cls = ce_class_for(kind)  # raises UnknownCeKind early, exit 2
    if not eq:
        return {"kind": kind}
    required = [
        f.name
        for f in dataclasses.fields(cls)
        if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
    ]
    if len(required) != 1:
        raise ValueError(
            f"{kind} has fields {required}; use {kind}:name=value,... form"
        )
    return {"kind": kind, required[0]: int(value, 0)}


def _parse_sdu_spec(spec: str) -> dict:
    if ":" in spec:
        lcid, _, hexpart = spec.partition(":")
        return {"lcid": int(lcid, 0), "hex": hexpart}
    return {"lcid": 1, "hex": spec}


def _read_events(path: str) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _ce_dict_text(ce: dict) -> str:
    parts = [f"{k}={v}" for k, v in ce.items() if k != "kind"]
    return f"{ce['kind']} " + " ".join(parts) if parts else ce["kind"]


# --- commands ----------------------------------------------------------------


def cmd_encode(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    ces = [_parse_ce_spec(s) for s in args.ce or []]
    ces += [json.loads(s) for s in args.ce_json or []]
    sdus = [_parse_sdu_spec(s) for s in args.sdu or []]
    if not ces and not sdus:
        emit.error("nothing to encode; pass --ce or --sdu")
        return EXIT_USAGE
    single_ce = len(ces) == 1 and not sdus and args.target_size is None
    if single_ce:
        resp = client.post(
            "/codec/encode-ce", {"ce": ces[0], "direction": args.dir}
        )
    else:
        resp = client.post(
            "/codec/assemble",
            {
                "direction": args.dir or "dl",
                "ces": ces,
                "sdus": sdus,
                "target_size": args.target_size,
            },
        )
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
    else:
        emit.line(body["subpdu_hex"] if single_ce else body["pdu_hex"])
        for violation in body.get("violations", ()):
            emit.note(f"ordering: {violation}")
    return EXIT_OK


def cmd_decode(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    hex_text = args.hex if args.hex is not None else sys.stdin.read().strip()
    resp = client.post(
        "/codec/parse",
        {"direction": args.dir or "dl", "pdu_hex": hex_text, "strict": args.strict},
    )
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
        return EXIT_OK
    emit.line(f"{body['direction']} pdu, {len(body['subpdus'])} sub-pdus")
    for i, sp in enumerate(body["subpdus"]):
        if sp["kind"] == "ce":
            detail = _ce_dict_text(sp["ce"])
        elif sp["kind"] == "sdu":
            detail = f"sdu {len(sp['sdu_hex']) // 2} bytes {sp['sdu_hex']}"
        else:
            detail = f"padding {sp['padding_len']} bytes"
        emit.line(f"[{i}] lcid={sp['lcid']} {detail}")
    for violation in body["violations"]:
        emit.line(f"violation: {violation}")
    return EXIT_OK


def cmd_classify(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    if (args.field is None) == (args.pdu is None):
        emit.error("pass a field name or --pdu HEX")
        return EXIT_USAGE
    payload: dict = {"direction": args.dir or "dl"}
    if args.field is not None:
        payload["field"] = args.field
    else:
        payload["pdu_hex"] = args.pdu
    resp = client.post("/policy/classify", payload)
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
    elif body.get("record"):
        rec = body["record"]
        emit.line(
            f"{rec['field']}: mechanism={body['mechanism']} risk={rec['risk_stars']} "
            f"integrity={rec['integrity_stars']} latency={rec['latency_stars']} "
            f"confidentiality={rec['confidentiality_stars']}"
        )
    else:
        emit.line(body["mechanism"])
    return EXIT_OK


def cmd_fields(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    resp = client.get("/policy/fields")
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
    else:
        for rec in body:
            emit.line(f"{rec['field']:36} {rec['mechanism']} risk={rec['risk_stars']}")
    return EXIT_OK


def cmd_protect(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    hex_text = args.hex if args.hex is not None else sys.stdin.read().strip()
    mechanism = "auto" if args.auto else args.mech
    resp = client.post(
        "/protect",
        {
            "pdu_hex": hex_text,
            "mechanism": mechanism,
            "direction": args.dir or "dl",
            "key_id": args.key_id,
            "seq": args.seq,
        },
    )
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
    else:
        emit.line(body["frame_hex"])
        emit.note(f"mechanism: {body['mechanism']} seq: {body['seq']}")
    return EXIT_OK


def cmd_unprotect(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    hex_text = args.hex if args.hex is not None else sys.stdin.read().strip()
    resp = client.post(
        "/unprotect",
        {"frame_hex": hex_text, "replay_channel": args.replay_channel},
    )
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
    else:
        emit.line(body["pdu_hex"])
        emit.note(f"mechanism: {body['mechanism']} seq: {body['seq']}")
    return EXIT_OK


def cmd_attack(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    scenario = None
    if args.scenario:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            scenario = json.load(fh)
    resp = client.post(
        "/attack/campaign",
        {
            "scenario": scenario,
            "trials": args.trials,
            "seed": args.seed if args.seed is not None else cfg.seed,
            "key_id": args.key_id,
        },
    )
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
    else:
        from .adversary import render_report_text

        emit.line(render_report_text(body).rstrip("\n"))
    return EXIT_OK


def cmd_infer_service(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    with open(args.observations, "r", encoding="utf-8") as fh:
        observations = json.load(fh)
    resp = client.post("/attack/service-types", {"observations": observations})
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
    else:
        for row in body:
            emit.line(f"t={row['time_s']:.1f} {row['source']}={row['value']} {row['service']}")
    return EXIT_OK


def cmd_infer(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    path = args.observations or str(data_path("observations_demo.jsonl"))
    events = _read_events(path)
    resp = client.post(
        "/geo/trajectory", {"events": events, "bucket_s": args.bucket_s}
    )
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if args.svg:
        sketch = client.post("/geo/sketch", {"events": events})
        if sketch.status_code != 200:
            msg, code = _failure(sketch)
            emit.error(msg)
            return code
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(sketch.text)
        emit.note(f"wrote {args.svg}")
    if cfg.output_format == "json":
        emit.json(body)
        return EXIT_OK
    emit.line(f"trajectory: {len(body['steps'])} steps")
    for i, step in enumerate(body["steps"]):
        lat, lon = step["centroid"]
        region = step["region"]
        cell = region.get("cell_id", "-")
        emit.line(
            f"[{i}] t={step['time_s']:.1f} {region['kind']} cell={cell} "
            f"centroid={lat:.5f},{lon:.5f}"
        )
    for m in body["motion"]:
        emit.line(
            f"move {m['t_from']:.1f}s->{m['t_to']:.1f}s {m['distance_m']:.1f} m "
            f"{m['speed_mps']:.2f} m/s heading {m['heading_deg']:.1f}"
        )
    return EXIT_OK


def cmd_profile(client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    path = args.observations or str(data_path("observations_commuter.jsonl"))
    events = _read_events(path)
    resp = client.post(
        "/geo/profile",
        {
            "events": events,
            "local_tz_offset_h": args.tz_offset_h,
            "min_days": args.min_days,
            "grid_m": args.grid_m,
        },
    )
    if resp.status_code != 200:
        msg, code = _failure(resp)
        emit.error(msg)
        return code
    body = resp.json()
    if cfg.output_format == "json":
        emit.json(body)
        return EXIT_OK
    emit.line(
        f"profile: {body['days_observed']} days, {body['events']} events, "
        f"{len(body['cells'])} dwell cells"
    )
    for key in ("residence_candidate", "workplace_candidate"):
        cell = body.get(key)
        if cell:
            emit.line(
                f"{key}: {cell['lat']:.5f},{cell['lon']:.5f} "
                f"night={cell['night_s']:.0f}s work={cell['work_s']:.0f}s"
            )
        else:
            emit.line(f"{key}: none")
    return EXIT_OK


def cmd_serve(_client: _Client, cfg: CliConfig, args, emit: _Emit) -> int:
    import uvicorn

    from .service import create_app

    emit.note(f"serving on {args.host}:{args.port}")
    uvicorn.run(create_app(cfg.service_config()), host=args.host, port=args.port)
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maccesec",
        description="MAC CE codecs, protection policy, attack simulation, geolocation",
        allow_abbrev=False,
    )
    parser.add_argument("--server", help="remote service URL (default: run in-process)")
    parser.add_argument("--output", choices=["json", "text"], help="output format")
    parser.add_argument("--registry", help="LCID registry JSON path")
    parser.add_argument("--policy", help="sensitivity policy JSON path")
    parser.add_argument("--ce-map", help="CE field map JSON path")
    parser.add_argument("--keys", help="key slot JSON path")
    parser.add_argument("--cells", help="cell database CSV path")
    parser.add_argument("--beam-map", help="beam mapping JSON path")
    parser.add_argument("--service-map", help="service type map JSON path")
    parser.add_argument("--seed", type=int, help="default RNG seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode CEs (and SDUs) into a PDU or sub-PDU")
    p.add_argument("--ce", action="append", help="kind, kind=value, or kind:f=v,f=v")
    p.add_argument("--ce-json", action="append", help="CE as a JSON object")
    p.add_argument("--sdu", action="append", help="HEX or LCID:HEX")
    p.add_argument("--dir", choices=["dl", "ul"], help="link direction")
    p.add_argument("--target-size", type=int, help="pad PDU to this many octets")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="parse a PDU from hex")
    p.add_argument("--hex", help="PDU hex (default: stdin)")
    p.add_argument("--dir", choices=["dl", "ul"], help="link direction")
    p.add_argument("--strict", action="store_true", help="reject reserved bits and misorder")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("classify", help="look up a field or rate a whole PDU")
    p.add_argument("field", nargs="?", help="field name, e.g. 'TA Command'")
    p.add_argument("--pdu", help="PDU hex to rate")
    p.add_argument("--dir", choices=["dl", "ul"], help="link direction for --pdu")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fields", help="list the sensitivity table")
    p.set_defaults(func=cmd_fields)

    p = sub.add_parser("protect", help="wrap a PDU in a secured frame")
    p.add_argument("--hex", help="PDU hex (default: stdin)")
    p.add_argument("--mech", default="auto", help="M1, M2, M3, M4 or auto")
    p.add_argument("--auto", action="store_true", help="choose mechanism from policy")
    p.add_argument("--dir", choices=["dl", "ul"], help="direction for policy parsing")
    p.add_argument("--key-id", type=int, help="key slot id")
    p.add_argument("--seq", type=int, default=0, help="sequence number")
    p.set_defaults(func=cmd_protect)

    p = sub.add_parser("unprotect", help="verify and unwrap a secured frame")
    p.add_argument("--hex", help="frame hex (default: stdin)")
    p.add_argument("--replay-channel", help="track replay on this named channel")
    p.set_defaults(func=cmd_unprotect)

    p = sub.add_parser("attack", help="run an eavesdrop+tamper campaign")
    p.add_argument("--scenario", help="scenario JSON (default: shipped demo)")
    p.add_argument("--trials", type=int, default=1000, help="tamper trials")
    p.add_argument("--seed", type=int, help="campaign seed")
    p.add_argument("--key-id", type=int, help="key slot id")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("infer-service", help="label BWP/LCG observations")
    p.add_argument("observations", help="JSON list of {time_s, bwp_id|lcg_id}")
    p.set_defaults(func=cmd_infer_service)

    p = sub.add_parser("infer", help="locate a UE from observation events")
    p.add_argument("observations", nargs="?", help="JSONL events (default: shipped demo)")
    p.add_argument("--bucket-s", type=float, default=1.0, help="time bucket seconds")
    p.add_argument("--svg", help="write an SVG sketch of per-event regions")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("profile", help="long-term dwell profile")
    p.add_argument("observations", nargs="?", help="JSONL events (default: shipped demo)")
    p.add_argument("--tz-offset-h", type=float, default=0.0, help="local tz offset hours")
    p.add_argument("--min-days", type=int, default=3, help="required distinct days")
    p.add_argument("--grid-m", type=float, default=100.0, help="dwell grid size")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_flags(cfg: CliConfig, args) -> CliConfig:
    overrides = {
        "server_url": args.server,
        "output_format": args.output,
        "registry_path": args.registry,
        "policy_path": args.policy,
        "ce_field_map_path": args.ce_map,
        "key_file": args.keys,
        "cell_db_path": args.cells,
        "beam_map_path": args.beam_map,
        "service_map_path": args.service_map,
        "seed": args.seed,
    }
    return dataclasses.replace(
        cfg, **{k: v for k, v in overrides.items() if v is not None}
    )


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    emit = _Emit(out, err)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _apply_flags(CliConfig.from_env(), args)
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        emit.error(f"bad config: {exc}")
        return EXIT_USAGE
    try:
        client = _Client(cfg)
    except Exception as exc:  # config file errors surface at app build time
        emit.error(f"startup failed: {exc}")
        return EXIT_USAGE
    try:
        return args.func(client, cfg, args, emit)
    except ValueError as exc:
        emit.error(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        emit.error(str(exc))
        return EXIT_USAGE
    except Exception as exc:
        from .errors import MacCeSecError

        if isinstance(exc, MacCeSecError):
            emit.error(f"{type(exc).__name__}: {exc}")
            return exc.exit_code
        raise


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
