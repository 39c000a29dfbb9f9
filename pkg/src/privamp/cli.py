"""Command-line front end.

Subcommands: certify (measure primitive contracts), run (honest or
scripted protocol runs with transcript logs), attack-suite (built-in
scripts with baseline regression), oracle (ad-hoc exact queries), report
(render JSON artifacts to CSV tables and figures).

Exit codes: 0 success, 1 contract or baseline violation, 2 usage error.
Every run is reproducible from (config, master seed).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .adversary import run_with_adversary, survival_product, all_checks_pass_mass
from .bits import BitString
from .certify import certify_registry, load_baselines
from .dist import (Dist, SourceSpec, fixed_point_free_adversaries, frac_to_str,
                   min_entropy, stat_distance, str_to_frac, verify_nm_extractor)
from .primitives import BlockIpExtractor, flat_half_key_dist, mac_forgery_advantage
from .profiles import BUILTIN_PROFILES, build_registry, get_profile, validate_profile
from .protocol import run_honest
from .rng import BitStream, parse_master_seed
from .scripts import built_in_scripts, default_source

USAGE_ERROR = 2
VIOLATION = 1


def _load_config(args) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
    return cfg


def _resolve_profile(args, cfg):
    name = getattr(args, "profile", None) or cfg.get("profile")
    if not name:
        print("error: no profile given (flag --profile or config key 'profile')",
              file=sys.stderr)
        raise SystemExit(USAGE_ERROR)
    profile = get_profile(name)
    violations = validate_profile(profile)
    if violations:
        for v in violations:
            print(f"profile violation: {v}", file=sys.stderr)
        raise SystemExit(VIOLATION)
    return profile


def _out_dir(args, cfg, default) -> Path:
    out = Path(getattr(args, "out", None) or cfg.get("out") or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_certify(args) -> int:
    cfg = _load_config(args)
    profile = _resolve_profile(args, cfg)
    out = _out_dir(args, cfg, "reports/certify")
    registry = build_registry(profile)
    ok, reports = certify_registry(registry, quick=args.quick)
    for rec in reports:
        path = out / f"cert_{rec['primitive'].replace('[', '_').rstrip(']')}.json"
        path.write_text(json.dumps(rec, indent=1))
        print(f"{'PASS' if rec['ok'] else 'FAIL'} {rec['primitive']}: "
              f"measured {rec['measured']} vs claimed {rec['claimed']}"
              + (f" (witness {rec['witness']})" if rec["witness"] and not rec["ok"] else ""))
    (out / "registry_manifest.json").write_text(json.dumps(registry.manifest(), indent=1))
    return 0 if ok else VIOLATION


def _certified_registry(profile):
    registry = build_registry(profile)
    ok, _ = certify_registry(registry, quick=True)
    if not ok:
        print("error: registry failed certification; refusing to run", file=sys.stderr)
        raise SystemExit(VIOLATION)
    return registry


def cmd_run(args) -> int:
    cfg = _load_config(args)
    profile = _resolve_profile(args, cfg)
    protocol = args.protocol or cfg.get("protocol") or ("aka2" if profile.aka2 else "aka")
    out = _out_dir(args, cfg, "reports/run")
    seed = parse_master_seed(args.seed or cfg.get("seed", "00"))
    registry = _certified_registry(profile)

    script_name = args.script or cfg.get("script")
    if script_name:
        scripts = built_in_scripts(profile)
        if script_name not in scripts:
            print(f"error: unknown script {script_name!r}; have {sorted(scripts)}",
                  file=sys.stderr)
            return USAGE_ERROR
        source = default_source(profile)
        rep = run_with_adversary(protocol, profile, source, scripts[script_name],
                                 exact=args.exact, trials=args.trials or 0,
                                 seed=seed, registry=registry)
        path = out / f"attack_{script_name}.json"
        path.write_text(json.dumps(rep.to_json(), indent=1))
        print(f"{script_name}: success {rep.success} "
              f"({'exact' if rep.exact else f'{rep.trials} trials'}) -> {path}")
        return 0

    runs = args.runs or int(cfg.get("runs", 10))
    transcripts = []
    outcomes = []
    agreements = rejects = 0
    for i in range(runs):
        x = BitStream(seed, f"run{i}/source").take(profile.n)
        tr = run_honest(protocol, x, profile, registry,
                        BitStream(seed, f"run{i}/alice"), BitStream(seed, f"run{i}/bob"))
        transcripts.extend(tr.to_jsonl_records(f"run{i}"))
        oa, ob = tr.outcome_alice, tr.outcome_bob
        if oa.is_reject or ob.is_reject:
            rejects += 1
        elif oa.key == ob.key:
            agreements += 1
        outcomes.append({"run_id": f"run{i}",
                         "alice": "reject" if oa.is_reject else oa.key.to_hex(),
                         "bob": "reject" if ob.is_reject else ob.key.to_hex(),
                         "agree": (not oa.is_reject and not ob.is_reject
                                   and oa.key == ob.key)})
    (out / "transcripts.jsonl").write_text(
        "\n".join(json.dumps(r) for r in transcripts) + "\n")
    summary = {"schema": "privamp.runs/1", "profile": profile.name, "protocol": protocol,
               "runs": runs, "agreements": agreements, "rejects": rejects,
               "seed": (args.seed or cfg.get("seed", "00")), "outcomes": outcomes}
    (out / "summary.json").write_text(json.dumps(summary, indent=1))
    print(f"{runs} honest runs: {agreements} agreements, {rejects} rejects -> {out}")
    return 0


def cmd_attack_suite(args) -> int:
    cfg = _load_config(args)
    profile = _resolve_profile(args, cfg)
    protocol = args.protocol or cfg.get("protocol") or ("aka2" if profile.aka2 else "aka")
    out = _out_dir(args, cfg, "reports/attacks")
    seed = parse_master_seed(args.seed or cfg.get("seed", "00"))
    registry = _certified_registry(profile)
    source = default_source(profile)
    baselines = load_baselines().get("attacks", {})
    table = []
    failed = []
    for name, script in sorted(built_in_scripts(profile).items()):
        rep = run_with_adversary(protocol, profile, source, script,
                                 exact=args.exact, trials=args.trials or 0,
                                 seed=seed, registry=registry)
        rec = rep.to_json()
        if rep.exact and survival_product(rep) != all_checks_pass_mass(rep):
            rec["product_identity"] = "violated"
            failed.append(name)
        base = baselines.get(name)
        if rep.exact and base is not None:
            if str_to_frac(base["success"]) != rep.success:
                rec["baseline_drift"] = {"committed": base["success"],
                                         "measured": frac_to_str(rep.success)}
                failed.append(name)
        elif rep.exact and args.strict_baselines:
            failed.append(name)
            rec["baseline_drift"] = "no committed baseline"
        (out / f"attack_{name}.json").write_text(json.dumps(rec, indent=1))
        table.append(rec)
        print(f"{name:26s} success={rec['success']:>12s} exact={rep.exact}")
    (out / "suite.json").write_text(json.dumps(table, indent=1))
    if failed:
        print(f"baseline violations: {sorted(set(failed))}", file=sys.stderr)
        return VIOLATION
    return 0


def _parse_dist(spec: str) -> Dist:
    data = json.loads(spec)
    lens = {len(k) for k in data}
    if len(lens) != 1:
        print("error: distribution keys must share one length", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)
    return Dist({BitString.from_str(k): str_to_frac(v) for k, v in data.items()},
                lens.pop())


def cmd_oracle(args) -> int:
    if args.op == "min-entropy":
        d = _parse_dist(args.dist)
        print(min_entropy(d))
    elif args.op == "stat-distance":
        a, b = _parse_dist(args.dist), _parse_dist(args.other)
        print(frac_to_str(stat_distance(a, b)))
    elif args.op == "mac-advantage":
        dist = flat_half_key_dist(args.tag_bits) if args.half_key else None
        adv = mac_forgery_advantage(args.tag_bits, args.chunks, key_dist=dist)
        print(frac_to_str(adv))
    elif args.op == "nm-sweep":
        advs = fixed_point_free_adversaries(args.seed_bits, cap=args.cap)
        rep = verify_nm_extractor(
            BlockIpExtractor(args.source_bits, args.seed_bits, args.out_bits, kind="nm_ext"),
            args.source_bits, args.seed_bits, args.out_bits, args.source_bits,
            advs, [SourceSpec("uniform", args.source_bits)])
        print(json.dumps(rep.to_json(), indent=1))
    else:
        print(f"error: unknown oracle op {args.op!r}", file=sys.stderr)
        return USAGE_ERROR
    return 0


def cmd_report(args) -> int:
    from .report import render_reports

    written = render_reports(args.in_dir, args.out or "reports/rendered")
    if not written:
        print("no renderable records found", file=sys.stderr)
        return USAGE_ERROR
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="privamp",
        description="Desk-scale non-malleable condensers and privacy amplification "
                    "with an exact verification oracle.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file with defaults")
        p.add_argument("--profile", help="built-in profile name or profile JSON path "
                                         f"(built-ins: {', '.join(sorted(BUILTIN_PROFILES))})")
        p.add_argument("--seed", help="master seed, hex")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("certify", help="measure primitive contracts against claims")
    common(p)
    p.add_argument("--quick", action="store_true", help="smaller certification families")
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("run", help="honest protocol runs or a single attack script")
    common(p)
    p.add_argument("--protocol", choices=["aka", "aka2"])
    p.add_argument("--runs", type=int, help="number of honest runs")
    p.add_argument("--script", help="built-in script name for an attack run")
    p.add_argument("--exact", action="store_true", help="exact enumeration")
    p.add_argument("--trials", type=int, help="sampled trials when not exact")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("attack-suite", help="run the built-in script library")
    common(p)
    p.add_argument("--protocol", choices=["aka", "aka2"])
    p.add_argument("--exact", action="store_true")
    p.add_argument("--trials", type=int)
    p.add_argument("--strict-baselines", action="store_true",
                   help="fail when a script has no committed baseline")
    p.set_defaults(fn=cmd_attack_suite)

    p = sub.add_parser("oracle", help="ad-hoc exact oracle queries")
    p.add_argument("op", choices=["min-entropy", "stat-distance", "mac-advantage", "nm-sweep"])
    p.add_argument("--dist", help='distribution JSON, e.g. {"00":"1/2","11":"1/2"}')
    p.add_argument("--other", help="second distribution JSON")
    p.add_argument("--tag-bits", type=int, default=2)
    p.add_argument("--chunks", type=int, default=2)
    p.add_argument("--half-key", action="store_true",
                   help="key flat on half the key space instead of uniform")
    p.add_argument("--source-bits", type=int, default=2)
    p.add_argument("--seed-bits", type=int, default=2)
    p.add_argument("--out-bits", type=int, default=1)
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("report", help="render JSON artifacts to tables and figures")
    p.add_argument("--in", dest="in_dir", required=True, help="directory of JSON records")
    p.add_argument("--out", help="output directory")
    p.set_defaults(fn=cmd_report)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
