"""Command line entry point ``lab``.

Exit codes: 0 success, 2 validation failure (bad config or failed
verification), 3 numerical-regime failure (a sweep row or certificate failed).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from flatlab.bergman import closed_form_model, metric_report, product_targets
from flatlab.config import load_config
from flatlab.errors import ConfigError, FlatlabError
from flatlab.frames import build_frame, build_region, certify_inclusions
from flatlab.geometry import ProductDiscBall
from flatlab.harness import parameter_for_depth, run_sweep
from flatlab.verify import Criterion, verify_all

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_REGIME = 3


def _cmd_closed_form(args) -> int:
    n = args.dim
    if n < 1:
        print("--dim must be at least 1", file=sys.stderr)
        return EXIT_VALIDATION
    xi = np.array([complex(v) for v in args.xi], dtype=complex) if args.xi else np.eye(n + 1)[0]
    if xi.shape[0] != n + 1:
        print(f"--xi needs {n + 1} entries", file=sys.stderr)
        return EXIT_VALIDATION
    rep = metric_report(closed_form_model(ProductDiscBall(n)), np.zeros(n + 1), xi)
    tg = product_targets(n, xi)
    out = {
        "domain": f"disc x B_{n}",
        "point": "0",
        "xi": [str(z) for z in xi],
        "computed": {
            "kappa": rep.kappa,
            "J": rep.J,
            "R": rep.ricci,
            "S": rep.scalar,
            "MF": rep.MF,
        },
        "exact": tg,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    res = run_sweep(cfg)
    errors = [r for r in res.rows if r["error"]]
    if not cfg.csv_path:
        sys.stdout.write(res.csv_text())
    s = res.summary
    print(
        f"{cfg.name}: {s['rows']} rows, {s['errors']} errors, "
        f"{s['certified_rows']} certified, bracket contains 1: {s['bracket_contains_one']}",
        file=sys.stderr,
    )
    return EXIT_REGIME if errors else EXIT_OK


def _cmd_certify(args) -> int:
    cfg = load_config(args.config)
    if cfg.domain_kind != "hartogs":
        raise ConfigError("certify needs a hartogs domain")
    domain, curve = cfg.domain(), cfg.curve()
    failed = False
    for log_d in cfg.log_d:
        frame = build_frame(domain, curve, parameter_for_depth(domain, curve, log_d))
        for eps in cfg.epsilon:
            region = build_region(frame, eps)
            for delta in cfg.delta:
                rep = certify_inclusions(region, delta, cfg.samples, cfg.seed)
                failed |= not rep.passed
                line = json.loads(rep.to_json())
                line["log_d"] = log_d
                line["passed"] = rep.passed
                print(json.dumps(line, sort_keys=True))
    return EXIT_REGIME if failed else EXIT_OK


def _cmd_verify(args) -> int:
    report = verify_all(args.level)
    for c in report["criteria"]:
        crit = Criterion(**{k: v for k, v in c.items() if k != "within_time"})
        print(crit.line(), file=sys.stderr)
    text = json.dumps(report, indent=2, default=str)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description="Invariant metrics near exponentially flat boundary points.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("closed-form", help="invariants of the disc times B_n at the origin")
    c.add_argument("--dim", type=int, required=True, help="fiber dimension n")
    c.add_argument("--xi", nargs="+", help="tangent vector entries, e.g. 1 0.5j")
    c.set_defaults(func=_cmd_closed_form)

    s = sub.add_parser("sweep", help="run a sweep from a TOML config")
    s.add_argument("--config", required=True)
    s.set_defaults(func=_cmd_sweep)

    k = sub.add_parser("certify", help="inclusion certificates for every (log d, eps, delta)")
    k.add_argument("--config", required=True)
    k.set_defaults(func=_cmd_certify)

    v = sub.add_parser("verify", help="run the acceptance suites")
    v.add_argument("--level", choices=("fast", "full"), default="fast")
    v.add_argument("--json", help="write the JSON report here instead of stdout")
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FlatlabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REGIME


if __name__ == "__main__":
    sys.exit(main())
