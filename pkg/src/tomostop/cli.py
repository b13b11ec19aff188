"""Command-line front end: ``tomostop {simulate,fit,ci,report}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .confidence import StoppingContext, state_region_report
from .constrained import expectation_ci
from .errors import TomographyError, ValidationError
from .homodyne import sample_homodyne, scenario_truth
from .optimizer import StopSpec, maximize
from .quantum import make_density, mean_photon_number, purity

CONTEXTS = {"point": "point_estimate", "region": "state_region", "ci": "expectation_ci"}


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stop(args, dim: int, context: str) -> StopSpec:
    if args.r_threshold is not None:
        thr = args.r_threshold
    else:
        ctx = StoppingContext(CONTEXTS[context], dim, args.s, args.fraction)
        thr = ctx.r_threshold()
    return StopSpec(r_threshold=thr, max_iters=args.max_iters)


def _load_dataset(path):
    return io.dataset_from_json(io.read_json(path))


def cmd_simulate(args) -> int:
    obj = io.read_json(args.config)
    if args.seed is not None:
        obj["seed"] = args.seed
    sc = io.scenario_from_json(obj)
    truth = scenario_truth(sc)
    data = sample_homodyne(sc, truth)
    out = _out_dir(args)
    io.write_json(io.dataset_to_json(data), out / "dataset.json")
    summary = {"purity": purity(truth), "mean_photon_number": mean_photon_number(truth)}
    io.write_json({"scenario": io.scenario_to_json(sc), **summary, "state": io.matrix_to_json(truth)},
                  out / "truth.json")
    print(f"wrote {len(data)} records to {out / 'dataset.json'}")
    print(f"truth: dim={sc.dim} purity={summary['purity']:.6f} "
          f"mean_photon_number={summary['mean_photon_number']:.6f}")
    return 0


def cmd_fit(args) -> int:
    data = _load_dataset(args.config)
    stop = _stop(args, data.dim, args.context)
    fit = maximize(data, args.algo, stop)
    out = _out_dir(args)
    io.write_trace_csv(fit, out / "trace.csv")
    io.write_json(fit_json := io.fit_to_json(fit), out / "fit.json")
    last = fit.trace[-1]
    print(f"stop_reason={fit.stop_reason.value} iterations={fit.iterations} "
          f"r_threshold={stop.r_threshold:.6g}")
    print(f"final r_k={fit.final_r:.6g} loglik={fit_json['loglik']:.10g} "
          f"trace_dist_at_stop={last.trace_dist_prev:.3g}")
    if args.reference_loglik:
        ref = io.read_reference_loglik(args.reference_loglik)
        with open(out / "gap.csv", "w") as fh:
            fh.write("k,gap,r_k\n")
            for r in fit.trace:
                fh.write(f"{r.k},{ref - r.loglik!r},{r.r_k!r}\n")
        print(f"final gap L_ref - L = {ref - fit.loglik:.6g} (written to {out / 'gap.csv'})")
    return 0


def cmd_ci(args) -> int:
    if not args.observable:
        raise ValidationError("ci requires --observable PATH")
    data = _load_dataset(args.config)
    a = io.load_observable(args.observable)
    stop = _stop(args, data.dim, "ci")
    fit = maximize(data, args.algo, stop)
    ci = expectation_ci(data, a, args.s, fit, stop, algo=args.algo)
    out = _out_dir(args)
    io.write_json(io.ci_to_json(ci), out / "ci.json")
    print(f"interval [{ci.f_lo:.6g}, {ci.f_hi:.6g}]  s={ci.s:g}  t={ci.t:.4f}  r(rho_k)={fit.final_r:.3g}")
    print(f"{'end':>5} {'lambda':>12} {'f':>12} {'D_lb':>10} {'D_ub':>10} {'p_lb':>8} {'p_ub':>8}")
    for name, e in zip(("lo", "hi"), ci.endpoints):
        print(f"{name:>5} {e.lam:12.6g} {e.f:12.6g} {e.D_lb:10.4f} {e.D_ub:10.4f} "
              f"{e.pvalue_lb:8.4f} {e.pvalue_ub:8.4f}")
    return 0


def cmd_report(args) -> int:
    obj = io.read_json(args.config)
    if "state" in obj:
        make_density(io.matrix_from_json(obj["state"]))
    dim = int(obj["dim"])
    r_k = max(float(obj["final_r"]), 0.0)
    rep = state_region_report(dim, args.s, r_k)
    if args.out:
        io.write_json({"dim": dim, "r_k": r_k, **rep.to_dict()}, _out_dir(args) / "region.json")
    print(f"{'dim':>6} {'s':>8} {'r_k':>12} {'t':>10} {'worst p':>10}")
    print(f"{dim:>6} {rep.nominal_pvalue:8.4g} {r_k:12.6g} {rep.threshold_t:10.4f} {rep.worst_case_pvalue:10.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tomostop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", required=needs_out, metavar="DIR")

    def fitting(p, default_s):
        p.add_argument("--algo", choices=["rhor", "gradient"], default="rhor")
        p.add_argument("--r-threshold", type=float, default=None)
        p.add_argument("--s", type=float, default=default_s)
        p.add_argument("--fraction", type=float, default=0.2,
                       help="fraction of the chi-squared standard deviation for region/ci contexts")
        p.add_argument("--max-iters", type=int, default=10_000)

    p = sub.add_parser("simulate", help="simulate homodyne data for a scenario")
    common(p)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="maximize the likelihood with the r_k stopping rule")
    common(p)
    fitting(p, 0.5)
    p.add_argument("--context", choices=sorted(CONTEXTS), default="point")
    p.add_argument("--reference-loglik", metavar="PATH", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("ci", help="confidence interval for Tr(rho A)")
    common(p)
    fitting(p, 0.32)
    p.add_argument("--observable", metavar="PATH", default=None)
    p.set_defaults(func=cmd_ci)

    p = sub.add_parser("report", help="state confidence-region report for a fit")
    common(p, needs_out=False)
    p.add_argument("--s", type=float, default=0.32)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TomographyError as exc:
        code, msg = exc.code, str(exc)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        code, msg = type(exc).__name__, str(exc)
    print(json.dumps({"error": code, "message": msg}), file=sys.stderr)
    return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
