"""Command-line interface.

::

    quasicompact {drift,spectrum,rate,ifs,verify} --config model.json [--json] [--csv PATH]

Exit codes: 0 success, 1 audit failure, 2 infeasible model, 3 unsupported
analysis, 64 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import drift, ifs, rates, reports, spectral, verify
from .errors import (ConvergenceError, DomainError, InfeasibleError, KernelError, TruncationError,
                     UnsupportedModelError)
from .kernels import SUBSTOCHASTIC, GridKernel, Kernel, model_from_config
from .weights import WeightFn

EXIT_OK = 0
EXIT_AUDIT_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_UNSUPPORTED = 3
EXIT_USAGE = 64

COMMANDS = {
    "drift": "weak-drift rate L and a minorization certificate",
    "spectrum": "spectrum of the weighted truncation and the spectral rate",
    "rate": "closed-form convergence rate",
    "ifs": "contraction constants of the iterated-function representation",
    "verify": "audit analytic bounds against exact or simulated decay",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasicompact", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in COMMANDS.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", required=True, help="JSON file with 'model' and 'params'")
        sp.add_argument("--json", action="store_true", help="print the full JSON report")
        sp.add_argument("--csv", metavar="PATH", help="write curves (decay, ell_N) as CSV")
        sp.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--gamma", type=float, default=None, help="geometric weight; default chosen automatically")
        sp.add_argument("-M", "--truncation", dest="M", type=int, default=None)
        sp.add_argument("--n-max", type=int, default=None)
        sp.add_argument("--negative-control", action="store_true",
                        help="halve the certified rate; the audit is then expected to fail")
    return parser


def load_config(path: str, args) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(cfg, dict) or "model" not in cfg:
        raise DomainError("config must be a JSON object with a 'model' field")
    cfg.setdefault("params", {})
    if args.gamma is not None:
        cfg.setdefault("weight", {})["gamma"] = args.gamma
    if args.M is not None:
        cfg.setdefault("truncation", {})["M"] = args.M
    if args.n_max is not None:
        cfg["n_max"] = args.n_max
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.negative_control:
        cfg["negative_control"] = True
    cfg.setdefault("seed", 0)
    cfg.pop("threads", None)
    return cfg


def _countable(bundle) -> Kernel:
    if not isinstance(bundle.kernel, Kernel):
        raise UnsupportedModelError(f"model {bundle.config['model']!r} has no countable-state kernel")
    return bundle.kernel


def choose_weight(kernel: Kernel, cfg: dict) -> tuple[WeightFn, dict]:
    """Geometric weight from the config, or the minimiser of the increment MGF."""
    gamma = cfg.get("weight", {}).get("gamma", "auto")
    if gamma != "auto":
        return WeightFn.geometric(float(gamma)), {"gamma": float(gamma), "source": "config"}
    law = kernel.limit_increments
    if law is None:
        raise DomainError("interior rows are not translation invariant; set weight.gamma")
    try:
        feas = drift.wd_feasibility_test(law)
    except DomainError as exc:
        raise InfeasibleError(str(exc)) from exc
    if not feas.feasible:
        raise InfeasibleError(
            f"phi^({feas.order})(1) = {feas.value:.6g} > 0: no geometric weight satisfies weak drift")
    m = drift.minimize_phi(law)
    return WeightFn.geometric(m.gamma), {"gamma": m.gamma, "phi_min": m.value, "source": "auto",
                                         "feasibility_order": feas.order}


# ---------------------------------------------------------------------------


def cmd_drift(bundle, cfg, threads):
    kernel = _countable(bundle)
    V, winfo = choose_weight(kernel, cfg)
    M = int(cfg.get("truncation", {}).get("M", 2000))
    rep = drift.ell_and_L(kernel, V, N_max=int(cfg.get("n_max", 20)), M=M,
                          tail_start=cfg.get("tail_start"))
    result = {"weight": winfo, "drift": rep.to_dict()}
    small = cfg.get("small_set", list(range(max(1, len(kernel.boundary_rows)))))
    try:
        cert = drift.extract_minorization(kernel, small, V, M=min(M, 400))
        result["minorization"] = cert.to_dict()
    except (InfeasibleError, DomainError) as exc:
        result["minorization"] = {"error": str(exc)}
    csv = "N,ell_N,ell_N_root\n" + "".join(
        f"{k + 1},{e:.17g},{e ** (1.0 / (k + 1)):.17g}\n" for k, e in enumerate(rep.ell))
    lines = [f"weight gamma = {V.gamma:.12g}", f"L = {rep.L:.12g} (N* = {rep.n_star})",
             f"d = {rep.d_constant:.6g}"]
    code = EXIT_OK if rep.feasible else EXIT_INFEASIBLE
    if not rep.feasible:
        lines.append("L >= 1: weak drift fails for this weight")
    return result, code, csv, lines


def cmd_spectrum(bundle, cfg, threads):
    kernel = bundle.kernel
    policy = cfg.get("truncation", {}).get("policy", SUBSTOCHASTIC)
    if isinstance(kernel, GridKernel):
        V = WeightFn.polynomial(float(cfg.get("a", 1.0)))
        T = spectral.build_truncation(kernel, V)
        r0 = float(cfg.get("r0", 0.0))
        winfo = V.to_dict()
        conv = None
    else:
        kernel = _countable(bundle)
        V, winfo = choose_weight(kernel, cfg)
        M = int(cfg.get("truncation", {}).get("M", 600))
        if "r0" in cfg:
            r0 = float(cfg["r0"])
        else:
            r0 = drift.ell_and_L(kernel, V, N_max=10, M=max(2 * M, 400)).L + 0.01
        T = spectral.build_truncation(kernel, V, M, policy)
        conv = spectral.truncation_convergence(kernel, V, policy, [M // 2, M], r0, workers=threads or 1)
    spec = spectral.full_spectrum(T)
    rep = spectral.rate_from_spectrum(spec.eigenvalues, r0)
    result = {"weight": winfo, "policy": policy, "spectrum": rep.to_dict(), "convergence": conv}
    lines = [f"r0 = {r0:.6g}", f"rho (spectral) = {rep.rho_estimate:.12g}",
             f"eigenvalue 1 simple and alone on the unit circle: {rep.simple_unit}"]
    return result, EXIT_OK, None, lines


def _bd_params(params):
    p, q, r = (params.get(k) for k in ("p", "q", "r"))
    if not all(isinstance(x, (int, float)) for x in (p, q, r)):
        raise UnsupportedModelError("closed form needs constant p, q, r")
    if "a" in params:
        a = params["a"]
    else:
        b = params.get("boundary")
        if isinstance(b, dict):
            b = [b.get(str(k), b.get(k, 0.0)) for k in range(max(int(k) for k in b) + 1)]
        if not b or len(b) != 2:
            raise UnsupportedModelError("closed form needs the boundary row (a, 1 - a)")
        a = b[0]
    return float(p), float(q), float(r), float(a)


def rate_certificate(bundle, cfg) -> rates.RateCertificate:
    name = cfg["model"]
    params = cfg["params"]
    if name == "birth_death":
        p, q, r, a = _bd_params(params)
        if p <= q:
            raise InfeasibleError("p <= q: the chain has no geometric drift towards 0")
        res = rates.birth_death_rate(p, q, r, a)
        consts = res.to_dict()
        if r == 0.0 and a != p:
            consts["rho_r_zero_formula"] = rates.birth_death_rate_r_zero(p, a)
        return rates.RateCertificate(name, params, res.rho, consts, f"birth_death.{res.case_label}")
    if name == "mm1":
        rho, g = rates.mm1_rate(params["beta"], params["mu"], params["h"])
        return rates.RateCertificate(name, params, rho, {"gamma_hat": g}, "mm1.uniformized")
    if name == "unbounded_rw":
        gamma = cfg.get("weight", {}).get("gamma")
        if gamma in (None, "auto"):
            raise DomainError("reset walk bound needs weight.gamma in (1, 1/q)")
        rho = rates.unbounded_rw_rate_bound(params["p"], float(gamma))
        return rates.RateCertificate(name, params, rho, {"gamma": float(gamma)}, "reset_walk.upper_bound")
    if name in ("lindley", "geometric_mh"):
        cert = ifs.lindley_certificate(bundle)
        consts = {"gamma": cert.gamma, "c1": cert.c1, "c_rho": cert.c_rho, "tail_estimate": cert.tail_estimate}
        if name == "geometric_mh":
            g, k, c = ifs.geometric_mh_constants(params["p"])
            consts.update({"closed_form_kappa1": k, "closed_form_c_rho": c})
        return rates.RateCertificate(name, params, cert.kappa1, consts, "reflected_walk.explicit")
    if name == "contracting_normals":
        theta = float(params["theta"])
        a = float(cfg.get("a", 1.0))
        c = ifs.ar_constants(theta, a, math.sqrt(1.0 - theta * theta), xi=bundle.ifs.closed_forms["xi"].get(a))
        return rates.RateCertificate(name, params, abs(theta), c.to_dict(), "gaussian_ar.explicit")
    raise UnsupportedModelError(f"no closed-form rate for {name!r}; try the spectrum command")


def cmd_rate(bundle, cfg, threads):
    cert = rate_certificate(bundle, cfg)
    return cert.to_dict(), EXIT_OK, None, [f"rho = {cert.rho:.12g} ({cert.case})"]


def cmd_ifs(bundle, cfg, threads):
    model = bundle.ifs
    if model is None:
        raise UnsupportedModelError(f"model {cfg['model']!r} has no iterated-function representation")
    a = float(cfg.get("a", 1.0))
    seed = int(cfg["seed"])
    est = ifs.contraction_estimate(model, a, seed=seed)
    result = {"contraction": est.to_dict()}
    lines = [f"kappa_1 = {est.kappa1:.12g}", f"kappa_hat = {est.kappa_hat:.12g} ({est.method})"]
    name = cfg["model"]
    if name in ("lindley", "geometric_mh"):
        cert = ifs.lindley_certificate(bundle)
        result["certificate"] = cert.to_dict()
        lines.append(f"c1 = {cert.c1:.12g}, c_rho = {cert.c_rho:.12g}")
    elif name in ("contracting_normals", "ar1"):
        theta = model.closed_forms["theta"]
        sd = model.closed_forms["noise_std"]
        delta = float(cfg.get("delta", (1.0 + abs(theta) ** a) / 2.0))
        xb = ifs.xi_bound(model, a, delta, seed=seed)
        result["xi"] = xb.to_dict()
        if sd > 0:
            known = model.closed_forms.get("xi", {}).get(a)
            result["ar_constants"] = ifs.ar_constants(theta, a, sd, xi=known).to_dict()
        lines.append(f"xi <= {xb.xi:.6g}")
    elif name == "multiplicative_uniform":
        chk = ifs.coupling_inequality_check(model, 1.0, int(cfg.get("n_max", 20)), 1.0, 0.0)
        result["coupling"] = {"max_ratio": chk.audit.max_ratio, "exact": chk.exact}
    return result, EXIT_OK, None, lines


def _verify_birth_death(kernel, cfg, rho, gamma, label):
    neg = bool(cfg.get("negative_control"))
    claimed = rho * (0.5 if neg else 1.0)
    tol_spec = float(cfg.get("tolerances", {}).get("spectrum", 2e-3))
    tol_fit = float(cfg.get("tolerances", {}).get("decay_fit", 0.03))
    V = WeightFn.geometric(gamma)
    M = int(cfg.get("truncation", {}).get("M", 600))
    ess_guess = drift.ell_and_L(kernel, V, N_max=10, M=max(2 * M, 400)).L
    T = spectral.build_truncation(kernel, V, M)
    spec = spectral.rate_from_spectrum(spectral.full_spectrum(T).eigenvalues, ess_guess - 0.05)
    n_max = int(cfg.get("n_max", 200 if label == "mm1" else 120))
    f = np.zeros(100 + n_max + 11)
    f[0] = 1.0
    curve = verify.decay_curve(kernel, V, f, n_max, M=f.size - 1, window=(0, 100))
    spec_ok = abs(spec.rho_estimate - claimed) <= tol_spec
    fit_ok = abs(curve.fitted_rho - claimed) <= tol_fit
    result = {"claimed_rho": claimed, "spectral_rho": spec.rho_estimate, "fitted_rho": curve.fitted_rho,
              "fit_r2": curve.fit_r2, "spectrum_agrees": spec_ok, "decay_agrees": fit_ok,
              "tolerances": {"spectrum": tol_spec, "decay_fit": tol_fit}, "negative_control": neg}
    return result, spec_ok and fit_ok, curve


def cmd_verify(bundle, cfg, threads):
    name = cfg["model"]
    neg = bool(cfg.get("negative_control"))
    curve = None
    if name in ("lindley", "geometric_mh"):
        cert = ifs.lindley_certificate(bundle)
        audits = verify.audit_lindley(bundle.kernel, cert, n_max=int(cfg.get("n_max", 60)),
                                      rate_scale=0.5 if neg else 1.0)
        result = {k: v.to_dict() for k, v in audits.items()}
        passed = all(a.passed for a in audits.values())
        lines = [f"{k}: max ratio {v.max_ratio:.6g} ({'pass' if v.passed else 'FAIL'})" for k, v in audits.items()]
    elif name == "contracting_normals":
        theta = float(cfg["params"]["theta"])
        c = ifs.ar_constants(theta, 1.0, math.sqrt(1.0 - theta * theta))
        rate = abs(theta) * (0.5 if neg else 1.0)
        audit = verify.audit_tv_grid(bundle.kernel, c.tv_prefactor, rate, cfg.get("x_list", [0.0, 1.0, 3.0]),
                                     int(cfg.get("n_max", 40)))
        result = {"tv": audit.to_dict(), "prefactor": c.tv_prefactor, "rate": rate}
        passed = audit.passed
        lines = [f"tv: max ratio {audit.max_ratio:.6g} ({'pass' if passed else 'FAIL'})"]
    elif name in ("birth_death", "mm1"):
        cert = rate_certificate(bundle, cfg)
        gamma = cert.constants["gamma_hat"]
        result, passed, curve = _verify_birth_death(_countable(bundle), cfg, cert.rho, gamma, name)
        result["certificate"] = cert.to_dict()
        lines = [f"formula {result['claimed_rho']:.10g}, spectrum {result['spectral_rho']:.10g}, "
                 f"decay fit {result['fitted_rho']:.6g} ({'pass' if passed else 'FAIL'})"]
    else:
        raise UnsupportedModelError(f"no audit implemented for {name!r}")
    result["passed"] = passed
    csv = curve.to_csv() if curve is not None else None
    return result, EXIT_OK if passed else EXIT_AUDIT_FAILED, csv, lines


HANDLERS = {"drift": cmd_drift, "spectrum": cmd_spectrum, "rate": cmd_rate, "ifs": cmd_ifs, "verify": cmd_verify}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse exits on --help and on usage errors
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, args)
        bundle = model_from_config(cfg)
        result, code, csv, lines = HANDLERS[args.command](bundle, cfg, args.threads)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except UnsupportedModelError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (DomainError, KernelError, TruncationError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AUDIT_FAILED
    report = reports.envelope(args.command, {k: v for k, v in cfg.items()}, result, cfg.get("seed"))
    if args.json:
        stdout.write(reports.dumps(report))
    else:
        stdout.write("\n".join([f"{args.command}: {cfg['model']}"] + lines) + "\n")
    if args.csv and csv is not None:
        with open(args.csv, "w") as fh:
            fh.write(csv)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
