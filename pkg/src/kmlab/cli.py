"""Command-line driver: ``kmlab <group> <command> [options]``.

Reports are JSON (sorted keys) on stdout; q-expansions can also be written
as CSV.  Exit codes: 0 when every assertion holds, 1 when one fails, 2 for
bad input, 3 when a resource limit or enumeration cap is hit.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import howe_km, ikeda, numlat, weil
from .errors import CapExceeded, InputError, KMLabError, ResourceLimit
from .gausspoly import PolyGaussian, fourier_transform, parity

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


def _default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, PolyGaussian):
        return obj.to_json()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _drop_timing(obj):
    if isinstance(obj, dict):
        return {k: _drop_timing(v) for k, v in obj.items() if k != "elapsed"}
    if isinstance(obj, list):
        return [_drop_timing(v) for v in obj]
    return obj


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _load_field(path: str) -> numlat.NumberFieldBasis:
    obj = _load_json(path)
    F = numlat.NumberField.from_json(obj)
    try:
        return numlat.NumberFieldBasis(F, obj.get("basis"))
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad basis ({exc})") from None


def _load_lattice(path: str) -> numlat.HermitianLattice:
    return numlat.HermitianLattice.from_json(_load_json(path))


def _parse_rationals(text: str) -> List[Fraction]:
    try:
        return [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse {text!r} as comma-separated rationals") from None


def _parse_tau(text: str) -> List[complex]:
    try:
        tau = [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse {text!r} as comma-separated complex numbers") from None
    if not tau:
        raise InputError("tau needs at least one entry")
    return tau


# ---------------------------------------------------------------------------
# command implementations; each returns (report, passed)


def cmd_verify_laguerre(args) -> Tuple[dict, bool]:
    lines = []
    ok = True
    for k in range(args.max_k + 1):
        eq = howe_km.laguerre_g(k, "closed") == howe_km.laguerre_g(k, "recursive")
        norm = howe_km.normalized_f_k(k) == howe_km.laguerre_g(k)
        ok = ok and eq and norm
        lines.append(f"k={k}: {'exact-equal' if eq and norm else 'MISMATCH'}")
    return {"check": "laguerre", "max_k": args.max_k, "lines": lines}, ok


def cmd_verify_fab(args) -> Tuple[dict, bool]:
    rows = []
    for a in range(args.max + 1):
        for b in range(args.max + 1):
            if a != b:
                r = ikeda.verify_Fab_vanishing(a, b)
                rows.append(r)
    ok = all(r["zero"] and r["gap_witness"] for r in rows)
    return {"check": "fab", "max": args.max, "pairs": len(rows), "results": rows}, ok


def cmd_verify_fk(args) -> Tuple[dict, bool]:
    rows = [ikeda.verify_fk_vanishing(k) for k in range(1, args.max_k + 1)]
    ok = all(r["zero"] and r["binomial_zero"] and r["expansion_matches_binomial"] for r in rows)
    return {"check": "fk", "max_k": args.max_k, "results": rows}, ok


def cmd_verify_ikeda(args) -> Tuple[dict, bool]:
    rep = ikeda.verify_ikeda_kills(args.p, args.q, args.budget)
    out = rep if args.certificate else ikeda.zero_report(rep)
    out = dict(out, unclassified=rep["unclassified"])
    return out, rep["result"] == "zero" and rep["unclassified"] == 0


def cmd_verify_signs(args) -> Tuple[dict, bool]:
    p, q = args.p, args.q
    howe_km.check_budget(p, q, args.budget)
    expected = howe_km.lemma_sign(p, q)
    perms = howe_km.permutations(p)
    n_total = len(perms) ** (2 * q)
    if n_total <= args.exhaustive_limit:
        pairs = list(howe_km.iter_sigma_pairs(p, q))
        mode = "exhaustive"
    else:
        rng = random.Random(args.seed)
        pairs = [(tuple(rng.choice(perms) for _ in range(q)),
                  tuple(rng.choice(perms) for _ in range(q))) for _ in range(args.samples)]
        mode = "random"
    constant = 0
    character = 0
    plus = minus = 0
    for s1, s2 in pairs:
        s = howe_km.sort_sign(p, q, s1, s2)
        plus += s > 0
        minus += s < 0
        constant += s == expected
        character += s == howe_km.sign_character_prediction(p, q, s1, s2)
    rep = {"check": "signs", "case": [p, q], "mode": mode, "checked": len(pairs),
           "claimed_constant_sign": expected, "matches_constant": constant,
           "matches_sign_character": character, "plus": plus, "minus": minus,
           "constant_sign_holds": constant == len(pairs),
           "sign_character_holds": character == len(pairs)}
    return rep, rep["constant_sign_holds"]


def _monomials(max_degree: int, num_vars: int = 1):
    for a in range(max_degree + 1):
        for b in range(max_degree + 1 - a):
            yield PolyGaussian.monomial(num_vars, [a, b])


def cmd_verify_fourier(args) -> Tuple[dict, bool]:
    mono = list(_monomials(args.max_degree))
    inversion = all(fourier_transform(fourier_transform(f, 0), 0) == parity(f) for f in mono)
    mixed = ikeda.mixed_model_identity(args.samples, args.seed)
    rep = {"check": "fourier", "monomials": len(mono), "inversion_is_parity": inversion,
           "mixed_model_trials": mixed,
           "mixed_model_identity": all(r["equal"] for r in mixed)}
    return rep, inversion and rep["mixed_model_identity"]


def cmd_verify_trace(args) -> Tuple[dict, bool]:
    FB = _load_field(args.field)
    E0 = numlat.ring_from_name(args.ring)
    L0 = numlat.HermitianLattice(E0.disc, [[(1, 0)]])
    if args.lattice:
        L0 = _load_lattice(args.lattice)
    rows = numlat.random_trace_samples(FB, L0, args.samples, args.seed, pairing=args.pairing)
    matches = sum(r["equal"] for r in rows)
    rep = {"check": "trace", "disc": E0.disc, "degree": FB.degree, "pairing": args.pairing,
           "samples": args.samples, "matches": matches,
           "dual_basis_check": FB.dual_check()}
    return rep, matches == args.samples and rep["dual_basis_check"]


def cmd_verify_fiber(args) -> Tuple[dict, bool]:
    rows = numlat.fiber_trials(args.trials, args.seed)
    return ({"check": "fiber", "trials": rows, "all_bijective": all(r["bijection"] for r in rows)},
            all(r["bijection"] for r in rows))


def cmd_km_expand(args) -> Tuple[dict, bool]:
    howe_km.check_budget(args.p, args.q, args.budget)
    form = howe_km.km_form(args.p, args.q)
    comp = form == howe_km.km_form_expansion(args.p, args.q, "composition")
    literal = form == howe_km.km_form_expansion(args.p, args.q, "literal")
    extraction = howe_km.extraction_check(args.p, args.q)
    rep = {"check": "km-expand", "case": [args.p, args.q], "form_words": len(form.terms),
           "equals_composition_expansion": comp, "equals_literal_pairing": literal,
           "extraction": extraction}
    if args.dump:
        rep["form"] = form.to_json()
    return rep, comp and extraction["equal"]


def cmd_lattice_theta(args) -> Tuple[dict, bool]:
    L = _load_lattice(args.lattice)
    counts = numlat.theta_coefficients(L, Fraction(args.bound))
    return {"check": "theta", "disc": L.E0.disc, "rank": L.rank,
            "counts": {str(k): v for k, v in counts.items()}}, True


def cmd_lattice_grouping(args) -> Tuple[dict, bool]:
    FB = _load_field(args.field)
    L = _load_lattice(args.lattice)
    if args.b == "all":
        bs = numlat.totally_positive_elements(FB, int(args.max_trace))
    else:
        bs = [tuple(_parse_rationals(args.b))]
        if len(bs[0]) != FB.degree:
            raise InputError(f"b needs {FB.degree} coordinates in the integral basis")
    rows = [numlat.beta_grouping_check(FB, L, b, args.bound) for b in bs]
    return {"check": "grouping", "results": rows}, all(r["equal"] for r in rows)


def cmd_series_assemble(args) -> Tuple[dict, bool]:
    table = weil.VolumeTable.load(args.volumes)
    tau = _parse_tau(args.tau)
    FB = _load_field(args.field) if args.field else None
    try:
        c0 = complex(args.c0)
    except ValueError:
        raise InputError(f"cannot parse c0 {args.c0!r}") from None
    rows = weil.q_expansion(table, tau, args.m, FB)
    total = weil.generating_series(table, tau, args.m, c0, FB)
    if args.format == "csv":
        return {"csv": weil.q_expansion_csv(rows)}, True
    cancel = weil.prefactor_identity(len(tau), Fraction(1), args.m)
    rep = {"check": "series", "tau": tau, "m": args.m, "c0": c0, "value": total,
           "terms": [{"b": list(b), "value": v} for b, v in rows],
           "prefactor_cancels": cancel}
    return rep, cancel


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kmlab", description=__doc__.splitlines()[0])
    parser.add_argument("--budget", type=int, default=None,
                        help="term budget for permutation sums (default: $KMLAB_TERM_BUDGET or 5e6)")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--timing", action="store_true", help="keep wall-clock fields in reports")
    groups = parser.add_subparsers(dest="group", required=True)

    def add(sub, name, func: Callable, help_text: str):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    verify = groups.add_parser("verify", help="exact verification families").add_subparsers(
        dest="command", required=True)
    p = add(verify, "laguerre", cmd_verify_laguerre,
            "Anchor: closed Laguerre form of g_k versus its two-term recursion, and the "
            "normalized f_k.")
    p.add_argument("--max-k", type=int, default=12)
    p = add(verify, "fab", cmd_verify_fab,
            "Anchor: vanishing of the Gaussian integral of F_{a,b} for a != b, with the "
            "exponent-gap witness.")
    p.add_argument("--max", type=int, default=6)
    p = add(verify, "fk", cmd_verify_fk,
            "Anchor: vanishing of the Gaussian integral of f_k and the alternating binomial sum.")
    p.add_argument("--max-k", type=int, default=10)
    p = add(verify, "ikeda", cmd_verify_ikeda,
            "Anchor: the Ikeda map kills the Kudla-Millson Schwartz function; Case 1/Case 2 "
            "certificate.")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--certificate", action="store_true", help="include the per-term certificate")
    p = add(verify, "signs", cmd_verify_signs,
            "Anchor: sign of sorting the wedge word of each (sigma, sigma') term into "
            "omega ^ conj(omega).")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exhaustive-limit", type=int, default=50000)
    p = add(verify, "fourier", cmd_verify_fourier,
            "Anchor: Fourier inversion (F^2 = parity) and the mixed-model slice identity "
            "phi_hat(v0, 0) = Ik(phi)(v0).")
    p.add_argument("--max-degree", type=int, default=6)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p = add(verify, "trace", cmd_verify_trace,
            "Anchor: trace identity tr_{E/E0}(Q(xi, eta) b) = Tr(Q(x, y) B) behind the "
            "intertwining of the two Weil representations.")
    p.add_argument("--field", required=True)
    p.add_argument("--ring", default="Q(i)")
    p.add_argument("--lattice", default=None)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairing", choices=["dual", "integral", "mixed"], default="dual")
    p = add(verify, "fiber", cmd_verify_fiber,
            "Anchor: double-coset decomposition of the fiber product over Gamma \\ D.")
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)

    km = groups.add_parser("km", help="Kudla-Millson forms").add_subparsers(
        dest="command", required=True)
    p = add(km, "expand", cmd_km_expand,
            "Anchor: D+ D+bar phi_0 against its multi-index expansion and the top-wedge "
            "extraction of phi_KM.")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--dump", action="store_true", help="include the full form")

    lat = groups.add_parser("lattice", help="hermitian lattices").add_subparsers(
        dest="command", required=True)
    p = add(lat, "theta", cmd_lattice_theta,
            "Anchor: representation numbers #{xi in L : Q(xi, xi) = b}.")
    p.add_argument("--lattice", required=True)
    p.add_argument("--bound", default="10")
    p = add(lat, "grouping", cmd_lattice_grouping,
            "Anchor: I_b(L) as the disjoint union of I_beta(L0) over t(r) beta r = b.")
    p.add_argument("--field", required=True)
    p.add_argument("--lattice", required=True)
    p.add_argument("--b", required=True, help='coordinates in the integral basis, or "all"')
    p.add_argument("--bound", default=None, help="cap on the diagonal entries of beta")
    p.add_argument("--max-trace", default="20", help='trace bound when --b is "all"')

    series = groups.add_parser("series", help="generating series").add_subparsers(
        dest="command", required=True)
    p = add(series, "assemble", cmd_series_assemble,
            "Anchor: assembly of I_b(g_tau; phi_KM) from cycle volumes and the prefactor "
            "relation with F(tau).")
    p.add_argument("--volumes", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--c0", default="0")
    p.add_argument("--field", default=None)
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        report, passed = args.func(args)
        code = EXIT_OK if passed else EXIT_FAIL
    except (ResourceLimit, CapExceeded) as exc:
        report, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_RESOURCE
    except KMLabError as exc:
        report, code = {"error": type(exc).__name__, "message": str(exc)}, EXIT_INPUT
    if "csv" in report and code == EXIT_OK:
        stdout.write(report["csv"])
        return code
    if not args.timing:
        report = _drop_timing(report)
    report["status"] = {EXIT_OK: "pass", EXIT_FAIL: "fail", EXIT_INPUT: "input-error",
                        EXIT_RESOURCE: "resource-limit"}[code]
    stdout.write(json.dumps(report, sort_keys=True, indent=2, default=_default) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
