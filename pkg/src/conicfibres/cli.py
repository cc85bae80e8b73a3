"""Command line entry point: ``conicfibres <command> [options]``.

Every option can also come from a flat ``key=value`` file given with
``--config``; flags win over the file.  Tabular output is CSV preceded by
``#`` comment lines echoing the resolved configuration and its hash.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from typing import Dict, List, Optional

from . import residues as res
from .fibrecount import DEFAULT_MAX_B, BudgetError, DyadicBox, count, dyadic_sieved_count
from .forms import BinaryQuadraticForm
from .localarith import conic_everywhere_soluble, conic_soluble_at, primes_upto, relevant_places
from .sieveanalysis import (
    SieveMode,
    densities_empirical,
    fit_exponent,
    large_sieve_rhs,
    log_grid,
    saving_function,
)

log = logging.getLogger("conicfibres")

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_MISMATCH = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# defaults per command; keys double as config-file names
DEFAULTS: Dict[str, Dict[str, object]] = {
    "count": {"f": None, "g": None, "B": None, "workers": None, "max_B": DEFAULT_MAX_B, "timing": True},
    "residues": {"f": None, "g": None, "pmax": 13, "pmax_limit": 97, "closed": "published",
                 "samples": 0, "seed": 0},
    "sieve": {"f": None, "g": None, "Lmin": 1000, "Lmax": 10**6, "points": 61,
              "mode": SieveMode.OMEGA_PRIME.value},
    "densities": {"f": None, "g": None, "pmax": 10**6},
    "solvable": {"F": None, "G": None},
    "dyadic": {"f": None, "g": None, "T1": 1, "T2": 1, "S1": 1, "S2": 1, "cutoff": None},
}
SHARED = {"out": None, "seed": 0, "workers": None}


def read_config(path: str) -> Dict[str, str]:
    cfg = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{n}: expected key=value")
            key, value = line.split("=", 1)
            cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _form(text, name):
    if text is None:
        raise ConfigError(f"missing --{name}")
    try:
        return BinaryQuadraticForm.parse(str(text))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _int(value, name):
    try:
        return int(str(value).replace("_", ""))
    except (TypeError, ValueError):
        raise ConfigError(f"--{name} expects an integer, got {value!r}") from None


def _int_list(value, name) -> List[int]:
    if value is None:
        raise ConfigError(f"missing --{name}")
    try:
        return [int(float(t)) if "e" in t.lower() else int(t) for t in str(value).split(",")]
    except ValueError:
        raise ConfigError(f"--{name} expects comma separated integers, got {value!r}") from None


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).lower() in ("1", "true", "yes", "on")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conicfibres", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, forms=True):
        if forms:
            p.add_argument("--f", help="form literal a,b,c")
            p.add_argument("--g", help="form literal a,b,c")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--workers", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--config", help="key=value file, overridden by flags")

    p = sub.add_parser("count", help="N, N*, thin-set counts on a grid of height bounds")
    common(p)
    p.add_argument("--B", help="comma separated ascending height bounds")
    p.add_argument("--max-B", dest="max_B", type=int)
    p.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                   help="write 0.000 in the seconds column")

    p = sub.add_parser("residues", help="brute force vs closed form |Omega| table")
    common(p)
    p.add_argument("--pmax", type=int)
    p.add_argument("--pmax-limit", dest="pmax_limit", type=int)
    p.add_argument("--closed", choices=["published", "exact"])
    p.add_argument("--samples", type=int, help="insolubility samples per prime")

    p = sub.add_parser("sieve", help="saving function F(L) and its exponent")
    common(p)
    p.add_argument("--Lmin", type=int)
    p.add_argument("--Lmax", type=int)
    p.add_argument("--points", type=int)
    p.add_argument("--mode", choices=[m.value for m in SieveMode])

    p = sub.add_parser("densities", help="empirical splitting densities")
    common(p)
    p.add_argument("--pmax", type=int)

    p = sub.add_parser("solvable", help="per-place solubility of F x^2 + G y^2 = z^2")
    common(p, forms=False)
    p.add_argument("--F", type=int)
    p.add_argument("--G", type=int)

    p = sub.add_parser("dyadic", help="sieved count in a dyadic box")
    common(p)
    for side in ("T1", "T2", "S1", "S2"):
        p.add_argument(f"--{side}", type=int)
    p.add_argument("--cutoff", type=float)
    return parser


def resolve(args: argparse.Namespace) -> Dict[str, object]:
    """Merge built-in defaults, the config file and explicit flags."""
    cfg: Dict[str, object] = dict(SHARED)
    cfg.update(DEFAULTS[args.command])
    if getattr(args, "config", None):
        try:
            file_cfg = read_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    return cfg


def _header(command: str, cfg: Dict[str, object]) -> str:
    items = [(k, cfg[k]) for k in sorted(cfg) if k != "out"]
    canon = "\n".join(f"{k}={v}" for k, v in items)
    digest = hashlib.sha256(f"{command}\n{canon}".encode()).hexdigest()
    lines = [f"# conicfibres {command}"]
    lines += [f"# {k}={v}" for k, v in items]
    lines.append(f"# input_sha256={digest}")
    return "\n".join(lines) + "\n"


def _emit(text: str, cfg: Dict[str, object]) -> None:
    if cfg.get("out"):
        with open(str(cfg["out"]), "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_count(cfg) -> int:
    f, g = _form(cfg["f"], "f"), _form(cfg["g"], "g")
    grid = _int_list(cfg["B"], "B")
    if grid != sorted(grid) or any(B < 1 for B in grid):
        raise ConfigError("--B must be ascending positive integers")
    report = count(f, g, grid, workers=_int(cfg["workers"], "workers"), max_B=_int(cfg["max_B"], "max_B"))
    log.info("memo hit rate %.4f (%d hits, %d misses)", report.hit_rate, report.memo_hits, report.memo_misses)
    print(f"memo hit rate {report.hit_rate:.4f} ({report.memo_hits} hits, "
          f"{report.memo_misses} misses)", file=sys.stderr)
    _emit(_header("count", cfg) + report.to_csv(timing=_bool(cfg["timing"])), cfg)
    return EXIT_OK


RESIDUE_HEADER = ("p,eta,omega_f_brute,omega_f_closed,omega_g_brute,omega_g_closed,"
                  "omega_fg_brute,omega_fg_closed,omega_p2_sup,match")


def residue_rows(f, g, pmax: int, closed: str = "published") -> List[str]:
    rows = []
    closed_fn = res.omega_closed if closed == "published" else res.omega_exact
    for p in primes_upto(pmax).tolist():
        if not res.is_good_prime(f, g, p):
            continue
        b = res.omega_brute(f, g, p)
        c = closed_fn(f, g, p)
        sup, _, _ = res.omega_p2_superset(f, g, p)
        match = int(b.triple() == c.triple())
        rows.append(f"{p},{b.eta},{b.omega_f},{c.omega_f},{b.omega_g},{c.omega_g},"
                    f"{b.omega_fg},{c.omega_fg},{sup},{match}")
    return rows


def cmd_residues(cfg) -> int:
    f, g = _form(cfg["f"], "f"), _form(cfg["g"], "g")
    pmax, limit = _int(cfg["pmax"], "pmax"), _int(cfg["pmax_limit"], "pmax_limit")
    if pmax > limit:
        raise BudgetError(f"pmax={pmax} exceeds the configured limit {limit}")
    if cfg["closed"] not in ("published", "exact"):
        raise ConfigError("--closed must be published or exact")
    rows = residue_rows(f, g, pmax, str(cfg["closed"]))
    ok = all(r.endswith(",1") for r in rows)
    samples = _int(cfg["samples"], "samples")
    if samples:
        for p in primes_upto(pmax).tolist():
            if not res.is_good_prime(f, g, p):
                continue
            rep = res.lemma41_sample(f, g, p, samples, seed=_int(cfg["seed"], "seed") + p)
            status = "vacuous" if rep.vacuous else f"{rep.passed}/{len(rep.samples)} insoluble"
            print(f"p={p}: {status}", file=sys.stderr)
            ok &= rep.ok
    _emit(_header("residues", cfg) + "\n".join([RESIDUE_HEADER] + rows) + "\n", cfg)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_sieve(cfg) -> int:
    f, g = _form(cfg["f"], "f"), _form(cfg["g"], "g")
    lo, hi = _int(cfg["Lmin"], "Lmin"), _int(cfg["Lmax"], "Lmax")
    try:
        mode = SieveMode(cfg["mode"])
    except ValueError:
        raise ConfigError(f"unknown mode {cfg['mode']!r}") from None
    if not 1 <= lo < hi:
        raise ConfigError("need 1 <= Lmin < Lmax")
    series = saving_function(f, g, log_grid(lo, hi, _int(cfg["points"], "points")), mode)
    fit = fit_exponent(series, (lo, hi))
    result = {"mode": mode.value, **fit.as_dict()}
    print(json.dumps(result))
    if cfg.get("out"):
        _emit(_header("sieve", cfg) + series.csv(), cfg)
    return EXIT_OK


def cmd_densities(cfg) -> int:
    f, g = _form(cfg["f"], "f"), _form(cfg["g"], "g")
    est = densities_empirical(f, g, _int(cfg["pmax"], "pmax"))
    _emit(_header("densities", cfg) + est.csv(), cfg)
    return EXIT_OK


def cmd_solvable(cfg) -> int:
    if cfg["F"] is None or cfg["G"] is None:
        raise ConfigError("solvable needs --F and --G")
    F, G = _int(cfg["F"], "F"), _int(cfg["G"], "G")
    verdict = conic_everywhere_soluble(F, G)
    places = {}
    if F and G:
        for v in relevant_places(F, G):
            places[str(v)] = conic_soluble_at(F, G, v)
    out = {
        "soluble": verdict.globally_soluble,
        "witness": list(verdict.witness) if verdict.witness else None,
        "places": places,
        "obstructed": [str(v) for v in verdict.obstructed_places],
    }
    _emit(json.dumps(out) + "\n", cfg)
    return EXIT_OK


def cmd_dyadic(cfg) -> int:
    f, g = _form(cfg["f"], "f"), _form(cfg["g"], "g")
    try:
        cutoff = None if cfg["cutoff"] in (None, "None") else float(cfg["cutoff"])
        box = DyadicBox(*(_int(cfg[k], k) for k in ("T1", "T2", "S1", "S2")), cutoff=cutoff)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    n = dyadic_sieved_count(f, g, box)
    L = max(2, int(box.sieve_limit))
    series = saving_function(f, g, [L])
    sides = [box.T1 + 1, box.T2 + 1, box.S1 + 1, box.S2 + 1]
    rhs = large_sieve_rhs(sides, L, series)
    out = {"box": [box.T1, box.T2, box.S1, box.S2], "cutoff": box.sieve_limit,
           "count": n, "F_L": series.F(L), "large_sieve_rhs": rhs, "ratio": n / rhs}
    _emit(json.dumps(out) + "\n", cfg)
    return EXIT_OK


COMMANDS = {
    "count": cmd_count,
    "residues": cmd_residues,
    "sieve": cmd_sieve,
    "densities": cmd_densities,
    "solvable": cmd_solvable,
    "dyadic": cmd_dyadic,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetError, OverflowError) as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
