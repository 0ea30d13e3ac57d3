"""Command-line front end.

Each subcommand runs one experiment and emits CSV plus a JSON mirror when an
output prefix is given.  Exit codes for ``decide``: 0 uniform, 2 atomic,
3 nonconvergent, 1 any error.  The prime cache directory comes from
EQLAB_CACHE.  All floats serialize with 17 significant digits.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import benford as bf
from . import equidist as eq
from . import ergodic as er
from . import lefn
from . import primes as pr
from . import report
from .weights import make_scheme

DENSITY_TEXT = {"natural": "x", "log": "log(x)", "loglog": "log(log(x))"}


def _table() -> eq.PrimeTable:
    return eq.PrimeTable(cache_dir=os.environ.get("EQLAB_CACHE"))


def _checkpoints(text: str | None, N: int | None) -> list[int]:
    if text:
        return [int(float(v)) for v in text.split(",")]
    if N:
        ladder = [10**k for k in range(3, 8) if 10**k < N]
        return ladder + [N]
    raise click.UsageError("need --N or --checkpoints")


def _emit(out: str | None, name: str, rows: list[dict], payload: dict, config: dict) -> None:
    if not out:
        return
    digest = report.write_csv(f"{out}/{name}.csv", rows, config)
    report.write_json(f"{out}/{name}.json", payload, config)
    click.echo(f"wrote {out}/{name}.csv ({digest})")


@click.group()
def main():
    """Weighted equidistribution experiments."""


@main.command()
@click.argument("u")
@click.option("--weight", "-w", required=True, help="normalizer W in the expression grammar")
@click.option("--json", "as_json", is_flag=True, help="print the verdict as JSON")
def decide(u, weight, as_json):
    """Classify the weighted distribution of u(n) mod 1."""
    try:
        verdict = lefn.decide_ud(lefn.parse(u), lefn.parse(weight))
    except lefn.LefnError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    payload = {
        "u": u,
        "weight": weight,
        "kind": verdict.kind,
        "poly_part": lefn.to_text(verdict.P),
        "residue": lefn.to_text(verdict.r),
    }
    if verdict.kind == "atomic":
        payload.update(period=verdict.period, atoms=list(verdict.atoms),
                       weights=[str(w) for w in verdict.weights])
    if verdict.kind == "nonconvergent":
        payload["a"] = verdict.a
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(f"{verdict.kind}  (u = {payload['poly_part']} + {payload['residue']})")
        if verdict.kind == "atomic":
            click.echo(f"  period {verdict.period}, atoms {verdict.atoms}")
        if verdict.kind == "nonconvergent":
            click.echo(f"  a = lim r/log W = {verdict.a}")
    sys.exit({"uniform": 0, "atomic": 2, "nonconvergent": 3}[verdict.kind])


def _spec_options(fn):
    fn = click.option("--seq", required=True, help="sequence expression")(fn)
    fn = click.option("--stream", default="naturals",
                      help="naturals | ap:a,d | primes | approimes:a,d | nlogn | invg")(fn)
    fn = click.option("--floor", "floor_mode", default="none",
                      type=click.Choice(["none", "floor", "nearest"]))(fn)
    fn = click.option("--weight", "-w", default="x", help="normalizer W")(fn)
    fn = click.option("--out", default=None, help="output directory for CSV/JSON")(fn)
    fn = click.option("--threads", default=1, type=int)(fn)
    fn = click.option("--precision", default="strict", type=click.Choice(["fast", "strict"]))(fn)
    return fn


@main.command()
@_spec_options
@click.option("--h", "freqs", default="1", help="comma-separated frequencies")
@click.option("--N", "n_max", type=int, default=None)
@click.option("--checkpoints", default=None, help="comma-separated N values")
def weyl(seq, stream, floor_mode, weight, out, threads, precision, freqs, n_max, checkpoints):
    """Weighted exponential-sum magnitudes along a checkpoint ladder."""
    eq.set_precision(precision)
    scheme = make_scheme(weight)
    spec = eq.SequenceSpec.of(seq, stream, floor_mode)
    cps = _checkpoints(checkpoints, n_max)
    hs = [int(v) for v in freqs.split(",")]
    rep = eq.weyl_sums(spec, scheme, hs, cps, table=_table(), threads=threads,
                       with_discrepancy=True)
    for (h, N), value in sorted(rep.sums.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        click.echo(f"N={N:>10}  h={h[0]:>3}  |S|={abs(value):.6f}  D*={rep.discrepancy[N]:.6f}")
    config = dict(command="weyl", seq=seq, stream=stream, floor=floor_mode, weight=weight,
                  h=freqs, checkpoints=cps, precision=precision)
    _emit(out, "weyl", rep.rows(), {"rows": rep.rows()}, config)


@main.command()
@_spec_options
@click.option("--N", "n_max", type=int, required=True)
def discrepancy(seq, stream, floor_mode, weight, out, threads, precision, n_max):
    """Weighted star discrepancy at N."""
    eq.set_precision(precision)
    scheme = make_scheme(weight)
    spec = eq.SequenceSpec.of(seq, stream, floor_mode)
    value = eq.discrepancy(spec, scheme, n_max, table=_table())
    click.echo(f"D*({n_max}) = {value:.6f}")
    config = dict(command="discrepancy", seq=seq, stream=stream, floor=floor_mode,
                  weight=weight, N=n_max, precision=precision)
    rows = [{"sequence_id": seq, "weight": weight, "h_vector": "", "N": n_max,
             "abs_S": "", "discrepancy": value}]
    _emit(out, "discrepancy", rows, {"discrepancy": value, "N": n_max}, config)


@main.command()
@click.option("--seq", required=True,
              type=click.Choice(["pow2", "factorial", "primorial", "mixed", "logprod",
                                 "simple", "prime_power"]))
@click.option("--t1", default=0.0, type=float)
@click.option("--t2", default=0.0, type=float)
@click.option("--j", default=1, type=int)
@click.option("--density", default="natural", type=click.Choice(list(DENSITY_TEXT)))
@click.option("--N", "n_max", type=int, required=True)
@click.option("--len", "string_len", default=1, type=click.IntRange(1, 3))
@click.option("--out", default=None)
def benford(seq, t1, t2, j, density, n_max, string_len, out):
    """Weighted leading-digit-string frequency table."""
    scheme = make_scheme(DENSITY_TEXT[density])
    rep = bf.benford_table(seq, scheme, n_max, string_len=string_len,
                           table=_table(), t1=t1, t2=t2, j=j)
    for s in sorted(rep.observed):
        click.echo(f"{s:>4}  observed={rep.observed[s]:.6f}  "
                   f"predicted={rep.predicted[s]:.6f}  "
                   f"dev={rep.observed[s]-rep.predicted[s]:+.6f}")
    click.echo(f"max deviation: {rep.max_deviation:.6f}")
    config = dict(command="benford", seq=seq, t1=t1, t2=t2, j=j, density=density,
                  N=n_max, len=string_len)
    _emit(out, "benford", rep.rows(), {"rows": rep.rows()}, config)


@main.command()
@click.option("--config", "config_path", required=True,
              help="JSON: {phases: [[...]], f: [...], functions: [...], stream, weight}")
@click.option("--N", "n_max", type=int, required=True)
@click.option("--out", default=None)
def ergodic(config_path, n_max, out):
    """Weighted diagonal-unitary average and its distance to the projection."""
    with open(config_path) as fh:
        cfg = json.load(fh)
    system = er.DiagonalSystem.make(cfg["phases"], [complex(v) for v in cfg["f"]])
    scheme = make_scheme(cfg.get("weight", "x"))
    rep = er.weighted_average(system, cfg["functions"], cfg.get("stream", "naturals"),
                              scheme, n_max, table=_table())
    click.echo(f"N={n_max}  distance={rep.distance:.6f}  ratio={rep.normalizer_ratio:.6f}"
               + ("  [exploratory: span condition fails]" if rep.exploratory else ""))
    config = dict(command="ergodic", N=n_max, **cfg)
    rows = [{"sequence_id": "ergodic", "weight": cfg.get("weight", "x"), "h_vector": "",
             "N": n_max, "abs_S": rep.distance, "discrepancy": ""}]
    payload = {"distance": rep.distance, "normalizer_ratio": rep.normalizer_ratio,
               "average": [repr(v) for v in rep.average],
               "exploratory": rep.exploratory}
    _emit(out, "ergodic", rows, payload, config)


@main.command()
@click.option("--side", default=500, type=int)
@click.option("--density", default=0.3, type=float)
@click.option("--q", "polys", default="0,0,1",
              help="semicolon-separated integer polynomials, coefficients low-to-high")
@click.option("--u", "us", default="x^3/2", help="semicolon-separated floor sequences")
@click.option("--variant", default="D1", type=click.Choice(["D1", "D2", "D3"]))
@click.option("--seed", default=0, type=int)
@click.option("--out", default=None)
def probe(side, density, polys, us, variant, seed, out):
    """Recurrence probe on a seeded random set in a box."""
    poly_coeffs = [[int(c) for c in p.split(",")] for p in polys.split(";")]
    u_list = us.split(";")
    pattern = er.PatternProbe.random(side, density, poly_coeffs, u_list, seed=seed)
    res = er.recurrence_probe(pattern, variant, table=_table())
    if res.found:
        click.echo(f"{variant}: witness at {res.witness_index} -> {res.tuple_hit} "
                   f"(verified={res.verified}, scanned {res.scanned})")
    else:
        click.echo(f"{variant}: exhausted box range after scanning {res.scanned} indices")
    config = dict(command="probe", side=side, density=density, q=polys, u=us,
                  variant=variant, seed=seed)
    rows = [{"sequence_id": f"probe:{variant}", "weight": "", "h_vector": "",
             "N": res.scanned, "abs_S": "",
             "discrepancy": "", "witness": res.witness_index or ""}]
    payload = {"found": res.found, "witness": res.witness_index,
               "tuple": list(res.tuple_hit) if res.tuple_hit else None,
               "verified": res.verified, "seed": seed}
    _emit(out, "probe", rows, payload, config)
    sys.exit(1 if (res.found and not res.verified) else 0)


@main.command("primes-check")
@click.option("--nmax", default=10**6, type=int)
@click.option("--ap", default="4,1;4,3;3,1", help="progressions a,d to diagnose")
@click.option("--out", default=None)
def primes_check(nmax, ap, out):
    """Classical prime bounds and progression diagnostics."""
    cache = os.environ.get("EQLAB_CACHE")
    rep = pr.rosser_check(nmax, cache_dir=cache)
    click.echo(f"rosser: {'PASS' if rep.ok else 'FAIL'}  "
               f"(lower slack {rep.max_lower_slack:.3f}, upper slack {rep.max_upper_slack:.3f})")
    rows = [{"sequence_id": "rosser", "weight": "", "h_vector": "", "N": nmax,
             "abs_S": "", "discrepancy": "",
             "detail": f"lower={rep.max_lower_slack:.6f};upper={rep.max_upper_slack:.6f}"}]
    diag_n = min(nmax, 10**5)
    for part in ap.split(";"):
        a, d = (int(v) for v in part.split(","))
        p, ratio = pr.nth_prime_ap(a, d, diag_n, cache_dir=cache)
        click.echo(f"p_{diag_n}^({a},{d}) = {p}  ratio to phi(a) n log n = {ratio:.4f}")
        rows.append({"sequence_id": f"ap:{a},{d}", "weight": "", "h_vector": "",
                     "N": diag_n, "abs_S": "", "discrepancy": "", "detail": f"{ratio:.6f}"})
    config = dict(command="primes-check", nmax=nmax, ap=ap)
    _emit(out, "primes_check", rows, {"rosser_ok": rep.ok}, config)
    sys.exit(0 if rep.ok else 1)


if __name__ == "__main__":
    main()
