"""Command-line front end.

Exit status: 0 pass, 1 a check failed, 2 usage error, 3 bad input data.
The default weight table path comes from GRAPHQUANT_TABLE when --table is
not given.
"""
from __future__ import annotations

import sys
from typing import Optional

import click

from . import checks
from . import graph_dgla as gd
from .calculus import U_as_operator
from .graphs import GraphError, canonical_key, enumerate_graphs, parse_key
from .parsing import ExpressionSyntaxError, parse_poly, parse_polyvector
from .polyalg import evaluate, format_poly
from .starprod import (
    MissingWeight,
    NotPoisson,
    PoissonStructure,
    assoc_residual,
    cocycle_graphs,
    cocycle_residual,
    derive_exact_table,
    propagated_errors,
    star,
)
from .weights import (
    DimensionMismatch,
    IoError,
    ParseError,
    WeightTable,
    build_table,
    integrate_weight,
    load_table,
    store_table,
)

EXIT_FAIL, EXIT_USAGE, EXIT_DATA = 1, 2, 3
TABLE_ENV = "GRAPHQUANT_TABLE"


class DataError(click.ClickException):
    exit_code = EXIT_DATA


def _data(module: str, exc: Exception) -> DataError:
    return DataError(f"{module}: {exc}")


def _graph(text: str):
    try:
        return parse_key(text)
    except GraphError as exc:
        raise _data("graphs", exc)


def _graph_sum(text: str) -> gd.GraphSum:
    try:
        if "*" in text or "+" in text:
            return gd.GraphSum.from_text(text)
        return gd.GraphSum.of(parse_key(text))
    except (GraphError, ValueError) as exc:
        raise _data("graph_dgla", exc)


def _poly(text: str, d: int):
    try:
        return parse_poly(text, d)
    except ExpressionSyntaxError as exc:
        raise _data("parsing", exc)


def _polyvector(text: str, d: int):
    try:
        return parse_polyvector(text, d)
    except ExpressionSyntaxError as exc:
        raise _data("parsing", exc)


def _alpha(text: str, d: int) -> PoissonStructure:
    try:
        return PoissonStructure(_polyvector(text, d))
    except (NotPoisson, ValueError) as exc:
        raise _data("starprod", exc)


def _table(path: Optional[str], required: bool = True) -> Optional[WeightTable]:
    if path is None:
        if required:
            raise click.UsageError(f"no weight table: pass --table or set {TABLE_ENV}")
        return None
    try:
        return load_table(path)
    except (IoError, ParseError) as exc:
        raise _data("weights", exc)


def _text(s: gd.GraphSum) -> str:
    return s.to_text() or "0"


def _status(results) -> None:
    for r in results:
        click.echo(r.line())
        for f in r.failures[:10]:
            click.echo(f"  failing: {f}")
    if not all(r.passed for r in results):
        sys.exit(EXIT_FAIL)


table_option = click.option("--table", "table_path", envvar=TABLE_ENV, type=click.Path(),
                            help=f"weight table (default: ${TABLE_ENV})")
dim_option = click.option("--dim", "d", default=2, show_default=True, type=click.IntRange(1), help="ambient dimension")
seed_option = click.option("--seed", default=0, show_default=True, type=int)
sigma_option = click.option("--tolerance-sigma", "sigma", default=3.0, show_default=True, type=float)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Graph complexes, weights and star products."""


@main.command("enumerate")
@click.option("--n", "n", required=True, type=click.IntRange(0))
@click.option("--m", "m", required=True, type=click.IntRange(0))
@click.option("--outdeg", default=None, help="comma-separated out-degree profile")
@click.option("--max-edges", default=None, type=int)
def enumerate_cmd(n, m, outdeg, max_edges):
    """List admissible graphs as keys."""
    profile = None
    if outdeg:
        try:
            profile = [int(x) for x in outdeg.split(",")]
        except ValueError:
            raise click.BadParameter("expected integers like 2,2", param_hint="--outdeg")
    for g in enumerate_graphs(n, m, profile, max_edges):
        click.echo(canonical_key(g))


@main.command()
@click.option("--graph", "key", required=True)
def validate(key):
    """Check a graph key; print its canonical form and degrees."""
    g = _graph(key)
    sign, rep = gd.canonical_form(g)
    click.echo(f"key: {canonical_key(g)}")
    click.echo(f"bidegree: {g.bidegree}  total degree: {g.total_degree}")
    click.echo(f"canonical: {sign:+d} * {canonical_key(rep)}" if sign else "canonical: 0 (odd symmetry)")


@main.command()
@click.option("--x", "x", required=True)
@click.option("--y", "y", required=True)
def bracket(x, y):
    """Graded bracket of two graphs or graph sums."""
    click.echo(_text(gd.bracket(_graph_sum(x), _graph_sum(y))))


@main.command()
@click.argument("which", type=click.Choice(["d1", "d2", "d"]))
@click.option("--x", "x", required=True)
def diff(which, x):
    """Apply d1, d2 or d1 + d2."""
    op = {"d1": gd.d1, "d2": gd.d2, "d": gd.d_total}[which]
    click.echo(_text(op(_graph_sum(x))))


@main.command("apply-U")
@click.option("--graph", "key", required=True)
@click.option("--xi", "xis", multiple=True, help="polyvector decoration, once per internal vertex")
@click.option("--f", "fs", multiple=True, help="polynomial argument, once per boundary vertex")
@dim_option
def apply_u(key, xis, fs, d):
    """Evaluate the operator of a decorated graph."""
    g = _graph(key)
    if len(xis) != g.n or len(fs) != g.m:
        raise click.UsageError(f"graph needs {g.n} --xi and {g.m} --f options")
    op = U_as_operator(g, [_polyvector(t, d) for t in xis], d)
    click.echo(format_poly(evaluate(op, [_poly(t, d) for t in fs]).p))


@main.command()
@click.option("--graph", "key", required=True)
@click.option("--samples", default=10 ** 6, show_default=True, type=click.IntRange(1))
@seed_option
@click.option("--workers", default=1, show_default=True, type=click.IntRange(1))
@table_option
def weight(key, samples, seed, workers, table_path):
    """Monte Carlo weight of a total-degree-1 graph; optionally store it."""
    g = _graph(key)
    try:
        est = integrate_weight(g, samples, seed, workers=workers)
    except DimensionMismatch as exc:
        raise _data("weights", exc)
    click.echo(f"estimate {est.estimate!r} stderr {est.stderr!r} samples {samples} seed {seed}")
    if table_path:
        table = _table(table_path) if _exists(table_path) else WeightTable()
        if est.stderr > 0:
            table.set_estimate(g, est, samples, seed)
            store_table(table, table_path)


def _exists(path: str) -> bool:
    try:
        open(path).close()
        return True
    except OSError:
        return False


@main.command("build-table")
@click.option("--order", "N", default=2, show_default=True, type=click.IntRange(0))
@click.option("--nmax", default=2, show_default=True, type=click.IntRange(0))
@click.option("--samples", default=10 ** 6, show_default=True, type=click.IntRange(1))
@seed_option
@click.option("--workers", default=1, show_default=True, type=click.IntRange(1))
@click.option("--out", "out", required=True, type=click.Path())
def build_table_cmd(N, nmax, samples, seed, workers, out):
    """Estimate the weights used by star products to order N and cocycle checks up to nmax."""
    from .starprod import star_graphs
    graphs = [g for n in range(N + 1) for g, _ in star_graphs(n)]
    for phi in checks.total_degree_two(nmax, 2):
        graphs.extend(cocycle_graphs(phi))
    table = build_table(graphs, samples, seed, workers)
    store_table(table, out)
    click.echo(f"{len(table)} entries written to {out}")


@main.command("star")
@click.option("--f", "f", required=True)
@click.option("--g", "g", required=True)
@click.option("--alpha", required=True, help="Poisson bivector, e.g. '1*d1^d2'")
@click.option("--order", "N", default=2, show_default=True, type=click.IntRange(0))
@dim_option
@table_option
@click.option("--moyal-table", is_flag=True, help="use the exact constant-coefficient table")
def star_cmd(f, g, alpha, N, d, table_path, moyal_table):
    """Star product f * g to order N."""
    a = _alpha(alpha, d)
    table = derive_exact_table(N) if moyal_table else _table(table_path)
    try:
        s = star(_poly(f, d), _poly(g, d), a, N, table)
    except MissingWeight as exc:
        raise _data("starprod", exc)
    for k in range(N + 1):
        click.echo(f"h^{k}: {s[k]}")


@main.group()
def check():
    """Identity and residual suites."""


@check.command("dgla")
def check_dgla():
    _status(checks.dgla_suite() + checks.adjointness_suite())


@check.command("morphism")
@click.option("--decorations", default=20, show_default=True, type=click.IntRange(1))
@seed_option
def check_morphism(decorations, seed):
    _status(checks.morphism_suite(decorations=decorations, seed=seed))


@check.command("forest")
@click.option("--count", default=200, show_default=True, type=click.IntRange(1))
@seed_option
def check_forest(count, seed):
    _status(checks.forest_suite(count, seed))


@check.command("cocycle")
@click.option("--nmax", default=2, show_default=True, type=click.IntRange(0, 2))
@table_option
@sigma_option
def check_cocycle(nmax, table_path, sigma):
    """Residual of the cocycle equation for every total-degree-2 graph."""
    table = _table(table_path)
    ok = True
    for phi in checks.total_degree_two(nmax, 2):
        try:
            value, err = cocycle_residual(phi, table)
        except MissingWeight as exc:
            raise _data("starprod", exc)
        passed = abs(float(value)) <= sigma * err
        ok &= passed
        click.echo(f"{'PASS' if passed else 'FAIL'} {canonical_key(phi)} residual {float(value):.6g} error {err:.3g}")
    face = checks.face_suite(nmax, 2)
    click.echo(face.line())
    if not (ok and face.passed):
        sys.exit(EXIT_FAIL)


@check.command("assoc")
@click.option("--f", "f", required=True)
@click.option("--g", "g", required=True)
@click.option("--h", "h", required=True)
@click.option("--alpha", required=True)
@click.option("--order", "N", default=2, show_default=True, type=click.IntRange(0))
@dim_option
@table_option
@click.option("--moyal-table", is_flag=True)
@sigma_option
def check_assoc(f, g, h, alpha, N, d, table_path, moyal_table, sigma):
    """(f*g)*h - f*(g*h), each coefficient against its propagated error."""
    a = _alpha(alpha, d)
    table = derive_exact_table(N) if moyal_table else _table(table_path)
    F, G, H = (_poly(t, d) for t in (f, g, h))
    fn = lambda tb: assoc_residual(F, G, H, a, N, tb)
    try:
        res = fn(table)
        errs = propagated_errors(fn, table)
    except MissingWeight as exc:
        raise _data("starprod", exc)
    ok = True
    for k in range(N + 1):
        for mono, c in sorted(res[k].terms().items()):
            err = errs[k].get(mono, 0.0)
            passed = abs(float(c)) <= sigma * err
            ok &= passed
            click.echo(f"{'PASS' if passed else 'FAIL'} h^{k} {mono} {float(c):.6g} error {err:.3g}")
    click.echo("residual is zero" if res.is_zero() else "residual is nonzero")
    if not ok:
        sys.exit(EXIT_FAIL)


if __name__ == "__main__":  # pragma: no cover
    main()
