"""Command-line front end.

Exit status: 0 on success, 1 on a domain error (capacity exceeded, invalid
embedding, unreadable input), 2 on a usage error. Diagnostics go to stderr;
data goes to stdout or to ``--out``. Relative ``--out``/``--plot`` paths are
resolved against ``$QPUARCH_OUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from pathlib import Path

from . import dac_addressing as dac
from . import dac_quantization as quant
from . import embedding as emb
from . import energy_scale as es
from . import readout_sim as ro
from . import topology as topo

OUT_DIR_ENV = "QPUARCH_OUT_DIR"


class CommandError(Exception):
    """A domain failure that should end the command with exit status 1."""


def _dump_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _resolve(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(args, payload: str | bytes) -> None:
    target = _resolve(args.out)
    if target is None:
        if isinstance(payload, bytes):
            sys.stdout.buffer.write(payload)
        else:
            sys.stdout.write(payload)
        sys.stdout.flush()
        return
    if isinstance(payload, bytes):
        target.write_bytes(payload)
    else:
        target.write_text(payload)


def _plot_path(args) -> Path | None:
    return _resolve(getattr(args, "plot", None))


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CommandError(f"{path} is not valid JSON: {exc}") from None


def _graph(args) -> topo.TopologyGraph:
    if getattr(args, "graph", None):
        return topo.from_dict(_read_json(args.graph))
    offsets = topo.DEFAULT_OFFSETS
    if getattr(args, "offsets", None):
        doc = _read_json(args.offsets)
        try:
            offsets = (doc["vertical"], doc["horizontal"])
        except (KeyError, TypeError):
            raise CommandError("offset file needs 'vertical' and 'horizontal' lists") from None
    return topo.build_topology(args.m, offsets)


# -- topology ------------------------------------------------------------


def cmd_topology_build(args):
    _emit(args, _dump_json(topo.summary(_graph(args))))


def cmd_topology_census(args):
    g = _graph(args)
    if args.tile is not None:
        tiles = {tuple(args.tile): topo.tile_census(g, *args.tile)}
    else:
        tiles = topo.full_census(g)
    rows = [[i, j, *c] for (i, j), c in sorted(tiles.items())]
    if args.format == "csv":
        _emit(args, _csv(["tile_row", "tile_col", "internal", "external", "odd"], rows))
    else:
        _emit(args, _dump_json([
            {"tile": [i, j], "internal": a, "external": b, "odd": c} for i, j, a, b, c in rows
        ]))


def cmd_topology_degrees(args):
    g = _graph(args)
    hist = topo.degree_histogram(g)
    if args.format == "csv":
        _emit(args, _csv(["degree", "count"], sorted(hist.items())))
    else:
        _emit(args, _dump_json({str(k): v for k, v in hist.items()}))
    if (path := _plot_path(args)) is not None:
        from . import plotting

        plotting.degree_histogram(hist, path, title=f"m = {g.m}")


def cmd_topology_triangles(args):
    g = _graph(args)
    if args.without_odd:
        g = g.without_kinds(topo.ODD)
    _emit(args, _dump_json({"m": g.m, "triangles": topo.triangle_count(g)}))


def cmd_topology_export(args):
    fmt = args.format or "json"
    if fmt == "csv":
        raise CommandError("export supports json, dot and edgelist")
    _emit(args, topo.export_graph(_graph(args), fmt))


# -- embedding -----------------------------------------------------------


def cmd_embed_validate(args):
    g = _graph(args)
    problem = emb.IsingProblem.from_dict(_read_json(args.problem))
    embedding = emb.embedding_from_dict(_read_json(args.embedding))
    report = emb.embedding_report(g, problem, embedding, args.physical_scale)
    _emit(args, _dump_json(report))
    if not report["valid"]:
        raise CommandError(f"embedding is invalid: {len(report['violations'])} violation(s)")


def cmd_embed_stats(args):
    embedding = emb.embedding_from_dict(_read_json(args.embedding))
    _emit(args, _dump_json(emb.chain_statistics(embedding).to_dict()))


# -- DAC addressing ------------------------------------------------------


def _scheme(args) -> dac.BraidedScheme:
    lines = args.lines
    if lines is None:
        if args.stages is None:
            raise CommandError("give --lines, or --stages so a line count can be suggested")
        lines = dac.suggest_line_count(args.stages, args.domains)
        print(f"using suggested odd line count n={lines}", file=sys.stderr)
    return dac.BraidedScheme(lines, args.domains)


def cmd_dac_capacity(args):
    if args.xyz:
        value = dac.capacity_xyz(dac.XyzScheme(*args.xyz))
    else:
        if args.lines is None:
            raise CommandError("give --lines (braided) or --xyz X Y Z")
        value = dac.capacity_braided(dac.BraidedScheme(args.lines, args.domains))
    _emit(args, f"{value}\n")


def _plan_from_args(args) -> dac.AddressingPlan:
    if getattr(args, "plan", None):
        return dac.from_dict(_read_json(args.plan))
    if args.stages is None:
        raise CommandError("give --plan FILE or --stages N")
    return dac.plan(_scheme(args), args.stages, args.layout)


def cmd_dac_plan(args):
    p = _plan_from_args(args)
    _emit(args, dac.dumps(p))
    if (path := _plot_path(args)) is not None:
        from . import plotting

        plotting.domain_loads(p.domain_counts(), path)


def cmd_dac_verify(args):
    report = dac.verify(_plan_from_args(args))
    _emit(args, _dump_json(report))
    if not report["valid"]:
        raise CommandError(f"plan has {len(report['violations'])} violation(s)")


def cmd_dac_time(args):
    p = _plan_from_args(args)
    t = dac.programming_time_estimate(p, args.per_event, args.parallel)
    _emit(args, _dump_json({
        "stages": len(p),
        "per_event_s": args.per_event,
        "domain_parallel": args.parallel,
        "time_s": t,
    }))


# -- quantization --------------------------------------------------------


def _spec(args, stages) -> quant.DacSpec:
    return quant.DacSpec(stages, args.levels, args.lo, args.hi)


def cmd_quant_report(args):
    rep = quant.error_report(_spec(args, args.stages), args.sampling, args.samples,
                             args.bins, args.seed)
    if args.format == "csv":
        _emit(args, rep.histogram_csv())
    else:
        _emit(args, _dump_json(rep.to_dict()))
    if (path := _plot_path(args)) is not None:
        from . import plotting

        plotting.quantization_histograms([rep], [f"{args.stages}-stage"], path)


def cmd_quant_compare(args):
    old, new = _spec(args, args.old_stages), _spec(args, args.new_stages)
    ratio = quant.compare_specs(old, new)
    reps = [quant.error_report(s) for s in (old, new)]
    _emit(args, _dump_json({
        "ratio": ratio,
        "old": {"stages": old.stages, "max_abs_error": reps[0].max_abs_error},
        "new": {"stages": new.stages, "max_abs_error": reps[1].max_abs_error},
        "levels": args.levels,
    }))
    if (path := _plot_path(args)) is not None:
        from . import plotting

        reps = [quant.error_report(s, "random", args.samples, args.bins, args.seed)
                for s in (old, new)]
        plotting.quantization_histograms(reps, [f"{old.stages}-stage", f"{new.stages}-stage"],
                                         path)


def cmd_quant_problem(args):
    if args.problem:
        problem = emb.IsingProblem.from_dict(_read_json(args.problem))
    else:
        rng = random.Random(args.seed)
        n = args.random
        h = tuple(rng.uniform(args.lo, args.hi) for _ in range(n))
        J = {(i, j): rng.uniform(args.lo, args.hi)
             for i in range(n) for j in range(i + 1, n) if rng.random() < args.density}
        problem = emb.IsingProblem(h, J)
    spec = _spec(args, args.stages)
    _emit(args, _dump_json(quant.hamiltonian_specification_error(problem, spec, spec).to_dict()))


# -- energy scale --------------------------------------------------------


def cmd_qcp_find(args):
    try:
        text = Path(args.schedule).read_text()
    except OSError as exc:
        raise CommandError(f"cannot read {args.schedule}: {exc.strerror}") from None
    sched = es.AnnealSchedule.from_csv(text)
    res = es.qcp_find(sched, args.temperature, args.tol)
    _emit(args, _dump_json(res.to_dict()))
    if (path := _plot_path(args)) is not None:
        from . import plotting

        plotting.schedule_crossing(sched, res, path)


def cmd_qcp_tfim(args):
    spec = es.tfim_chain_spectrum(args.n, args.a, args.b, args.sign, args.boundary)
    _emit(args, _dump_json(spec.to_dict()))


def cmd_qcp_pseudo(args):
    results = [es.pseudo_critical_point(n, args.resolution, args.boundary) for n in args.sizes]
    if args.format == "json":
        _emit(args, _dump_json([r.to_dict() for r in results]))
    else:
        _emit(args, _csv(["n", "r_star", "gap"],
                         [[r.n, repr(r.r_star), repr(r.gap)] for r in results]))
    if (path := _plot_path(args)) is not None:
        from . import plotting

        plotting.gap_scans(results, path)


# -- readout -------------------------------------------------------------


def _layout(args) -> ro.ReadoutLayout:
    if getattr(args, "layout", None):
        return ro.layout_from_dict(_read_json(args.layout))
    return ro.build_layout(_graph(args), args.tracks, args.stages_per_attach)


def _clock(args) -> ro.ClockProgram:
    return ro.ClockProgram(args.clock_hz, args.phases)


def cmd_readout_layout(args):
    _emit(args, ro.dumps(ro.layout_to_dict(_layout(args))))


def cmd_readout_simulate(args):
    layout = _layout(args)
    if args.states:
        doc = _read_json(args.states)
        states = {topo.QubitCoordinate(*map(int, k.split(":"))): int(v) for k, v in doc.items()}
    else:
        rng = random.Random(args.seed)
        states = {q: rng.randint(0, 1) for q in layout.qubits}
    events = ro.simulate_readout(layout, states, _clock(args))
    _emit(args, ro.events_to_csv(events))
    if (path := _plot_path(args)) is not None:
        from . import plotting

        plotting.readout_timeline(events, path)


def cmd_readout_time(args):
    layout = _layout(args)
    total, per_track = ro.readout_time(layout, _clock(args))
    clock = _clock(args)
    _emit(args, _dump_json({
        "total_s": total,
        "bit_period_s": clock.bit_period,
        "bit_rate_bps": float(clock.bit_rate),
        "per_track": [{"track": k, "time_s": v} for k, v in sorted(per_track.items())],
    }))


def cmd_readout_compare(args):
    g = _graph(args)
    linear = ro.build_layout(g, args.tracks, args.stages_per_attach)
    serp = ro.serpentine_baseline(g, args.stages_per_attach)
    _emit(args, _dump_json({
        "m": g.m,
        "tracks": args.tracks,
        "serpentine_stages": serp.total_stages(),
        "linear_stages": linear.total_stages(),
        "ratio": ro.compare_layout_lengths(serp, linear),
        "measure": "stage count",
    }))
    if (path := _plot_path(args)) is not None:
        from . import plotting

        plotting.stage_counts([serp, linear], ["serpentine", "linear"], path)


def cmd_readout_freqs(args):
    plan = ro.allocate_frequencies(args.resonators, tuple(args.band), args.spacing)
    if args.format == "csv":
        d = plan.to_dict()["resonators"]
        _emit(args, _csv(["id", "feedline", "frequency_hz"],
                         [[r["id"], r["feedline"], repr(r["frequency_hz"])] for r in d]))
    else:
        _emit(args, _dump_json(plan.to_dict()))


# -- parser --------------------------------------------------------------


def _common(p: argparse.ArgumentParser, formats=("json", "csv")) -> None:
    p.add_argument("--out", help="write data here instead of stdout")
    p.add_argument("--format", choices=formats, default=None)
    p.add_argument("--seed", type=int, default=0, help="seed for any randomized sampling")


def _graph_args(p, required=True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("-m", type=int, help="tile grid size (>= 2)")
    src.add_argument("--graph", help="graph JSON file")
    p.add_argument("--offsets", help="offset table JSON {vertical: [...], horizontal: [...]}")


def _plot_arg(p) -> None:
    p.add_argument("--plot", metavar="FILE", help="also render a figure (png/pdf/svg)")


def _clock_args(p) -> None:
    p.add_argument("--clock-hz", type=float, default=30e6)
    p.add_argument("--phases", type=int, default=3)


def _layout_args(p) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("-m", type=int)
    src.add_argument("--graph")
    src.add_argument("--layout", help="layout JSON file")
    p.add_argument("--offsets")
    p.add_argument("--tracks", type=int, default=16)
    p.add_argument("--stages-per-attach", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpuarch",
        description="Architecture models for a tiled quantum annealing processor.",
        epilog=(
            "Exit status: 0 success, 1 domain error, 2 usage error. Relative --out and "
            f"--plot paths are resolved against ${OUT_DIR_ENV} when it is set."
        ),
    )
    groups = parser.add_subparsers(dest="group", required=True)

    t = groups.add_parser("topology", help="tiled qubit graph").add_subparsers(
        dest="cmd", required=True)
    p = t.add_parser("build", help="build a graph and print its summary")
    _graph_args(p); _common(p); p.set_defaults(func=cmd_topology_build)
    p = t.add_parser("census", help="per-tile coupler census")
    _graph_args(p); _common(p)
    p.add_argument("--tile", type=int, nargs=2, metavar=("ROW", "COL"))
    p.set_defaults(func=cmd_topology_census)
    p = t.add_parser("degrees", help="degree histogram")
    _graph_args(p); _common(p); _plot_arg(p); p.set_defaults(func=cmd_topology_degrees)
    p = t.add_parser("triangles", help="count 3-cycles")
    _graph_args(p); _common(p)
    p.add_argument("--without-odd", action="store_true", help="drop odd couplers first")
    p.set_defaults(func=cmd_topology_triangles)
    p = t.add_parser("export", help="serialize the graph")
    _graph_args(p); _common(p, formats=("json", "dot", "edgelist"))
    p.set_defaults(func=cmd_topology_export)

    e = groups.add_parser("embed", help="chain embeddings").add_subparsers(
        dest="cmd", required=True)
    p = e.add_parser("validate", help="validate an embedding of a problem")
    _graph_args(p); _common(p)
    p.add_argument("--problem", required=True)
    p.add_argument("--embedding", required=True)
    p.add_argument("--physical-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_embed_validate)
    p = e.add_parser("stats", help="chain-length statistics")
    _common(p); p.add_argument("--embedding", required=True)
    p.set_defaults(func=cmd_embed_stats)

    d = groups.add_parser("dac", help="braided DAC addressing").add_subparsers(
        dest="cmd", required=True)
    for name, func, help_ in (
        ("capacity", cmd_dac_capacity, "addressable stage count"),
        ("plan", cmd_dac_plan, "assign stages to selectors"),
        ("verify", cmd_dac_verify, "check a plan"),
        ("time", cmd_dac_time, "programming time estimate"),
    ):
        p = d.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--lines", type=int, help="shared address lines n (odd preferred)")
        p.add_argument("--domains", type=int, default=1, help="power domains z")
        p.set_defaults(func=func)
        if name == "capacity":
            p.add_argument("--xyz", type=int, nargs=3, metavar=("X", "Y", "Z"),
                           help="capacity of a matrix (XYZ) scheme instead")
            continue
        p.add_argument("--stages", type=int)
        p.add_argument("--layout", choices=("repetition", "interleaving"), default="repetition")
        if name != "plan":
            p.add_argument("--plan", help="plan JSON file")
        else:
            _plot_arg(p)
        if name == "time":
            p.add_argument("--per-event", type=float, default=1e-6, help="seconds per event")
            p.add_argument("--parallel", action="store_true", help="program domains concurrently")

    q = groups.add_parser("quant", help="DAC quantization error").add_subparsers(
        dest="cmd", required=True)
    for name, func in (("report", cmd_quant_report), ("compare", cmd_quant_compare),
                       ("problem", cmd_quant_problem)):
        p = q.add_parser(name)
        _common(p)
        p.add_argument("--levels", type=int, default=8)
        p.add_argument("--lo", type=float, default=-1.0)
        p.add_argument("--hi", type=float, default=1.0)
        p.set_defaults(func=func)
        if name == "compare":
            p.add_argument("--old-stages", type=int, default=2)
            p.add_argument("--new-stages", type=int, default=4)
        else:
            p.add_argument("--stages", type=int, default=4)
        if name in ("report", "compare"):
            p.add_argument("--samples", type=int, default=100_001)
            p.add_argument("--bins", type=int, default=21)
            _plot_arg(p)
        if name == "report":
            p.add_argument("--sampling", choices=quant.SAMPLINGS, default="exhaustive-midpoints")
        if name == "problem":
            src = p.add_mutually_exclusive_group(required=True)
            src.add_argument("--problem", help="problem JSON file")
            src.add_argument("--random", type=int, metavar="N", help="random N-variable problem")
            p.add_argument("--density", type=float, default=0.5)

    c = groups.add_parser("qcp", help="energy scale at the critical point").add_subparsers(
        dest="cmd", required=True)
    p = c.add_parser("find", help="crossing of A(s) and B(s)")
    _common(p); _plot_arg(p)
    p.add_argument("--schedule", required=True, help="CSV with header s,A,B")
    p.add_argument("--temperature", type=float, help="bath temperature in kelvin")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_qcp_find)
    p = c.add_parser("tfim", help="low spectrum of a transverse-field Ising chain")
    _common(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--a", type=float, default=1.0, help="transverse field")
    p.add_argument("--b", type=float, default=1.0, help="coupling")
    p.add_argument("--sign", choices=("ferro", "antiferro"), default="ferro")
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")
    p.set_defaults(func=cmd_qcp_tfim)
    p = c.add_parser("pseudo-critical", help="finite-chain gap minimum r*(n)")
    _common(p); _plot_arg(p)
    p.add_argument("--sizes", type=int, nargs="+", default=[4, 6, 8, 10, 12])
    p.add_argument("--resolution", type=float, default=1e-2)
    p.add_argument("--boundary", choices=("open", "periodic"), default="periodic")
    p.set_defaults(func=cmd_qcp_pseudo)

    r = groups.add_parser("readout", help="shift-register readout").add_subparsers(
        dest="cmd", required=True)
    p = r.add_parser("layout", help="linear-track layout")
    _layout_args(p); _common(p); p.set_defaults(func=cmd_readout_layout)
    p = r.add_parser("simulate", help="event log of a readout")
    _layout_args(p); _common(p); _clock_args(p); _plot_arg(p)
    p.add_argument("--states", help='JSON {"u:w:k:z": bit}; random (seeded) when omitted')
    p.set_defaults(func=cmd_readout_simulate)
    p = r.add_parser("time", help="readout latency")
    _layout_args(p); _common(p); _clock_args(p); p.set_defaults(func=cmd_readout_time)
    p = r.add_parser("compare", help="serpentine vs linear stage counts")
    _graph_args(p); _common(p); _plot_arg(p)
    p.add_argument("--tracks", type=int, default=16)
    p.add_argument("--stages-per-attach", type=int, default=1)
    p.set_defaults(func=cmd_readout_compare)
    p = r.add_parser("freqs", help="resonator frequency plan")
    _common(p)
    p.add_argument("--resonators", type=int, default=32)
    p.add_argument("--band", type=float, nargs=2, default=[4e9, 8e9], metavar=("LO", "HI"))
    p.add_argument("--spacing", type=float, default=100e6)
    p.set_defaults(func=cmd_readout_freqs)
    return parser


DOMAIN_ERRORS = (
    CommandError,
    topo.TopologyError,
    emb.EmbeddingError,
    dac.AddressingError,
    quant.QuantizationError,
    es.EnergyScaleError,
    ro.ReadoutError,
)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
