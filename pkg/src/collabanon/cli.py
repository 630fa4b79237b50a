"""Command-line front end: ``collabanon <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile

from . import __version__
from .attacks import homogeneity_rate, homogeneity_sweep, neighborhood_sweep, sweep_csv
from .collab import CollabStore, PrivacyLevel, UserQuery, parse_contribution
from .equivalence import (
    automorphic_equivalence,
    reduction_network,
    stable_refinement,
    structural_equivalence,
    vertex_refinement,
)
from .errors import AnonymizationError
from .graph import naive_anonymize, parse_network, read_mapping, serialize_network
from .hierarchy import read_hierarchy
from .ipanon import KEEP_BITS, SCHEMES, AnonScheme, PseudonymTable, anonymize_csv, anonymize_lines, key_from_env
from .kanon import KAnonConfig, code_classes, k_anonymize, verify_k_anonymity
from .ldiversity import LDivConfig, check_l_diversity, diversity_partition, enforce_k_and_l
from .utility import utility_report

DEFAULT_SEED = 0
log = logging.getLogger("collabanon")


class CliError(Exception):
    pass


def _positive(name):
    def conv(s):
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1")
        return v

    return conv


def _weight(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("weights must be numbers") from None
    if v < 0:
        raise argparse.ArgumentTypeError("weights must be non-negative")
    return v


def _read(path):
    if path is None or path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    """Write ``text`` to ``path`` through a temp file and rename, or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".collabanon-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _network(path):
    return parse_network(_read(path), source=path or "<stdin>")


def _hierarchy(args):
    return read_hierarchy(args.hierarchy) if getattr(args, "hierarchy", None) else None


def _kcfg(args, k=None):
    return KAnonConfig(
        k=k if k is not None else args.k,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        radius=args.radius,
    )


# -- subcommands --------------------------------------------------------------


def cmd_naive(args):
    g = _network(args.input)
    mapping = None
    if args.mapping_in:
        table = read_mapping(_read(args.mapping_in), source=args.mapping_in)
        by_label = {lab: v for v, lab in g.labels.items()}
        mapping = {}
        for key, pseud in table.items():
            # labels cannot hold spaces, so "North America" names North_America
            v = by_label.get(key, by_label.get(key.replace(" ", "_")))
            if v is None and key.isdigit() and int(key) in g:
                v = int(key)
            if v is None:
                raise CliError(f"{args.mapping_in}: {key!r} is neither a label nor a vertex id")
            mapping[v] = pseud
    out, m = naive_anonymize(g, seed=args.seed, mapping=mapping, keep_labels=args.keep_labels)
    _write(args.output, serialize_network(out))
    if args.mapping_out:
        _write(args.mapping_out, m.to_text(g.labels))
    return 0


def cmd_anonymize_k(args):
    g = _network(args.input)
    out, report = k_anonymize(g, _kcfg(args), _hierarchy(args), seed=args.seed)
    _write(args.output, serialize_network(out))
    print(
        f"edges_added={report.edges_added} labels_generalized={report.labels_generalized} "
        f"vertices_added={report.vertices_added} total_cost={report.total_cost:g}",
        file=sys.stderr,
    )
    return 0


def cmd_anonymize_l(args):
    g = _network(args.input)
    out = enforce_k_and_l(g, _kcfg(args), LDivConfig(args.l), _hierarchy(args), seed=args.seed)
    _write(args.output, serialize_network(out))
    report = check_l_diversity(out, diversity_partition(out), LDivConfig(args.l))
    print(f"l-diverse: {str(report.overall).lower()} edges_added={len(out.edges - g.edges)}", file=sys.stderr)
    return 0


def cmd_verify(args):
    g = _network(args.input)
    ok = verify_k_anonymity(g, args.k, args.radius)
    lines = [f"k-anonymous: {str(ok).lower()}"]
    if not ok:
        small = sorted(min(vs) for vs in code_classes(g, args.radius).values() if len(vs) < args.k)
        lines.append("undersized classes at vertices: " + " ".join(map(str, small)))
    if args.l is not None:
        report = check_l_diversity(g, diversity_partition(g), LDivConfig(args.l))
        lines.append(report.render())
        ok = ok and report.overall
    print("\n".join(lines))
    return 0 if ok else 1


def cmd_partition(args):
    if args.reduction and args.kind != "structural":
        raise CliError("--reduction needs --kind structural")
    g = _network(args.input)
    if args.kind == "refinement":
        if args.level is None:
            level, p = stable_refinement(g)
        else:
            level, p = args.level, vertex_refinement(g, args.level)
        text = f"# refinement level {level}\n" + p.render() + "\n"
    elif args.kind == "structural":
        p = structural_equivalence(g)
        text = p.render() + "\n"
        if args.reduction:
            text += "# reduction network\n" + reduction_network(g, p).render() + "\n"
    else:
        text = automorphic_equivalence(g, cap=args.cap).render() + "\n"
    _write(args.output, text)
    return 0


def _store(args):
    level = PrivacyLevel(_kcfg(args), LDivConfig(args.l) if args.l else None)
    return CollabStore(args.store, level, _hierarchy(args), seed=args.seed, id_keys=tuple(args.id_key or ("name",)))


def _collab_update(args, op):
    store = _store(args)
    n = parse_contribution(_read(args.input), args.party, source=args.input or "<stdin>")
    s = store.merge(n) if op == "merge" else store.revoke(n)
    print(f"nodes={len(s.nodes)} edges={len(s.edges)} parties={','.join(sorted(s.parties))}", file=sys.stderr)
    if args.output:
        if store.snapshot is None:
            raise CliError(f"network has fewer than k={args.k} nodes; nothing published")
        _write(args.output, serialize_network(store.snapshot.published))
    return 0


def cmd_merge(args):
    return _collab_update(args, "merge")


def cmd_revoke(args):
    return _collab_update(args, "revoke")


def cmd_query(args):
    if not os.path.exists(args.store):
        raise CliError(f"no store at {args.store}")
    store = _store(args)
    out = store.query(UserQuery.parse(args.where))
    _write(args.output, serialize_network(out))
    return 0


def cmd_attack(args):
    published = _network(args.input)
    if args.mode == "neighborhood":
        if not args.original:
            raise CliError("--mode neighborhood needs --original")
        original = _network(args.original)
        rows = neighborhood_sweep(original, published, args.radius, "embedding", _hierarchy(args))
        worst = max((r.confidence for r in rows), default=0.0)
        print(f"max confidence: {worst:.6f}", file=sys.stderr)
    else:
        p = diversity_partition(published)
        rows = homogeneity_sweep(published, p)
        print(f"certain-inference rate: {homogeneity_rate(published, p):g}")
    if args.output:
        _write(args.output, sweep_csv(rows))
    elif args.mode == "neighborhood":
        sys.stdout.write(sweep_csv(rows))
    return 0


def cmd_anon_ip(args):
    key = args.key if args.key is not None else key_from_env()
    if key is None and args.scheme in ("permute", "pseudonym", "prefix-preserving"):
        key = str(args.seed)
    table = None
    if args.scheme == "pseudonym" and args.table_in:
        table = PseudonymTable.from_csv(_read(args.table_in), key)
    scheme = AnonScheme(args.scheme, keep=args.keep, key=key, table=table)
    text = _read(args.input)
    fmt = args.format
    if fmt == "auto":
        first = next((ln for ln in text.splitlines() if ln.strip()), "")
        fmt = "csv" if "," in first else "lines"
    if fmt == "csv":
        out = anonymize_csv(text, scheme, args.columns.split(",") if args.columns else None)
    else:
        out = "".join(line + "\n" for line in anonymize_lines(text.splitlines(), scheme))
    _write(args.output, out)
    if args.table_out:
        if scheme.table is None:
            raise CliError("--table-out only applies to --scheme pseudonym")
        _write(args.table_out, scheme.table.to_csv())
    return 0


def cmd_stats(args):
    g = _network(args.input)
    labels = {}
    for lab in g.labels.values():
        labels[lab] = labels.get(lab, 0) + 1
    lines = [
        f"vertices {len(g)}",
        f"edges {g.number_of_edges()}",
        "labels " + " ".join(f"{k}:{v}" for k, v in sorted(labels.items())),
        f"sensitive {len(g.sensitive)} distinct={len(set(g.sensitive.values()))}",
    ]
    if len(g):
        sizes = [len(vs) for vs in code_classes(g, args.radius).values()]
        lines.append(f"k-level {min(sizes)} (radius {args.radius})")
    text = "\n".join(lines) + "\n"
    if args.original:
        text += utility_report(_network(args.original), g, _hierarchy(args)).render()
    _write(args.output, text)
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collabanon", description="Anonymize labeled social networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        return p

    def io_flags(p, need_input=True):
        p.add_argument("--input", required=need_input, help="input file ('-' for stdin)")
        p.add_argument("--output", help="output file (default stdout)")

    def privacy_flags(p, k_default=2):
        p.add_argument("--k", type=_positive("k"), default=k_default)
        p.add_argument("--alpha", type=_weight, default=1.0)
        p.add_argument("--beta", type=_weight, default=1.0)
        p.add_argument("--gamma", type=_weight, default=1.0)
        p.add_argument("--radius", type=int, choices=(1, 2), default=1)
        p.add_argument("--hierarchy", help="label hierarchy file")

    p = add("naive", cmd_naive, "replace ids and labels by shuffled pseudonyms")
    io_flags(p)
    p.add_argument("--mapping-out")
    p.add_argument("--mapping-in", help="use this '<original> <pseudonym>' table instead of a shuffle")
    p.add_argument("--keep-labels", action="store_true")

    p = add("anonymize-k", cmd_anonymize_k, "neighborhood k-anonymization")
    io_flags(p)
    privacy_flags(p)

    p = add("anonymize-l", cmd_anonymize_l, "l-diversity over refinement classes")
    io_flags(p)
    privacy_flags(p, k_default=1)
    p.add_argument("--l", type=_positive("l"), default=2)

    p = add("verify", cmd_verify, "check k-anonymity (and l-diversity with --l)")
    io_flags(p)
    p.add_argument("--k", type=_positive("k"), required=True)
    p.add_argument("--l", type=_positive("l"))
    p.add_argument("--radius", type=int, choices=(1, 2), default=1)

    p = add("partition", cmd_partition, "vertex equivalence classes")
    io_flags(p)
    p.add_argument("--kind", choices=("refinement", "structural", "automorphic"), default="refinement")
    p.add_argument("--level", type=int, help="refinement level (default: stable)")
    p.add_argument("--reduction", action="store_true", help="also print the reduction network")
    p.add_argument("--cap", type=int, default=10, help="vertex cap for the automorphism search")

    for name, func, help_ in (
        ("merge", cmd_merge, "merge a party contribution into a store"),
        ("revoke", cmd_revoke, "withdraw a party contribution from a store"),
    ):
        p = add(name, func, help_)
        io_flags(p)
        p.add_argument("--store", required=True, help="append-only store log")
        p.add_argument("--party", required=True)
        p.add_argument("--id-key", action="append", help="identifying attribute (repeatable, default name)")
        privacy_flags(p)
        p.add_argument("--l", type=_positive("l"))

    p = add("query", cmd_query, "query the anonymized store")
    p.add_argument("--store", required=True)
    p.add_argument("--where", action="append", required=True, metavar="KEY=VALUE")
    p.add_argument("--output")
    p.add_argument("--id-key", action="append")
    privacy_flags(p)
    p.add_argument("--l", type=_positive("l"))

    p = add("attack", cmd_attack, "simulate an adversary against a published network")
    io_flags(p)
    p.add_argument("--mode", choices=("neighborhood", "homogeneity"), required=True)
    p.add_argument("--original", help="original network (neighborhood mode)")
    p.add_argument("--radius", type=int, choices=(1, 2), default=1)
    p.add_argument("--hierarchy")

    p = add("anon-ip", cmd_anon_ip, "anonymize IPv4 addresses")
    io_flags(p, need_input=False)
    p.add_argument("--scheme", choices=SCHEMES, required=True)
    p.add_argument("--keep", type=int, choices=KEEP_BITS)
    p.add_argument("--key", help="key for keyed schemes (falls back to $COLLABANON_IP_KEY, then --seed)")
    p.add_argument("--format", choices=("auto", "lines", "csv"), default="auto")
    p.add_argument("--columns", help="comma-separated address columns of a CSV log")
    p.add_argument("--table-in")
    p.add_argument("--table-out")

    p = add("stats", cmd_stats, "summary and utility metrics")
    io_flags(p)
    p.add_argument("--original", help="compare against this network")
    p.add_argument("--radius", type=int, choices=(1, 2), default=1)
    p.add_argument("--hierarchy")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.command == "anon-ip" and args.scheme == "truncate" and args.keep is None:
        parser.error("--scheme truncate needs --keep")
    try:
        return args.func(args)
    except (AnonymizationError, CliError, ValueError, KeyError, OSError) as exc:
        print(f"collabanon {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
