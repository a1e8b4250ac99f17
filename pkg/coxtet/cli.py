"""
Command line for coxtet.

    python run_app.py enumerate --max-label 10 --out catalog.json
    python run_app.py search --family unbounded:1 --format md
    python run_app.py second-type
    python run_app.py report --format md --out reports/
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from coxtet import __version__
from coxtet.cache import CacheManager
from coxtet.catalog import CoxeterCatalog
from coxtet.config import EngineConfig
from coxtet.crossref import FAMILIES, FamilySeed, family
from coxtet.diagrams import DiagramRenderer
from coxtet.engine import DecompositionEngine, SearchResult
from coxtet.errors import (CertificationError, ClassificationError, DomainError, PrecisionError,
                           StructuralError)
from coxtet.models import CatalogEntry
from coxtet.report import (FORMATS, ReportBuilder, ReportDocument, catalog_document,
                           catalog_dot, dumps, search_document, search_markdown, write_text)
from coxtet.second_type import SecondTypeAnalyzer
from coxtet.tables import TableBuilder, frame_records, markdown_table
from coxtet.volume import integral_pairs, max_unbounded_ratio

logger = logging.getLogger(__name__)

COMMANDS = ("enumerate", "volumes", "search", "second-type", "certify", "report")

EXIT_OK = 0
EXIT_CLASSIFICATION = 2
EXIT_PRECISION = 3
EXIT_USAGE = 64

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
EXTENSIONS = {"json": "json", "md": "md", "dot": "dot"}


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--max-label", type=int, default=None, help="largest Coxeter label enumerated (10)")
    common.add_argument("--max-tiles", type=int, default=None, help="tile cap of the gluing search (64)")
    common.add_argument("--tol-signature", type=float, default=None, help="Gram eigenvalue tolerance (1e-9)")
    common.add_argument("--tol-volume", type=float, default=None, help="volume ratio tolerance (1e-6)")
    common.add_argument("--out", default=None, help="output file or directory (stdout if omitted)")
    common.add_argument("--format", choices=FORMATS, default=None,
                        help="output format (from the --out suffix, else md)")
    common.add_argument("--seed", type=int, default=None, help="seed of the certification sampler (0)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (1)")
    common.add_argument("--log-level", default="WARNING",
                        choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")

    parser = _Parser(prog="coxtet", description="Coxeter decompositions of hyperbolic tetrahedra")
    parser.add_argument("--version", action="version", version=f"coxtet {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    commands.required = True

    commands.add_parser("enumerate", parents=[common], help="list the hyperbolic Coxeter tetrahedra")
    commands.add_parser("volumes", parents=[common], help="volume ratios between catalog entries")

    for name, text in (("search", "first-type decompositions of one fundamental tetrahedron"),
                       ("certify", "search and certify every decomposition geometrically")):
        sub = commands.add_parser(name, parents=[common], help=text)
        target = sub.add_mutually_exclusive_group(required=True)
        target.add_argument("--fundamental", help="H-id, canonical key or diagram text")
        target.add_argument("--family", help="bounded:1-4 or unbounded:1-14")
        sub.add_argument("--shuffle-seed", type=int, default=None,
                         help="visit glue candidates in a shuffled order")

    second = commands.add_parser("second-type", parents=[common], help="second-type case analysis")
    second.add_argument("--bounded-only", action="store_true", help="compact pairs only")

    report = commands.add_parser("report", parents=[common], help="full classification report")
    report.add_argument("--families", default="all",
                        help="comma-separated family names, 'bounded', 'unbounded' or 'all'")
    report.add_argument("--skip-second-type", action="store_true")
    report.add_argument("--skip-certify", action="store_true")
    return parser


def _config(args: argparse.Namespace) -> EngineConfig:
    try:
        return EngineConfig.from_env().with_overrides(
            max_label=args.max_label, max_tiles=args.max_tiles, tol_signature=args.tol_signature,
            tol_volume=args.tol_volume, seed=args.seed, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc))


def _resolve_format(args: argparse.Namespace) -> None:
    if args.format is None:
        suffix = Path(args.out).suffix.lstrip(".") if args.out else ""
        args.format = suffix if suffix in FORMATS else "md"


def _emit(text: str, args: argparse.Namespace) -> None:
    """Write to --out (a file, or a directory receiving <command>.<ext>) or stdout."""
    if args.out is None:
        sys.stdout.write(text)
        return
    target = Path(args.out)
    if target.is_dir() or args.out.endswith(("/", "\\")):
        target.mkdir(parents=True, exist_ok=True)
        target = target / f"{args.command}.{EXTENSIONS[args.format]}"
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
    write_text(text, target)
    logger.info("wrote %s", target)


class Session:
    """Catalog, engine and cache shared by one command."""

    def __init__(self, config: EngineConfig, use_cache: bool = True):
        self.config = config
        self.cache = CacheManager(config, enabled=use_cache)
        self.catalog: CoxeterCatalog = self.cache.catalog()
        self.engine = DecompositionEngine(self.catalog, config)

    def search(self, entry: CatalogEntry, shuffle_seed: Optional[int] = None) -> SearchResult:
        if shuffle_seed is not None:
            return self.engine.search_first_type(entry, shuffle_seed=shuffle_seed)
        return self.cache.search(entry.id, lambda: self.engine.search_first_type(entry), self.catalog)

    def target(self, args: argparse.Namespace):
        """(entry, family seed or None) named by --fundamental or --family."""
        try:
            if args.family:
                seed = family(args.family)
                return self.catalog.lookup(seed.diagram), seed
            return self.catalog.lookup(args.fundamental), None
        except (DomainError, StructuralError) as exc:
            raise UsageError(str(exc))


def show_enumerate(session: Session, args: argparse.Namespace) -> int:
    catalog = session.catalog
    if args.format == "json":
        _emit(dumps(catalog_document(catalog)), args)
    elif args.format == "dot":
        _emit(catalog_dot(catalog), args)
    else:
        text = (f"{len(catalog)} hyperbolic Coxeter tetrahedra "
                f"({len(catalog.compact)} compact, {len(catalog.noncompact)} non-compact)\n\n")
        _emit(text + markdown_table(TableBuilder.catalog_frame(catalog)) + "\n", args)
    return EXIT_OK


def show_volumes(session: Session, args: argparse.Namespace) -> int:
    entries = session.catalog.entries
    ratio, smallest, largest = max_unbounded_ratio(entries)
    frame = TableBuilder.ratio_frame(integral_pairs(entries, session.config.tol_volume))
    if args.format == "json":
        _emit(dumps({"max_unbounded_ratio": ratio, "smallest": smallest.id, "largest": largest.id,
                     "integral_pairs": frame_records(frame)}), args)
    elif args.format == "dot":
        raise UsageError("volumes has no dot output")
    else:
        text = f"Largest non-compact ratio: {ratio:.9f} ({largest.id}/{smallest.id})\n\n"
        _emit(text + markdown_table(frame) + "\n", args)
    return EXIT_OK


def show_search(session: Session, args: argparse.Namespace) -> int:
    entry, seed = session.target(args)
    result = session.search(entry, args.shuffle_seed)
    if args.format == "json":
        _emit(dumps(search_document(result, session.engine, seed)), args)
    elif args.format == "dot":
        _emit(DiagramRenderer.to_dot(entry.diagram, entry.id, tuple(entry.ideal_vertices)), args)
    else:
        _emit(search_markdown(result, seed), args)
    return EXIT_OK


def show_certify(session: Session, args: argparse.Namespace) -> int:
    entry, seed = session.target(args)
    seed = seed or FamilySeed(name=entry.id, diagram=entry.diagram, bounded=entry.compact)
    builder = ReportBuilder(session.catalog, session.engine,
                            search=lambda _, e: session.search(e, args.shuffle_seed))
    section = builder.family_section(seed)
    for d in section.result.decompositions:
        # raises ClassificationError on a third-type decomposition
        session.engine.classify_type(d, section.result.keys)
    document = ReportDocument(catalog=session.catalog, config=session.config, families=[section])
    _emit(document.render(args.format), args)
    failed = document.failed_certificates()
    if failed:
        raise CertificationError(f"{len(failed)} decompositions of {entry.id} fail certification",
                                 counterexample={"keys": [report.key for report in failed]})
    return EXIT_OK


def show_second_type(session: Session, args: argparse.Namespace) -> int:
    analyzer = SecondTypeAnalyzer(session.catalog, session.config, session.engine)
    report = analyzer.analyze(True if args.bounded_only else None)
    document = ReportDocument(catalog=session.catalog, config=session.config, families=[],
                              second_type=report)
    _emit(document.render(args.format), args)
    return EXIT_OK


def _families(text: str) -> List[FamilySeed]:
    text = text.strip().lower()
    if text == "all":
        return list(FAMILIES.values())
    if text in ("bounded", "unbounded"):
        return [seed for name, seed in FAMILIES.items() if name.startswith(text + ":")]
    try:
        return [family(name) for name in text.split(",") if name.strip()]
    except DomainError as exc:
        raise UsageError(str(exc))


def show_report(session: Session, args: argparse.Namespace) -> int:
    seeds = _families(args.families)
    analyzer = None if args.skip_second_type else SecondTypeAnalyzer(session.catalog, session.config,
                                                                      session.engine)
    builder = ReportBuilder(session.catalog, session.engine, analyzer,
                            search=lambda _, entry: session.search(entry))
    document = builder.build(seeds, certify=not args.skip_certify)
    for section in document.families:
        for d in section.result.decompositions:
            session.engine.classify_type(d, section.result.keys)
    _emit(document.render(args.format), args)
    failed = document.failed_certificates()
    if failed:
        raise CertificationError(f"{len(failed)} decompositions fail certification",
                                 counterexample={"keys": [report.key for report in failed]})
    return EXIT_OK


HANDLERS = {
    "enumerate": show_enumerate,
    "volumes": show_volumes,
    "search": show_search,
    "second-type": show_second_type,
    "certify": show_certify,
    "report": show_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _resolve_format(args)
        logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
        session = Session(_config(args), use_cache=not args.no_cache)
        code = HANDLERS[args.command](session, args)
        if session.cache.warnings:
            logger.warning("%d cache documents were ignored and recomputed", session.cache.warnings)
        return code
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ClassificationError, CertificationError) as exc:
        logger.error("classification failed: %s", exc)
        return EXIT_CLASSIFICATION
    except PrecisionError as exc:
        logger.error("precision too low: %s (err %.3g, tol %.3g)", exc, exc.err, exc.tol)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
