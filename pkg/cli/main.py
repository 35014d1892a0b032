"""
Командная строка лаборатории: loggas <подкоманда> --config <путь> [--seed S] [--workers W] [--out DIR]
"""

from typing import List, Optional
import argparse
import logging
import time

import sys
from pathlib import Path

# Добавляем корневую директорию в путь
sys.path.append(str(Path(__file__).parent.parent))

from models import ExperimentKind, LogGasError, ConfigParseError, Verdict
from settings import ConfigLoader
from records import RecordManager, ReportBuilder
from records.record_manager import LOG_FILE
from experiments import ExperimentRunner, WorkerPool

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3
EXIT_CONFIG = 64
EXIT_NO_INPUT = 66
EXIT_RUNTIME = 70

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def exit_code(verdict: Verdict) -> int:
    """Код возврата по сводному вердикту"""
    return {Verdict.PASS: EXIT_PASS, Verdict.FAIL: EXIT_FAIL}.get(verdict, EXIT_INCONCLUSIVE)


def build_parser() -> argparse.ArgumentParser:
    """Парсер с подкомандой на каждый вид эксперимента и report"""
    parser = argparse.ArgumentParser(prog="loggas", description="Numerical laboratory for the repulsive log gas")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    for kind in ExperimentKind:
        sub = subparsers.add_parser(kind.value, parents=[common], help=f"run a {kind.value} experiment")
        sub.add_argument("--config", type=Path, help="experiment file (.toml or .json); defaults if omitted")
        sub.add_argument("--seed", type=int, help="root seed override")
        sub.add_argument("--workers", type=int, help="worker pool size override")
        sub.add_argument("--out", help="output directory override")
        sub.add_argument("--dump", action="store_true", help="write trajectory snapshots")

    report = subparsers.add_parser("report", parents=[common], help="consolidate records in a directory")
    report.add_argument("directory", type=Path, help="output directory to scan")
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def run_experiment(args: argparse.Namespace) -> int:
    """
    Загрузка конфигурации, прогон и запись артефактов

    Args:
        args: Разобранные аргументы подкоманды

    Returns:
        Код возврата
    """
    try:
        config = ConfigLoader().load(args.config, kind=args.command, seed=args.seed, workers=args.workers,
                                     output_dir=args.out)
    except ConfigParseError as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    record_manager = RecordManager()
    directory = record_manager.prepare_directory(config)
    handler = logging.FileHandler(directory / LOG_FILE, mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    root.addHandler(handler)
    try:
        started = time.perf_counter()
        with WorkerPool(config.workers) as pool:
            runner = ExperimentRunner(config, pool, dump=args.dump)
            outcome = runner.run()
        record = record_manager.write_record(directory, config, runner.kernel, outcome.tables, outcome.summary,
                                             outcome.verdicts, time.perf_counter() - started)
        print(record_manager.render_text(record), end="")
        return exit_code(record.overall())
    except LogGasError as e:
        logger.error(f"{config.kind.value} failed: {type(e).__name__}: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        logger.exception(f"{config.kind.value} failed unexpectedly: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        root.removeHandler(handler)
        handler.close()


def run_report(args: argparse.Namespace) -> int:
    """Сводный отчет; пустой каталог дает 66, пропущенные записи дают 3"""
    directory = args.directory
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return EXIT_NO_INPUT
    builder = ReportBuilder()
    try:
        report, skipped = builder.build_report(directory)
    except LogGasError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    if report["records"] == 0 and not skipped:
        print(f"error: no records under {directory}", file=sys.stderr)
        return EXIT_NO_INPUT
    path = builder.write_report(report, directory)
    print(f"report: {path} ({report['records']} records, overall {report['overall']})")
    if skipped:
        return EXIT_INCONCLUSIVE
    return exit_code(Verdict(report["overall"]))


def main(argv: Optional[List[str]] = None) -> int:
    """Точка входа консольного скрипта loggas"""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    if args.command == "report":
        return run_report(args)
    return run_experiment(args)


if __name__ == "__main__":
    sys.exit(main())
