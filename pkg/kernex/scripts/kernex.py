#!/usr/bin/env python3
"""
Verification runs for the four-variable kernel identity over Q.

Each sub-command runs one family of exact or certified numerical checks and
writes a JSON report. Exit status: 0 all checks passed, 1 a check failed,
2 configuration error, 3 budget exceeded or refused by the library.
"""
import io
import logging
import sys
import argparse
from pathlib import Path

from kernex.arch import UnresolvedOscillationError, WindowFunctionError
from kernex.dot_env import load_env
from kernex.expsum import BACKENDS, BudgetExceededError, PreconditionError
from kernex.geometry import GeometryError
from kernex.global_side import NotGaussianError
from kernex.localzeta import ConvergenceError, PoleError
from kernex.ring import RingError
from kernex.scripts.lib.commands import run
from kernex.scripts.lib.decr_action import Decrement
from kernex.scripts.lib.log import DEFAULT_LEVEL_INDEX, config as log_config, log_set_level
from kernex.scripts.lib.run_config import ConfigError, RunConfig, parse_alpha, parse_complex

logger = logging.getLogger(__file__)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_REFUSED = 0, 1, 2, 3

CONFIG_ERRORS = (
    ConfigError,
    PreconditionError,
    RingError,
    GeometryError,
    WindowFunctionError,
    NotGaussianError,
)
REFUSALS = (BudgetExceededError, UnresolvedOscillationError, ConvergenceError, PoleError)

SUBCOMMANDS = {
    "verify-gauss": "Gaussian sum identity p^{-6n} sum psi(P(b,v)/t) = |t|^3 and stationary phase",
    "verify-twist": "twisted sums against the closed form, zero for non-integral alpha",
    "verify-quadric": "point count of b det T = t1 t2 in P^5(F_p)",
    "verify-localzeta": "local zeta integral, brute force against the closed form",
    "verify-poisson": "Poisson summation on gl2(Z) and the twisted transform constant",
    "compute-is": "archimedean transform I_S with self-convergence and decay probes",
    "geometric-side": "certified partial sums of the geometric side over doubled windows",
    "verify-dirichlet": "pole and residue of the Dirichlet series D(s) at s = -2",
    "verify-structure": "W-preservation, Bruhat reconstruction and relevance",
}


class CustomParser(argparse.ArgumentParser):
    def error(self, message):
        if message:
            logger.error(f"{self.prog}: error: {message}")
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG)

    def print_usage(self, file=None):
        text = io.StringIO()
        self._print_message(self.format_usage(), text)
        self.print_text(text)

    @staticmethod
    def print_text(text):
        text.seek(0)
        for line in text.readlines():
            logger.info(line.rstrip())

    def print_help(self, file=None):
        text = io.StringIO()
        super().print_help(file=text)
        self.print_text(text)


class CustomHelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    def __init__(self, *args, **kwargs):
        kwargs["max_help_position"] = 45
        kwargs["width"] = 1000
        super().__init__(*args, **kwargs)


def _common_options() -> argparse.ArgumentParser:
    """options shared by every sub-command; defaults of None defer to the config file"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", action="store", default=None, help="prime(s), comma separated")
    common.add_argument("--level", action="store", type=int, default=None, help="ring level n")
    common.add_argument(
        "--t-val", dest="t_val", action="store", default=None, help="t valuation(s) m, comma separated"
    )
    common.add_argument("--b", action="store", default=None, help="b as a rational")
    common.add_argument(
        "--alpha", action="store", type=parse_alpha, default=None,
        help="six rationals x11,x12,x21,x22,t1,t2",
    )
    common.add_argument("--s", action="store", type=parse_complex, default=None, help='complex s, "a+bi"')
    common.add_argument("--chi", action="store", default=None, help="chi(p) value(s), comma separated")
    common.add_argument("--conductor", action="store", type=int, default=None, help="ramified character level")
    common.add_argument("--shells", action="store", type=int, default=None, help="local zeta truncation M")
    common.add_argument("--height", action="store", type=int, default=None, help="height bound H")
    common.add_argument("--cmax", action="store", type=int, default=None, help="bound on c")
    common.add_argument("--grid", action="store", type=int, default=None, help="quadrature nodes per T axis")
    common.add_argument("--samples", action="store", type=int, default=None, help="random cases per family")
    common.add_argument("--backend", action="store", choices=BACKENDS, default=None, help="sum backend")
    common.add_argument("--seed", action="store", type=int, default=None, help="sampling seed")
    common.add_argument("--out", action="store", default=None, help="JSON report path")
    common.add_argument("--config", action="store", default=None, help="TOML run configuration")
    common.add_argument("--env", action="store", default=None, help=".env file of KERNEX_* settings")
    common.add_argument("--workers", action="store", type=int, default=None, help="worker processes")
    common.add_argument(
        "-v", "--verbose", dest="verbosity", action="count", default=DEFAULT_LEVEL_INDEX,
        help="more output",
    )
    common.add_argument("-q", "--quiet", dest="verbosity", action=Decrement, help="less output")
    return common


def build_parser() -> CustomParser:
    parser = CustomParser(prog="kernex", description=__doc__, formatter_class=CustomHelpFormatter)
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=CustomParser)
    commands.required = True
    common = _common_options()
    for name, help_text in SUBCOMMANDS.items():
        commands.add_parser(
            name, parents=[common], help=help_text, description=help_text,
            formatter_class=CustomHelpFormatter,
        )
    return parser


OVERRIDES = (
    "p", "level", "t_val", "b", "alpha", "s", "chi", "conductor", "shells", "height",
    "cmax", "grid", "samples", "backend", "seed", "out", "workers",
)


def read_env_file(path: str):
    """merge KERNEX_* settings from a .env file into os.environ; variables already set win"""
    path = Path(path)
    try:
        load_env(path.name, search_path=path.parent, update=True, errors=True)
    except FileNotFoundError:
        raise ConfigError(f"cannot read env file {path}") from None


def main(argv=None) -> int:
    log_config()
    parser = build_parser()
    args = parser.parse_args(argv)
    log_set_level(args.verbosity)

    try:
        if args.env:
            read_env_file(args.env)
        overrides = {name: getattr(args, name) for name in OVERRIDES}
        config = RunConfig.from_sources(args.command, args.config, overrides)
        report = run(config)
    except REFUSALS as exc:
        logger.error(f"{parser.prog} {args.command}: refused: {exc}")
        return EXIT_REFUSED
    except CONFIG_ERRORS as exc:
        logger.error(f"{parser.prog} {args.command}: {exc}")
        return EXIT_CONFIG
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
