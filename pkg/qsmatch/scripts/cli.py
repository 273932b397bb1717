"""
Command-line access to qsmatch. Each sub-command reads a market file (see qsmatch.market_file):

    qsm stable market.txt
    qsm mech market.txt --mechanism quantile:1/2
    qsm check-om market.txt --mechanism quantile:1/1 --doctor d1 --truth "x1>x2" --report "x1"
    qsm certify market.txt --mechanism da:doctors --property sp
    qsm theorem1 --k 2 --q 1/1 --out theorem1.txt

Exit codes: 0 success or negative finding, 2 positive finding (manipulation, obvious manipulation or
certification failure), 1 usage or parse error, 3 budget exceeded.
"""
import sys
import json
import logging
import argparse
from dataclasses import dataclass

from ..common import QsmException, DEFAULT_BUDGET, DEFAULT_WORKERS, format_outcome
from ..log import LOGGER, set_level
from ..market import Market, assigned_contract
from ..market_file import MarketFile, load_market, parse_ranking, serialize_market
from ..stability import enumerate_stable
from ..mechanisms import Mechanism, apply_mechanism, parse_quantile
from ..analysis import QsmAnalyzer, AnalysisConfig, Property, QsmBudgetException
from ..counterexample import theorem1_market
from ..report import verdict_text, verdict_record, certificate_text, certificate_record

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FOUND = 2
EXIT_BUDGET = 3


class QsmUsageException(QsmException):
    """Represents invalid command-line arguments"""


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved here for positive findings
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    """Everything a single command needs, as parsed from the command line"""
    command: str
    market_path: str | None = None
    mechanism: str | None = None
    q: str | None = None
    k: int | None = None
    doctor: str | None = None
    truth: str | None = None
    report: str | None = None
    prop: str = "nom"
    budget: int = DEFAULT_BUDGET
    workers: int = DEFAULT_WORKERS
    fmt: str = "text"
    out: str | None = None

    def __post_init__(self):
        if self.q is not None:
            parse_quantile(self.q)
        if self.budget < 1:
            raise QsmUsageException(f"--budget must be at least 1 (got {self.budget})")
        if self.workers < 1:
            raise QsmUsageException(f"--workers must be at least 1 (got {self.workers})")

    @property
    def analysis_config(self) -> AnalysisConfig:
        return AnalysisConfig(budget=self.budget, workers=self.workers)

    def get_mechanism(self) -> Mechanism:
        """--mechanism descriptor, where a bare 'quantile' (or no mechanism at all) takes its level from --q"""
        if self.mechanism in (None, "quantile"):
            if self.q is None:
                raise QsmUsageException("Either --mechanism or --q is required")
            return Mechanism.quantile(self.q)
        if self.q is not None:
            raise QsmUsageException("--q only applies to quantile mechanisms")
        return Mechanism.parse(self.mechanism)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="qsm", description="Stable allocations, quantile stable mechanisms and "
                                                     "obvious manipulations in matching markets with contracts")
    parser.add_argument("--verbose", action="store_true", help="log progress and search statistics")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_command(name: str, help_text: str, with_market: bool = True) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text)
        if with_market:
            sub.add_argument("market_path", metavar="market-file", help="market description file")
        sub.add_argument("--format", dest="fmt", choices=["text", "record"], default="text")
        sub.add_argument("--out", default=None, help="write the output to this file instead of stdout")
        return sub

    def add_search_options(sub: argparse.ArgumentParser):
        sub.add_argument("--mechanism", default=None,
                         help="quantile:<num>/<den> | median | interior | da:doctors | da:hospitals")
        sub.add_argument("--q", default=None, help="quantile level num/den (for quantile mechanisms)")
        sub.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="maximal mechanism evaluations")
        sub.add_argument("--workers", type=int, default=DEFAULT_WORKERS, help="worker processes")

    add_command("stable", "list every stable allocation of the market's profile")
    sub = add_command("mech", "apply a mechanism to the market's profile")
    add_search_options(sub)
    sub = add_command("check-om", "test a report for (obvious) manipulation")
    add_search_options(sub)
    sub.add_argument("--doctor", required=True)
    sub.add_argument("--truth", default=None, help="true ranking, e.g. 'x1>x2' (default: from the market file)")
    sub.add_argument("--report", required=True, help="reported ranking ('' for nothing acceptable)")
    sub = add_command("certify", "exhaustively certify NOM or strategy-proofness")
    add_search_options(sub)
    sub.add_argument("--property", dest="prop", choices=["nom", "sp"], default="nom")
    sub = add_command("theorem1", "generate and check the obvious manipulation market for (k, q)",
                      with_market=False)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--q", required=True)
    sub.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sub.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    return parser


class Output:
    """Collects output lines and writes them to --out or stdout"""
    def __init__(self, config: RunConfig):
        self.config = config
        self.lines = []

    def __call__(self, text: str):
        self.lines.append(text)

    def flush(self):
        text = "\n".join(self.lines) + "\n"
        if self.config.out:
            with open(self.config.out, "w") as fp:
                fp.write(text)
        else:
            sys.stdout.write(text)


def _load_with_profile(config: RunConfig) -> MarketFile:
    market_file = load_market(config.market_path)
    market = market_file.market
    if market_file.profile is None and not market.contracts:
        # Without contracts there is only one profile
        return MarketFile(market, market.profile({d: () for d in market.doctors}))
    if market_file.profile is None:
        raise QsmUsageException(f"{config.market_path} has no 'doctor' lines (a full profile is required)")
    return market_file


def cmd_stable(config: RunConfig, output: Output) -> int:
    market_file = _load_with_profile(config)
    market = market_file.market
    stable_set = enumerate_stable(market_file.profile, market)
    if config.fmt == "record":
        output(json.dumps({"allocations": [market.ordered_ids(y) for y in stable_set], "k": stable_set.k}))
    else:
        for allocation in stable_set:
            output(market.format_allocation(allocation))
        output(f"k={stable_set.k}")
    return EXIT_OK


def cmd_mech(config: RunConfig, output: Output) -> int:
    mechanism = config.get_mechanism()
    market_file = _load_with_profile(config)
    market = market_file.market
    allocation = apply_mechanism(mechanism, market_file.profile, market)
    if config.fmt == "record":
        output(json.dumps({"mechanism": mechanism.descriptor,
                           "allocation": market.ordered_ids(allocation),
                           "assignment": {d: assigned_contract(allocation, d) for d in market.doctors}}))
    else:
        output(f"{mechanism.descriptor}: {market.format_allocation(allocation)}")
        for d in market.doctors:
            output(f"{d}:{format_outcome(assigned_contract(allocation, d))}")
    return EXIT_OK


def _check_doctor(market: Market, doctor: str):
    if doctor not in market.doctors:
        raise QsmUsageException(f"Unknown doctor {doctor!r} (doctors: {' '.join(market.doctors)})")


def cmd_check_om(config: RunConfig, output: Output) -> int:
    mechanism = config.get_mechanism()
    market_file = load_market(config.market_path)
    market = market_file.market
    _check_doctor(market, config.doctor)
    if config.truth is not None:
        truth = parse_ranking(market, config.doctor, config.truth)
    elif market_file.profile is not None:
        truth = market_file.profile.of(config.doctor)
    else:
        raise QsmUsageException("--truth is required when the market file has no doctor lines")
    report = parse_ranking(market, config.doctor, config.report)
    if report == truth:
        raise QsmUsageException("The report must differ from the truth")
    verdict = QsmAnalyzer(mechanism, market, config.analysis_config).is_obvious_manipulation(
        config.doctor, truth, report)
    output(verdict_record(verdict) if config.fmt == "record" else
           f"mechanism: {mechanism.descriptor}\n{verdict_text(verdict)}")
    return EXIT_FOUND if verdict.is_obvious else EXIT_OK


def cmd_certify(config: RunConfig, output: Output) -> int:
    mechanism = config.get_mechanism()
    market = load_market(config.market_path).market
    certificate = QsmAnalyzer(mechanism, market, config.analysis_config).certify(Property(config.prop))
    output(certificate_record(certificate) if config.fmt == "record" else certificate_text(certificate))
    return EXIT_OK if certificate.passed else EXIT_FOUND


def cmd_theorem1(config: RunConfig, output: Output) -> int:
    instance = theorem1_market(config.k, config.q)
    mechanism = Mechanism.quantile(instance.q)
    market_text = serialize_market(instance.market, instance.profile)
    if config.out:
        # The market goes to --out, the analysis to stdout
        with open(config.out, "w") as fp:
            fp.write(market_text)
        LOGGER.info(f"Wrote the generated market to {config.out!r}")
        config.out = None
    else:
        output(market_text.rstrip("\n"))
    analyzer = QsmAnalyzer(mechanism, instance.market, config.analysis_config)
    verdict = analyzer.is_obvious_manipulation("d1", instance.truth, instance.report)
    certificate = analyzer.certify(Property.NOM)
    if config.fmt == "record":
        output(verdict_record(verdict))
        output(certificate_record(certificate))
    else:
        output(f"mechanism: {mechanism.descriptor}")
        output(f"O(P1) = {verdict.truth_options}")
        output(f"O(P1') = {verdict.report_options}")
        output(f"condition: {verdict.condition.value}")
        output(f"obvious manipulation: {'yes' if verdict.is_obvious else 'no'}")
        output(certificate_text(certificate))
    return EXIT_FOUND if verdict.is_obvious and not certificate.passed else EXIT_OK


COMMANDS = {
    "stable": cmd_stable,
    "mech": cmd_mech,
    "check-om": cmd_check_om,
    "certify": cmd_certify,
    "theorem1": cmd_theorem1,
}


def run(argv: list[str] | None = None) -> int:
    """
    Parse the arguments and run a single command.

    @return: the process exit code
    """
    args = vars(build_parser().parse_args(argv))
    verbose = args.pop("verbose")
    set_level(logging.DEBUG if verbose else logging.WARNING)
    try:
        config = RunConfig(**args)
        output = Output(config)
        rc = COMMANDS[config.command](config, output)
        output.flush()
        return rc
    except QsmBudgetException as e:
        print(f"Budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (QsmException, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run())

if __name__ == "__main__":
    main()
