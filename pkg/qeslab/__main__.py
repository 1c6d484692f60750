#!/usr/bin/env python3

"Exact spectra, separation and conformance checks for ES/QES operators on spheres."

import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import qeslab
from qeslab import report
from qeslab.diffop import specialize
from qeslab.models import EuclidStage, build_L_chain, build_euclid, build_qes_sphere
from qeslab.repspace import joint_eigenbasis, matrix_rep, spectrum
from qeslab.separation import completeness, solve_all
from qeslab.verify import (
    SuiteOptions,
    contraction_probes,
    convergence_orders,
    exit_status,
    run_suite,
    show,
)

_logger = logging.getLogger(__name__)

def config_document(config: qeslab.Config) -> Dict[str, Any]:
    "The parameters a report was computed from."

    document: Dict[str, Any] = {
        "k": config.k,
        "n": config.n,
        "precision": config.precision,
        "space": config.space,
    }
    if config.space == "sphere":
        p = config.sphere_params()
        document.update(gammas=[show(g) for g in p.gammas], a=show(p.a))
    else:
        e = config.euclid_params()
        document.update(gammas=[show(g) for g in e.gammas], omega=show(e.omega),
                        b=show(e.b))
    return document

def handle_spectrum(config: qeslab.Config) -> int:
    "Handle the spectrum subcommand."

    if config.space == "sphere":
        p = config.sphere_params()
        op = build_qes_sphere(p)
        lines = spectrum(matrix_rep(op, p.n, p.k), config.precision)
        joint = joint_eigenbasis(build_L_chain(p) + [op], p.n, p.k, config.precision) \
            if p.n > 1 else []
    else:
        e = config.euclid_params()
        lines = spectrum(matrix_rep(build_euclid(e, EuclidStage.H_HAT_QES), e.n, e.k),
                         config.precision)
        joint = []
    _logger.info("%d spectral lines on P_%d", len(lines), config.k)
    report.write(report.spectrum_document(lines, config_document(config), joint,
                                          config.precision), config.format, config.out)
    return 0

def suite_options(config: qeslab.Config) -> SuiteOptions:
    "Suite options; explicit model parameters replace the random draws."

    sphere = None
    euclid = None
    if config.explicit_params():
        if config.space == "sphere":
            sphere = config.sphere_params()
        else:
            euclid = config.euclid_params()
    return SuiteOptions(
        n=config.n,
        k=config.k,
        seed=config.seed,
        draws=config.draws,
        epsilons=config.epsilons,
        precision=config.precision,
        sphere=sphere,
        euclid=euclid,
    )

def handle_verify(config: qeslab.Config) -> int:
    "Handle the verify subcommand."

    items = run_suite(config.suite, suite_options(config))
    document = report.items_document(items, dict(config_document(config), suite=config.suite,
                                                 seed=config.seed, draws=config.draws))
    report.write(document, config.format, config.out)
    return exit_status(items)

def handle_separate(config: qeslab.Config) -> int:
    "Handle the separate subcommand."

    if config.space != "sphere":
        raise qeslab.ConfigError("separation runs on the sphere family")
    if config.n < 2:
        raise qeslab.ConfigError(f"separation needs n >= 2, got n={config.n}")
    p = config.sphere_params()
    solutions = solve_all(p, config.precision)
    check = completeness(p, solutions, config.precision)
    if not check.complete:
        _logger.warning("separated blocks disagree with the joint eigenspaces: %s",
                        check.mismatches)
    report.write(report.chains_document(solutions, check, config_document(config),
                                        config.precision), config.format, config.out)
    return 0

def handle_contract(config: qeslab.Config) -> int:
    "Handle the contract subcommand."

    if config.space != "euclid":
        raise qeslab.ConfigError("contraction takes Euclidean parameters (--space euclid)")
    e = config.euclid_params()
    (op, probes) = contraction_probes(e, config.epsilons)
    limit = matrix_rep(specialize(op, {"eps": 0}), e.n, e.k).matrix.to_list()
    target = matrix_rep(build_euclid(e, EuclidStage.H_HAT_QES), e.n, e.k).matrix.to_list()
    document = report.contraction_document(probes, convergence_orders(probes), limit == target,
                                           dict(config_document(config),
                                                epsilons=[show(x) for x in config.epsilons]))
    report.write(document, config.format, config.out)
    return 0

def handle_help(_config: qeslab.Config) -> int:
    "Handle the help subcommand."

    prefs = qeslab.Prefs()
    for line in (
            "qeslab - exact ES/QES spectra on the n-sphere and Euclidean space",
            "",
            "USAGE:",
            "    qeslab [OPTIONS] [SUBCOMMAND]",
            "",
            "OPTIONS:",
            "    -h, --help",
            "        Print usage information",
            "    -v, --verbose",
            "        Log progress (twice for debug output)",
            "    -o, --out <PATH>",
            "        Write the report to a file instead of stdout",
            "    --space <sphere|euclid>",
            f"        Model family (default: {prefs.space})",
            "    --n <N>",
            "        Dimension (default: 1)",
            "    --k <K>",
            "        Degree bound of the invariant polynomial space (default: 0)",
            "    --gamma <G1,G2,...>",
            "        Comma-separated rationals: n+1 for the sphere, n for euclid (default: zeros)",
            "    --a <RATIONAL>",
            "        Sphere QES coupling (default: 0)",
            "    --omega <RATIONAL>, --b <RATIONAL>",
            "        Euclidean frequency and QES coupling (default: 1 and 0)",
            "    --precision <BITS>",
            f"        Isolating interval width for irrational roots (default: {prefs.precision})",
            "    --seed <INT>",
            f"        Seed of the conformance parameter draws (default: {prefs.seed})",
            "    --format <json|csv>",
            f"        Report format (default: {prefs.format})",
            "    --suite <NAME>",
            "        Conformance suite: integrals, algebra, gauge, radial, contraction,",
            "        closedforms, geometry or all (default: all)",
            "    --prefs <PATH>",
            "        Preferences file (default: ~/.config/qeslab/prefs.yaml)",
            "",
            "SUBCOMMANDS:",
            "    contract    Probe the sphere-to-Euclidean contraction",
            "    help        Print usage information",
            "    separate    Solve every separation chain and cross-check completeness",
            "    spectrum    Exact spectrum of the QES operator on P_k",
            "    verify      Run the conformance suite",
    ):
        print(line, file=sys.stderr)
    return 0

def main(argv: Optional[List[str]] = None) -> int:
    "Main entrypoint."

    argv = argv if argv is not None else sys.argv
    try:
        # Get user preferences
        explicit = qeslab.config.prefs_path(argv)
        prefs_path = (explicit or Path("~/.config/qeslab/prefs.yaml")).expanduser()
        if explicit is not None and not prefs_path.is_file():
            raise qeslab.ConfigError(f"prefs file not found: {prefs_path}")
        prefs = qeslab.Prefs.from_yaml_file(prefs_path) if prefs_path.is_file() else None

        # Get configuration from command-line arguments
        config = qeslab.Config.from_argv(argv, prefs=prefs)
        logging.basicConfig(
            level=(logging.WARNING, logging.INFO)[config.verbosity] if config.verbosity < 2
            else logging.DEBUG,
            format="%(levelname)s %(name)s: %(message)s",
        )

        # Dispatch subcommand handler
        return {
            qeslab.Subcommand.CONTRACT: handle_contract,
            qeslab.Subcommand.HELP: handle_help,
            qeslab.Subcommand.SEPARATE: handle_separate,
            qeslab.Subcommand.SPECTRUM: handle_spectrum,
            qeslab.Subcommand.VERIFY: handle_verify,
        }[config.subcommand](config)
    except qeslab.ConfigError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    except qeslab.DomainError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 3
    except qeslab.Error as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 1

if __name__ == "__main__":
    sys.exit(main())
