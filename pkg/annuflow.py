"""
Annuflow - annular flow of a shear-thinning, chemically-thickening fluid
Main application entry point
"""

import sys
import glob
import argparse
import logging
import os
from typing import List, Optional

# Import configuration
import config

# Import modules
from modules.utils import (
    setup_logging, check_tool_installed, print_tool_status,
    print_banner, print_section, print_success, print_error, print_info, print_warning,
    ensure_directory, sanitize_filename
)
from modules.config_loader import load_config
from modules.errors import (
    AnnuflowError, ConfigError, DomainError, IntegrationAborted, NewtonDivergence,
    ParameterError, SingularityError
)
from modules.constitutive import ModelKind
from modules.report_generator import generate_comparison, generate_reports, generate_verification_reports
from modules.simulation import StudyRunner, max_workers_from_env, run_many, run_models
from modules.verification import print_check, print_report, run_verification

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3
EXIT_INTERRUPTED = 130

# ============================================================================
# MAIN ORCHESTRATOR
# ============================================================================

class Annuflow:
    """Command dispatcher: run, verify and sweep"""

    def __init__(self, args):
        """
        Initialize the application

        Args:
            args: Parsed command-line arguments
        """
        self.args = args
        self.output_dir = args.out
        self.verbose = args.verbose

        # Setup logging
        self.logger = setup_logging(self.verbose, config.LOG_FILE, config.LOG_LEVEL)

    def run(self) -> int:
        """Execute the selected command and return its exit code"""
        print_banner()

        if self.args.command == 'run':
            if self.args.models:
                return self.compare_models(self.args.config, self.args.models)
            return self.run_study(self.args.config)
        if self.args.command == 'verify':
            return self.verify()
        return self.sweep(self.args.pattern)

    def _check_plot_tool(self):
        print_section("Tool Check")
        print_tool_status({config.PLOT_TOOL: check_tool_installed(config.PLOT_TOOL, config.PLOT_TOOL_PATH)})

    def _report(self, result, output_dir: str):
        ensure_directory(output_dir)
        manifest = generate_reports(result, output_dir)
        print_success("Outputs written:")
        for entry in manifest.snapshot_files:
            print_info(f"  cycle {entry['cycle']:g}: {entry['path']}")
        print_info(f"  centerline: {manifest.centerline_file}")
        print_info(f"  plot script: {manifest.plot_script}")
        return manifest

    def _compare(self, results, manifests, name: str):
        paths = generate_comparison(results, manifests, self.output_dir, name)
        print_info(f"  comparison table: {paths['table']}")
        print_info(f"  comparison script: {paths['plot_script']}")

    def run_study(self, config_path: str) -> int:
        """Run one study file and write its outputs"""
        print_section(f"Study: {config_path}")
        study = load_config(config_path)
        runner = StudyRunner(study)
        print_info(f"Model: {study.model.kind.value}, N = {study.n_nodes}, cycles = {list(study.cycles)}")

        self._check_plot_tool()

        print_section("Integration")
        try:
            result = runner.run()
        except IntegrationAborted as e:
            print_error(f"Integration aborted: {e}")
            if e.partial is not None:
                print_warning("Writing partial results")
                self._report(e.partial, self.output_dir)
            return EXIT_NUMERICAL

        stats = result.stats
        print_success(f"Reached cycle {max(study.cycles):g} in {result.wall_clock:.2f}s "
                      f"({stats['accepted_steps']} steps, {stats['rejected_steps']} rejected)")

        print_section("Writing Outputs")
        self._report(result, self.output_dir)
        return EXIT_OK

    def compare_models(self, config_path: str, model_names: List[str]) -> int:
        """Run one study file once per viscosity model and write a comparison of the runs"""
        kinds = [ModelKind.parse(name) for name in model_names]
        print_section(f"Model comparison: {config_path}")
        study = load_config(config_path)
        print_info(f"Models: {', '.join(kind.value for kind in kinds)}, N = {study.n_nodes}, "
                   f"cycles = {list(study.cycles)}")

        self._check_plot_tool()

        print_section("Integration")
        results = list(run_models(study, kinds, max_workers_from_env()).values())
        print_success(f"{len(results)} runs finished")

        print_section("Writing Outputs")
        manifests = [self._report(result, os.path.join(self.output_dir, sanitize_filename(result.config.name)))
                     for result in results]
        self._compare(results, manifests, study.name)
        return EXIT_OK

    def verify(self) -> int:
        """Run the acceptance suite"""
        mode = "fast" if self.args.fast else "full"
        print_section(f"Acceptance Suite ({mode})")
        report = run_verification(fast=self.args.fast, select=self.args.only, progress=print_check)
        print_report(report)

        manifest = generate_verification_reports(report, ensure_directory(self.output_dir), self.args.only)
        base = os.path.join(self.output_dir, config.MANIFEST_FILENAME_FORMAT.format(name=manifest.name))
        print_info(f"Acceptance manifest: {base}.json")
        if report.passed:
            print_success("All checks passed")
            return EXIT_OK
        print_error("Verification failed")
        return EXIT_NUMERICAL

    def sweep(self, pattern: str) -> int:
        """Run every study file matching a glob, each into its own output directory"""
        paths = sorted(glob.glob(pattern))
        if not paths:
            raise ConfigError(f"no study files match '{pattern}'")

        print_section(f"Sweep: {len(paths)} studies")
        studies = [load_config(path) for path in paths]
        self._check_plot_tool()

        workers = max_workers_from_env()
        print_info(f"Running on up to {workers} workers")
        results = run_many(studies, max_workers=workers)

        print_section("Writing Outputs")
        manifests = [self._report(result, os.path.join(self.output_dir, sanitize_filename(result.config.name)))
                     for result in results]
        if len(results) > 1:
            self._compare(results, manifests, "sweep")
        print_success(f"Sweep complete: {len(results)} studies")
        return EXIT_OK

# ============================================================================
# CLI INTERFACE
# ============================================================================

def parse_arguments(argv: Optional[List[str]] = None):
    """Parse command-line arguments"""

    parser = argparse.ArgumentParser(
        description='Annular flow solver for shear-thinning, chemically-thickening fluids',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  %(prog)s run studies/model1_no_gradient.cfg
  %(prog)s run studies/model2a_gradient.cfg --out ./results/gradient
  %(prog)s run studies/model1_no_gradient.cfg --models model1 model2a model2b newtonian
  %(prog)s verify --fast
  %(prog)s sweep "studies/*.cfg" -v

Environment:
  ANNUFLOW_THREADS caps the number of studies run in parallel.
        '''
    )

    # Options shared by every subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '-o', '--out',
        default=config.OUTPUT_DIR,
        help=f'Output directory (default: {config.OUTPUT_DIR})'
    )

    common.add_argument(
        '-v', '--verbose',
        action='store_true',
        help='Enable verbose output for debugging'
    )

    subparsers = parser.add_subparsers(dest='command', required=True)

    run_parser = subparsers.add_parser('run', parents=[common], help='Run one study file')
    run_parser.add_argument('config', help='Study configuration file')
    run_parser.add_argument(
        '--models',
        nargs='+',
        metavar='MODEL',
        help='Run the study once per viscosity model and compare the runs'
    )

    verify_parser = subparsers.add_parser('verify', parents=[common], help='Run the acceptance suite')
    verify_parser.add_argument(
        '--fast',
        action='store_true',
        help='Only checks on grids of at most 101 nodes'
    )
    verify_parser.add_argument(
        '--only',
        nargs='+',
        metavar='CHECK',
        help='Run only the named checks'
    )

    sweep_parser = subparsers.add_parser('sweep', parents=[common], help='Run every study file matching a glob')
    sweep_parser.add_argument('pattern', help='Glob of study files (quote it)')

    return parser.parse_args(argv)

# ============================================================================
# MAIN ENTRY POINT
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""

    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG

    try:
        app = Annuflow(args)
        return app.run()

    except KeyboardInterrupt:
        print("\n\n[!] Run interrupted by user")
        return EXIT_INTERRUPTED

    except (ConfigError, ParameterError) as e:
        print_error(f"Configuration error: {e}")
        return EXIT_CONFIG

    except (IntegrationAborted, NewtonDivergence, SingularityError, DomainError) as e:
        print_error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL

    except OSError as e:
        print_error(f"I/O error: {e}")
        return EXIT_IO

    except AnnuflowError as e:
        print_error(f"Error: {e}")
        logging.error("Solver error", exc_info=True)
        return EXIT_NUMERICAL

if __name__ == '__main__':
    sys.exit(main())
