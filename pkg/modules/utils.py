"""
Terminal output, logging and file helpers shared by the CLI and the library
"""

import os
import re
import sys
import shutil
import logging
from datetime import datetime
from typing import Dict, Optional

from colorama import Fore, Style, init

import config

# Initialize colorama for Windows support
init(autoreset=True)

RULE = '=' * 60

# ============================================================================
# LOGGING SETUP
# ============================================================================

def _own_handler(handler: logging.Handler, level: int, formatter: logging.Formatter) -> logging.Handler:
    handler.setLevel(level)
    handler.setFormatter(formatter)
    handler._annuflow = True
    return handler


def setup_logging(verbose: bool = False, log_file: Optional[str] = None,
                  level_name: str = config.LOG_LEVEL) -> logging.Logger:
    """
    Configure the root logger for a run

    Handlers installed by an earlier call are replaced, so sweeps and tests can
    call this repeatedly without duplicating output.

    Args:
        verbose: DEBUG level regardless of level_name
        log_file: Optional file receiving the same records as the console
        level_name: Level used when not verbose

    Returns:
        The root logger
    """
    level = logging.DEBUG if verbose else getattr(logging, level_name.upper(), logging.INFO)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                                  datefmt='%Y-%m-%d %H:%M:%S')

    root = logging.getLogger()
    root.setLevel(level)
    for handler in [h for h in root.handlers if getattr(h, '_annuflow', False)]:
        root.removeHandler(handler)
        handler.close()

    root.addHandler(_own_handler(logging.StreamHandler(sys.stdout), level, formatter))
    if log_file:
        root.addHandler(_own_handler(logging.FileHandler(log_file), level, formatter))

    return root

# ============================================================================
# PLOT TOOL
# ============================================================================

def locate_tool(tool_name: str, tool_path: Optional[str] = None) -> Optional[str]:
    """Path of an external tool: the configured path if it exists, else a PATH lookup"""
    if tool_path and os.path.exists(tool_path):
        return tool_path
    return shutil.which(tool_name)


def check_tool_installed(tool_name: str, tool_path: Optional[str] = None) -> bool:
    return locate_tool(tool_name, tool_path) is not None


def print_tool_status(tools_status: Dict[str, bool]):
    """
    Availability table for external renderers of the emitted scripts

    A missing tool is only a warning: scripts are written either way.
    """
    for tool, available in tools_status.items():
        mark = f"{Fore.GREEN}found" if available else f"{Fore.YELLOW}not found"
        print(f"  {tool:15} {mark}{Style.RESET_ALL}")

    missing = sorted(tool for tool, available in tools_status.items() if not available)
    if missing:
        print_warning(f"Plot scripts will be written but not rendered here ({', '.join(missing)})")

# ============================================================================
# TERMINAL OUTPUT
# ============================================================================

_TAGS = {
    'success': (Fore.GREEN, '[✓]'),
    'error': (Fore.RED, '[✗]'),
    'info': (Fore.BLUE, '[i]'),
    'warning': (Fore.YELLOW, '[!]'),
}


def _print_tagged(kind: str, message: str):
    color, tag = _TAGS[kind]
    print(f"{color}{tag} {message}{Style.RESET_ALL}")


def print_banner():
    print(f"\n{Fore.CYAN}{RULE}\n  Annuflow {config.SOLVER_VERSION}\n"
          f"  Oscillatory annular flow, shear-thinning and chemically thickening\n{RULE}{Style.RESET_ALL}\n")


def print_section(title: str):
    print(f"\n{Fore.CYAN}{RULE}\n{title}\n{RULE}{Style.RESET_ALL}\n")


def print_success(message: str):
    _print_tagged('success', message)


def print_error(message: str):
    _print_tagged('error', message)


def print_info(message: str):
    _print_tagged('info', message)


def print_warning(message: str):
    _print_tagged('warning', message)

# ============================================================================
# FILES AND NAMES
# ============================================================================

def ensure_directory(directory: str) -> str:
    """Create directory (and parents) if missing; returns it unchanged"""
    os.makedirs(directory, exist_ok=True)
    return directory


def get_timestamp() -> str:
    """Local time as YYYY-MM-DD HH:MM:SS, used in run manifests"""
    return datetime.now().strftime("%Y-%m-%d %H:%M:%S")


def sanitize_filename(filename: str) -> str:
    """Replace characters that are unsafe in file names (and whitespace) with '_'"""
    return re.sub(r'[<>:"/\\|?*\s]', '_', filename)


def format_cycle(cycle: float) -> str:
    """Cycle count as used in file names: 3.5 -> '3p5', 12 -> '12'"""
    return f"{cycle:g}".replace('.', 'p').replace('-', 'm')
