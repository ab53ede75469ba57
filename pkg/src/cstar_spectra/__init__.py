"""
cstar-spectra

Generalized spectra of operators on Hilbert C*-modules over C([0,1]),
L-infinity and M_n: closed-form membership rules with verified witnesses,
a finite-section oracle, and an MCP server.
"""

__version__ = "0.1.0"


def main():
    """Main entry point for the CLI."""
    import sys

    args = sys.argv[1:]

    # Handle top-level flags before importing numpy and scipy
    if args[:1] in (["--help"], ["-h"]):
        print_help()
        sys.exit(0)

    if args[:1] in (["--version"], ["-V"]):
        print(f"cstar-spectra {__version__}")
        sys.exit(0)

    if args[:1] == ["--show-config"]:
        sys.exit(show_config())

    # Default: run the MCP server
    if not args:
        from .server import mcp
        mcp.run()
        return

    from .cli import run
    sys.exit(run(args))


def print_help():
    """Print help message."""
    print(f"""cstar-spectra {__version__}

Generalized spectra of operators on Hilbert C*-modules.

Usage:
    cstar-spectra                          Run the MCP server
    cstar-spectra check DOCUMENT           Decide spectral membership
    cstar-spectra witness DOCUMENT         Emit a verified witness vector
    cstar-spectra verify SUITE             Run a verification suite
    cstar-spectra oracle-dump DOCUMENT     CSV of the finite-section ladder
    cstar-spectra serve                    Run the MCP server (same as no arguments)
    cstar-spectra --show-config            Show current configuration
    cstar-spectra --version                Show version
    cstar-spectra --help                   Show this help

    DOCUMENT is a JSON file, '-' for stdin, or inline JSON. Inline flags:
        --operator S --element "0.5 + t" --question full --kind step --resolution 64

Exit codes:
    0 Out, 1 In, 2 boundary/inconclusive, 10+ errors (see README)

Configuration:
    Environment variables CSTAR_SPECTRA_EQ_TOL, CSTAR_SPECTRA_BOUNDARY_BAND,
    CSTAR_SPECTRA_ORACLE_SV_TOL, CSTAR_SPECTRA_TRUNCATION; then the config file
    ~/.config/cstar-spectra/config.json; then --config FILE.

    Set CSTAR_SPECTRA_DEBUG=1 for debug logging on stderr.

MCP client setup:
    claude mcp add --scope user cstar-spectra uvx cstar-spectra
""")


def show_config() -> int:
    """Show current configuration."""
    from .config import get_config_file, get_config_source, load_config
    from .errors import ConfigError

    print("Configuration")
    print("=" * 50)
    print()
    print(f"Config file: {get_config_file()}")
    print()

    try:
        config = load_config()
    except ConfigError as e:
        print(f"Invalid configuration: {e}")
        return e.code

    sources = get_config_source()
    for key, value in config.to_dict().items():
        print(f"{key}: {value}")
        print(f"  Source: {sources.get(key, 'default')}")
    return 0
