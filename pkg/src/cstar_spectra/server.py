"""
cstar-spectra MCP Server

Exposes the same queries as the command line:
- spectral membership checks with certificates
- verified witness vectors
- the named verification suites
"""

import json
import logging
import os
from typing import Literal

from mcp.server.fastmcp import FastMCP

from .cli import build_witness as _build_witness
from .cli import dumps, error_payload, evaluate
from .errors import SpectraError
from .suites import SUITES
from .suites import run_suite as _run_suite

# Set CSTAR_SPECTRA_DEBUG=1 for oracle ladders and solver traces on stderr
if not os.environ.get("CSTAR_SPECTRA_DEBUG"):
    logging.getLogger("cstar_spectra").setLevel(logging.WARNING)

logger = logging.getLogger(__name__)

# Server version
VERSION = "0.1.0"

# Initialize the MCP server
mcp = FastMCP("cstar-spectra")
mcp._mcp_server.version = VERSION


def _as_document(document: dict | str) -> dict:
    if isinstance(document, str):
        from .cli import read_document
        return read_document(document)
    return document


@mcp.tool()
def version() -> str:
    """
    Get the version of the cstar-spectra MCP server.

    Returns:
        Version string including server name and version number.
    """
    return f"cstar-spectra MCP Server version {VERSION}"


@mcp.tool()
def list_suites() -> str:
    """
    List the verification suites.

    Returns:
        JSON with the suite ids accepted by run_suite().
    """
    return json.dumps({"suites": sorted(SUITES)})


@mcp.tool()
def check_spectrum(document: dict | str) -> str:
    """
    Decide whether an element lies in a generalized spectrum.

    Args:
        document: Query document (object or JSON text) with fields
                  algebra: {"kind": "continuous" | "step" | "matrix", "resolution", "n"},
                  element: expression such as "0.5 + t" or a literal,
                  operator: catalog name (S, S*, V, S~, W', W'', Z, Z', F, D, weighted,
                            diagonal-unitary, diagonal-self-adjoint) or an operator literal,
                  question: full, point, approx, kernel, cokernel, ... (default: full),
                  config: tolerance overrides, cross_check: attach an oracle report.

    Returns:
        JSON verdict with membership (In / Out / BoundaryIndeterminate / Inconclusive),
        the rule used, and its certificate. exit_code mirrors the CLI.
    """
    try:
        payload, code = evaluate(_as_document(document))
    except SpectraError as e:
        return dumps(error_payload(e))
    payload["exit_code"] = code
    return dumps(payload)


@mcp.tool()
def build_witness(document: dict | str) -> str:
    """
    Build a verified witness vector (kernel, cokernel or resolvent solution).

    Args:
        document: Query document, as for check_spectrum.

    Returns:
        JSON certificate with the sparse coordinate table and its verified
        residual or pairing. Returns an error when the rule yields no vector.
    """
    try:
        return dumps(_build_witness(_as_document(document)))
    except SpectraError as e:
        return dumps(error_payload(e))


@mcp.tool()
def run_suite(
    suite: str,
    seed: int = 0,
    scale: Literal["small", "full"] = "small",
) -> str:
    """
    Run a verification suite.

    This tool may be long-running at scale "full".

    Args:
        suite: Suite id (see list_suites)
        seed: Seed for the random panels
        scale: "small" (resolution 32, reduced panels) or "full"

    Returns:
        JSON with cases run and failures; each failure carries the query
        document that reproduces it.
    """
    try:
        result = _run_suite(suite, seed, scale)
    except SpectraError as e:
        return dumps(error_payload(e))
    return dumps(result.to_dict())
