#!/usr/bin/env python3
"""
Test suite for the cstar-spectra MCP server via the MCP protocol

This tests the server through its actual MCP interface using stdio transport,
verifying that the MCP layer works correctly in addition to the underlying functions.

Usage:
    source ./devsetup.sh
    python test_mcp_interface.py
"""

import sys

from testrunner import TestRunner

try:
    import anyio
except ImportError:
    print("Error: anyio not found")
    print()
    print("Set up the development environment first:")
    print("    source ./devsetup.sh")
    sys.exit(1)

try:
    from mcp import ClientSession
    from mcp.client.stdio import StdioServerParameters, stdio_client
except ImportError as e:
    print(f"Error: {e}")
    print()
    print("Set up the development environment first:")
    print("    source ./devsetup.sh")
    sys.exit(1)

import os
import time
from pathlib import Path

EXPECTED_TOOLS = {"version", "list_suites", "check_spectrum", "build_witness", "run_suite"}
SMALL = {"kind": "continuous", "resolution": 5}


def extract_text(result) -> str:
    """Extract text content from MCP CallToolResult."""
    if result.content:
        for content in result.content:
            if hasattr(content, "text"):
                return content.text
    return ""


async def run_mcp_tests(runner: TestRunner, session: ClientSession):
    """Run all tests via MCP interface."""

    # =========================================================================
    # MCP Protocol Tests
    # =========================================================================
    runner.section("MCP Protocol - Tool Discovery")

    tools_result = await session.list_tools()
    tools = tools_result.tools
    tool_names = {t.name for t in tools}

    runner.test("list_tools returns tools", len(tools) > 0)
    for name in sorted(EXPECTED_TOOLS):
        runner.test(f"{name} tool exists", name in tool_names)
    runner.test("exactly 5 tools exposed", len(tools) == 5, f"Found {len(tools)} tools")

    for tool in tools:
        if tool.name == "check_spectrum":
            runner.test("check_spectrum has document parameter",
                        "document" in tool.inputSchema.get("properties", {}))
        if tool.name == "run_suite":
            properties = tool.inputSchema.get("properties", {})
            runner.test("run_suite has suite, seed and scale parameters",
                        {"suite", "seed", "scale"} <= set(properties))

    # =========================================================================
    # version / list_suites
    # =========================================================================
    runner.section("version and list_suites via MCP")

    result = await session.call_tool("version", {})
    runner.test("version names the server", "cstar-spectra" in extract_text(result))

    result = await session.call_tool("list_suites", {})
    runner.test_json("list_suites returns the suite ids", extract_text(result), {
        "has suites": lambda d: "suites" in d,
        "includes scalar-boundary": lambda d: "scalar-boundary" in d["suites"],
        "includes ex-m2-counterexample": lambda d: "ex-m2-counterexample" in d["suites"],
        "has 18 suites": lambda d: len(d["suites"]) == 18,
    })

    # =========================================================================
    # check_spectrum
    # =========================================================================
    runner.section("check_spectrum via MCP")

    result = await session.call_tool("check_spectrum", {"document": {"element": "0.5", "algebra": SMALL}})
    runner.test_json("0.5 is in sigma(S)", extract_text(result), {
        "membership In": lambda d: d["membership"] == "In",
        "exit_code 1": lambda d: d["exit_code"] == 1,
        "cokernel certificate": lambda d: d["certificate"]["kind"] == "CokernelWitness",
    })

    result = await session.call_tool("check_spectrum", {
        "document": '{"element": "2 + t", "algebra": {"kind": "continuous", "resolution": 5}}',
    })
    runner.test_json("JSON text documents are accepted", extract_text(result), {
        "membership Out": lambda d: d["membership"] == "Out",
        "exit_code 0": lambda d: d["exit_code"] == 0,
    })

    result = await session.call_tool("check_spectrum", {
        "document": {"element": {"matrix": [[2, 0], [0, 0.5]]}, "algebra": {"kind": "matrix", "n": 2}},
    })
    runner.test_json("matrix algebras route to the M_n rule", extract_text(result), {
        "membership In": lambda d: d["membership"] == "In",
        "rule": lambda d: d["rule"] == "mn-shift:inverse-powers",
    })

    result = await session.call_tool("check_spectrum", {"document": {"element": "t +", "algebra": SMALL}})
    runner.test_json("parse errors come back as errors", extract_text(result), {
        "has error": lambda d: "error" in d,
        "parse_error kind": lambda d: d["error"]["kind"] == "parse_error",
    })

    result = await session.call_tool("check_spectrum", {"document": "{oops"})
    runner.test_json("malformed documents come back as errors", extract_text(result), {
        "has error": lambda d: "error" in d,
        "has position": lambda d: d["error"]["position"] == 1,
    })

    # =========================================================================
    # build_witness
    # =========================================================================
    runner.section("build_witness via MCP")

    result = await session.call_tool("build_witness", {
        "document": {"element": "0.5", "operator": "Z", "algebra": SMALL},
    })
    runner.test_json("Z at 0.5 yields a kernel witness", extract_text(result), {
        "kernel certificate": lambda d: d["certificate"]["kind"] == "KernelWitness",
        "has vector": lambda d: "vector" in d["certificate"],
        "small residual": lambda d: d["certificate"]["residual"] <= 1e-8,
    })

    result = await session.call_tool("build_witness", {"document": {"element": "3", "algebra": SMALL}})
    runner.test_json("outside points have no witness", extract_text(result), {
        "has error": lambda d: "error" in d,
        "not_applicable kind": lambda d: d["error"]["kind"] == "not_applicable",
    })

    # =========================================================================
    # run_suite
    # =========================================================================
    runner.section("run_suite via MCP")

    result = await session.call_tool("run_suite", {"suite": "ex-m2-counterexample"})
    runner.test_json("the M_2 counterexample suite passes", extract_text(result), {
        "passed": lambda d: d["passed"] is True,
        "ran cases": lambda d: d["cases"] > 0,
        "small scale": lambda d: d["scale"] == "small",
    })

    result = await session.call_tool("run_suite", {"suite": "nope"})
    runner.test_json("unknown suites come back as errors", extract_text(result), {
        "has error": lambda d: "error" in d,
        "unknown_suite kind": lambda d: d["error"]["kind"] == "unknown_suite",
        "lists known suites": lambda d: "scalar-boundary" in d["error"]["known"],
    })


async def main_async():
    runner = TestRunner()

    print("\n" + "=" * 60)
    print("  CSTAR-SPECTRA MCP SERVER - MCP INTERFACE TEST SUITE")
    print("=" * 60)

    start_time = time.time()

    # Run the package as a module; no arguments starts the MCP server
    server_params = StdioServerParameters(
        command=sys.executable,
        args=["-m", "cstar_spectra"],
        cwd=str(Path(__file__).parent),
    )

    print("\nConnecting to MCP server via stdio...")

    with open(os.devnull, "w") as devnull:
        async with stdio_client(server_params, errlog=devnull) as (read_stream, write_stream):
            async with ClientSession(read_stream, write_stream) as session:
                init_result = await session.initialize()
                server_version = init_result.serverInfo.version
                print(f"Connected to: {init_result.serverInfo.name} v{server_version}")

                runner.section("MCP Connection")
                runner.test("server initialized", True)
                runner.test(
                    "server name is 'cstar-spectra'",
                    init_result.serverInfo.name == "cstar-spectra",
                    f"Got '{init_result.serverInfo.name}'",
                )
                runner.test(
                    "server version is set",
                    server_version is not None and server_version != "",
                    f"Got '{server_version}'",
                )

                await run_mcp_tests(runner, session)

    elapsed = time.time() - start_time

    all_passed = runner.summary()

    print(f"\nCompleted in {elapsed:.1f} seconds")

    return all_passed


def test_mcp_interface():
    assert anyio.run(main_async)


def main():
    result = anyio.run(main_async)
    sys.exit(0 if result else 1)


if __name__ == "__main__":
    main()
