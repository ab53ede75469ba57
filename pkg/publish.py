#!/usr/bin/env python3
"""
Release script for cstar-spectra: bump the version, run the release checks,
build, upload and tag.

Usage:
    python publish.py                   # patch bump (0.1.0 -> 0.1.1)
    python publish.py minor             # 0.1.0 -> 0.2.0
    python publish.py 0.3.0             # explicit version
    python publish.py --dry-run         # checks and build only, nothing is written or uploaded
    python publish.py --repository testpypi
"""

import argparse
import importlib.util
import re
import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

ROOT = Path(__file__).parent
PACKAGE = ROOT / "src" / "cstar_spectra"

# Verification suites cheap enough to gate every release
RELEASE_SUITES = ("scalar-boundary", "ex-m2-counterexample", "ex-residual-matrix",
                  "ex-kernel-orthogonality", "ex-star-transfer", "ex-diagonal-unitary")


@dataclass(frozen=True)
class VersionSite:
    path: Path
    pattern: str
    template: str

    def read(self) -> str:
        match = re.search(self.pattern, self.path.read_text(), re.MULTILINE)
        if not match:
            raise SystemExit(f"no version found in {self.path.relative_to(ROOT)}")
        return match.group(1)

    def write(self, version: str):
        text, count = re.subn(self.pattern, self.template.format(version), self.path.read_text(),
                              flags=re.MULTILINE)
        if count != 1:
            raise SystemExit(f"expected one version in {self.path.relative_to(ROOT)}, found {count}")
        self.path.write_text(text)


VERSION_SITES = (
    VersionSite(ROOT / "pyproject.toml", r'^version\s*=\s*"([^"]+)"', 'version = "{}"'),
    VersionSite(PACKAGE / "__init__.py", r'^__version__\s*=\s*"([^"]+)"', '__version__ = "{}"'),
    VersionSite(PACKAGE / "server.py", r'^VERSION\s*=\s*"([^"]+)"', 'VERSION = "{}"'),
)


class Version(NamedTuple):
    major: int
    minor: int
    patch: int

    @classmethod
    def parse(cls, text: str) -> "Version":
        if not re.fullmatch(r"\d+\.\d+\.\d+", text):
            raise SystemExit(f"not a MAJOR.MINOR.PATCH version: {text!r}")
        return cls(*(int(part) for part in text.split(".")))

    def bumped(self, how: str) -> "Version":
        match how:
            case "major":
                return Version(self.major + 1, 0, 0)
            case "minor":
                return Version(self.major, self.minor + 1, 0)
            case "patch":
                return Version(self.major, self.minor, self.patch + 1)
        return Version.parse(how)

    def __str__(self) -> str:
        return f"{self.major}.{self.minor}.{self.patch}"


def sh(*cmd: str, check: bool = True) -> subprocess.CompletedProcess:
    print(f"  $ {' '.join(cmd)}")
    result = subprocess.run(cmd, cwd=ROOT, capture_output=True, text=True)
    if check and result.returncode != 0:
        print(result.stdout[-2000:], result.stderr[-2000:], sep="\n")
        raise SystemExit(f"command failed with exit code {result.returncode}")
    return result


def current_version() -> Version:
    found = {site.read() for site in VERSION_SITES}
    if len(found) != 1:
        raise SystemExit(f"version files disagree: {sorted(found)}")
    return Version.parse(found.pop())


def release_checks(skip_suites: bool):
    """Unit tests, then the fast suites. Any nonzero exit stops the release."""
    print("\nUnit tests")
    sh(sys.executable, "-m", "pytest", "-q", "--ignore=test_mcp_interface.py")
    if skip_suites:
        return
    print("\nVerification suites")
    for suite in RELEASE_SUITES:
        result = sh(sys.executable, "-m", "cstar_spectra", "verify", suite, "--scale", "small", check=False)
        print(f"    {suite}: {'passed' if result.returncode == 0 else f'FAILED (exit {result.returncode})'}")
        if result.returncode != 0:
            raise SystemExit(f"suite {suite} failed; not releasing")


def build():
    dist = ROOT / "dist"
    shutil.rmtree(dist, ignore_errors=True)
    print("\nBuilding sdist and wheel")
    sh(sys.executable, "-m", "build")
    return sorted(dist.iterdir())


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Release cstar-spectra.")
    parser.add_argument("bump", nargs="?", default="patch", help="major, minor, patch or an explicit version")
    parser.add_argument("--dry-run", action="store_true", help="run the checks and build without writing anything")
    parser.add_argument("--skip-suites", action="store_true", help="unit tests only")
    parser.add_argument("--repository", default="pypi", help="twine repository name")
    parser.add_argument("--no-git", action="store_true", help="do not commit, tag or push")
    return parser.parse_args(argv)


def main(argv: list[str] | None = None):
    args = parse_args(sys.argv[1:] if argv is None else argv)
    for module in ("build", "twine", "pytest"):
        if importlib.util.find_spec(module) is None:
            raise SystemExit(f"missing dev dependency '{module}': pip install -e \".[dev]\"")

    old = current_version()
    new = old.bumped(args.bump)
    if new <= old:
        raise SystemExit(f"{new} does not follow {old}")
    print(f"cstar-spectra {old} -> {new}{' (dry run)' if args.dry_run else ''}")

    if not args.no_git and not args.dry_run:
        dirty = [line for line in sh("git", "status", "--porcelain").stdout.splitlines()
                 if not any(str(site.path.relative_to(ROOT)) in line for site in VERSION_SITES)]
        if dirty:
            raise SystemExit("uncommitted changes:\n  " + "\n  ".join(dirty))

    release_checks(args.skip_suites)

    if args.dry_run:
        artifacts = build()
        print("\nDry run built " + ", ".join(a.name for a in artifacts) + " (version files untouched)")
        return

    for site in VERSION_SITES:
        site.write(str(new))
        print(f"  version {new} -> {site.path.relative_to(ROOT)}")
    artifacts = build()

    print(f"\nUploading to {args.repository}")
    upload = sh(sys.executable, "-m", "twine", "upload", "--repository", args.repository,
                *(str(a) for a in artifacts), check=False)
    if upload.returncode != 0:
        print(upload.stderr)
        raise SystemExit("upload failed; the version files are already bumped. "
                         "Configure credentials in ~/.pypirc and rerun twine by hand.")

    if not args.no_git:
        sh("git", "add", *(str(site.path) for site in VERSION_SITES))
        sh("git", "commit", "-m", f"Release {new}")
        sh("git", "tag", f"v{new}")
        if sh("git", "push", "--follow-tags", check=False).returncode != 0:
            print("  push failed; run: git push --follow-tags")

    print(f"\nReleased cstar-spectra {new}")


if __name__ == "__main__":
    main()
