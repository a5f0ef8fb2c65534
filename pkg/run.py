#!/usr/bin/env python3
"""Development task runner for slhvb_lab.

Usage:
    python run.py clean          - Remove build artifacts and results/
    python run.py build          - Build the package
    python run.py install        - Install dev dependencies
    python run.py test           - Run the whole test suite
    python run.py quick          - Run the tests, skipping slow scenarios
    python run.py lint           - Run flake8 + black + isort checks
    python run.py docs           - Build the documentation site
    python run.py scenarios      - Run every named scenario into results/
"""
import argparse
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).parent.resolve()
SOURCES = ["slhvb_lab", "tests"]
SCENARIOS = [
    "offline-sim-synthetic",
    "cold-vs-warm",
    "slope-check",
    "worst-case-demo",
    "did-demo",
]


def _poetry(*args):
    """Run poetry with the given arguments, stopping on failure."""
    result = subprocess.run(["poetry", *args], cwd=ROOT)
    if result.returncode != 0:
        sys.exit(result.returncode)


def _banner(msg: str):
    print("\n" + "=" * 60)
    print(f"  {msg}")
    print("=" * 60)


def cmd_clean():
    """Remove build artifacts and scenario output."""
    _banner("Cleaning build artifacts...")
    for target in ["dist", "build", "site", "results"]:
        p = ROOT / target
        if p.exists():
            shutil.rmtree(p)
            print(f"  Removed {target}/")
    for egg in ROOT.glob("*.egg-info"):
        shutil.rmtree(egg)
        print(f"  Removed {egg.name}/")
    print("✅ Clean complete.")


def cmd_build():
    cmd_clean()
    _banner("Building package...")
    _poetry("build")
    print("✅ Build complete.")


def cmd_install():
    _banner("Installing dependencies...")
    _poetry("install", "--with", "dev")
    print("✅ Dependencies installed.")


def cmd_test():
    _banner("Running tests...")
    _poetry("run", "pytest")


def cmd_quick():
    _banner("Running fast tests...")
    _poetry("run", "pytest", "-m", "not slow")


def cmd_lint():
    _banner("Running linters...")
    _poetry("run", "flake8", *SOURCES)
    _poetry("run", "black", "--check", *SOURCES)
    _poetry("run", "isort", "--check-only", *SOURCES)
    print("✅ Lint passed.")


def cmd_docs():
    _banner("Building docs...")
    _poetry("run", "mkdocs", "build", "--strict")
    print("✅ Docs built in site/")


def cmd_scenarios():
    """Run every scenario at its preset scale. Takes a while."""
    for name in SCENARIOS:
        _banner(f"Scenario {name}")
        _poetry("run", "slhvb_lab", "-v", "scenario", name, "--out-dir", "results")


COMMANDS = {
    "clean": cmd_clean,
    "build": cmd_build,
    "install": cmd_install,
    "test": cmd_test,
    "quick": cmd_quick,
    "lint": cmd_lint,
    "docs": cmd_docs,
    "scenarios": cmd_scenarios,
}


def main():
    parser = argparse.ArgumentParser(
        description="Development task runner for slhvb_lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument("command", choices=list(COMMANDS), help="Task to run")
    args = parser.parse_args()
    COMMANDS[args.command]()


if __name__ == "__main__":
    main()
