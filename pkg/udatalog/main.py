"""
Command line entry point.
"""
import sys

from udatalog.cli.commands import run_batch


def main() -> None:
    sys.exit(run_batch())


if __name__ == "__main__":
    main()
