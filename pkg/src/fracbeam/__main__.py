"""Module entry point: python -m fracbeam <subcommand> ..."""

import sys

from fracbeam.experiment_cli import main

if __name__ == "__main__":
    sys.exit(main())
