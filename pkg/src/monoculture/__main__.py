"""Allow `python -m monoculture` as an alias for the console script."""

import sys

from monoculture.cli import main

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
