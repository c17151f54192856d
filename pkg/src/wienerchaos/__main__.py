"""Allow `python -m wienerchaos`."""

import sys

from .cli import main

sys.exit(main())
